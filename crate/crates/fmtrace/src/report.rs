//! Export of computed tables to JSON and CSV.

use std::io;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::mellin::LineGrid;
use crate::symbol::{compute_symbol, even_odd_eigenvalues, spectral_norm, SymbolFamily};

/// One evaluation point of a symbol family, with the matrix split into real
/// and imaginary parts and the parity eigenvalue attached.
#[derive(Clone, Debug, Serialize)]
pub struct SymbolTableEntry {
    pub zeta_re: f64,
    pub zeta_im: f64,
    pub matrix_re: Vec<Vec<f64>>,
    pub matrix_im: Vec<Vec<f64>>,
    pub even_eigenvalue_re: f64,
    pub even_eigenvalue_im: f64,
}

/// Evaluates `symbol` at every requested point.  An empty request is
/// legitimate and yields an empty table.
pub fn symbol_table(symbol: &SymbolFamily, zetas: &[Complex64]) -> Result<Vec<SymbolTableEntry>> {
    let dim = symbol.dim();
    let mut entries = Vec::with_capacity(zetas.len());
    for &zeta in zetas {
        let matrix = compute_symbol(symbol, zeta)?;
        let (even, _) = even_odd_eigenvalues(&matrix)?;
        let mut matrix_re = vec![vec![0.0; dim]; dim];
        let mut matrix_im = vec![vec![0.0; dim]; dim];
        for r in 0..dim {
            for c in 0..dim {
                matrix_re[r][c] = matrix[r * dim + c].re;
                matrix_im[r][c] = matrix[r * dim + c].im;
            }
        }
        entries.push(SymbolTableEntry {
            zeta_re: zeta.re,
            zeta_im: zeta.im,
            matrix_re,
            matrix_im,
            even_eigenvalue_re: even.re,
            even_eigenvalue_im: even.im,
        });
    }
    Ok(entries)
}

/// Spectral norms along the contour Re ζ = γ, as (ϱ, norm) rows.
pub fn norm_profile(
    symbol: &SymbolFamily,
    gamma: f64,
    rhos: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let dim = symbol.dim();
    rhos.iter()
        .map(|&rho| {
            let matrix = compute_symbol(symbol, Complex64::new(gamma, rho))?;
            Ok((rho, spectral_norm(&matrix, dim)))
        })
        .collect()
}

/// Evenly spaced contour points covering a line grid, for norm profiles.
pub fn contour_rhos(line: &LineGrid, count: usize) -> Vec<f64> {
    let (lo, hi) = line.bounds();
    if count < 2 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Writes rows of real numbers as CSV under a header line.
pub fn write_csv<W: io::Write>(
    out: &mut W,
    headers: &[&str],
    rows: &[Vec<f64>],
) -> io::Result<()> {
    writeln!(out, "{}", headers.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Writes a complex matrix row-major, each entry as a re,im pair of columns.
pub fn write_complex_matrix_csv<W: io::Write>(
    out: &mut W,
    matrix: &[Vec<Complex64>],
) -> io::Result<()> {
    let cols = matrix.first().map_or(0, Vec::len);
    let headers: Vec<String> = (0..cols)
        .flat_map(|c| [format!("re_{c}"), format!("im_{c}")])
        .collect();
    writeln!(out, "{}", headers.join(","))?;
    for row in matrix {
        let cells: Vec<String> = row.iter().flat_map(|z| [format!("{}", z.re), format!("{}", z.im)]).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
