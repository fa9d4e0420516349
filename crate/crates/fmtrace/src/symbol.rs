//! Operator family K(t) on the dual sphere and its Mellin symbol K̂(ζ):
//! construction, strip arithmetic, and the analyticity/decay verifications
//! that certify the symbol of the reduced trace.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::error::{CalculusError, Result};
use crate::mellin::{mellin_line_table, mellin_of_samples, LineGrid, LogGrid, Strip};
use crate::sphere::sphere_quadrature;
use crate::trace::{DualKernel, SobolevWeights};

/// K(t) matrix over the sphere nodes:
/// M[i][j] = t^{s−m−n/2} · b⁰(t·ω_i, ω_j) · w_j (row-major).
pub fn kernel_family(
    kernel: &DualKernel,
    weights: SobolevWeights,
    nodes: &[Vec<f64>],
    quad_weights: &[f64],
    t: f64,
) -> Result<Vec<Complex64>> {
    if !(t > 0.0) {
        return Err(CalculusError::Domain(format!("kernel family needs t > 0, got {t}")));
    }
    let n = 2.0 * weights.nu as f64;
    let power = t.powf(weights.s - weights.m - n / 2.0);
    let count = nodes.len();
    let mut out = Vec::with_capacity(count * count);
    for omega in nodes {
        let scaled: Vec<f64> = omega.iter().map(|v| t * v).collect();
        for (omega_src, w) in nodes.iter().zip(quad_weights) {
            out.push(power * w * kernel.b0(&scaled, omega_src)?);
        }
    }
    Ok(out)
}

/// K(t) precomputed on every node of a log grid.
pub struct SphereOperatorFamily {
    pub weights: SobolevWeights,
    pub nodes: Vec<Vec<f64>>,
    pub quad_weights: Vec<f64>,
    log_grid: LogGrid,
    /// samples[k] is the row-major matrix at t = log_grid.node(k).
    samples: Vec<Vec<Complex64>>,
    /// entry_alias[e] = index of the first entry with identical samples;
    /// Mellin transforms are shared between aliased entries.
    entry_alias: Vec<usize>,
}

impl SphereOperatorFamily {
    /// Tabulates K(t) over the log grid. `sub_nodes` is the node count for
    /// S¹ (ignored for S⁰).
    pub fn new(
        kernel: &DualKernel,
        weights: SobolevWeights,
        sub_nodes: usize,
        log_grid: LogGrid,
    ) -> Result<Self> {
        let (nodes, quad_weights) = sphere_quadrature(weights.nu - 1, sub_nodes)?;
        let mut samples = Vec::with_capacity(log_grid.len());
        for k in 0..log_grid.len() {
            samples.push(kernel_family(kernel, weights, &nodes, &quad_weights, log_grid.node(k))?);
        }
        let dim = nodes.len();
        let mut entry_alias = vec![0usize; dim * dim];
        for e in 0..dim * dim {
            let mut alias = e;
            for prior in 0..e {
                if samples.iter().all(|m| m[prior] == m[e]) {
                    alias = prior;
                    break;
                }
            }
            entry_alias[e] = alias;
        }
        Ok(Self { weights, nodes, quad_weights, log_grid, samples, entry_alias })
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn log_grid(&self) -> &LogGrid {
        &self.log_grid
    }

    /// Samples of one matrix entry along the log grid.
    fn entry_samples(&self, e: usize) -> Vec<Complex64> {
        self.samples.iter().map(|m| m[e]).collect()
    }
}

type CustomSymbol = Arc<dyn Fn(Complex64) -> Vec<Complex64> + Send + Sync>;

enum Backend {
    Sampled(SphereOperatorFamily),
    Custom { f: CustomSymbol, dim: usize },
}

/// Precomputed per-entry Mellin values along a weight line.
pub struct LineTable {
    pub gamma: f64,
    pub line: LineGrid,
    /// tables[e][k] = K̂(γ+iϱ_k)[e].
    tables: Vec<Arc<Vec<Complex64>>>,
    dim: usize,
}

impl LineTable {
    /// Matrix at line node k (row-major).
    pub fn matrix_at(&self, k: usize) -> Vec<Complex64> {
        self.tables.iter().map(|t| t[k]).collect()
    }

    pub fn entry(&self, e: usize) -> &[Complex64] {
        &self.tables[e]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// The symbol ζ ↦ K̂(ζ) with its analyticity strip, a per-ζ cache, and a
/// weight-line table for bulk application.
pub struct SymbolFamily {
    backend: Backend,
    strip: Strip,
    cache: Mutex<HashMap<(u64, u64), Arc<Vec<Complex64>>>>,
    line_cache: Mutex<Option<Arc<LineTable>>>,
}

impl SymbolFamily {
    pub fn from_family(family: SphereOperatorFamily) -> Self {
        let strip = analyticity_strip(family.weights);
        Self {
            backend: Backend::Sampled(family),
            strip,
            cache: Mutex::new(HashMap::new()),
            line_cache: Mutex::new(None),
        }
    }

    /// ζ-independent matrix symbol (analytic everywhere; strip unrestricted).
    pub fn constant(matrix: Vec<Complex64>, dim: usize) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(CalculusError::Contract(format!(
                "constant symbol needs a {dim}x{dim} matrix"
            )));
        }
        Ok(Self::custom(Arc::new(move |_| matrix.clone()), dim, Strip {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }))
    }

    /// Closed-form symbol with a caller-declared strip (test injection point).
    pub fn custom(f: CustomSymbol, dim: usize, strip: Strip) -> Self {
        Self {
            backend: Backend::Custom { f, dim },
            strip,
            cache: Mutex::new(HashMap::new()),
            line_cache: Mutex::new(None),
        }
    }

    pub fn strip(&self) -> Strip {
        self.strip
    }

    pub fn dim(&self) -> usize {
        match &self.backend {
            Backend::Sampled(f) => f.dim(),
            Backend::Custom { dim, .. } => *dim,
        }
    }

    /// Per-entry Mellin tables on the weight line Re(ζ) = γ, computed once
    /// and reused until a different line is requested.
    pub fn line_table(&self, gamma: f64, line: &LineGrid) -> Result<Arc<LineTable>> {
        if !self.strip.contains(gamma) {
            return Err(CalculusError::Divergence(format!(
                "weight line γ = {gamma} outside the strip ({}, {})",
                self.strip.lo, self.strip.hi
            )));
        }
        let mut cache = self.line_cache.lock().unwrap();
        if let Some(table) = cache.as_ref() {
            if table.gamma == gamma && table.line == *line {
                return Ok(table.clone());
            }
        }
        let dim = self.dim();
        let tables: Vec<Arc<Vec<Complex64>>> = match &self.backend {
            Backend::Sampled(family) => {
                let mut unique: HashMap<usize, Arc<Vec<Complex64>>> = HashMap::new();
                let mut out = Vec::with_capacity(dim * dim);
                for e in 0..dim * dim {
                    let alias = family.entry_alias[e];
                    let table = unique
                        .entry(alias)
                        .or_insert_with(|| {
                            Arc::new(mellin_line_table(
                                &family.entry_samples(alias),
                                &family.log_grid,
                                gamma,
                                line,
                            ))
                        })
                        .clone();
                    out.push(table);
                }
                out
            }
            Backend::Custom { f, .. } => {
                let mut per_entry = vec![Vec::with_capacity(line.len()); dim * dim];
                for &rho in line.rhos() {
                    let m = f(Complex64::new(gamma, rho));
                    for (e, v) in m.into_iter().enumerate() {
                        per_entry[e].push(v);
                    }
                }
                per_entry.into_iter().map(Arc::new).collect()
            }
        };
        let table = Arc::new(LineTable { gamma, line: line.clone(), tables, dim });
        *cache = Some(table.clone());
        Ok(table)
    }
}

/// K̂(ζ): entrywise Mellin transform of the family, cached per ζ.
pub fn compute_symbol(symbol: &SymbolFamily, zeta: Complex64) -> Result<Arc<Vec<Complex64>>> {
    if !symbol.strip.contains(zeta.re) {
        return Err(CalculusError::Divergence(format!(
            "Re(ζ) = {} outside the analyticity strip ({}, {})",
            zeta.re, symbol.strip.lo, symbol.strip.hi
        )));
    }
    let key = (zeta.re.to_bits(), zeta.im.to_bits());
    if let Some(hit) = symbol.cache.lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let matrix = match &symbol.backend {
        Backend::Sampled(family) => {
            let dim = family.dim();
            let mut unique: HashMap<usize, Complex64> = HashMap::new();
            let mut out = Vec::with_capacity(dim * dim);
            for e in 0..dim * dim {
                let alias = family.entry_alias[e];
                let v = *unique.entry(alias).or_insert_with(|| {
                    mellin_of_samples(&family.entry_samples(alias), &family.log_grid, zeta)
                });
                out.push(v);
            }
            out
        }
        Backend::Custom { f, .. } => f(zeta),
    };
    let matrix = Arc::new(matrix);
    symbol.cache.lock().unwrap().insert(key, matrix.clone());
    Ok(matrix)
}

/// The analyticity strip (−s+m+n/2, −s+n/2) of the symbol; nonempty iff
/// m < 0, and the weight line γ = n/4 lies inside whenever the Sobolev
/// invariants hold.
pub fn analyticity_strip(weights: SobolevWeights) -> Strip {
    let half_n = weights.nu as f64;
    Strip { lo: -weights.s + weights.m + half_n, hi: -weights.s + half_n }
}

fn frobenius(m: &[Complex64]) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn spectral_norm(matrix: &[Complex64], dim: usize) -> f64 {
    if matrix.iter().all(|v| *v == Complex64::ZERO) {
        return 0.0;
    }
    let m = nalgebra::DMatrix::from_row_slice(dim, dim, matrix);
    m.svd(false, false).singular_values.max()
}

/// Eigenvalues on the parity eigenvectors (1,±1)/√2 of a 2-node sphere
/// matrix: (even, odd). For kernels even in both arguments the odd value is 0.
pub fn even_odd_eigenvalues(matrix: &[Complex64]) -> Result<(Complex64, Complex64)> {
    if matrix.len() != 4 {
        return Err(CalculusError::Unsupported(
            "parity eigenvalues are defined for the 2-node sphere".into(),
        ));
    }
    let even = (matrix[0] + matrix[1] + matrix[2] + matrix[3]) / 2.0;
    let odd = (matrix[0] - matrix[1] - matrix[2] + matrix[3]) / 2.0;
    Ok((even, odd))
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ProbeResult {
    pub zeta_re: f64,
    pub zeta_im: f64,
    pub residual: f64,
    pub pass: bool,
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct AnalyticityReport {
    pub fd_step: f64,
    pub probes: Vec<ProbeResult>,
    pub pass: bool,
}

pub const CR_RESIDUAL_TOL: f64 = 1e-4;

/// Cauchy–Riemann check ‖∂K̂/∂ρ + i·∂K̂/∂ϱ‖ / ‖K̂‖ ≤ 1e-4 by central
/// differences at each probe; probes whose stencil leaves the strip are
/// skipped with a notice.
pub fn verify_analyticity(
    symbol: &SymbolFamily,
    probes: &[Complex64],
    fd_step: f64,
) -> Result<AnalyticityReport> {
    if !(fd_step > 0.0) {
        return Err(CalculusError::Contract(format!("fd_step must be positive, got {fd_step}")));
    }
    let mut results = Vec::with_capacity(probes.len());
    let mut pass = true;
    for &zeta in probes {
        if !symbol.strip.contains(zeta.re - fd_step) || !symbol.strip.contains(zeta.re + fd_step) {
            pass = false;
            results.push(ProbeResult {
                zeta_re: zeta.re,
                zeta_im: zeta.im,
                residual: f64::NAN,
                pass: false,
                skipped: Some(format!(
                    "stencil ζ ± {fd_step} leaves the strip ({}, {})",
                    symbol.strip.lo, symbol.strip.hi
                )),
            });
            continue;
        }
        let h = fd_step;
        let right = compute_symbol(symbol, zeta + Complex64::new(h, 0.0))?;
        let left = compute_symbol(symbol, zeta - Complex64::new(h, 0.0))?;
        let up = compute_symbol(symbol, zeta + Complex64::new(0.0, h))?;
        let down = compute_symbol(symbol, zeta - Complex64::new(0.0, h))?;
        let center = compute_symbol(symbol, zeta)?;
        let residual_matrix: Vec<Complex64> = right
            .iter()
            .zip(left.iter())
            .zip(up.iter().zip(down.iter()))
            .map(|((r, l), (u, d))| (r - l) / (2.0 * h) + Complex64::i() * (u - d) / (2.0 * h))
            .collect();
        let denom = frobenius(&center).max(1e-300);
        let residual = frobenius(&residual_matrix) / denom;
        let ok = residual <= CR_RESIDUAL_TOL;
        pass &= ok;
        results.push(ProbeResult {
            zeta_re: zeta.re,
            zeta_im: zeta.im,
            residual,
            pass: ok,
            skipped: None,
        });
    }
    Ok(AnalyticityReport { fd_step, probes: results, pass })
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct DecayReport {
    pub gamma: f64,
    pub rhos: Vec<f64>,
    pub norms: Vec<f64>,
    pub final_over_initial: f64,
    pub eventually_decreasing: bool,
    pub pass: bool,
}

pub const DECAY_RATIO_TOL: f64 = 0.05;

/// Spectral-norm decay of K̂(γ+iϱ) along increasing ϱ samples: pass iff the
/// norms decrease monotonically past their maximum and the final norm is at
/// most 0.05 of the initial one.
pub fn verify_decay(
    symbol: &SymbolFamily,
    gamma: f64,
    rho_samples: &[f64],
) -> Result<DecayReport> {
    if rho_samples.len() < 2 || rho_samples.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CalculusError::Contract(
            "decay check needs at least two strictly increasing ϱ samples".into(),
        ));
    }
    let dim = symbol.dim();
    let mut norms = Vec::with_capacity(rho_samples.len());
    for &rho in rho_samples {
        let m = compute_symbol(symbol, Complex64::new(gamma, rho))?;
        norms.push(spectral_norm(&m, dim));
    }
    let peak = norms
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let eventually_decreasing =
        norms[peak..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let initial = norms[0];
    let last = *norms.last().unwrap();
    let final_over_initial = if initial == 0.0 { 0.0 } else { last / initial };
    let pass = eventually_decreasing && last <= DECAY_RATIO_TOL * initial;
    Ok(DecayReport {
        gamma,
        rhos: rho_samples.to_vec(),
        norms,
        final_over_initial,
        eventually_decreasing,
        pass,
    })
}

/// §4 torus-rotation closed form for the even eigenvalue of K̂:
/// π / cos(π(ζ+s)/2). Reference oracle for tests and the CLI example.
pub fn rotation_symbol_closed_form(zeta: Complex64, s: f64) -> Complex64 {
    let arg = std::f64::consts::PI / 2.0 * (zeta + s);
    std::f64::consts::PI / arg.cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry;
    use approx::assert_relative_eq;

    fn rotation_family() -> SphereOperatorFamily {
        let kernel = DualKernel::from_spec(registry::torus_rotation());
        let weights = SobolevWeights::new(-0.5, -2.0, 1).unwrap();
        SphereOperatorFamily::new(&kernel, weights, 16, LogGrid::default_grid()).unwrap()
    }

    #[test]
    fn family_matches_closed_form_matrix() {
        let kernel = DualKernel::from_spec(registry::torus_rotation());
        let weights = SobolevWeights::new(-0.5, -2.0, 1).unwrap();
        let (nodes, qw) = sphere_quadrature(0, 0).unwrap();
        for t in [0.1, 0.5, 1.0, 3.0, 40.0] {
            let m = kernel_family(&kernel, weights, &nodes, &qw, t).unwrap();
            let want = t.sqrt() / (1.0 + t * t);
            for v in &m {
                assert_relative_eq!(v.re, want, max_relative = 1e-12);
                assert!(v.im.abs() < 1e-15);
            }
        }
        assert!(kernel_family(&kernel, weights, &nodes, &qw, 0.0).is_err());
        assert!(kernel_family(&kernel, weights, &nodes, &qw, -1.0).is_err());
    }

    #[test]
    fn zero_kernel_gives_zero_family_and_symbol() {
        let weights = SobolevWeights::new(-0.5, -2.0, 1).unwrap();
        let (nodes, qw) = sphere_quadrature(0, 0).unwrap();
        let m = kernel_family(&DualKernel::zero(), weights, &nodes, &qw, 2.0).unwrap();
        assert!(m.iter().all(|v| *v == Complex64::ZERO));

        let family =
            SphereOperatorFamily::new(&DualKernel::zero(), weights, 0, LogGrid::default_grid())
                .unwrap();
        let symbol = SymbolFamily::from_family(family);
        let k = compute_symbol(&symbol, Complex64::new(0.5, 1.0)).unwrap();
        assert!(k.iter().all(|v| *v == Complex64::ZERO));
    }

    #[test]
    fn rotation_symbol_matches_quadrature_oracle() {
        let symbol = SymbolFamily::from_family(rotation_family());
        // Independent oracle: the closed form evaluated directly.
        for rho in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let zeta = Complex64::new(0.5, rho);
            let m = compute_symbol(&symbol, zeta).unwrap();
            let (even, odd) = even_odd_eigenvalues(&m).unwrap();
            let want = rotation_symbol_closed_form(zeta, -0.5);
            assert!(
                (even - want).norm() <= 1e-6 * want.norm(),
                "ϱ = {rho}: {even} vs {want}"
            );
            assert!(odd.norm() <= 1e-12, "odd eigenvalue {odd} at ϱ = {rho}");
        }
    }

    #[test]
    fn symbol_special_values() {
        let symbol = SymbolFamily::from_family(rotation_family());
        // ζ = 1/2: even eigenvalue π.
        let m = compute_symbol(&symbol, Complex64::new(0.5, 0.0)).unwrap();
        let (even, _) = even_odd_eigenvalues(&m).unwrap();
        assert!((even.re - std::f64::consts::PI).abs() <= 1e-6);
        assert!(even.im.abs() <= 1e-9);
        // ζ = 1/2 + 2i: π/cosh(π).
        let m = compute_symbol(&symbol, Complex64::new(0.5, 2.0)).unwrap();
        let (even, _) = even_odd_eigenvalues(&m).unwrap();
        let want = std::f64::consts::PI / std::f64::consts::PI.cosh();
        assert!((even.re - want).abs() <= 1e-6 * want);
    }

    #[test]
    fn strip_arithmetic() {
        let w = SobolevWeights::new(-0.5, -2.0, 1).unwrap();
        let strip = analyticity_strip(w);
        assert_relative_eq!(strip.lo, -0.5);
        assert_relative_eq!(strip.hi, 1.5);
        assert!(strip.contains(0.5));

        // Deeper m widens the strip to the left only.
        let w2 = SobolevWeights::new(-0.5, -3.0, 1).unwrap();
        let s2 = analyticity_strip(w2);
        assert_relative_eq!(s2.lo, -1.5);
        assert_relative_eq!(s2.hi, 1.5);

        // γ = n/4 inside, for any valid weights.
        for (s, m) in [(-0.25, -1.5), (-0.9, -2.5), (-2.0, -4.0)] {
            let w = SobolevWeights::new(s, m, 1).unwrap();
            let strip = analyticity_strip(w);
            assert!(strip.contains(0.5), "γ outside strip for s={s}, m={m}");
        }
    }

    #[test]
    fn out_of_strip_is_divergence() {
        let symbol = SymbolFamily::from_family(rotation_family());
        for re in [-0.5, 1.5, -0.7, 2.0] {
            assert!(matches!(
                compute_symbol(&symbol, Complex64::new(re, 0.0)),
                Err(CalculusError::Divergence(_))
            ));
        }
    }

    #[test]
    fn symbol_cache_returns_identical_values() {
        let symbol = SymbolFamily::from_family(rotation_family());
        let zeta = Complex64::new(0.7, 1.3);
        let a = compute_symbol(&symbol, zeta).unwrap();
        let b = compute_symbol(&symbol, zeta).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn analyticity_of_the_rotation_symbol() {
        let symbol = SymbolFamily::from_family(rotation_family());
        let probes: Vec<Complex64> = [0.3, 0.5, 1.0]
            .iter()
            .flat_map(|&re| [Complex64::new(re, 0.0), Complex64::new(re, 1.0)])
            .collect();
        let report = verify_analyticity(&symbol, &probes, 1e-3).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.probes.len(), 6);
        assert!(report.probes.iter().all(|p| p.skipped.is_none()));
    }

    #[test]
    fn constant_symbol_has_zero_residual() {
        let m = vec![Complex64::new(2.0, 1.0); 4];
        let symbol = SymbolFamily::constant(m, 2).unwrap();
        let report =
            verify_analyticity(&symbol, &[Complex64::new(0.5, 0.0)], 1e-3).unwrap();
        assert!(report.pass);
        assert_eq!(report.probes[0].residual, 0.0);
    }

    #[test]
    fn modulus_symbol_fails_cauchy_riemann() {
        let f: CustomSymbol = Arc::new(|zeta| vec![Complex64::new(zeta.norm(), 0.0); 4]);
        let symbol = SymbolFamily::custom(f, 2, Strip { lo: 0.0, hi: 2.0 });
        let report = verify_analyticity(&symbol, &[Complex64::new(1.0, 0.0)], 1e-3).unwrap();
        assert!(!report.pass);
        assert!(report.probes[0].residual > 0.5);
    }

    #[test]
    fn stencil_leaving_strip_is_skipped() {
        let symbol = SymbolFamily::from_family(rotation_family());
        let report =
            verify_analyticity(&symbol, &[Complex64::new(-0.4999, 0.0)], 1e-3).unwrap();
        assert!(report.probes[0].skipped.is_some());
        assert!(!report.pass);
    }

    #[test]
    fn decay_along_the_weight_line() {
        let symbol = SymbolFamily::from_family(rotation_family());
        let rhos: Vec<f64> = (0..=8).map(|k| k as f64 * 0.5).collect();
        let report = verify_decay(&symbol, 0.5, &rhos).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.final_over_initial <= 0.01);
        // Norm at ϱ=0 is the even eigenvalue π.
        assert!((report.norms[0] - std::f64::consts::PI).abs() <= 1e-6);
        // π/cosh(πϱ/2) oracle at ϱ = 2.
        let want = std::f64::consts::PI / std::f64::consts::PI.cosh();
        assert!((report.norms[4] - want).abs() <= 1e-6);
    }

    #[test]
    fn decay_controls() {
        let zero = SymbolFamily::constant(vec![Complex64::ZERO; 4], 2).unwrap();
        let rhos = [0.0, 1.0, 2.0];
        let report = verify_decay(&zero, 0.5, &rhos).unwrap();
        assert!(report.pass, "zero family decays trivially");

        let flat = SymbolFamily::constant(vec![Complex64::ONE; 4], 2).unwrap();
        let report = verify_decay(&flat, 0.5, &rhos).unwrap();
        assert!(!report.pass, "constant-in-ϱ symbol must fail");
        assert!(report.eventually_decreasing);

        assert!(verify_decay(&flat, 0.5, &[1.0]).is_err());
        assert!(verify_decay(&flat, 0.5, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn parity_eigenvalues() {
        // [[a,b],[b,a]] has even a+b, odd a−b.
        let a = Complex64::new(3.0, 1.0);
        let b = Complex64::new(1.0, -2.0);
        let (even, odd) = even_odd_eigenvalues(&[a, b, b, a]).unwrap();
        assert_relative_eq!(even.re, (a + b).re);
        assert_relative_eq!(odd.re, (a - b).re);
        assert!(even_odd_eigenvalues(&[a]).is_err());
    }

    #[test]
    fn line_table_matches_pointwise_symbol() {
        let symbol = SymbolFamily::from_family(rotation_family());
        let line = LineGrid::new(-2.0, 2.0, 0.25).unwrap();
        let table = symbol.line_table(0.5, &line).unwrap();
        for (k, &rho) in line.rhos().iter().enumerate() {
            let direct = compute_symbol(&symbol, Complex64::new(0.5, rho)).unwrap();
            let tabulated = table.matrix_at(k);
            for (a, b) in direct.iter().zip(&tabulated) {
                assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
            }
        }
        // Cached: same parameters give the same Arc.
        let again = symbol.line_table(0.5, &line).unwrap();
        assert!(Arc::ptr_eq(&table, &again));
        // Out-of-strip weight line refused.
        assert!(symbol.line_table(2.0, &line).is_err());
    }

    #[test]
    fn entry_dedup_for_symmetric_kernel() {
        let family = rotation_family();
        // §4 kernel is equal on all sign pairs: one unique entry.
        assert!(family.entry_alias.iter().all(|&a| a == 0));
    }

    #[test]
    fn spectral_norm_basics() {
        let m = [
            Complex64::new(3.0, 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::new(0.0, 4.0),
        ];
        assert_relative_eq!(spectral_norm(&m, 2), 4.0, max_relative = 1e-12);
        assert_eq!(spectral_norm(&[Complex64::ZERO; 4], 2), 0.0);
    }
}
