//! `symbol`: tabulate the Mellin symbol along a vertical contour.

use num_complex::Complex64;
use serde::Serialize;

use fmtrace::report::{self, SymbolTableEntry};

use crate::commands::{parse_range, report_paths};
use crate::envelope::{write_text, Envelope};
use crate::{CliError, Ctx, Outcome};

#[derive(Serialize)]
struct NormRow {
    rho: f64,
    norm: f64,
}

#[derive(Serialize)]
struct Payload {
    gamma: f64,
    table: Vec<SymbolTableEntry>,
    norms: Vec<NormRow>,
}

pub fn run(ctx: &Ctx, rhos: &str, gamma: Option<f64>) -> Result<Outcome, CliError> {
    ctx.cfg.validate()?;
    let rhos = parse_range(rhos)?;
    let setup = ctx.cfg.reduced_setup()?;
    let gamma = gamma.unwrap_or_else(|| setup.gamma());

    let zetas: Vec<Complex64> = rhos.iter().map(|&r| Complex64::new(gamma, r)).collect();
    let table = report::symbol_table(setup.symbol(), &zetas)?;
    let norms = report::norm_profile(setup.symbol(), gamma, &rhos)?;

    let payload = Payload {
        gamma,
        table,
        norms: norms.iter().map(|&(rho, norm)| NormRow { rho, norm }).collect(),
    };
    let (json_path, csv_path) = report_paths(ctx);
    let envelope = Envelope::new("symbol", ctx.seed, Vec::new(), ctx.cfg.to_flat_map(), payload);
    envelope.write(&json_path)?;

    // The norm profile is always mirrored as CSV for plotting.
    let rows: Vec<Vec<f64>> = norms.iter().map(|&(rho, norm)| vec![rho, norm]).collect();
    let mut buf = Vec::new();
    report::write_csv(&mut buf, &["rho", "spectral_norm"], &rows)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_text(&csv_path, std::str::from_utf8(&buf).expect("CSV is ASCII"))?;

    println!("symbol: {} contour samples at Re zeta = {gamma}", rows.len());
    Ok(Outcome { pass: true })
}
