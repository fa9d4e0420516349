//! `trace`: the composed trace against its two independent predictions.
//!
//! For each selected plane wave the composition oracle is compared against
//! (a) the dual-kernel column, valid on the annulus between the smoothing
//! zone and the Nyquist wrap, and (b) the Mellin pipeline on the reduced
//! operator.  Both difference norms land in the report.

use serde::Serialize;

use fmtrace::grid::{dft, Direction, GridFunction, SpaceTag};
use fmtrace::reduction::{rel_difference, ReducedTraceSetup};
use fmtrace::report;
use fmtrace::trace::trace_compose_oracle;

use crate::commands::report_paths;
use crate::config::OutputFormat;
use crate::envelope::{write_text, Envelope};
use crate::{CliError, Ctx, Outcome};

const KERNEL_TOL: f64 = 1e-3;
/// Plane waves are the hardest input for the radial quadrature: their
/// profiles are lattice deltas, so the Mellin route is held to a looser
/// bound than band-limited packets.
const MELLIN_TOL: f64 = 5e-2;
const ANNULUS_LO: f64 = 4.0;

enum Selection {
    Planes(Vec<isize>),
    Zero,
}

fn parse_input(text: &str, n: isize) -> Result<Selection, CliError> {
    let t = text.trim();
    if t == "zero" {
        return Ok(Selection::Zero);
    }
    let mode = |s: &str| -> Result<isize, CliError> {
        s.trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad mode number '{}' in '{t}'", s.trim())))
    };
    let modes: Vec<isize> = if let Some(range) = t.strip_prefix("planes:") {
        let (a, b) = range.split_once("..").ok_or_else(|| {
            CliError::Config(format!("planes selector must be planes:A..B, got '{t}'"))
        })?;
        let (a, b) = (mode(a)?, mode(b)?);
        if b < a {
            return Err(CliError::Config(format!("empty mode range '{t}'")));
        }
        (a..=b).collect()
    } else if let Some(k) = t.strip_prefix("plane:") {
        vec![mode(k)?]
    } else {
        return Err(CliError::Config(format!(
            "input must be planes:A..B, plane:K, or zero, got '{t}'"
        )));
    };
    for &k in &modes {
        if k < -n / 2 || k >= n / 2 {
            return Err(CliError::Config(format!(
                "mode {k} outside the representable range [{}, {}]",
                -n / 2,
                n / 2 - 1
            )));
        }
    }
    Ok(Selection::Planes(modes))
}

#[derive(Serialize)]
struct TraceRow {
    mode: Option<isize>,
    oracle_norm: f64,
    mellin_norm: f64,
    difference_norm: f64,
    mellin_rel: f64,
    /// None when the comparison annulus is empty for this mode.
    kernel_rel: Option<f64>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct Payload {
    input: String,
    rows: Vec<TraceRow>,
}

fn l2_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Raw composition on the plane wave e^{ikx} against the dual-kernel column,
/// restricted to radii in [`ANNULUS_LO`, Nyquist/2].
fn kernel_comparison(
    setup: &ReducedTraceSetup,
    k: isize,
) -> Result<(Option<f64>, Vec<String>), CliError> {
    let sub = setup.sub_grid();
    let spike = setup.dual_spike(k);
    let wave = dft(&spike, Direction::Inverse)?;
    let traced = trace_compose_oracle(setup.quantized(), &wave)?;
    let hat = dft(&traced.value, Direction::Forward)?;
    let col = setup.kernel_column(k)?;

    let p_src = k as f64 * sub.dual_spacing();
    let hi = sub.points_per_axis() as f64 * sub.dual_spacing() / 4.0;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..sub.len() {
        let q = sub.frequency(i);
        let r = (q * q + p_src * p_src).sqrt();
        if !(ANNULUS_LO..=hi).contains(&r) {
            continue;
        }
        num += (hat.values[i] - col[i]).norm_sqr();
        den += col[i].norm_sqr();
    }
    let rel = if den == 0.0 { None } else { Some((num / den).sqrt()) };
    Ok((rel, traced.warnings))
}

pub fn run(ctx: &Ctx, input: &str) -> Result<Outcome, CliError> {
    ctx.cfg.validate()?;
    let setup = ctx.cfg.reduced_setup()?;
    let sub = setup.sub_grid();
    let selection = parse_input(input, sub.points_per_axis() as isize)?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    match selection {
        Selection::Zero => {
            let zero = GridFunction::zeros(sub, SpaceTag::Dual);
            let red = setup.oracle_route(&zero)?;
            let fm = setup.mellin_route(&zero)?;
            let (oracle_norm, mellin_norm) = (red.value.norm(), fm.value.norm());
            if oracle_norm != 0.0 || mellin_norm > 1e-14 {
                failures.push(format!(
                    "zero input produced nonzero output: oracle {oracle_norm:.2e}, mellin {mellin_norm:.2e}"
                ));
            }
            rows.push(TraceRow {
                mode: None,
                oracle_norm,
                mellin_norm,
                difference_norm: l2_diff(&fm.value, &red.value),
                mellin_rel: rel_difference(&fm.value, &red.value),
                kernel_rel: None,
                warnings: red.warnings,
            });
        }
        Selection::Planes(modes) => {
            for k in modes {
                let vhat = setup.dual_spike(k);
                let red = setup.oracle_route(&vhat)?;
                let fm = setup.mellin_route(&vhat)?;
                let mellin_rel = rel_difference(&fm.value, &red.value);
                let (kernel_rel, kernel_warnings) = kernel_comparison(&setup, k)?;

                let mut warnings = red.warnings;
                for w in kernel_warnings.into_iter().chain(fm.warnings) {
                    if !warnings.contains(&w) {
                        warnings.push(w);
                    }
                }
                if let Some(rel) = kernel_rel {
                    if rel > KERNEL_TOL {
                        failures.push(format!(
                            "mode {k}: kernel column differs by {rel:.2e} (tolerance {KERNEL_TOL:.0e})"
                        ));
                    }
                }
                if mellin_rel > MELLIN_TOL {
                    failures.push(format!(
                        "mode {k}: Mellin route differs by {mellin_rel:.2e} (tolerance {MELLIN_TOL:.0e})"
                    ));
                }
                rows.push(TraceRow {
                    mode: Some(k),
                    oracle_norm: red.value.norm(),
                    mellin_norm: fm.value.norm(),
                    difference_norm: l2_diff(&fm.value, &red.value),
                    mellin_rel,
                    kernel_rel,
                    warnings,
                });
            }
        }
    }

    let (json_path, csv_path) = report_paths(ctx);
    let payload = Payload { input: input.to_string(), rows };
    let envelope = Envelope::new("trace", ctx.seed, failures, ctx.cfg.to_flat_map(), payload);
    envelope.write(&json_path)?;

    if ctx.format == OutputFormat::Csv {
        let rows: Vec<Vec<f64>> = envelope
            .results
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.mode.map_or(f64::NAN, |k| k as f64),
                    r.oracle_norm,
                    r.mellin_norm,
                    r.difference_norm,
                    r.mellin_rel,
                    r.kernel_rel.unwrap_or(f64::NAN),
                ]
            })
            .collect();
        let mut buf = Vec::new();
        report::write_csv(
            &mut buf,
            &["mode", "oracle_norm", "mellin_norm", "difference_norm", "mellin_rel", "kernel_rel"],
            &rows,
        )
        .map_err(|e| CliError::Io(e.to_string()))?;
        write_text(&csv_path, std::str::from_utf8(&buf).expect("CSV is ASCII"))?;
    }

    let verdict = if envelope.pass { "pass" } else { "FAIL" };
    println!("trace: {} rows, {verdict}", envelope.results.rows.len());
    for f in &envelope.failures {
        println!("  {f}");
    }
    Ok(Outcome { pass: envelope.pass })
}
