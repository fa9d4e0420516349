//! `localize`: singular-value localization of the assembled trace matrix.
//!
//! Uses structural validation only, so control transformations of other
//! orders (identity, translation) can be injected through the configuration
//! to confirm the test discriminates.

use serde::Serialize;

use fmtrace::cutoffs::RadialBlend;
use fmtrace::fio::QuantizedTransform;
use fmtrace::localization::{localization_test, LocalizationReport, Verdict};
use fmtrace::report;
use fmtrace::trace::trace_matrix;

use crate::commands::report_paths;
use crate::config::OutputFormat;
use crate::envelope::{write_text, Envelope};
use crate::{CliError, Ctx, Outcome};

const TAIL_ORDER: u32 = 4;

#[derive(Serialize)]
struct Payload {
    radius: f64,
    tail_order: u32,
    report: LocalizationReport,
}

pub fn run(ctx: &Ctx, radius: Option<f64>) -> Result<Outcome, CliError> {
    ctx.cfg.validate_structural()?;
    let radius = radius.unwrap_or(ctx.cfg.physical_r0);
    let period = ctx.cfg.period;
    // The cutoff must vanish on |x| <= radius and reach one before the chart
    // folds, so its transition band [radius, 2 radius] needs room.
    if !(radius > 0.0 && 2.0 * radius < period / 2.0) {
        return Err(CliError::Config(format!(
            "localization radius must satisfy 0 < radius < period/4, got {radius}"
        )));
    }

    let spec = ctx.cfg.build_transformation()?;
    let ambient = ctx.cfg.ambient_grid()?;
    let qt = QuantizedTransform::new(spec, ambient)?;
    let matrix = trace_matrix(&qt);

    let sub = ctx.cfg.sub_grid()?;
    let blend = RadialBlend::rising(radius, 2.0 * radius)?;
    let phi: Vec<f64> = (0..sub.len()).map(|i| blend.eval(sub.chart(i).abs())).collect();
    let report = localization_test(&matrix, &phi, TAIL_ORDER)?;

    let mut failures = Vec::new();
    match report.verdict {
        Verdict::Pass => {}
        Verdict::Fail => failures.push(format!(
            "cutoff-framed spectra do not decay at order {TAIL_ORDER}: phi-A slope {:?}, A-phi slope {:?}",
            report.fit_left.slope, report.fit_right.slope
        )),
        Verdict::Inconclusive => failures.push(format!(
            "grid too small to resolve the fit window ({} points)",
            sub.len()
        )),
    }

    let (json_path, csv_path) = report_paths(ctx);
    let payload = Payload { radius, tail_order: TAIL_ORDER, report };
    let envelope = Envelope::new("localize", ctx.seed, failures, ctx.cfg.to_flat_map(), payload);
    envelope.write(&json_path)?;

    if ctx.format == OutputFormat::Csv {
        let r = &envelope.results.report;
        let rows: Vec<Vec<f64>> = (0..r.sigma_bare.len())
            .map(|i| {
                vec![
                    (i + 1) as f64,
                    r.sigma_bare[i],
                    r.sigma_left[i],
                    r.sigma_right[i],
                ]
            })
            .collect();
        let mut buf = Vec::new();
        report::write_csv(&mut buf, &["k", "sigma_bare", "sigma_phi_a", "sigma_a_phi"], &rows)
            .map_err(|e| CliError::Io(e.to_string()))?;
        write_text(&csv_path, std::str::from_utf8(&buf).expect("CSV is ASCII"))?;
    }

    println!(
        "localize: verdict {:?}, discriminating {}",
        envelope.results.report.verdict, envelope.results.report.discriminating
    );
    for f in &envelope.failures {
        println!("  {f}");
    }
    Ok(Outcome { pass: envelope.pass })
}
