//! `check-conditions`: sampled structural hypotheses for one transformation.
//!
//! Structural validation only — this command exists precisely to interrogate
//! transformations the trace calculus would reject.

use serde::Serialize;

use fmtrace::geometry::{
    lagrangian_trace_sample, verify_conditions_ab, ConditionOutcome, ConditionsReport,
    TraceSampleReport,
};

use crate::commands::report_paths;
use crate::envelope::Envelope;
use crate::{CliError, Ctx, Outcome};

const CONDITION_TOL: f64 = 1e-9;
const SAMPLE_BAND: f64 = 3.0;

#[derive(Serialize)]
struct Payload {
    transformation: String,
    samples: usize,
    conditions: ConditionsReport,
    trace_sample: TraceSampleReport,
}

fn describe(name: &str, outcome: &ConditionOutcome) -> Option<String> {
    if outcome.pass {
        return None;
    }
    let witness = outcome
        .witness
        .as_ref()
        .map(|w| format!("; witness {:?} -> {:?} ({})", w.input, w.image, w.note))
        .unwrap_or_default();
    Some(format!("condition {name} failed after {} samples{witness}", outcome.checked))
}

pub fn run(ctx: &Ctx, samples: usize) -> Result<Outcome, CliError> {
    ctx.cfg.validate_structural()?;
    if samples == 0 {
        return Err(CliError::Config("samples must be positive".into()));
    }
    let spec = ctx.cfg.build_transformation()?;
    let conditions = verify_conditions_ab(&spec, samples, CONDITION_TOL, ctx.seed)?;
    // The sample cloud is purely illustrative; cap it so reports stay small.
    let trace_sample = lagrangian_trace_sample(&spec, samples.min(256), SAMPLE_BAND, ctx.seed)?;

    let mut failures = Vec::new();
    for (name, outcome) in [
        ("A", &conditions.condition_a),
        ("B", &conditions.condition_b),
        ("C", &conditions.condition_c),
    ] {
        if let Some(msg) = describe(name, outcome) {
            failures.push(msg);
        }
    }

    let payload = Payload {
        transformation: ctx.cfg.transformation.clone(),
        samples,
        conditions,
        trace_sample,
    };
    let (json_path, _) = report_paths(ctx);
    let envelope = Envelope::new("check-conditions", ctx.seed, failures, ctx.cfg.to_flat_map(), payload);
    envelope.write(&json_path)?;

    let verdict = if envelope.pass { "pass" } else { "FAIL" };
    println!(
        "check-conditions: {} is a {verdict} (trace sample concentrated: {})",
        envelope.results.transformation, envelope.results.trace_sample.concentrated_at_origin
    );
    for f in &envelope.failures {
        println!("  {f}");
    }
    Ok(Outcome { pass: envelope.pass })
}
