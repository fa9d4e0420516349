//! The packaged rotation scenario, end to end.

use num_complex::Complex64;
use serde::Serialize;

use fmtrace::geometry::{lagrangian_trace_sample, verify_conditions_ab, verify_homogeneity, ConditionsReport};
use fmtrace::localization::{localization_test, Verdict};
use fmtrace::reduction::{rel_difference, ReducedTraceSetup};
use fmtrace::symbol::{
    compute_symbol, even_odd_eigenvalues, rotation_symbol_closed_form, verify_analyticity,
    verify_decay, AnalyticityReport, DecayReport,
};
use fmtrace::trace::{trace_matrix, DualKernel};

use crate::envelope::Envelope;
use crate::{CliError, Ctx, Outcome};

const CLOSED_FORM_RHOS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];
const CLOSED_FORM_TOL: f64 = 1e-6;
const EQUIVALENCE_SHELLS: [f64; 3] = [8.0, 10.0, 12.0];
const EQUIVALENCE_TOL: f64 = 5e-3;
const SHELL_WIDTH: f64 = 1.25;

#[derive(Serialize)]
struct ClosedFormRow {
    rho: f64,
    even_re: f64,
    even_im: f64,
    rel_error: f64,
}

#[derive(Serialize)]
struct EquivalenceRow {
    shell: f64,
    rel_error: f64,
}

#[derive(Serialize)]
struct Payload {
    conditions: ConditionsReport,
    trace_sample_concentrated: bool,
    kernel_homogeneity_violation: f64,
    closed_form: Vec<ClosedFormRow>,
    analyticity: AnalyticityReport,
    decay: DecayReport,
    equivalence: Vec<EquivalenceRow>,
    localization_verdict: String,
}

pub fn run(ctx: &Ctx) -> Result<Outcome, CliError> {
    let mut cfg = ctx.cfg.clone();
    // This command drives the packaged scenario regardless of the configured
    // transformation; everything else comes from the config.
    cfg.transformation = "torus_rotation".into();
    cfg.validate()?;

    let mut failures = Vec::new();
    let spec = cfg.build_transformation()?;

    let conditions = verify_conditions_ab(&spec, 256, 1e-9, ctx.seed)?;
    if !conditions.pass {
        for (name, outcome) in [
            ("condition_a", &conditions.condition_a),
            ("condition_b", &conditions.condition_b),
            ("condition_c", &conditions.condition_c),
        ] {
            if !outcome.pass {
                failures.push(format!("{name}: failed with witness"));
            }
        }
    }

    let sample = lagrangian_trace_sample(&spec, 128, 3.0, ctx.seed)?;
    if !sample.concentrated_at_origin {
        failures.push("trace_sample: base points do not concentrate at the origin pair".into());
    }

    let kernel = DualKernel::from_spec(spec.clone());
    let hom = verify_homogeneity(
        &|w: &[f64]| kernel.b0(&w[..1], &w[1..]).unwrap_or(Complex64::ZERO),
        2,
        kernel.degree,
        200,
        1e-8,
        0.5,
        ctx.seed,
    )?;
    if !hom.pass {
        failures.push(format!(
            "dual_kernel: homogenized kernel violates degree {} by {:.2e}",
            kernel.degree, hom.max_violation
        ));
    }

    let setup = ReducedTraceSetup::new(
        spec,
        cfg.ambient_grid()?,
        cfg.s,
        cfg.dual_cutoff()?,
        cfg.log_grid()?,
        cfg.line_grid()?,
    )?;
    let gamma = setup.gamma();

    let mut closed_form = Vec::new();
    for rho in CLOSED_FORM_RHOS {
        let zeta = Complex64::new(gamma, rho);
        let matrix = compute_symbol(setup.symbol(), zeta)?;
        let (even, _) = even_odd_eigenvalues(&matrix)?;
        let want = rotation_symbol_closed_form(zeta, cfg.s);
        let rel = (even - want).norm() / want.norm();
        if rel > CLOSED_FORM_TOL {
            failures.push(format!("closed_form: rho={rho} relative error {rel:.2e}"));
        }
        closed_form.push(ClosedFormRow { rho, even_re: even.re, even_im: even.im, rel_error: rel });
    }

    let probes: Vec<Complex64> = [
        (gamma, 0.0),
        (gamma, 0.5),
        (gamma, 1.0),
        (gamma, 2.0),
        (gamma - 0.2, 0.5),
        (gamma + 0.2, 0.5),
    ]
    .into_iter()
    .map(|(re, im)| Complex64::new(re, im))
    .collect();
    let analyticity = verify_analyticity(setup.symbol(), &probes, 1e-3)?;
    if !analyticity.pass {
        failures.push("analyticity: Cauchy-Riemann residual above tolerance".into());
    }

    let rhos: Vec<f64> = (0..9).map(|i| 0.5 * i as f64).collect();
    let decay = verify_decay(setup.symbol(), gamma, &rhos)?;
    if !decay.pass {
        failures.push(format!(
            "decay: final/initial = {:.2e}, eventually_decreasing = {}",
            decay.final_over_initial, decay.eventually_decreasing
        ));
    }

    let mut equivalence = Vec::new();
    for shell in EQUIVALENCE_SHELLS {
        let vhat = setup.gaussian_shell(shell, SHELL_WIDTH);
        let red = setup.oracle_route(&vhat)?.value;
        let fm = setup.mellin_route(&vhat)?.value;
        let err = rel_difference(&fm, &red);
        if err > EQUIVALENCE_TOL {
            failures.push(format!("equivalence: shell {shell} relative error {err:.2e}"));
        }
        equivalence.push(EquivalenceRow { shell, rel_error: err });
    }

    let matrix = trace_matrix(setup.quantized());
    let sub = setup.sub_grid();
    let phi_blend = fmtrace::cutoffs::RadialBlend::rising(cfg.physical_r0, cfg.physical_r1)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let phi: Vec<f64> = (0..sub.len()).map(|i| phi_blend.eval(sub.chart(i).abs())).collect();
    let localization = localization_test(&matrix, &phi, 4)?;
    if localization.verdict != Verdict::Pass {
        failures.push(format!("localization: verdict {:?}", localization.verdict));
    }

    let payload = Payload {
        conditions,
        trace_sample_concentrated: sample.concentrated_at_origin,
        kernel_homogeneity_violation: hom.max_violation,
        closed_form,
        analyticity,
        decay,
        equivalence,
        localization_verdict: format!("{:?}", localization.verdict),
    };
    let envelope =
        Envelope::new("verify-example", ctx.seed, failures, cfg.to_flat_map(), payload);
    envelope.write(&ctx.out_path)?;

    if envelope.pass {
        println!("verify-example: PASS ({})", ctx.out_path.display());
    } else {
        println!("verify-example: FAIL");
        for f in &envelope.failures {
            println!("  {f}");
        }
    }
    Ok(Outcome { pass: envelope.pass })
}
