//! Built-in transformations: the rotation on the 2-torus plus control cases
//! used to exercise the condition checks from both sides.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CalculusError, Result};
use crate::geometry::{
    Amplitude, CanonicalTransformSpec, EmbeddingSpec, GeneratingFunction, HomogeneousMap,
    MeasureDensity,
};

pub const NAMES: [&str; 4] = ["torus_rotation", "identity", "translation", "translation_t"];

/// Default smoothing annulus for amplitudes singular at zero frequency.
pub const SMOOTHING_RADII: (f64, f64) = (1.5, 3.0);

pub fn build(name: &str) -> Result<CanonicalTransformSpec> {
    match name {
        "torus_rotation" => Ok(torus_rotation()),
        "identity" => Ok(identity()),
        "translation" => Ok(translation()),
        "translation_t" => Ok(translation_t()),
        other => Err(CalculusError::Contract(format!(
            "unknown transformation '{other}'; known: {}",
            NAMES.join(", ")
        ))),
    }
}

/// Quarter rotation of the (x, t) torus: g(x',t',p',τ') = (t', -x', τ', -p'),
/// S = τ'x - p't, a = 1/|(p',τ')|² smoothed near zero, μ ≡ 1.
pub fn torus_rotation() -> CanonicalTransformSpec {
    let embedding = EmbeddingSpec::new(2, std::f64::consts::PI).unwrap();
    // S = x·(0·p' + 1·τ') + t·(-1·p' + 0·τ')
    let phase =
        GeneratingFunction::bilinear(1, vec![0.0], vec![1.0], vec![-1.0], vec![0.0]).unwrap();
    let amplitude = Amplitude::new(
        Arc::new(|p: &[f64], tau: &[f64]| {
            Complex64::new(1.0 / (p[0] * p[0] + tau[0] * tau[0]), 0.0)
        }),
        -2.0,
        SMOOTHING_RADII.0,
        SMOOTHING_RADII.1,
    )
    .unwrap();
    let g_eval = Arc::new(|w: &[f64]| vec![w[1], -w[0], w[3], -w[2]]);
    // h(p',τ') = τ' ⇒ h⁻¹(p',η) = η, |det ∂h⁻¹/∂η| = 1.
    let hmap = HomogeneousMap::new(
        1,
        Arc::new(|_p: &[f64], tau: &[f64], out: &mut [f64]| out[0] = tau[0]),
    )
    .with_inverse(Arc::new(|_p: &[f64], eta: &[f64], out: &mut [f64]| out[0] = eta[0]))
    .with_jacobian(Arc::new(|_p: &[f64], _eta: &[f64]| 1.0));
    CanonicalTransformSpec {
        embedding,
        phase,
        amplitude,
        measure: MeasureDensity::unit(),
        g_eval: Some(g_eval),
        hmap: Some(hmap),
    }
}

/// Identity transformation: S = xp' + tτ', a ≡ 1 (no smoothing), μ ≡ 1.
/// Fails the conormal-avoidance condition by construction.
pub fn identity() -> CanonicalTransformSpec {
    let embedding = EmbeddingSpec::new(2, std::f64::consts::PI).unwrap();
    let phase =
        GeneratingFunction::bilinear(1, vec![1.0], vec![0.0], vec![0.0], vec![1.0]).unwrap();
    let amplitude = Amplitude::unsmoothed(Arc::new(|_: &[f64], _: &[f64]| Complex64::ONE), 0.0);
    let g_eval = Arc::new(|w: &[f64]| w.to_vec());
    let hmap = HomogeneousMap::new(
        1,
        Arc::new(|p: &[f64], _tau: &[f64], out: &mut [f64]| out[0] = p[0]),
    );
    CanonicalTransformSpec {
        embedding,
        phase,
        amplitude,
        measure: MeasureDensity::unit(),
        g_eval: Some(g_eval),
        hmap: Some(hmap),
    }
}

/// Shift in x: moves the distinguished fiber, violating fiber preservation.
pub fn translation() -> CanonicalTransformSpec {
    let mut spec = identity();
    spec.g_eval = Some(Arc::new(|w: &[f64]| vec![w[0] + 1.0, w[1], w[2], w[3]]));
    spec
}

/// Shift in t: base points leave X, so the restricted graph is empty.
pub fn translation_t() -> CanonicalTransformSpec {
    let mut spec = identity();
    spec.g_eval = Some(Arc::new(|w: &[f64]| vec![w[0], w[1] + 1.0, w[2], w[3]]));
    spec
}
