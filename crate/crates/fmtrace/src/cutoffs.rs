//! Radial cutoff functions.
//!
//! Every smoothing site in the library (amplitude regularization at zero
//! frequency, dual cutoffs ψ, joint cutoffs χ, physical cutoffs φ) uses the
//! same C² polynomial blend, so Gibbs behavior is uniform and configurable
//! through two radii only.

use crate::error::{CalculusError, Result};

/// C² smoothstep: 0 for u ≤ 0, 1 for u ≥ 1, u³(10 − 15u + 6u²) between.
pub fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// Monotone radial switch between two plateaus.
///
/// `Rising` is 0 on [0, r0] and 1 on [r1, ∞); `Falling` is the complement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialBlend {
    r0: f64,
    r1: f64,
    rising: bool,
}

impl RadialBlend {
    /// 0 on [0, r0], 1 on [r1, ∞).
    pub fn rising(r0: f64, r1: f64) -> Result<Self> {
        Self::checked(r0, r1, true)
    }

    /// 1 on [0, r0], 0 on [r1, ∞).
    pub fn falling(r0: f64, r1: f64) -> Result<Self> {
        Self::checked(r0, r1, false)
    }

    fn checked(r0: f64, r1: f64, rising: bool) -> Result<Self> {
        if !(0.0 <= r0 && r0 < r1) {
            return Err(CalculusError::Contract(format!(
                "radial blend needs 0 <= r0 < r1, got r0 = {r0}, r1 = {r1}"
            )));
        }
        Ok(Self { r0, r1, rising })
    }

    pub fn eval(&self, r: f64) -> f64 {
        let s = smoothstep((r - self.r0) / (self.r1 - self.r0));
        if self.rising {
            s
        } else {
            1.0 - s
        }
    }

    pub fn inner_radius(&self) -> f64 {
        self.r0
    }

    pub fn outer_radius(&self) -> f64 {
        self.r1
    }

    /// True where the blend is strictly between its plateaus.
    pub fn in_transition(&self, r: f64) -> bool {
        r > self.r0 && r < self.r1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_is_c2_at_the_joints() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert_eq!(smoothstep(0.5), 0.5);
        // First and second one-sided differences vanish at both plateaus.
        let h = 1e-5;
        for (edge, inside) in [(0.0, h), (1.0, 1.0 - h)] {
            let d1 = (smoothstep(inside) - smoothstep(edge)).abs() / h;
            assert!(d1 < 1e-8, "gradient {d1} at edge {edge}");
        }
    }

    #[test]
    fn blend_plateaus_and_monotonicity() {
        let psi = RadialBlend::rising(1.5, 3.0).unwrap();
        assert_eq!(psi.eval(0.0), 0.0);
        assert_eq!(psi.eval(1.5), 0.0);
        assert_eq!(psi.eval(3.0), 1.0);
        assert_eq!(psi.eval(10.0), 1.0);
        let mut prev = -1.0;
        for i in 0..=100 {
            let v = psi.eval(1.5 + 1.5 * i as f64 / 100.0);
            assert!(v >= prev);
            prev = v;
        }
        let phi = RadialBlend::falling(1.5, 3.0).unwrap();
        assert_eq!(phi.eval(0.0), 1.0);
        assert_eq!(phi.eval(5.0), 0.0);
        assert!((phi.eval(2.0) + psi.eval(2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_radii_rejected() {
        assert!(RadialBlend::rising(2.0, 2.0).is_err());
        assert!(RadialBlend::rising(-1.0, 2.0).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn blend_envelope_for_arbitrary_radii(
            r0 in 0.0f64..10.0,
            width in 1e-6f64..10.0,
            r in 0.0f64..40.0,
        ) {
            let r1 = r0 + width;
            let up = RadialBlend::rising(r0, r1).unwrap();
            let down = RadialBlend::falling(r0, r1).unwrap();
            let v = up.eval(r);
            proptest::prop_assert!((0.0..=1.0).contains(&v));
            proptest::prop_assert_eq!(v + down.eval(r), 1.0);
            if r <= r0 {
                proptest::prop_assert_eq!(v, 0.0);
            }
            if r >= r1 {
                proptest::prop_assert_eq!(v, 1.0);
            }
            // Monotone: a slightly larger radius never lowers the blend.
            proptest::prop_assert!(up.eval(r + 1e-3) >= v);
        }
    }
}
