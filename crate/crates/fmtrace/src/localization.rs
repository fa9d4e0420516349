//! Singular-value localization test.
//!
//! A trace concentrated at a single point should become smoothing once
//! composed with a cutoff vanishing near that point: the singular values of
//! φA and Aφ must then decay at least like k^{−tail_order}.  The decay rate
//! is estimated as the least-squares slope of log σ_k against log k over a
//! fixed window of indices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CalculusError, Result};

/// 1-indexed window of singular values entering the slope fit.
pub const FIT_WINDOW: (usize, usize) = (4, 24);

/// Relative floor under σ₁; values below it are numerical noise.
const RESOLVED_FLOOR: f64 = 1e-12;

/// Minimum resolved points for a meaningful fit.
const MIN_FIT_POINTS: usize = 3;

/// Minimum matrix size for a verdict.
const MIN_DIMENSION: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeFit {
    /// Positive decay exponent: σ_k ~ k^{−slope} over the window.
    pub slope: Option<f64>,
    /// Window points above the noise floor.
    pub resolved: usize,
    /// Too few resolved points: the spectrum fell below the floor inside the
    /// window, which is stronger than any algebraic decay.
    pub collapsed: bool,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalizationReport {
    pub tail_order: u32,
    pub window: (usize, usize),
    pub sigma_bare: Vec<f64>,
    pub sigma_left: Vec<f64>,
    pub sigma_right: Vec<f64>,
    pub fit_bare: EnvelopeFit,
    pub fit_left: EnvelopeFit,
    pub fit_right: EnvelopeFit,
    /// The bare operator fails the same envelope both compositions satisfy.
    pub discriminating: bool,
    pub verdict: Verdict,
}

fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn fit_envelope(sigma: &[f64], tail_order: u32) -> EnvelopeFit {
    let (lo, hi) = FIT_WINDOW;
    let hi = hi.min(sigma.len());
    let floor = sigma.first().copied().unwrap_or(0.0) * RESOLVED_FLOOR;
    let points: Vec<(f64, f64)> = (lo..=hi)
        .filter(|&k| sigma[k - 1] > floor && sigma[k - 1] > 0.0)
        .map(|k| ((k as f64).ln(), sigma[k - 1].ln()))
        .collect();
    if points.len() < MIN_FIT_POINTS {
        return EnvelopeFit { slope: None, resolved: points.len(), collapsed: true, pass: true };
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let decay = -sxy / sxx;
    EnvelopeFit {
        slope: Some(decay),
        resolved: points.len(),
        collapsed: false,
        pass: decay >= tail_order as f64,
    }
}

/// Tests whether the cutoff φ (vanishing near the distinguished point)
/// smooths the operator from both sides.  `phi` holds the cutoff sampled on
/// the same grid that indexes `matrix`.
pub fn localization_test(
    matrix: &[Vec<Complex64>],
    phi: &[f64],
    tail_order: u32,
) -> Result<LocalizationReport> {
    let n = matrix.len();
    if tail_order < 4 {
        return Err(CalculusError::Contract(
            "localization needs tail_order >= 4 to witness smoothing".into(),
        ));
    }
    if n == 0 || matrix.iter().any(|row| row.len() != n) || phi.len() != n {
        return Err(CalculusError::Contract(
            "localization expects a square matrix and a matching cutoff vector".into(),
        ));
    }

    let a = DMatrix::from_fn(n, n, |r, c| matrix[r][c]);
    let left = DMatrix::from_fn(n, n, |r, c| phi[r] * matrix[r][c]);
    let right = DMatrix::from_fn(n, n, |r, c| matrix[r][c] * phi[c]);

    let sigma_bare = singular_values(&a);
    let sigma_left = singular_values(&left);
    let sigma_right = singular_values(&right);

    let fit_bare = fit_envelope(&sigma_bare, tail_order);
    let fit_left = fit_envelope(&sigma_left, tail_order);
    let fit_right = fit_envelope(&sigma_right, tail_order);

    let verdict = if n < MIN_DIMENSION {
        Verdict::Inconclusive
    } else if fit_left.pass && fit_right.pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let discriminating = verdict == Verdict::Pass && !fit_bare.pass;

    Ok(LocalizationReport {
        tail_order,
        window: (FIT_WINDOW.0, FIT_WINDOW.1),
        sigma_bare,
        sigma_left,
        sigma_right,
        fit_bare,
        fit_left,
        fit_right,
        discriminating,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoffs::RadialBlend;
    use crate::grid::TorusGrid;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn identity(n: usize) -> Vec<Vec<Complex64>> {
        (0..n)
            .map(|r| (0..n).map(|c| if r == c { Complex64::ONE } else { Complex64::ZERO }).collect())
            .collect()
    }

    fn chart_cutoff(n: usize, r0: f64, r1: f64) -> Vec<f64> {
        let grid = TorusGrid::standard(1, n).unwrap();
        let blend = RadialBlend::rising(r0, r1).unwrap();
        (0..n).map(|i| blend.eval(grid.chart(i).abs())).collect()
    }

    #[test]
    fn power_law_spectrum_is_fit_exactly() {
        let n = 32;
        let diag: Vec<Vec<Complex64>> = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        if r == c {
                            Complex64::new(((r + 1) as f64).powi(-5), 0.0)
                        } else {
                            Complex64::ZERO
                        }
                    })
                    .collect()
            })
            .collect();
        let report = localization_test(&diag, &vec![1.0; n], 4).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert_abs_diff_eq!(report.fit_left.slope.unwrap(), 5.0, epsilon = 1e-9);
        // phi = 1 localizes nothing, so the bare fit passes too.
        assert!(!report.discriminating);
    }

    #[test]
    fn identity_operator_fails() {
        let n = 64;
        let phi = chart_cutoff(n, PI / 4.0, PI / 2.0);
        let report = localization_test(&identity(n), &phi, 4).unwrap();
        // Singular values of phi·I are the phi samples: flat at one across
        // the window, hence no decay at all.
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report.fit_left.slope.unwrap() < 1.0);
        assert!(!report.discriminating);
    }

    #[test]
    fn smooth_localized_kernel_passes() {
        let n = 32;
        let grid = TorusGrid::standard(1, n).unwrap();
        let matrix: Vec<Vec<Complex64>> = (0..n)
            .map(|r| {
                let xr = grid.chart(r);
                (0..n)
                    .map(|c| {
                        let xc = grid.chart(c);
                        Complex64::new((-2.0 * (xr * xr + xc * xc)).exp(), 0.0)
                    })
                    .collect()
            })
            .collect();
        let phi = chart_cutoff(n, PI / 4.0, PI / 2.0);
        let report = localization_test(&matrix, &phi, 4).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn small_matrices_are_inconclusive() {
        let report = localization_test(&identity(8), &vec![1.0; 8], 4).unwrap();
        assert_eq!(report.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            localization_test(&identity(16), &vec![1.0; 16], 3),
            Err(CalculusError::Contract(_))
        ));
        assert!(matches!(
            localization_test(&identity(16), &vec![1.0; 8], 4),
            Err(CalculusError::Contract(_))
        ));
        let mut ragged = identity(4);
        ragged[2].pop();
        assert!(matches!(
            localization_test(&ragged, &vec![1.0; 4], 4),
            Err(CalculusError::Contract(_))
        ));
    }

    #[test]
    fn rank_one_spectrum_collapses_and_passes() {
        let n = 32;
        let matrix: Vec<Vec<Complex64>> = (0..n)
            .map(|r| (0..n).map(|c| if r == 0 && c == 0 { Complex64::ONE } else { Complex64::ZERO }).collect())
            .collect();
        let report = localization_test(&matrix, &vec![1.0; n], 4).unwrap();
        assert!(report.fit_left.collapsed);
        assert_eq!(report.verdict, Verdict::Pass);
    }
}
