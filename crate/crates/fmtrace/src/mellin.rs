//! Numerical Mellin transform and inverse.
//!
//! All integrals are computed after the substitution t = e^{-τ}:
//! ∫₀^∞ t^ζ f(t) dt/t = ∫ e^{-τζ} f(e^{-τ}) dτ, discretized by the trapezoid
//! rule on a uniform τ grid. For integrands that decay exponentially inside
//! their convergence strip the trapezoid rule is spectrally accurate, so the
//! default grids are far finer than any tolerance used in this project.

use num_complex::Complex64;

use crate::error::{CalculusError, Result, WithWarnings};

/// Relative size of the integrand at the τ-truncation ends that triggers a
/// truncation warning.
pub const TAIL_TOL: f64 = 1e-8;
/// Relative size of line samples at the ϱ-truncation ends that triggers a
/// truncation warning in the inverse transform.
pub const END_TOL: f64 = 1e-3;
/// Samples smaller than this (relative to the profile maximum) cannot move
/// any digit of a ≤1e5-node trapezoid sum at the tolerances used here; the
/// batched transforms skip them.
const NEGLIGIBLE: f64 = 1e-30;
/// Recurrence phases are recomputed exactly every this many steps to stop
/// rounding drift.
const RESYNC: usize = 256;

/// Open vertical strip lo < Re(ζ) < hi.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Strip {
    pub lo: f64,
    pub hi: f64,
}

impl Strip {
    pub fn contains(&self, re: f64) -> bool {
        self.lo < re && re < self.hi
    }
}

/// Uniform grid in τ with nodes t_k = e^{-τ_k}.
#[derive(Clone, Debug)]
pub struct LogGrid {
    tau_min: f64,
    tau_max: f64,
    step: f64,
    taus: Vec<f64>,
}

impl LogGrid {
    pub fn new(tau_min: f64, tau_max: f64, step: f64) -> Result<Self> {
        if !(tau_min < tau_max) || !(step > 0.0) {
            return Err(CalculusError::Contract(format!(
                "log grid needs tau_min < tau_max and step > 0, got [{tau_min}, {tau_max}] step {step}"
            )));
        }
        let count = ((tau_max - tau_min) / step).round() as usize + 1;
        if count < 64 {
            return Err(CalculusError::Contract(format!(
                "log grid has {count} nodes, need at least 64"
            )));
        }
        let taus = (0..count).map(|k| tau_min + k as f64 * step).collect();
        Ok(Self { tau_min, tau_max, step, taus })
    }

    /// Project default: τ ∈ [-60, 60], step 0.005.
    pub fn default_grid() -> Self {
        Self::new(-60.0, 60.0, 0.005).expect("default log grid is valid")
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn node(&self, k: usize) -> f64 {
        (-self.taus[k]).exp()
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.tau_min, self.tau_max)
    }

    /// Trapezoid weight of node k.
    pub fn weight(&self, k: usize) -> f64 {
        if k == 0 || k + 1 == self.taus.len() {
            self.step / 2.0
        } else {
            self.step
        }
    }
}

/// Uniform sampling of imaginary parts ϱ for a vertical line Re(ζ) = γ.
#[derive(Clone, Debug, PartialEq)]
pub struct LineGrid {
    rho_min: f64,
    rho_max: f64,
    step: f64,
    rhos: Vec<f64>,
}

impl LineGrid {
    pub fn new(rho_min: f64, rho_max: f64, step: f64) -> Result<Self> {
        if !(rho_min < rho_max) || !(step > 0.0) {
            return Err(CalculusError::Contract(format!(
                "line grid needs rho_min < rho_max and step > 0, got [{rho_min}, {rho_max}] step {step}"
            )));
        }
        let count = ((rho_max - rho_min) / step).round() as usize + 1;
        let rhos = (0..count).map(|k| rho_min + k as f64 * step).collect();
        Ok(Self { rho_min, rho_max, step, rhos })
    }

    /// Project default: ϱ ∈ [-80, 80], step 0.01.
    pub fn default_line() -> Self {
        Self::new(-80.0, 80.0, 0.01).expect("default line grid is valid")
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rhos
    }

    pub fn len(&self) -> usize {
        self.rhos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhos.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.rho_min, self.rho_max)
    }

    fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.rhos.len() {
            self.step / 2.0
        } else {
            self.step
        }
    }
}

/// ∫₀^∞ t^ζ f(t) dt/t for scalar f, with the declared convergence strip
/// policed and a truncation warning when the integrand has not decayed at
/// the τ ends.
pub fn mellin_transform(
    f: &dyn Fn(f64) -> Complex64,
    zeta: Complex64,
    grid: &LogGrid,
    strip: Strip,
) -> Result<WithWarnings<Complex64>> {
    if !strip.contains(zeta.re) {
        return Err(CalculusError::Divergence(format!(
            "Re(zeta) = {} outside the declared strip ({}, {})",
            zeta.re, strip.lo, strip.hi
        )));
    }
    let mut sum = Complex64::ZERO;
    let mut max_mag = 0.0f64;
    let mut end_mag = 0.0f64;
    let last = grid.len() - 1;
    for k in 0..grid.len() {
        let tau = grid.taus()[k];
        let g = (-tau * zeta).exp() * f(grid.node(k));
        let mag = g.norm();
        max_mag = max_mag.max(mag);
        if k == 0 || k == last {
            end_mag = end_mag.max(mag);
        }
        sum += grid.weight(k) * g;
    }
    let mut out = WithWarnings::clean(sum);
    if max_mag > 0.0 && end_mag > TAIL_TOL * max_mag {
        out = out.warn(format!(
            "mellin truncation: integrand magnitude {:.3e} at the τ ends ({:.1e} of max)",
            end_mag,
            end_mag / max_mag
        ));
    }
    Ok(out)
}

/// Entrywise Mellin transform of a matrix-valued family (linearity makes this
/// exact relative to the scalar rule).
pub fn mellin_transform_matrix(
    f: &dyn Fn(f64) -> nalgebra::DMatrix<Complex64>,
    zeta: Complex64,
    grid: &LogGrid,
    strip: Strip,
) -> Result<WithWarnings<nalgebra::DMatrix<Complex64>>> {
    if !strip.contains(zeta.re) {
        return Err(CalculusError::Divergence(format!(
            "Re(zeta) = {} outside the declared strip ({}, {})",
            zeta.re, strip.lo, strip.hi
        )));
    }
    let first = f(grid.node(0));
    let (rows, cols) = first.shape();
    let mut sum = nalgebra::DMatrix::<Complex64>::zeros(rows, cols);
    let mut max_mag = 0.0f64;
    let mut end_mag = 0.0f64;
    let last = grid.len() - 1;
    for k in 0..grid.len() {
        let tau = grid.taus()[k];
        let phase = (-tau * zeta).exp();
        let m = if k == 0 { first.clone() } else { f(grid.node(k)) };
        let mag = m.camax() * phase.norm();
        max_mag = max_mag.max(mag);
        if k == 0 || k == last {
            end_mag = end_mag.max(mag);
        }
        let w = grid.weight(k);
        sum.zip_apply(&m, |acc, v| *acc += w * phase * v);
    }
    let mut out = WithWarnings::clean(sum);
    if max_mag > 0.0 && end_mag > TAIL_TOL * max_mag {
        out = out.warn(format!(
            "mellin truncation: integrand magnitude {:.3e} at the τ ends ({:.1e} of max)",
            end_mag,
            end_mag / max_mag
        ));
    }
    Ok(out)
}

/// Trapezoid Mellin sum of a sampled profile (no strip policing — callers on
/// the hot path have already validated ζ).
pub fn mellin_of_samples(samples: &[Complex64], grid: &LogGrid, zeta: Complex64) -> Complex64 {
    debug_assert_eq!(samples.len(), grid.len());
    let mut sum = Complex64::ZERO;
    for (k, s) in samples.iter().enumerate() {
        if s.re == 0.0 && s.im == 0.0 {
            continue;
        }
        sum += grid.weight(k) * (-grid.taus()[k] * zeta).exp() * s;
    }
    sum
}

/// Mellin transform of one sampled profile at every point of a vertical line,
/// γ + iϱ_j. Uses a per-node phase recurrence (one complex multiply per line
/// point instead of an exponential) with periodic exact resynchronization.
pub fn mellin_line_table(
    samples: &[Complex64],
    grid: &LogGrid,
    gamma: f64,
    line: &LineGrid,
) -> Vec<Complex64> {
    debug_assert_eq!(samples.len(), grid.len());
    let rhos = line.rhos();
    let mut out = vec![Complex64::ZERO; rhos.len()];
    let max_mag = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    if max_mag == 0.0 {
        return out;
    }
    let (rho0, _) = line.bounds();
    let dstep = line.step();
    for (k, s) in samples.iter().enumerate() {
        if s.norm() <= NEGLIGIBLE * max_mag {
            continue;
        }
        let tau = grid.taus()[k];
        let c = grid.weight(k) * (-tau * gamma).exp() * s;
        let omega = Complex64::from_polar(1.0, -tau * dstep);
        let mut phase = Complex64::from_polar(1.0, -tau * rho0);
        for (j, o) in out.iter_mut().enumerate() {
            if j % RESYNC == 0 && j > 0 {
                phase = Complex64::from_polar(1.0, -tau * (rho0 + j as f64 * dstep));
            }
            *o += c * phase;
            phase *= omega;
        }
    }
    out
}

/// (1/2π) ∫ t^{-γ-iϱ} F(γ+iϱ) dϱ by trapezoid over the line grid, with a
/// truncation warning when |F| has not decayed at the line ends.
pub fn mellin_inverse(
    f_on_line: &dyn Fn(Complex64) -> Complex64,
    gamma: f64,
    t: f64,
    line: &LineGrid,
) -> WithWarnings<Complex64> {
    let samples: Vec<Complex64> =
        line.rhos().iter().map(|&rho| f_on_line(Complex64::new(gamma, rho))).collect();
    let value = mellin_inverse_from_line_samples(&samples, line, gamma, t);
    let max_mag = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let end_mag = samples
        .first()
        .map(|s| s.norm())
        .unwrap_or(0.0)
        .max(samples.last().map(|s| s.norm()).unwrap_or(0.0));
    let mut out = WithWarnings::clean(value);
    if max_mag > 0.0 && end_mag > END_TOL * max_mag {
        out = out.warn(format!(
            "mellin inverse truncation: |F| = {:.3e} at the line ends ({:.1e} of max)",
            end_mag,
            end_mag / max_mag
        ));
    }
    out
}

/// Inverse transform of line samples at one radius (phase recurrence in ϱ).
pub fn mellin_inverse_from_line_samples(
    samples: &[Complex64],
    line: &LineGrid,
    gamma: f64,
    t: f64,
) -> Complex64 {
    debug_assert_eq!(samples.len(), line.len());
    debug_assert!(t > 0.0);
    let lnt = t.ln();
    let (rho0, _) = line.bounds();
    let dstep = line.step();
    let omega = Complex64::from_polar(1.0, -lnt * dstep);
    let mut phase = Complex64::from_polar(1.0, -lnt * rho0);
    let mut sum = Complex64::ZERO;
    for (j, s) in samples.iter().enumerate() {
        if j % RESYNC == 0 && j > 0 {
            phase = Complex64::from_polar(1.0, -lnt * (rho0 + j as f64 * dstep));
        }
        sum += line.weight(j) * s * phase;
        phase *= omega;
    }
    t.powf(-gamma) * sum / crate::grid::TWO_PI
}
