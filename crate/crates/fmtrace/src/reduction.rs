//! Reduced trace on the dual lattice, realized through two independent
//! routes.
//!
//! The reduced trace is the traced operator conjugated by the Fourier
//! transform and framed by the Sobolev multipliers |p|^{s−m−ν} and |p|^{−s}.
//! It can be computed literally — composition, transform, multipliers — or
//! through the Mellin symbol acting on radial profiles.  Agreement of the two
//! routes (up to the dual measure factor) is the main equivalence this crate
//! is built to witness, so both are kept first-class here.

use num_complex::Complex64;

use crate::error::{Result, WithWarnings};
use crate::fio::QuantizedTransform;
use crate::fm_apply::{apply_fourier_mellin, Cutoff, CutoffPair};
use crate::geometry::CanonicalTransformSpec;
use crate::grid::{dft, Direction, GridFunction, SpaceTag, TorusGrid};
use crate::mellin::{LineGrid, LogGrid};
use crate::symbol::{SphereOperatorFamily, SymbolFamily};
use crate::trace::{dual_measure_factor, dual_trace_kernel, trace_compose_oracle, DualKernel, SobolevWeights};

/// Everything needed to run both routes against each other.
pub struct ReducedTraceSetup {
    spec: CanonicalTransformSpec,
    qt: QuantizedTransform,
    symbol: SymbolFamily,
    weights: SobolevWeights,
    gamma: f64,
    sub: TorusGrid,
    psi: Cutoff,
    log_grid: LogGrid,
    line: LineGrid,
}

impl ReducedTraceSetup {
    /// Builds the quantized operator, the dual kernel, and its Mellin symbol
    /// for one transformation on one ambient grid.
    pub fn new(
        spec: CanonicalTransformSpec,
        ambient: TorusGrid,
        s: f64,
        psi: Cutoff,
        log_grid: LogGrid,
        line: LineGrid,
    ) -> Result<Self> {
        let nu = ambient.dim() / 2;
        let weights = SobolevWeights::new(s, spec.amplitude.degree_m, nu)?;
        let gamma = ambient.dim() as f64 / 4.0;
        let kernel = DualKernel::from_spec(spec.clone());
        let family = SphereOperatorFamily::new(&kernel, weights, 2, log_grid.clone())?;
        let symbol = SymbolFamily::from_family(family);
        let qt = QuantizedTransform::new(spec.clone(), ambient)?;
        let sub = ambient.subgrid(1)?;
        Ok(Self { spec, qt, symbol, weights, gamma, sub, psi, log_grid, line })
    }

    pub fn quantized(&self) -> &QuantizedTransform {
        &self.qt
    }

    pub fn symbol(&self) -> &SymbolFamily {
        &self.symbol
    }

    pub fn weights(&self) -> SobolevWeights {
        self.weights
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sub_grid(&self) -> TorusGrid {
        self.sub
    }

    /// ψ(|p|)·|p|^pow, with the zero frequency sent to zero (every pow used
    /// here is positive, and ψ vanishes near zero anyway).
    fn dual_multiplier(&self, p: f64, pow: f64) -> f64 {
        if p == 0.0 {
            return 0.0;
        }
        self.psi.eval(p.abs()) * p.abs().powf(pow)
    }

    /// Literal route: multipliers around the Fourier-conjugated composition.
    pub fn oracle_route(&self, vhat: &GridFunction) -> Result<WithWarnings<GridFunction>> {
        let n = self.sub.len();
        let mut win = vhat.clone();
        for i in 0..n {
            let p = self.sub.frequency(i);
            win.values[i] *= self.dual_multiplier(p, -self.weights.s);
        }
        let w_phys = dft(&win, Direction::Inverse)?;
        let traced = trace_compose_oracle(&self.qt, &w_phys)?;
        let mut ohat = dft(&traced.value, Direction::Forward)?;
        let pow = self.weights.s - self.weights.m - self.weights.nu as f64;
        for i in 0..n {
            let p = self.sub.frequency(i);
            ohat.values[i] *= self.dual_multiplier(p, pow);
        }
        Ok(WithWarnings { value: ohat, warnings: traced.warnings })
    }

    /// Symbol route: the Mellin pipeline on radial profiles, scaled by the
    /// dual measure factor (2π)^{−ν}.
    pub fn mellin_route(&self, vhat: &GridFunction) -> Result<WithWarnings<GridFunction>> {
        let u = dft(vhat, Direction::Inverse)?;
        let pair = CutoffPair { phi: Cutoff::One, psi: self.psi };
        let applied =
            apply_fourier_mellin(&self.symbol, self.gamma, &u, &pair, &self.log_grid, &self.line)?;
        let mut out = dft(&applied.value, Direction::Forward)?;
        let factor = dual_measure_factor(self.weights.nu);
        for v in out.values.iter_mut() {
            *v *= factor;
        }
        Ok(WithWarnings { value: out, warnings: applied.warnings })
    }

    /// Dual-kernel prediction of one Fourier-conjugated trace column: the
    /// response at frequency q to the plane wave e^{ikx} is
    /// (2π)^{−ν}·b(q,k)·δ_dual.  Valid away from the smoothing zone and the
    /// Nyquist wrap, so callers restrict to an annulus of (q,k) radii.
    pub fn kernel_column(&self, k: isize) -> Result<Vec<Complex64>> {
        let n = self.sub.len();
        let factor = dual_measure_factor(self.weights.nu) * self.sub.node_weight(SpaceTag::Dual);
        let p_src = [k as f64 * self.sub.dual_spacing()];
        let mut col = vec![Complex64::ZERO; n];
        for (i, slot) in col.iter_mut().enumerate() {
            let q = self.sub.frequency(i);
            *slot = factor * dual_trace_kernel(&self.spec, &[q], &p_src)?;
        }
        Ok(col)
    }

    /// Gaussian shell exp(−(|p|−c)²/2σ²) as a dual-side grid function.
    pub fn gaussian_shell(&self, center: f64, sigma: f64) -> GridFunction {
        let mut v = GridFunction::zeros(self.sub, SpaceTag::Dual);
        for i in 0..self.sub.len() {
            let p = self.sub.frequency(i).abs();
            let u = (p - center) / sigma;
            v.values[i] = Complex64::new((-0.5 * u * u).exp(), 0.0);
        }
        v
    }

    /// The dual spike δ_k, i.e. the transform of the plane wave e^{ikx}.
    pub fn dual_spike(&self, k: isize) -> GridFunction {
        let mut v = GridFunction::zeros(self.sub, SpaceTag::Dual);
        v.values[self.sub.frequency_index(k)] = Complex64::ONE;
        v
    }
}

/// ‖a − b‖/‖b‖ over raw coefficient vectors; zero reference with zero
/// difference counts as zero.
pub fn rel_difference(a: &GridFunction, b: &GridFunction) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..a.values.len() {
        num += (a.values[i] - b.values[i]).norm_sqr();
        den += b.values[i].norm_sqr();
    }
    if den == 0.0 {
        return num.sqrt();
    }
    (num / den).sqrt()
}
