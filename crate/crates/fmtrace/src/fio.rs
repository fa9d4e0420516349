//! Grid realization of the quantized transformation: oscillatory sum over the
//! dual lattice with the regularized symbol √μ·a.
//!
//!   (Φu)(x,t) = (2π)^{-n/2} Σ_{p',τ'} e^{iS(x,t,p',τ')} (√μ a)(p',τ') û(p',τ') δp,
//!
//! the momentum integral replaced by its lattice Riemann sum (δp = node
//! weight on the dual grid). Linearity of S in (x,t) is a standing
//! hypothesis; the constructor spot-checks it and the evaluation exploits it
//! by splitting e^{iS} into per-axis factors.

use num_complex::Complex64;

use crate::error::{CalculusError, Result, WithWarnings};
use crate::geometry::CanonicalTransformSpec;
use crate::grid::{dft, Direction, GridFunction, SpaceTag, TorusGrid, TWO_PI};

/// Dual coefficients with |c| below this fraction of the largest one cannot
/// move the sum above machine precision and are skipped.
const COEFF_SKIP: f64 = 1e-30;
/// Fraction of dual mass at the Nyquist layer that triggers an aliasing
/// warning.
const NYQUIST_MASS_TOL: f64 = 1e-6;

/// A transformation bound to a grid, with the dual-node tables
/// (√μ·a and the phase gradients) precomputed.
pub struct QuantizedTransform {
    spec: CanonicalTransformSpec,
    grid: TorusGrid,
    amu: Vec<Complex64>,
    grad_x: Vec<f64>,
    grad_t: Vec<f64>,
}

impl QuantizedTransform {
    pub fn new(spec: CanonicalTransformSpec, grid: TorusGrid) -> Result<Self> {
        if grid.dim() != spec.embedding.n {
            return Err(CalculusError::Contract(format!(
                "grid dimension {} does not match ambient dimension {}",
                grid.dim(),
                spec.embedding.n
            )));
        }
        let nu = spec.embedding.nu;
        let n = grid.points_per_axis();
        let zeros = vec![0.0; nu];

        let mut amu = Vec::with_capacity(grid.len());
        let mut grad_x = Vec::with_capacity(grid.len() * nu);
        let mut grad_t = Vec::with_capacity(grid.len() * nu);
        let mut gx = vec![0.0; nu];
        let mut gt = vec![0.0; nu];
        for i in 0..n {
            for j in 0..n {
                let p = [grid.frequency(i)];
                let tau = [grid.frequency(j)];
                amu.push(spec.a_mu(&p, &tau));
                (spec.phase.grad_x)(&zeros, &zeros, &p, &tau, &mut gx);
                (spec.phase.grad_t)(&zeros, &zeros, &p, &tau, &mut gt);
                grad_x.extend_from_slice(&gx);
                grad_t.extend_from_slice(&gt);
            }
        }

        let qt = Self { spec, grid, amu, grad_x, grad_t };
        qt.check_linearity()?;
        Ok(qt)
    }

    /// S must be exactly linear in (x, t); sampled against its gradients.
    fn check_linearity(&self) -> Result<()> {
        let probes_xt = [(0.5, 0.3), (-1.2, 2.0), (0.9, -0.7)];
        let probes_ptau = [(1.0, 0.0), (0.0, 1.0), (2.0, -3.0)];
        let zeros = [0.0];
        let mut gx = [0.0];
        let mut gt = [0.0];
        for &(p, tau) in &probes_ptau {
            (self.spec.phase.grad_x)(&zeros, &zeros, &[p], &[tau], &mut gx);
            (self.spec.phase.grad_t)(&zeros, &zeros, &[p], &[tau], &mut gt);
            for &(x, t) in &probes_xt {
                let s = (self.spec.phase.eval)(&[x], &[t], &[p], &[tau]);
                let lin = gx[0] * x + gt[0] * t;
                if (s - lin).abs() > 1e-9 * (1.0 + s.abs()) {
                    return Err(CalculusError::Contract(format!(
                        "phase is not linear in the physical block: S({x},{t};{p},{tau}) = {s}, linear model {lin}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &CanonicalTransformSpec {
        &self.spec
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// √μ·a at the dual node with this flat index.
    pub fn amu_at(&self, flat: usize) -> Complex64 {
        self.amu[flat]
    }

    /// ∂S/∂x(0,0,·) at the dual node (the frequency reached over the origin).
    pub fn grad_x_at(&self, flat: usize) -> &[f64] {
        let nu = self.spec.embedding.nu;
        &self.grad_x[flat * nu..(flat + 1) * nu]
    }

    pub fn grad_t_at(&self, flat: usize) -> &[f64] {
        let nu = self.spec.embedding.nu;
        &self.grad_t[flat * nu..(flat + 1) * nu]
    }
}

fn nyquist_warnings(hat: &GridFunction) -> Vec<String> {
    let n = hat.grid.points_per_axis();
    let total: f64 = hat.values.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return Vec::new();
    }
    let mut warnings = Vec::new();
    for axis in 0..hat.grid.dim() {
        let mass: f64 = match (hat.grid.dim(), axis) {
            (1, _) => hat.values[n / 2].norm_sqr(),
            (_, 0) => (0..n).map(|j| hat.values[(n / 2) * n + j].norm_sqr()).sum(),
            _ => (0..n).map(|i| hat.values[i * n + n / 2].norm_sqr()).sum(),
        };
        let frac = mass / total;
        if frac > NYQUIST_MASS_TOL {
            warnings.push(format!(
                "nyquist axis {axis}: Nyquist layer holds {frac:.2e} of the dual mass; the input is not band-limited on this grid"
            ));
        }
    }
    warnings
}

/// Apply the quantized transformation to a physical-space grid function.
///
/// Inputs with significant mass at the Nyquist layer produce a per-axis
/// warning (prefix `nyquist axis {k}`): the oscillatory sum is still computed,
/// but frequencies at the grid edge alias under the phase.
pub fn apply_fio(qt: &QuantizedTransform, u: &GridFunction) -> Result<WithWarnings<GridFunction>> {
    if u.grid != qt.grid {
        return Err(CalculusError::Contract("input grid does not match the transform grid".into()));
    }
    let hat = dft(u, Direction::Forward)?;
    let warnings = nyquist_warnings(&hat);

    let grid = qt.grid;
    let n = grid.points_per_axis();
    let d = grid.dim();
    let scale = TWO_PI.powf(-(d as f64) / 2.0) * grid.node_weight(SpaceTag::Dual);

    let coeffs: Vec<Complex64> =
        hat.values.iter().zip(&qt.amu).map(|(uh, a)| uh * a).collect();
    let cmax = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let skip = COEFF_SKIP * cmax;

    let mut out = vec![Complex64::ZERO; grid.len()];
    let mut ex = vec![Complex64::ZERO; n];
    let mut et = vec![Complex64::ZERO; n];
    for (node, &c) in coeffs.iter().enumerate() {
        if c.norm() <= skip {
            continue;
        }
        let gx = qt.grad_x[node];
        let gt = qt.grad_t[node];
        for j in 0..n {
            ex[j] = Complex64::from_polar(1.0, gx * grid.chart(j));
            et[j] = Complex64::from_polar(1.0, gt * grid.chart(j));
        }
        for i in 0..n {
            let ci = c * ex[i];
            for (o, e) in out[i * n..(i + 1) * n].iter_mut().zip(&et) {
                *o += ci * e;
            }
        }
    }
    for v in &mut out {
        *v *= scale;
    }

    let result = GridFunction::new(grid, SpaceTag::Physical, out)?;
    Ok(WithWarnings { value: result, warnings })
}

/// Schwartz kernel K(x,t,x',t') of the quantized transformation, evaluated
/// with all four coordinates snapped to the nearest grid node:
///
///   K = (2π)^{-n} Σ_{p',τ'} e^{iS(x,t,p',τ')} (√μ a)(p',τ') e^{-i(x'p' + t'τ')} δp.
///
/// Applying it as an integral operator with the physical node weight
/// reproduces [`apply_fio`] exactly.
pub fn fio_schwartz_kernel(qt: &QuantizedTransform, xt: &[f64], xt_src: &[f64]) -> Result<Complex64> {
    let d = qt.grid.dim();
    if xt.len() != d || xt_src.len() != d {
        return Err(CalculusError::Contract(format!(
            "kernel arguments must have {d} coordinates"
        )));
    }
    let grid = qt.grid;
    let n = grid.points_per_axis();
    let snap = |x: f64| -> f64 {
        let i = (x / grid.spacing()).round().rem_euclid(n as f64) as usize % n;
        grid.chart(i)
    };
    let x = snap(xt[0]);
    let t = snap(xt[1]);
    let xs = snap(xt_src[0]);
    let ts = snap(xt_src[1]);

    let amax = qt.amu.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let skip = COEFF_SKIP * amax;
    let mut sum = Complex64::ZERO;
    for i in 0..n {
        let p = grid.frequency(i);
        for j in 0..n {
            let node = i * n + j;
            let a = qt.amu[node];
            if a.norm() <= skip {
                continue;
            }
            let tau = grid.frequency(j);
            let phase = qt.grad_x[node] * x + qt.grad_t[node] * t - p * xs - tau * ts;
            sum += a * Complex64::from_polar(1.0, phase);
        }
    }
    Ok(sum * TWO_PI.powi(-(d as i32)) * grid.node_weight(SpaceTag::Dual))
}
