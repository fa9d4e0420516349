//! Canonical transformation data and validation of its structural hypotheses.
//!
//! A transformation is described by a generating function S(x,t,p',τ') that is
//! linear in the physical block (x,t) and positively homogeneous of degree 1
//! in the dual block (p',τ'), together with an amplitude a (homogeneous of
//! degree m, regularized at zero frequency), a measure density μ (positive,
//! degree 0), and optionally the explicit point transformation g for the
//! sampled condition checks.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cutoffs::RadialBlend;
use crate::error::{CalculusError, Result};

/// Ambient/submanifold dimensions of the embedding; the distinguished point
/// is always the chart origin.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingSpec {
    pub n: usize,
    pub nu: usize,
    pub x0: Vec<f64>,
    pub box_radius: f64,
}

impl EmbeddingSpec {
    pub fn new(n: usize, box_radius: f64) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(CalculusError::Contract(format!(
                "ambient dimension must be even and positive, got {n}"
            )));
        }
        if !(box_radius > 0.0) {
            return Err(CalculusError::Contract(format!(
                "box_radius must be positive, got {box_radius}"
            )));
        }
        Ok(Self { n, nu: n / 2, x0: vec![0.0; n / 2], box_radius })
    }
}

pub type PhaseEval = Arc<dyn Fn(&[f64], &[f64], &[f64], &[f64]) -> f64 + Send + Sync>;
pub type PhaseGrad = Arc<dyn Fn(&[f64], &[f64], &[f64], &[f64], &mut [f64]) + Send + Sync>;

/// Phase S with caller-supplied analytic gradients in the physical block.
#[derive(Clone)]
pub struct GeneratingFunction {
    pub eval: PhaseEval,
    pub grad_x: PhaseGrad,
    pub grad_t: PhaseGrad,
}

impl GeneratingFunction {
    /// Bilinear family S = xᵀ(A p' + B τ') + tᵀ(C p' + D τ'); every linear-in-
    /// (x,t), degree-1-in-(p',τ') phase used in this project has this form.
    pub fn bilinear(nu: usize, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if m.len() != nu * nu {
                return Err(CalculusError::Contract(format!(
                    "coefficient block {name} must be {nu}x{nu}"
                )));
            }
        }
        let matvec = move |m: &[f64], v: &[f64], out: &mut [f64]| {
            for i in 0..out.len() {
                out[i] = (0..v.len()).map(|j| m[i * v.len() + j] * v[j]).sum();
            }
        };
        let (ae, be, ce, de) = (a.clone(), b.clone(), c.clone(), d.clone());
        let eval: PhaseEval = Arc::new(move |x, t, p, tau| {
            let mut s = 0.0;
            for i in 0..x.len() {
                let mut row = 0.0;
                for j in 0..p.len() {
                    row += ae[i * p.len() + j] * p[j] + be[i * p.len() + j] * tau[j];
                }
                s += x[i] * row;
                let mut row_t = 0.0;
                for j in 0..p.len() {
                    row_t += ce[i * p.len() + j] * p[j] + de[i * p.len() + j] * tau[j];
                }
                s += t[i] * row_t;
            }
            s
        });
        let (ag, bg) = (a.clone(), b.clone());
        let grad_x: PhaseGrad = Arc::new(move |_x, _t, p, tau, out| {
            let mut tmp = vec![0.0; out.len()];
            matvec(&ag, p, out);
            matvec(&bg, tau, &mut tmp);
            for i in 0..out.len() {
                out[i] += tmp[i];
            }
        });
        let (cg, dg) = (c, d);
        let matvec2 = move |m: &[f64], v: &[f64], out: &mut [f64]| {
            for i in 0..out.len() {
                out[i] = (0..v.len()).map(|j| m[i * v.len() + j] * v[j]).sum();
            }
        };
        let grad_t: PhaseGrad = Arc::new(move |_x, _t, p, tau, out| {
            let mut tmp = vec![0.0; out.len()];
            matvec2(&cg, p, out);
            matvec2(&dg, tau, &mut tmp);
            for i in 0..out.len() {
                out[i] += tmp[i];
            }
        });
        Ok(Self { eval, grad_x, grad_t })
    }
}

/// Amplitude a(p',τ'): a raw homogeneous formula of degree m, multiplied by a
/// radial switch that removes the singularity at zero frequency.
#[derive(Clone)]
pub struct Amplitude {
    raw: Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>,
    pub degree_m: f64,
    smoothing: Option<RadialBlend>,
}

impl Amplitude {
    pub fn new(
        raw: Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>,
        degree_m: f64,
        r0: f64,
        r1: f64,
    ) -> Result<Self> {
        Ok(Self { raw, degree_m, smoothing: Some(RadialBlend::rising(r0, r1)?) })
    }

    /// No regularization; only for amplitudes already finite at zero
    /// (the identity transformation's a ≡ 1).
    pub fn unsmoothed(
        raw: Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>,
        degree_m: f64,
    ) -> Self {
        Self { raw, degree_m, smoothing: None }
    }

    pub fn smoothing_radii(&self) -> Option<(f64, f64)> {
        self.smoothing.map(|b| (b.inner_radius(), b.outer_radius()))
    }

    pub fn eval(&self, p: &[f64], tau: &[f64]) -> Complex64 {
        match self.smoothing {
            None => (self.raw)(p, tau),
            Some(blend) => {
                let r = norm2(p, tau);
                let w = blend.eval(r);
                if w == 0.0 {
                    Complex64::ZERO // covers r = 0, where the raw formula may blow up
                } else {
                    w * (self.raw)(p, tau)
                }
            }
        }
    }

    /// The raw homogeneous formula, bypassing the switch (used by the
    /// homogenized kernel, which resamples at large radius).
    pub fn eval_raw(&self, p: &[f64], tau: &[f64]) -> Complex64 {
        (self.raw)(p, tau)
    }
}

/// Positive, degree-0 homogeneous measure density μ.
#[derive(Clone)]
pub struct MeasureDensity {
    eval: Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>,
}

impl MeasureDensity {
    pub fn new(eval: Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>) -> Self {
        Self { eval }
    }

    pub fn unit() -> Self {
        Self { eval: Arc::new(|_, _| 1.0) }
    }

    pub fn eval(&self, p: &[f64], tau: &[f64]) -> f64 {
        (self.eval)(p, tau)
    }
}

type VecMap = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;

/// Degree-1 homogeneous map h(p',τ') with optional analytic inverse
/// (p',η) ↦ τ' and analytic Jacobian |det ∂h⁻¹/∂η|.
#[derive(Clone)]
pub struct HomogeneousMap {
    pub h: VecMap,
    pub h_inv: Option<VecMap>,
    pub jacobian: Option<Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>>,
    nu: usize,
}

impl HomogeneousMap {
    pub fn new(nu: usize, h: VecMap) -> Self {
        Self { h, h_inv: None, jacobian: None, nu }
    }

    pub fn with_inverse(mut self, h_inv: VecMap) -> Self {
        self.h_inv = Some(h_inv);
        self
    }

    pub fn with_jacobian(
        mut self,
        jacobian: Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>,
    ) -> Self {
        self.jacobian = Some(jacobian);
        self
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn eval(&self, p: &[f64], tau: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nu];
        (self.h)(p, tau, &mut out);
        out
    }
}

type PointMap = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// The (g, a, μ) data of a quantized canonical transformation.
#[derive(Clone)]
pub struct CanonicalTransformSpec {
    pub embedding: EmbeddingSpec,
    pub phase: GeneratingFunction,
    pub amplitude: Amplitude,
    pub measure: MeasureDensity,
    /// Explicit transformation (x',t',p',τ') ↦ (x,t,p,τ) for condition checks.
    pub g_eval: Option<PointMap>,
    /// Analytic override for the induced map h and its inverse.
    pub hmap: Option<HomogeneousMap>,
}

impl CanonicalTransformSpec {
    /// √μ · a, with the amplitude's zero-frequency regularization applied.
    pub fn a_mu(&self, p: &[f64], tau: &[f64]) -> Complex64 {
        let a = self.amplitude.eval(p, tau);
        if a == Complex64::ZERO {
            return a;
        }
        self.measure.eval(p, tau).sqrt() * a
    }

    /// √μ · a without the regularizing switch.
    pub fn a_mu_raw(&self, p: &[f64], tau: &[f64]) -> Complex64 {
        self.measure.eval(p, tau).sqrt() * self.amplitude.eval_raw(p, tau)
    }

    /// The induced homogeneous map: the analytic override when supplied,
    /// otherwise ∂S/∂x at the origin (inverted numerically on demand).
    pub fn homogeneous_map(&self) -> HomogeneousMap {
        if let Some(h) = &self.hmap {
            return h.clone();
        }
        let nu = self.embedding.nu;
        let grad_x = self.phase.grad_x.clone();
        let zeros = vec![0.0; nu];
        HomogeneousMap::new(
            nu,
            Arc::new(move |p, tau, out| (grad_x)(&zeros, &zeros, p, tau, out)),
        )
    }
}

fn norm2(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().chain(b.iter()).map(|v| v * v).sum::<f64>()).sqrt()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// h(p',τ') = ∂S/∂x at the origin of the physical block.
pub fn derive_h(spec: &CanonicalTransformSpec, p: &[f64], tau: &[f64]) -> Result<Vec<f64>> {
    if norm2(p, tau) == 0.0 {
        return Err(CalculusError::Domain("derive_h at zero momentum".into()));
    }
    let nu = spec.embedding.nu;
    let zeros = vec![0.0; nu];
    let mut out = vec![0.0; nu];
    (spec.phase.grad_x)(&zeros, &zeros, p, tau, &mut out);
    Ok(out)
}

const NEWTON_MAX_ITER: usize = 60;
const FD_STEP: f64 = 1e-6;

/// Solve h(p', τ') = η for τ'.
///
/// The analytic inverse is used when the map carries one; otherwise a damped
/// Newton iteration runs on the unit sphere of (p', η) — degree-1 homogeneity
/// makes the rescaled problem O(1)-conditioned — and the solution is scaled
/// back.
pub fn invert_h(hmap: &HomogeneousMap, p: &[f64], eta: &[f64], tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(CalculusError::Contract(format!("invert_h needs tol > 0, got {tol}")));
    }
    let scale = norm2(p, eta);
    if scale == 0.0 {
        return Err(CalculusError::Domain("invert_h at zero (p', η)".into()));
    }
    if let Some(inv) = &hmap.h_inv {
        let mut out = vec![0.0; hmap.nu()];
        (inv)(p, eta, &mut out);
        return Ok(out);
    }

    let ps: Vec<f64> = p.iter().map(|v| v / scale).collect();
    let es: Vec<f64> = eta.iter().map(|v| v / scale).collect();
    let nu = hmap.nu();
    let mut tau = es.clone(); // h ≈ identity-in-τ' seeds well for every map in scope
    let mut res = vec![0.0; nu];
    let residual = |tau: &[f64], res: &mut [f64]| {
        (hmap.h)(&ps, tau, res);
        for i in 0..nu {
            res[i] -= es[i];
        }
    };
    residual(&tau, &mut res);
    let mut rnorm = norm(&res);
    for iter in 0..NEWTON_MAX_ITER {
        if rnorm <= tol {
            return Ok(tau.iter().map(|v| v * scale).collect());
        }
        // Finite-difference Jacobian of τ' ↦ h(p̂, τ').
        let mut jac = vec![0.0; nu * nu];
        let mut plus = vec![0.0; nu];
        let mut minus = vec![0.0; nu];
        for j in 0..nu {
            let mut tp = tau.clone();
            let mut tm = tau.clone();
            tp[j] += FD_STEP;
            tm[j] -= FD_STEP;
            (hmap.h)(&ps, &tp, &mut plus);
            (hmap.h)(&ps, &tm, &mut minus);
            for i in 0..nu {
                jac[i * nu + j] = (plus[i] - minus[i]) / (2.0 * FD_STEP);
            }
        }
        let step = solve_dense(&jac, &res, nu).ok_or(CalculusError::InversionFailure {
            residual: rnorm,
            iterations: iter,
        })?;
        // Damped update: halve until the residual decreases.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..10 {
            let cand: Vec<f64> =
                tau.iter().zip(&step).map(|(t, s)| t - lambda * s).collect();
            let mut cres = vec![0.0; nu];
            residual(&cand, &mut cres);
            let cnorm = norm(&cres);
            if cnorm < rnorm {
                tau = cand;
                res = cres;
                rnorm = cnorm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(CalculusError::InversionFailure { residual: rnorm, iterations: iter });
        }
    }
    if rnorm <= tol {
        return Ok(tau.iter().map(|v| v * scale).collect());
    }
    Err(CalculusError::InversionFailure { residual: rnorm, iterations: NEWTON_MAX_ITER })
}

fn solve_dense(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mat = nalgebra::DMatrix::from_row_slice(n, n, a);
    let rhs = nalgebra::DVector::from_column_slice(b);
    mat.lu().solve(&rhs).map(|v| v.iter().copied().collect())
}

/// |det ∂h⁻¹/∂η|(p', η), analytic when available, otherwise by central
/// differences of the (possibly Newton-backed) inverse.
///
/// The value is homogeneous of degree 0, so it is computed on the unit sphere
/// of (p', η); the finite-difference step is 1e-5 there (relative scaling).
pub fn jacobian_of_inverse(hmap: &HomogeneousMap, p: &[f64], eta: &[f64]) -> Result<f64> {
    let scale = norm2(p, eta);
    if scale == 0.0 {
        return Err(CalculusError::Domain("jacobian_of_inverse at zero (p', η)".into()));
    }
    if let Some(j) = &hmap.jacobian {
        return Ok((j)(p, eta));
    }
    let ps: Vec<f64> = p.iter().map(|v| v / scale).collect();
    let es: Vec<f64> = eta.iter().map(|v| v / scale).collect();
    let nu = hmap.nu();
    let step = 1e-5;
    let tol = 1e-10;
    let mut jac = vec![0.0; nu * nu];
    for j in 0..nu {
        let mut ep = es.clone();
        let mut em = es.clone();
        ep[j] += step;
        em[j] -= step;
        let tp = invert_h(hmap, &ps, &ep, tol)?;
        let tm = invert_h(hmap, &ps, &em, tol)?;
        for i in 0..nu {
            jac[i * nu + j] = (tp[i] - tm[i]) / (2.0 * step);
        }
    }
    let det = nalgebra::DMatrix::from_row_slice(nu, nu, &jac).determinant().abs();
    if det < 1e-12 {
        return Err(CalculusError::Degeneracy(det));
    }
    Ok(det)
}

/// Report of a sampled homogeneity check.
#[derive(Clone, Debug, Serialize)]
pub struct HomogeneityReport {
    pub degree: f64,
    pub samples: usize,
    pub max_violation: f64,
    pub pass: bool,
}

/// Samples f(c·w) = c^degree · f(w) with random points outside the exclusion
/// ball and random scales c ∈ [0.5, 4].
pub fn verify_homogeneity(
    f: &dyn Fn(&[f64]) -> Complex64,
    dim: usize,
    degree: f64,
    samples: usize,
    tol: f64,
    exclusion_radius: f64,
    seed: u64,
) -> Result<HomogeneityReport> {
    if samples == 0 {
        return Err(CalculusError::Contract("verify_homogeneity needs samples >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Base points at radius ≥ 2·exclusion so c ≥ 0.5 stays outside the ball.
    let r_lo = (2.0 * exclusion_radius).max(1.0);
    let mut max_violation = 0.0f64;
    for _ in 0..samples {
        let dir = random_direction(&mut rng, dim);
        let r = rng.random_range(r_lo..r_lo + 5.0);
        let c: f64 = rng.random_range(0.5..4.0);
        let w: Vec<f64> = dir.iter().map(|d| d * r).collect();
        let cw: Vec<f64> = w.iter().map(|v| c * v).collect();
        let base = f(&w);
        let scaled = f(&cw);
        let expect = c.powf(degree) * base;
        let denom = expect.norm().max(base.norm()).max(1e-300);
        max_violation = max_violation.max((scaled - expect).norm() / denom);
    }
    Ok(HomogeneityReport { degree, samples, max_violation, pass: max_violation <= tol })
}

fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// A sample that violated one of the condition checks.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub input: Vec<f64>,
    pub image: Vec<f64>,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionOutcome {
    pub pass: bool,
    pub checked: usize,
    pub witness: Option<Witness>,
}

/// Outcome of the three structural condition checks (fiber preservation and
/// graph projection; normal form over the distinguished fiber; conormal
/// avoidance).
#[derive(Clone, Debug, Serialize)]
pub struct ConditionsReport {
    pub condition_a: ConditionOutcome,
    pub condition_b: ConditionOutcome,
    pub condition_c: ConditionOutcome,
    pub pass: bool,
}

/// Sampled verification of the structural hypotheses on g.
///
/// (A) covectors over the origin stay over the origin, and graph points with
/// both base points on X avoid off-diagonal pairs; (B) the image of the
/// distinguished fiber has the normal form (0, 0, h(p',τ'), ·) with h matching
/// ∂S/∂x and behaving like a degree-1 diffeomorphism in τ'; (C) no conormal
/// covector of X maps to a conormal covector.
pub fn verify_conditions_ab(
    spec: &CanonicalTransformSpec,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<ConditionsReport> {
    let g = spec
        .g_eval
        .as_ref()
        .ok_or_else(|| {
            CalculusError::UnsupportedCheck("condition checks need an explicit g_eval".into())
        })?
        .clone();
    let nu = spec.embedding.nu;
    let boxr = spec.embedding.box_radius;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let point = |rng: &mut ChaCha8Rng,
                     x: Option<&[f64]>,
                     t: Option<&[f64]>,
                     p: Option<&[f64]>,
                     tau: Option<&[f64]>| {
        let mut w = vec![0.0; 4 * nu];
        let fill = |rng: &mut ChaCha8Rng, w: &mut [f64], lo: f64, hi: f64| {
            for v in w.iter_mut() {
                *v = rng.random_range(lo..hi);
            }
        };
        match x {
            Some(v) => w[0..nu].copy_from_slice(v),
            None => fill(rng, &mut w[0..nu], -boxr, boxr),
        }
        match t {
            Some(v) => w[nu..2 * nu].copy_from_slice(v),
            None => fill(rng, &mut w[nu..2 * nu], -boxr, boxr),
        }
        match p {
            Some(v) => w[2 * nu..3 * nu].copy_from_slice(v),
            None => fill(rng, &mut w[2 * nu..3 * nu], -5.0, 5.0),
        }
        match tau {
            Some(v) => w[3 * nu..4 * nu].copy_from_slice(v),
            None => fill(rng, &mut w[3 * nu..4 * nu], -5.0, 5.0),
        }
        w
    };
    let zeros = vec![0.0; nu];

    // Condition A, clause 1: the fiber over the origin is preserved.
    let mut cond_a = ConditionOutcome { pass: true, checked: 0, witness: None };
    for _ in 0..samples {
        let w = point(&mut rng, Some(&zeros), Some(&zeros), None, None);
        if norm(&w[2 * nu..4 * nu]) < 1e-9 {
            continue;
        }
        let img = g(&w);
        cond_a.checked += 1;
        if norm(&img[0..2 * nu]) > tol {
            cond_a.pass = false;
            cond_a.witness = Some(Witness {
                input: w,
                image: img,
                note: "covector over the origin left the distinguished fiber".into(),
            });
            break;
        }
    }
    // Condition A, clause 2: graph points with both bases on X project to no
    // off-diagonal (x, x') pair.
    if cond_a.pass {
        for _ in 0..samples {
            let w = point(&mut rng, None, Some(&zeros), None, None);
            if norm(&w[0..nu]) <= tol {
                continue; // clause 1 already covers the origin
            }
            let img = g(&w);
            cond_a.checked += 1;
            let on_x = norm(&img[nu..2 * nu]) <= tol;
            let offdiag = img[0..nu]
                .iter()
                .zip(&w[0..nu])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                > tol;
            if on_x && offdiag {
                cond_a.pass = false;
                cond_a.witness = Some(Witness {
                    input: w,
                    image: img,
                    note: "graph point over X × X projects off the diagonal".into(),
                });
                break;
            }
        }
    }

    // Condition B: image of the distinguished fiber is (0, 0, h(p',τ'), ·)
    // with h = ∂S/∂x(0,0,·), and h is homogeneous of degree 1.
    let mut cond_b = ConditionOutcome { pass: true, checked: 0, witness: None };
    for _ in 0..samples {
        let w = point(&mut rng, Some(&zeros), Some(&zeros), None, None);
        let (p, tau) = (&w[2 * nu..3 * nu], &w[3 * nu..4 * nu]);
        if norm2(p, tau) < 1e-6 {
            continue;
        }
        let img = g(&w);
        cond_b.checked += 1;
        let h = derive_h(spec, p, tau)?;
        let base_off = norm(&img[0..2 * nu]);
        let p_off = img[2 * nu..3 * nu]
            .iter()
            .zip(&h)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        // Degree-1 homogeneity of h at this sample.
        let c = rng.random_range(0.5..4.0);
        let pc: Vec<f64> = p.iter().map(|v| c * v).collect();
        let tc: Vec<f64> = tau.iter().map(|v| c * v).collect();
        let hc = derive_h(spec, &pc, &tc)?;
        let hom_off = hc
            .iter()
            .zip(&h)
            .map(|(a, b)| (a - c * b).abs())
            .fold(0.0, f64::max)
            / (1.0 + norm(&h));
        if base_off > tol || p_off > tol * (1.0 + norm(&h)) || hom_off > tol {
            cond_b.pass = false;
            cond_b.witness = Some(Witness {
                input: w,
                image: img,
                note: format!(
                    "normal form violated: base offset {base_off:.2e}, p offset {p_off:.2e}, homogeneity {hom_off:.2e}"
                ),
            });
            break;
        }
    }
    // Nondegeneracy of τ' ↦ h(p', τ') on a few samples.
    if cond_b.pass {
        let hmap = spec.homogeneous_map();
        for _ in 0..samples.min(16) {
            let w = point(&mut rng, Some(&zeros), Some(&zeros), None, None);
            let (p, tau) = (&w[2 * nu..3 * nu], &w[3 * nu..4 * nu]);
            if norm2(p, tau) < 1e-6 {
                continue;
            }
            let mut jac = vec![0.0; nu * nu];
            let mut plus = vec![0.0; nu];
            let mut minus = vec![0.0; nu];
            for j in 0..nu {
                let mut tp = tau.to_vec();
                let mut tm = tau.to_vec();
                tp[j] += FD_STEP;
                tm[j] -= FD_STEP;
                (hmap.h)(p, &tp, &mut plus);
                (hmap.h)(p, &tm, &mut minus);
                for i in 0..nu {
                    jac[i * nu + j] = (plus[i] - minus[i]) / (2.0 * FD_STEP);
                }
            }
            let det = nalgebra::DMatrix::from_row_slice(nu, nu, &jac).determinant().abs();
            cond_b.checked += 1;
            if det < 1e-10 {
                cond_b.pass = false;
                cond_b.witness = Some(Witness {
                    input: w.clone(),
                    image: vec![det],
                    note: "τ' ↦ h(p',τ') has a degenerate Jacobian".into(),
                });
                break;
            }
        }
    }

    // Condition C: conormal covectors (x, 0, 0, τ) must not map to conormal
    // covectors (equivalent to N₀*X ∩ g⁻¹(N₀*X) = ∅ sampled forward).
    let mut cond_c = ConditionOutcome { pass: true, checked: 0, witness: None };
    for _ in 0..samples {
        let w = point(&mut rng, None, Some(&zeros), Some(&zeros), None);
        if norm(&w[3 * nu..4 * nu]) < 1e-6 {
            continue;
        }
        let img = g(&w);
        cond_c.checked += 1;
        let tau_img = norm(&img[3 * nu..4 * nu]);
        let conormal =
            norm(&img[nu..2 * nu]) <= tol && norm(&img[2 * nu..3 * nu]) <= tol * (1.0 + tau_img);
        if conormal {
            cond_c.pass = false;
            cond_c.witness = Some(Witness {
                input: w,
                image: img,
                note: "conormal covector mapped to a conormal covector".into(),
            });
            break;
        }
    }

    let pass = cond_a.pass && cond_b.pass && cond_c.pass;
    Ok(ConditionsReport { condition_a: cond_a, condition_b: cond_b, condition_c: cond_c, pass })
}

/// Sample cloud of the graph of g restricted to both base points on X,
/// projected to (x, p; x', p').
#[derive(Clone, Debug, Serialize)]
pub struct TraceSampleReport {
    /// Each row is [x, p, x', p'] (ν components each).
    pub points: Vec<Vec<f64>>,
    pub band: f64,
    /// True when every surviving base point lies at the origin pair (within
    /// the band).
    pub concentrated_at_origin: bool,
}

/// Samples graph g, keeps points whose preimage and image base points both
/// lie on X (|t'| and |t| within the band), and projects out the t-block.
///
/// An empty cloud is a valid outcome (the restriction bands can be
/// incompatible), reported rather than raised.
pub fn lagrangian_trace_sample(
    spec: &CanonicalTransformSpec,
    samples: usize,
    band: f64,
    seed: u64,
) -> Result<TraceSampleReport> {
    let g = spec
        .g_eval
        .as_ref()
        .ok_or_else(|| {
            CalculusError::UnsupportedCheck("trace sampling needs an explicit g_eval".into())
        })?
        .clone();
    let nu = spec.embedding.nu;
    let boxr = spec.embedding.box_radius;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    let mut concentrated = true;
    for _ in 0..samples {
        let mut w = vec![0.0; 4 * nu];
        for v in w[0..nu].iter_mut() {
            *v = rng.random_range(-boxr..boxr);
        }
        // t' is drawn inside the restriction band — the filter rejects
        // everything else anyway.
        for v in w[nu..2 * nu].iter_mut() {
            *v = rng.random_range(-band..band);
        }
        for v in w[2 * nu..4 * nu].iter_mut() {
            *v = rng.random_range(-5.0..5.0);
        }
        if norm(&w[2 * nu..4 * nu]) < 1e-3 {
            continue;
        }
        let img = g(&w);
        if norm(&img[nu..2 * nu]) > band {
            continue;
        }
        let mut row = Vec::with_capacity(4 * nu);
        row.extend_from_slice(&img[0..nu]); // x
        row.extend_from_slice(&img[2 * nu..3 * nu]); // p
        row.extend_from_slice(&w[0..nu]); // x'
        row.extend_from_slice(&w[2 * nu..3 * nu]); // p'
        if norm(&row[0..nu]) > band || norm(&row[2 * nu..3 * nu]) > band {
            concentrated = false;
        }
        points.push(row);
    }
    if points.is_empty() {
        concentrated = false;
    }
    Ok(TraceSampleReport { points, band, concentrated_at_origin: concentrated })
}
