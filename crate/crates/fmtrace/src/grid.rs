//! Periodic grids and the unitary discrete Fourier transform.
//!
//! Conventions (fixed project-wide):
//! forward  û(p) = (2π)^{-d/2} · spacing^d · Σ_x e^{-ipx} u(x),
//! inverse  u(x) = (2π)^{-d/2} · dual_spacing^d · Σ_p e^{ipx} û(p),
//! with dual_spacing = 2π/period, so for period 2π frequencies are the
//! integers in [-N/2, N/2) and the pair is unitary between the weighted
//! ℓ² spaces on the physical and dual grids.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{CalculusError, Result};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Uniform periodic grid, the same extent along every axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusGrid {
    dim: usize,
    points_per_axis: usize,
    period: f64,
}

impl TorusGrid {
    pub fn new(dim: usize, points_per_axis: usize, period: f64) -> Result<Self> {
        if dim == 0 || dim > 2 {
            return Err(CalculusError::Unsupported(format!(
                "grid dimension {dim} (supported: 1, 2)"
            )));
        }
        if points_per_axis < 8 || points_per_axis % 2 != 0 {
            return Err(CalculusError::Contract(format!(
                "points_per_axis must be even and >= 8, got {points_per_axis}"
            )));
        }
        if !(period > 0.0) {
            return Err(CalculusError::Contract(format!("period must be positive, got {period}")));
        }
        Ok(Self { dim, points_per_axis, period })
    }

    /// Standard chart: period 2π, integer dual frequencies.
    pub fn standard(dim: usize, points_per_axis: usize) -> Result<Self> {
        Self::new(dim, points_per_axis, TWO_PI)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.points_per_axis as f64
    }

    pub fn dual_spacing(&self) -> f64 {
        TWO_PI / self.period
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical coordinate of axis index i, in [0, period).
    pub fn point(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Physical coordinate folded to the symmetric chart (-period/2, period/2].
    pub fn chart(&self, i: usize) -> f64 {
        let x = self.point(i);
        if x > self.period / 2.0 {
            x - self.period
        } else {
            x
        }
    }

    /// Dual frequency of axis index i (FFT layout: 0,1,…,N/2-1,-N/2,…,-1).
    pub fn frequency(&self, i: usize) -> f64 {
        let n = self.points_per_axis;
        let k = if i < n / 2 { i as isize } else { i as isize - n as isize };
        k as f64 * self.dual_spacing()
    }

    /// Axis index of an integer frequency layer k ∈ [-N/2, N/2).
    pub fn frequency_index(&self, k: isize) -> usize {
        let n = self.points_per_axis as isize;
        debug_assert!(k >= -n / 2 && k < n / 2);
        k.rem_euclid(n) as usize
    }

    /// Flat index of a multi-index (row-major; axis 0 slowest).
    pub fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dim);
        idx.iter().fold(0, |acc, &i| acc * self.points_per_axis + i)
    }

    /// Quadrature weight of one node in the given space.
    pub fn node_weight(&self, space: SpaceTag) -> f64 {
        match space {
            SpaceTag::Physical => self.spacing().powi(self.dim as i32),
            SpaceTag::Dual => self.dual_spacing().powi(self.dim as i32),
        }
    }

    /// The sub-grid of the first `sub_dim` axes (same N and period).
    pub fn subgrid(&self, sub_dim: usize) -> Result<TorusGrid> {
        TorusGrid::new(sub_dim, self.points_per_axis, self.period)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceTag {
    Physical,
    Dual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Complex values on a [`TorusGrid`], tagged by which side of the Fourier
/// transform they live on.
#[derive(Clone, Debug)]
pub struct GridFunction {
    pub grid: TorusGrid,
    pub values: Vec<Complex64>,
    pub space: SpaceTag,
}

impl GridFunction {
    pub fn new(grid: TorusGrid, space: SpaceTag, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CalculusError::Contract(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, space })
    }

    pub fn zeros(grid: TorusGrid, space: SpaceTag) -> Self {
        Self { values: vec![Complex64::ZERO; grid.len()], grid, space }
    }

    /// Sample a function of the physical coordinates (axis order x, t).
    pub fn from_physical_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let n = grid.points_per_axis();
        let values = match grid.dim() {
            1 => (0..n).map(|i| f(&[grid.point(i)])).collect(),
            _ => {
                let mut v = Vec::with_capacity(grid.len());
                for i in 0..n {
                    for j in 0..n {
                        v.push(f(&[grid.point(i), grid.point(j)]));
                    }
                }
                v
            }
        };
        Self { grid, values, space: SpaceTag::Physical }
    }

    /// Grid-weighted L² norm.
    pub fn norm(&self) -> f64 {
        let w = self.grid.node_weight(self.space);
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * w).sqrt()
    }

    /// Grid-weighted inner product ⟨self, other⟩ = Σ u · conj(v) · w.
    pub fn inner(&self, other: &GridFunction) -> Result<Complex64> {
        if self.grid != other.grid || self.space != other.space {
            return Err(CalculusError::Contract(
                "inner product requires matching grids and spaces".into(),
            ));
        }
        let w = self.grid.node_weight(self.space);
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * w)
    }
}

/// Unitary DFT; `Forward` maps physical → dual, `Inverse` maps back.
pub fn dft(u: &GridFunction, direction: Direction) -> Result<GridFunction> {
    let required = match direction {
        Direction::Forward => SpaceTag::Physical,
        Direction::Inverse => SpaceTag::Dual,
    };
    if u.space != required {
        return Err(CalculusError::Contract(format!(
            "dft direction {direction:?} expects a {required:?} input, got {:?}",
            u.space
        )));
    }

    let n = u.grid.points_per_axis();
    let d = u.grid.dim();
    let mut planner = FftPlanner::<f64>::new();
    let fft = match direction {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    };

    let mut values = u.values.clone();
    // Axis 1 (contiguous rows), then axis 0 (strided columns).
    for row in values.chunks_exact_mut(n) {
        fft.process(row);
    }
    if d == 2 {
        let mut col = vec![Complex64::ZERO; n];
        for j in 0..n {
            for i in 0..n {
                col[i] = values[i * n + j];
            }
            fft.process(&mut col);
            for i in 0..n {
                values[i * n + j] = col[i];
            }
        }
    }

    // (2π)^{-d/2} · spacing^d forward, (2π)^{-d/2} · dual_spacing^d inverse
    // (rustfft leaves both directions unnormalized).
    let half = (TWO_PI).powf(-(d as f64) / 2.0);
    let scale = match direction {
        Direction::Forward => half * u.grid.spacing().powi(d as i32),
        Direction::Inverse => half * u.grid.dual_spacing().powi(d as i32),
    };
    for v in &mut values {
        *v *= scale;
    }

    Ok(GridFunction {
        grid: u.grid,
        values,
        space: match direction {
            Direction::Forward => SpaceTag::Dual,
            Direction::Inverse => SpaceTag::Physical,
        },
    })
}
