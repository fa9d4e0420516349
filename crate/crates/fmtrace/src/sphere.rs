//! Polar decomposition of dual variables and sphere quadrature.

use crate::error::{CalculusError, Result};
use crate::grid::TWO_PI;

/// p ↦ (|p|, p/|p|).
pub fn spherical_split(p: &[f64]) -> Result<(f64, Vec<f64>)> {
    let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(CalculusError::Domain("spherical_split of the zero vector".into()));
    }
    Ok((r, p.iter().map(|v| v / r).collect()))
}

/// Quadrature nodes and weights on S⁰ or S¹.
///
/// S⁰ is the two-point set {+1, -1} with unit weights; S¹ uses equispaced
/// angles with the trapezoid weight 2π/nodes (spectrally accurate on smooth
/// integrands).
pub fn sphere_quadrature(dim_sphere: usize, nodes: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    match dim_sphere {
        0 => Ok((vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0])),
        1 => {
            if nodes == 0 {
                return Err(CalculusError::Contract("S¹ quadrature needs nodes >= 1".into()));
            }
            let pts = (0..nodes)
                .map(|k| {
                    let th = TWO_PI * k as f64 / nodes as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect();
            Ok((pts, vec![TWO_PI / nodes as f64; nodes]))
        }
        d => Err(CalculusError::Unsupported(format!(
            "sphere dimension {d} (supported: 0 and 1)"
        ))),
    }
}
