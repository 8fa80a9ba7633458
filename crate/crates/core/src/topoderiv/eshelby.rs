//! Interior Eshelby tensor of a circular inclusion by angular quadrature:
//!
//! ```text
//! S_ijmn = (1/π) ∫_{-π/2}^{π/2} ½(N_ik α_j + N_jk α_i) α_l C_klmn dθ
//! ```
//!
//! with `α = (cos θ, sin θ)` and `N` the inverse acoustic tensor.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::tensor2d::{Full4, Tensor4};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    /// Gauss points per panel.
    pub order: usize,
    /// Panels of the first pass; `order * panels` is the base point count.
    pub panels: usize,
    pub tolerance: f64,
    pub max_refinements: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self {
            order: 8,
            panels: 8,
            tolerance: 1e-10,
            max_refinements: 8,
        }
    }
}

pub fn eshelby_interior(c: &Tensor4) -> Result<Tensor4> {
    eshelby_with(c, &QuadratureRule::default())
}

/// Composite Gauss-Legendre with panel doubling until the largest
/// component change drops below the tolerance.
pub fn eshelby_with(c: &Tensor4, rule: &QuadratureRule) -> Result<Tensor4> {
    let (nodes, weights) = gauss_legendre(rule.order);
    let cf = c.to_full();
    let mut panels = rule.panels;
    let mut prev = integrate(&cf, &nodes, &weights, panels)?;
    let mut change = f64::INFINITY;
    for _ in 0..rule.max_refinements {
        panels *= 2;
        let next = integrate(&cf, &nodes, &weights, panels)?;
        change = (next - prev).max_abs();
        prev = next;
        if change < rule.tolerance {
            return Ok(prev);
        }
    }
    Err(Error::QuadratureFailure {
        refinements: rule.max_refinements,
        change,
    })
}

fn integrate(c: &Full4, nodes: &[f64], weights: &[f64], panels: usize) -> Result<Tensor4> {
    let width = PI / panels as f64;
    let mut acc: Full4 = Default::default();
    for p in 0..panels {
        let mid = -FRAC_PI_2 + (p as f64 + 0.5) * width;
        for (x, w) in nodes.iter().zip(weights) {
            let t = mid + 0.5 * width * x;
            let alpha = Vector2::new(t.cos(), t.sin());
            let n = acoustic_tensor_full(c, alpha)?;
            let wt = 0.5 * width * w / PI;
            // G_ijkl = ½(N_ik α_j + N_jk α_i) α_l
            for i in 0..2 {
                for j in 0..2 {
                    for m in 0..2 {
                        for q in 0..2 {
                            let mut s = 0.0;
                            for k in 0..2 {
                                for l in 0..2 {
                                    let g = 0.5 * (n[(i, k)] * alpha[j] + n[(j, k)] * alpha[i]) * alpha[l];
                                    s += g * c[k][l][m][q];
                                }
                            }
                            acc[i][j][m][q] += wt * s;
                        }
                    }
                }
            }
        }
    }
    Ok(Tensor4::from_full(&acc))
}

fn acoustic_tensor_full(c: &Full4, alpha: Vector2<f64>) -> Result<Matrix2<f64>> {
    let k = Matrix2::from_fn(|i, k| {
        let mut s = 0.0;
        for j in 0..2 {
            for l in 0..2 {
                s += c[i][j][k][l] * alpha[j] * alpha[l];
            }
        }
        s
    });
    k.try_inverse().ok_or(Error::SingularTensor {
        condition: f64::INFINITY,
    })
}

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}
