//! Screened-Poisson smoothing `(Id − τΔ) w = f` with natural (Neumann)
//! boundary conditions, discretized with bilinear elements and a lumped
//! mass matrix: `(M + τK) w = M f`.

use crate::error::{Error, Result};

use super::banded::{BandCholesky, BandMatrix};
use super::mesh::{Mesh, NodeField};

/// Factored smoothing operator for one mesh and one `τ`.
pub struct HelmholtzSolver {
    mass: Vec<f64>,
    factor: Option<BandCholesky>,
    n_nodes: usize,
}

impl HelmholtzSolver {
    pub fn new(mesh: &Mesh, tau: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::Precondition(format!(
                "regularization must be nonnegative, got {tau}"
            )));
        }
        let n = mesh.n_nodes();
        let quarter = 0.25 * mesh.element_area();
        let mut mass = vec![0.0; n];
        for e in 0..mesh.n_elements() {
            for node in mesh.element_nodes(e) {
                mass[node] += quarter;
            }
        }
        let factor = if tau > 0.0 {
            let k = laplacian_element(mesh.hx(), mesh.hy());
            let mut band = BandMatrix::zeros(n, mesh.ny + 2);
            for (i, m) in mass.iter().enumerate() {
                band.add(i, i, *m);
            }
            for e in 0..mesh.n_elements() {
                let nodes = mesh.element_nodes(e);
                for a in 0..4 {
                    for b in 0..=a {
                        band.add(nodes[a], nodes[b], tau * k[a][b]);
                    }
                }
            }
            Some(band.factor()?)
        } else {
            None
        };
        Ok(Self {
            mass,
            factor,
            n_nodes: n,
        })
    }

    pub fn solve(&self, f: &NodeField) -> NodeField {
        assert_eq!(f.len(), self.n_nodes);
        match &self.factor {
            None => f.clone(),
            Some(factor) => {
                let mut rhs: Vec<f64> = f.iter().zip(&self.mass).map(|(v, m)| v * m).collect();
                factor.solve_in_place(&mut rhs);
                NodeField(rhs)
            }
        }
    }

    /// Lumped nodal areas; `Σ mass_n f_n` is the integral the solve preserves.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }
}

/// One-off solve; builds and factors the operator each call.
pub fn helmholtz_solve(mesh: &Mesh, f: &NodeField, tau: f64) -> Result<NodeField> {
    Ok(HelmholtzSolver::new(mesh, tau)?.solve(f))
}

/// Exact `∫ ∇N_a · ∇N_b` for a bilinear rectangle.
fn laplacian_element(hx: f64, hy: f64) -> [[f64; 4]; 4] {
    let xi = [-1.0, 1.0, 1.0, -1.0];
    let eta = [-1.0, -1.0, 1.0, 1.0];
    let r = hy / hx;
    let mut k = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let sx = xi[a] * xi[b];
            let sy = eta[a] * eta[b];
            k[a][b] = r / 12.0 * sx * (3.0 + sy) + 1.0 / (12.0 * r) * sy * (3.0 + sx);
        }
    }
    k
}
