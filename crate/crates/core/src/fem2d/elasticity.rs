//! Plane-stress linear elasticity on the structured Q4 mesh.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::tensor2d::{Sym2, Tensor4};

use super::banded::{BandCholesky, BandMatrix};
use super::mesh::{ElementField, Mesh};

type Mat8 = SMatrix<f64, 8, 8>;
type Mat3x8 = SMatrix<f64, 3, 8>;

/// Reference shape-function derivatives on [-1, 1]².
const XI: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
const ETA: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];

/// Mandel strain-displacement matrix at reference point `(xi, eta)`.
fn b_matrix(hx: f64, hy: f64, xi: f64, eta: f64) -> Mat3x8 {
    let mut b = Mat3x8::zeros();
    for a in 0..4 {
        let dx = 0.25 * XI[a] * (1.0 + ETA[a] * eta) * 2.0 / hx;
        let dy = 0.25 * ETA[a] * (1.0 + XI[a] * xi) * 2.0 / hy;
        b[(0, 2 * a)] = dx;
        b[(1, 2 * a + 1)] = dy;
        b[(2, 2 * a)] = FRAC_1_SQRT_2 * dy;
        b[(2, 2 * a + 1)] = FRAC_1_SQRT_2 * dx;
    }
    b
}

/// Element stiffness is linear in the Mandel stiffness matrix:
/// `Ke = Σ_pq C_pq G_pq` with the nine basis matrices precomputed once for
/// the uniform cell size.
#[derive(Debug, Clone)]
pub struct ElementBasis {
    g: [[Mat8; 3]; 3],
    centroid_b: Mat3x8,
}

impl ElementBasis {
    pub fn new(hx: f64, hy: f64) -> Self {
        let gp = 1.0 / 3f64.sqrt();
        let det_j = 0.25 * hx * hy;
        let mut g = [[Mat8::zeros(); 3]; 3];
        for &xi in &[-gp, gp] {
            for &eta in &[-gp, gp] {
                let b = b_matrix(hx, hy, xi, eta);
                for (p, gp_row) in g.iter_mut().enumerate() {
                    for (q, gpq) in gp_row.iter_mut().enumerate() {
                        *gpq += b.row(p).transpose() * b.row(q) * det_j;
                    }
                }
            }
        }
        Self {
            g,
            centroid_b: b_matrix(hx, hy, 0.0, 0.0),
        }
    }

    pub fn stiffness(&self, c: &Tensor4) -> Mat8 {
        let m = c.mandel();
        let mut k = Mat8::zeros();
        for p in 0..3 {
            for q in 0..3 {
                let v = m[(p, q)];
                if v != 0.0 {
                    k += self.g[p][q] * v;
                }
            }
        }
        k
    }

    pub fn centroid_strain(&self, ue: &[f64; 8]) -> Sym2 {
        let v = self.centroid_b * SMatrix::<f64, 8, 1>::from_column_slice(ue);
        Sym2::from_mandel(&v)
    }
}

/// Displacements, centroid strains and compliance of one static solve.
#[derive(Debug, Clone)]
pub struct SolveState {
    pub displacement: Vec<f64>,
    pub strains: ElementField<Sym2>,
    pub compliance: f64,
}

impl SolveState {
    pub fn element_displacement(&self, mesh: &Mesh, elem: usize) -> [f64; 8] {
        let mut ue = [0.0; 8];
        for (a, n) in mesh.element_nodes(elem).iter().enumerate() {
            ue[2 * a] = self.displacement[2 * n];
            ue[2 * a + 1] = self.displacement[2 * n + 1];
        }
        ue
    }

    /// Per-element displacement magnitude at the centroid.
    pub fn displacement_magnitude(&self, mesh: &Mesh) -> Vec<f64> {
        (0..mesh.n_elements())
            .map(|e| {
                let ue = self.element_displacement(mesh, e);
                let ux = 0.25 * (ue[0] + ue[2] + ue[4] + ue[6]);
                let uy = 0.25 * (ue[1] + ue[3] + ue[5] + ue[7]);
                ux.hypot(uy)
            })
            .collect()
    }
}

/// Assembled and factored reduced stiffness for a fixed set of element
/// tensors. Reusable for several right-hand sides.
pub struct ElasticSystem {
    n_dofs: usize,
    /// Reduced index per global dof, `None` for constrained dofs.
    reduced: Vec<Option<usize>>,
    factor: BandCholesky,
    /// Global stiffness columns of the constrained dofs are needed only for
    /// nonzero prescribed values; kept as element matrices.
    elements: Vec<Mat8>,
}

impl ElasticSystem {
    pub fn assemble(mesh: &Mesh, tensors: &[Tensor4], fixed: &[usize]) -> Result<Self> {
        if tensors.len() != mesh.n_elements() {
            return Err(Error::Precondition(format!(
                "{} element tensors for {} elements",
                tensors.len(),
                mesh.n_elements()
            )));
        }
        if fixed.is_empty() {
            return Err(Error::Precondition(
                "no Dirichlet support: stiffness has rigid-body modes".into(),
            ));
        }
        let n_dofs = mesh.n_dofs();
        let mut reduced = vec![None; n_dofs];
        let mut is_fixed = vec![false; n_dofs];
        for &d in fixed {
            is_fixed[d] = true;
        }
        let mut next = 0;
        for d in 0..n_dofs {
            if !is_fixed[d] {
                reduced[d] = Some(next);
                next += 1;
            }
        }
        let n_free = next;
        let basis = ElementBasis::new(mesh.hx(), mesh.hy());
        let mut bw = 0;
        for e in 0..mesh.n_elements() {
            let idx = element_reduced(mesh, e, &reduced);
            let (lo, hi) = idx
                .iter()
                .flatten()
                .fold((usize::MAX, 0), |(lo, hi), &r| (lo.min(r), hi.max(r)));
            if hi >= lo {
                bw = bw.max(hi - lo);
            }
        }
        let mut band = BandMatrix::zeros(n_free, bw);
        let mut elements = Vec::with_capacity(mesh.n_elements());
        for (e, c) in tensors.iter().enumerate() {
            let ke = basis.stiffness(c);
            let idx = element_reduced(mesh, e, &reduced);
            for a in 0..8 {
                let Some(ra) = idx[a] else { continue };
                for b in 0..=a {
                    if let Some(rb) = idx[b] {
                        band.add(ra, rb, ke[(a, b)]);
                    }
                }
            }
            elements.push(ke);
        }
        let factor = band.factor()?;
        Ok(Self {
            n_dofs,
            reduced,
            factor,
            elements,
        })
    }

    /// Solves `K u = f` with `u = prescribed` on constrained dofs.
    pub fn solve(&self, mesh: &Mesh, forces: &[f64], prescribed: &[(usize, f64)]) -> Vec<f64> {
        let mut u = vec![0.0; self.n_dofs];
        for &(d, v) in prescribed {
            u[d] = v;
        }
        let mut rhs = vec![0.0; self.factor.dim()];
        for (d, r) in self.reduced.iter().enumerate() {
            if let Some(r) = r {
                rhs[*r] = forces[d];
            }
        }
        if prescribed.iter().any(|&(_, v)| v != 0.0) {
            for (e, ke) in self.elements.iter().enumerate() {
                let dofs = element_dofs(mesh, e);
                for a in 0..8 {
                    let Some(ra) = self.reduced[dofs[a]] else { continue };
                    for b in 0..8 {
                        if self.reduced[dofs[b]].is_none() {
                            rhs[ra] -= ke[(a, b)] * u[dofs[b]];
                        }
                    }
                }
            }
        }
        self.factor.solve_in_place(&mut rhs);
        for (d, r) in self.reduced.iter().enumerate() {
            if let Some(r) = r {
                u[d] = rhs[*r];
            }
        }
        u
    }

    /// `uᵀ K u` through the element matrices.
    pub fn energy_norm(&self, mesh: &Mesh, u: &[f64]) -> f64 {
        self.elements
            .iter()
            .enumerate()
            .map(|(e, ke)| {
                let dofs = element_dofs(mesh, e);
                let ue = SMatrix::<f64, 8, 1>::from_fn(|a, _| u[dofs[a]]);
                (ue.transpose() * ke * ue)[(0, 0)]
            })
            .sum()
    }
}

fn element_dofs(mesh: &Mesh, e: usize) -> [usize; 8] {
    let n = mesh.element_nodes(e);
    [
        2 * n[0],
        2 * n[0] + 1,
        2 * n[1],
        2 * n[1] + 1,
        2 * n[2],
        2 * n[2] + 1,
        2 * n[3],
        2 * n[3] + 1,
    ]
}

fn element_reduced(mesh: &Mesh, e: usize, reduced: &[Option<usize>]) -> [Option<usize>; 8] {
    element_dofs(mesh, e).map(|d| reduced[d])
}

/// Centroid strains of every element.
pub fn element_strains(mesh: &Mesh, u: &[f64]) -> ElementField<Sym2> {
    let basis = ElementBasis::new(mesh.hx(), mesh.hy());
    ElementField(
        (0..mesh.n_elements())
            .map(|e| {
                let dofs = element_dofs(mesh, e);
                basis.centroid_strain(&dofs.map(|d| u[d]))
            })
            .collect(),
    )
}

/// Solves static equilibrium with the mesh supports and a uniform traction
/// on the mesh load patch.
pub fn assemble_and_solve(
    mesh: &Mesh,
    tensors: &ElementField<Tensor4>,
    traction: [f64; 2],
) -> Result<SolveState> {
    let fixed = mesh.fixed_dofs();
    let system = ElasticSystem::assemble(mesh, tensors, &fixed)?;
    let forces = mesh.traction_forces(traction);
    let u = system.solve(mesh, &forces, &[]);
    Ok(state_from_displacement(mesh, u, &forces))
}

pub fn state_from_displacement(mesh: &Mesh, u: Vec<f64>, forces: &[f64]) -> SolveState {
    let strains = element_strains(mesh, &u);
    let compliance = work(forces, &u);
    SolveState {
        displacement: u,
        strains,
        compliance,
    }
}

/// Boundary work `∫ t·u dΓ` for the traction on the mesh load patch.
pub fn compliance(mesh: &Mesh, state: &SolveState, traction: [f64; 2]) -> f64 {
    work(&mesh.traction_forces(traction), &state.displacement)
}

fn work(f: &[f64], u: &[f64]) -> f64 {
    f.iter().zip(u).map(|(a, b)| a * b).sum()
}
