//! Structured-mesh plane-stress finite elements and the Helmholtz-type
//! smoother shared by the design updates.

mod banded;
mod elasticity;
mod helmholtz;
mod mesh;

pub use banded::{BandCholesky, BandMatrix};
pub use elasticity::{
    assemble_and_solve, compliance, element_strains, state_from_displacement, ElasticSystem,
    ElementBasis, SolveState,
};
pub use helmholtz::{helmholtz_solve, HelmholtzSolver};
pub use mesh::{elements_to_nodes, ElementField, LoadPatch, Mesh, NodeField, Side, Support};
