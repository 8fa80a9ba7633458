//! Topological derivatives of compliance and weight for circular inclusions
//! in anisotropic 2D plane-stress media.
//!
//! Convention: `A^{ab}` is the moment tensor for inserting material `b`
//! into background `a`. With `ΔC = C^b − C^a` and `S` the interior Eshelby
//! tensor of the background,
//!
//! ```text
//! A^{ab} = C^a (C^a + ΔC S)⁻¹ ΔC,     D_{a→b} J_C = −E : A^{ab} : E.
//! ```

mod eshelby;
mod sensitivity;
mod table;

pub use eshelby::{eshelby_interior, eshelby_with, QuadratureRule};
pub use sensitivity::{compute_sensitivities, extended_td, SensitivityField};
pub use table::{interp_periodic, quadratic_vertex, DerivativeTable, ThetaStar, TABLE_FORMAT_VERSION};

use crate::error::Result;
use crate::tensor2d::{MaterialCatalog, Phase, Sym2, Tensor4};

/// Moment tensor for inserting `cb` into background `ca`.
pub fn elastic_moment(ca: &Tensor4, cb: &Tensor4) -> Result<Tensor4> {
    if ca == cb {
        return Ok(Tensor4::zero());
    }
    let s = eshelby_interior(ca)?;
    elastic_moment_with(ca, cb, &s)
}

/// Moment tensor with a precomputed background Eshelby tensor.
pub fn elastic_moment_with(ca: &Tensor4, cb: &Tensor4, s: &Tensor4) -> Result<Tensor4> {
    if ca == cb {
        return Ok(Tensor4::zero());
    }
    let dc = *cb - *ca;
    let mixed = *ca + dc * *s;
    Ok(*ca * mixed.inverse()? * dc)
}

/// `−E : A : E`.
#[inline]
pub fn td_compliance(e: &Sym2, a: &Tensor4) -> f64 {
    -a.quadratic(e)
}

/// `ρ_b − ρ_a`.
pub fn td_weight(a: Phase, b: Phase, catalog: &MaterialCatalog) -> f64 {
    catalog.density(b) - catalog.density(a)
}
