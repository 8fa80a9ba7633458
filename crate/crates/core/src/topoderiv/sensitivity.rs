//! Per-element Lagrangian sensitivities, estimated optimal orientations and
//! the extended derivatives that drive the level sets.

use super::table::DerivativeTable;
use crate::error::{Error, Result};
use crate::orientation::theta_from_aux;
use crate::tensor2d::{MaterialCatalog, Phase, Sym2};
use crate::xls::PAIRS;

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityField {
    /// `D*_{a→b} L` indexed `[a][b]` by phase index, weighted by the source
    /// fraction `χ̃_a`. The diagonal is unused and zero.
    pub directed: Vec<[[f64; 3]; 3]>,
    /// Estimated optimal fiber angle per element.
    pub theta_star: Vec<f64>,
    /// No background produced a usable orientation; `theta_star` is the
    /// current angle.
    pub degenerate: Vec<bool>,
    /// `D_ab L` for the stored pairs `(V,I)`, `(V,F)`, `(I,F)`.
    pub pairwise: [Vec<f64>; 3],
}

/// `D_ab = D*_{a→b} − D*_{b→a} + D*_{c→b} − D*_{c→a}` for the stored pairs.
pub fn extended_td(directed: &[[f64; 3]; 3]) -> [f64; 3] {
    PAIRS.map(|(a, b)| {
        let c = a.third(b);
        let d = |x: Phase, y: Phase| directed[x.index()][y.index()];
        d(a, b) - d(b, a) + d(c, b) - d(c, a)
    })
}

/// Evaluates every directed derivative with the multiplier `lambda` held
/// fixed. `angles` is the current per-element fiber angle.
pub fn compute_sensitivities(
    table: &DerivativeTable,
    catalog: &MaterialCatalog,
    fractions: &[[f64; 3]],
    strains: &[Sym2],
    angles: &[f64],
    lambda: f64,
) -> Result<SensitivityField> {
    let ne = fractions.len();
    if strains.len() != ne || angles.len() != ne {
        return Err(Error::Precondition("sensitivity inputs differ in length".into()));
    }
    let rho = Phase::ALL.map(|p| catalog.density(p));
    let mut directed = Vec::with_capacity(ne);
    let mut theta_star = Vec::with_capacity(ne);
    let mut degenerate = Vec::with_capacity(ne);
    let mut pairwise: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(ne));
    for e in 0..ne {
        let (chi, strain, theta) = (&fractions[e], &strains[e], angles[e]);
        let mut d = [[0.0; 3]; 3];
        let (mut vx, mut vy) = (0.0, 0.0);
        for a in Phase::ALL {
            let star = table.theta_star(a, strain, theta);
            for b in Phase::ALL {
                if a == b {
                    continue;
                }
                let dj = match b {
                    Phase::Fiber => star.value,
                    b => table.isotropic_target(a, b, strain, theta),
                };
                d[a.index()][b.index()] = chi[a.index()] * (dj + lambda * (rho[b.index()] - rho[a.index()]));
            }
            if !star.degenerate {
                let w = chi[a.index()];
                vx += w * (2.0 * star.angle).cos();
                vy += w * (2.0 * star.angle).sin();
            }
        }
        let (t, flat) = if vx * vx + vy * vy > 1e-24 {
            theta_from_aux(vx, vy)
        } else {
            (theta, true)
        };
        theta_star.push(t);
        degenerate.push(flat);
        let ext = extended_td(&d);
        for k in 0..3 {
            pairwise[k].push(ext[k]);
        }
        directed.push(d);
    }
    Ok(SensitivityField {
        directed,
        theta_star,
        degenerate,
        pairwise,
    })
}
