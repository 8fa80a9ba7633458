//! Relaxed Cartesian fiber orientation: the angle is encoded as a point
//! `(ξ, η)` of the unit disc, `θ = ½·atan2(η, ξ)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem2d::{elements_to_nodes, ElementField, HelmholtzSolver, Mesh, NodeField};

/// Below this squared radius an orientation is flagged as indeterminate.
pub const INDETERMINATE_RADIUS_SQ: f64 = 0.05;

/// Angle in `[0, π)` from the auxiliary pair. Returns `(0, true)` at the
/// origin, where no angle is defined.
pub fn theta_from_aux(xi: f64, eta: f64) -> (f64, bool) {
    if xi == 0.0 && eta == 0.0 {
        return (0.0, true);
    }
    (wrap_angle(0.5 * eta.atan2(xi)), false)
}

/// Maps any angle into `[0, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    // rem_euclid can round up to exactly π for tiny negative inputs.
    if t >= PI {
        0.0
    } else {
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientationState {
    pub xi: NodeField,
    pub eta: NodeField,
}

impl OrientationState {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self {
            xi: NodeField::filled(mesh, 0.0),
            eta: NodeField::filled(mesh, 0.0),
        }
    }

    /// Unit-radius state encoding a per-node angle.
    pub fn from_angle_fn(mesh: &Mesh, mut f: impl FnMut([f64; 2]) -> f64) -> Self {
        let angles: Vec<f64> = (0..mesh.n_nodes()).map(|n| f(mesh.node_coords(n))).collect();
        Self {
            xi: NodeField(angles.iter().map(|t| (2.0 * t).cos()).collect()),
            eta: NodeField(angles.iter().map(|t| (2.0 * t).sin()).collect()),
        }
    }

    /// Per-element angle from the centroid average of `(ξ, η)`.
    pub fn element_angles(&self, mesh: &Mesh) -> ElementField<f64> {
        ElementField(
            (0..mesh.n_elements())
                .map(|e| theta_from_aux(self.xi.element_mean(mesh, e), self.eta.element_mean(mesh, e)).0)
                .collect(),
        )
    }

    /// Elements whose averaged `(ξ, η)` lies within the indeterminate radius.
    pub fn indeterminate(&self, mesh: &Mesh) -> Vec<bool> {
        (0..mesh.n_elements())
            .map(|e| {
                let x = self.xi.element_mean(mesh, e);
                let y = self.eta.element_mean(mesh, e);
                x * x + y * y < INDETERMINATE_RADIUS_SQ
            })
            .collect()
    }

    pub fn max_radius_sq(&self) -> f64 {
        self.xi
            .iter()
            .zip(self.eta.iter())
            .map(|(x, y)| x * x + y * y)
            .fold(0.0, f64::max)
    }
}

/// One relaxation step towards the estimated optimal angles `theta_star`,
/// weighted by the fiber fraction. `smoother` must carry `τ_θ`.
pub fn update_orientation(
    mesh: &Mesh,
    state: &OrientationState,
    theta_star: &[f64],
    chi_fiber: &[f64],
    alpha: f64,
    smoother: &HelmholtzSolver,
) -> Result<OrientationState> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::validation("alpha_theta", format!("must lie in (0, 1], got {alpha}")));
    }
    if theta_star.len() != mesh.n_elements() || chi_fiber.len() != mesh.n_elements() {
        return Err(Error::Precondition("orientation targets must be element fields".into()));
    }
    let tx: Vec<f64> = theta_star
        .iter()
        .zip(chi_fiber)
        .map(|(t, c)| c * (2.0 * t).cos())
        .collect();
    let ty: Vec<f64> = theta_star
        .iter()
        .zip(chi_fiber)
        .map(|(t, c)| c * (2.0 * t).sin())
        .collect();
    let tx = elements_to_nodes(mesh, &tx);
    let ty = elements_to_nodes(mesh, &ty);
    let relax = |old: &NodeField, target: &NodeField| {
        NodeField(
            old.iter()
                .zip(target.iter())
                .map(|(o, t)| (1.0 - alpha) * o + alpha * t)
                .collect(),
        )
    };
    let mut xi = smoother.solve(&relax(&state.xi, &tx));
    let mut eta = smoother.solve(&relax(&state.eta, &ty));
    for (x, y) in xi.iter_mut().zip(eta.iter_mut()) {
        let r2 = *x * *x + *y * *y;
        if r2 > 1.0 {
            let r = r2.sqrt();
            *x /= r;
            *y /= r;
        }
    }
    Ok(OrientationState { xi, eta })
}
