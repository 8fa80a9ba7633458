//! Extended level-set (X-LS) description of the void / isotropic / fiber
//! phases.
//!
//! One signed node field is kept per unordered phase pair; the reversed
//! orientation is its negation (`φ_ba = −φ_ab`), so antisymmetry holds by
//! construction. Phase `a` occupies the points where `φ_ab ≥ 0` for every
//! `b ≠ a`.

use crate::error::{Error, Result};
use crate::fem2d::{HelmholtzSolver, Mesh, NodeField};
use crate::tensor2d::Phase;

/// The stored unordered pairs, in storage order.
pub const PAIRS: [(Phase, Phase); 3] = [
    (Phase::Void, Phase::Isotropic),
    (Phase::Void, Phase::Fiber),
    (Phase::Isotropic, Phase::Fiber),
];

/// Storage slot of an unordered pair and the sign that converts the stored
/// field into `φ_ab`.
pub fn pair_slot(a: Phase, b: Phase) -> (usize, f64) {
    assert_ne!(a, b, "no level set between a phase and itself");
    match (a, b) {
        (Phase::Void, Phase::Isotropic) => (0, 1.0),
        (Phase::Isotropic, Phase::Void) => (0, -1.0),
        (Phase::Void, Phase::Fiber) => (1, 1.0),
        (Phase::Fiber, Phase::Void) => (1, -1.0),
        (Phase::Isotropic, Phase::Fiber) => (2, 1.0),
        (Phase::Fiber, Phase::Isotropic) => (2, -1.0),
        _ => unreachable!(),
    }
}

/// Heaviside with `H(0) = 1`.
#[inline]
pub fn heaviside(s: f64) -> f64 {
    if s >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Quintic C¹ approximation of the Heaviside step on `[-1, 1]`.
#[inline]
pub fn approx_heaviside(s: f64) -> f64 {
    if s < -1.0 {
        0.0
    } else if s > 1.0 {
        1.0
    } else {
        0.5 + s * (15.0 / 16.0 - s * s * (5.0 / 8.0 - 3.0 / 16.0 * s * s))
    }
}

/// Pointwise level-set values `[φ_VI, φ_VF, φ_IF]`.
pub type PairValues = [f64; 3];

#[inline]
fn phi(values: &PairValues, a: Phase, b: Phase) -> f64 {
    let (slot, sign) = pair_slot(a, b);
    sign * values[slot]
}

/// Hard indicators `χ_a = Π_{b≠a} H(φ_ab)` at one point, ordered V, I, F.
pub fn characteristic_at(values: &PairValues) -> [f64; 3] {
    Phase::ALL.map(|a| {
        Phase::ALL
            .iter()
            .filter(|&&b| b != a)
            .map(|&b| heaviside(phi(values, a, b)))
            .product()
    })
}

/// Smoothed fractions at one point. Returns `None` when the normalizing sum
/// vanishes (only possible with `eps_chi = 0`).
pub fn smoothed_at(values: &PairValues, width: f64, eps_chi: f64) -> Option<[f64; 3]> {
    let prime = Phase::ALL.map(|a| {
        Phase::ALL
            .iter()
            .filter(|&&b| b != a)
            .map(|&b| approx_heaviside(phi(values, a, b) / width))
            .product::<f64>()
    });
    let second: [f64; 3] = std::array::from_fn(|a| {
        let others: f64 = (0..3).filter(|&b| b != a).map(|b| 1.0 - prime[b]).product();
        prime[a] + eps_chi * others
    });
    let sum: f64 = second.iter().sum();
    if !(sum > f64::MIN_POSITIVE) {
        return None;
    }
    Some(second.map(|v| v / sum))
}

/// Dominance projection at one point: with `ψ_a = Π_{b≠a} (φ_ab + 1)/2`,
/// the projected fields are `φ̃_ab = ψ_a − ψ_b`. The phase with the largest
/// `ψ` wins every pair it takes part in, so the hard indicators form a
/// partition away from exact ties.
pub fn project_at(values: &PairValues) -> PairValues {
    let psi = Phase::ALL.map(|a| {
        Phase::ALL
            .iter()
            .filter(|&&b| b != a)
            .map(|&b| 0.5 * (phi(values, a, b) + 1.0))
            .product::<f64>()
    });
    PAIRS.map(|(a, b)| psi[a.index()] - psi[b.index()])
}

/// The three stored level-set node fields.
#[derive(Debug, Clone, PartialEq)]
pub struct XlsState {
    fields: [NodeField; 3],
}

/// Per-element smoothed fractions, ordered V, I, F; each row sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFractions(pub Vec<[f64; 3]>);

impl PhaseFractions {
    pub fn of(&self, phase: Phase) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(move |f| f[phase.index()])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl XlsState {
    /// Constant fields `φ_VI = vi`, `φ_VF = vf`, `φ_IF = i_f`.
    pub fn uniform(mesh: &Mesh, vi: f64, vf: f64, i_f: f64) -> Self {
        Self {
            fields: [
                NodeField::filled(mesh, vi),
                NodeField::filled(mesh, vf),
                NodeField::filled(mesh, i_f),
            ],
        }
    }

    pub fn from_fields(mesh: &Mesh, fields: [NodeField; 3]) -> Result<Self> {
        for f in &fields {
            if f.len() != mesh.n_nodes() {
                return Err(Error::Precondition(format!(
                    "level-set field has {} values, mesh has {} nodes",
                    f.len(),
                    mesh.n_nodes()
                )));
            }
        }
        Ok(Self { fields })
    }

    /// Builds the fields from a per-node function returning `[φ_VI, φ_VF, φ_IF]`.
    pub fn from_fn(mesh: &Mesh, mut f: impl FnMut([f64; 2]) -> PairValues) -> Self {
        let values: Vec<PairValues> = (0..mesh.n_nodes()).map(|n| f(mesh.node_coords(n))).collect();
        Self {
            fields: std::array::from_fn(|k| NodeField(values.iter().map(|v| v[k]).collect())),
        }
    }

    pub fn fields(&self) -> &[NodeField; 3] {
        &self.fields
    }

    pub fn n_nodes(&self) -> usize {
        self.fields[0].len()
    }

    /// `φ_ab` as a node field (negated copy for reversed pairs).
    pub fn field(&self, a: Phase, b: Phase) -> NodeField {
        let (slot, sign) = pair_slot(a, b);
        if sign > 0.0 {
            self.fields[slot].clone()
        } else {
            NodeField(self.fields[slot].iter().map(|v| -v).collect())
        }
    }

    #[inline]
    pub fn node_values(&self, node: usize) -> PairValues {
        [self.fields[0][node], self.fields[1][node], self.fields[2][node]]
    }

    /// Values at an element centroid (mean of the four corners).
    pub fn element_values(&self, mesh: &Mesh, elem: usize) -> PairValues {
        std::array::from_fn(|k| self.fields[k].element_mean(mesh, elem))
    }

    fn map_nodes(&self, f: impl Fn(&PairValues) -> PairValues) -> Self {
        let n = self.n_nodes();
        let mut out = self.clone();
        for node in 0..n {
            let v = f(&self.node_values(node));
            for k in 0..3 {
                out.fields[k][node] = v[k];
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &XlsState) -> f64 {
        (0..3)
            .map(|k| self.fields[k].max_abs_diff(&other.fields[k]))
            .fold(0.0, f64::max)
    }
}

/// Hard per-element indicators evaluated at element centroids.
pub fn characteristic(mesh: &Mesh, state: &XlsState) -> Vec<[f64; 3]> {
    (0..mesh.n_elements())
        .map(|e| characteristic_at(&state.element_values(mesh, e)))
        .collect()
}

/// Hard per-node indicators.
pub fn characteristic_nodes(state: &XlsState) -> Vec<[f64; 3]> {
    (0..state.n_nodes())
        .map(|n| characteristic_at(&state.node_values(n)))
        .collect()
}

pub fn smoothed_characteristic(
    mesh: &Mesh,
    state: &XlsState,
    width: f64,
    eps_chi: f64,
) -> Result<PhaseFractions> {
    if !(width > 0.0 && width < 1.0) {
        return Err(Error::validation("w_m", format!("must lie in (0, 1), got {width}")));
    }
    if !(eps_chi > 0.0) {
        return Err(Error::validation("eps_chi", format!("must be positive, got {eps_chi}")));
    }
    (0..mesh.n_elements())
        .map(|e| {
            smoothed_at(&state.element_values(mesh, e), width, eps_chi)
                .ok_or(Error::DegenerateFraction { element: e })
        })
        .collect::<Result<Vec<_>>>()
        .map(PhaseFractions)
}

pub fn project_constraint(state: &XlsState) -> XlsState {
    state.map_nodes(project_at)
}

pub fn clamp(state: &XlsState) -> XlsState {
    state.map_nodes(|v| v.map(|x| x.clamp(-1.0, 1.0)))
}

/// Per-pair update parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStep {
    pub alpha: f64,
    pub tau: f64,
}

/// Reaction-diffusion step for every stored pair:
/// `(Id − τΔ) φ_new = φ − α·DL`, followed by clamping to `[-1, 1]` and the
/// dominance projection.
///
/// `sensitivities[k]` is the nodal sensitivity of the stored field `k`;
/// `smoothers[k]` must have been built with `steps[k].tau`.
pub fn update_levelsets(
    state: &XlsState,
    sensitivities: &[NodeField; 3],
    steps: &[PairStep; 3],
    smoothers: &[&HelmholtzSolver; 3],
) -> Result<XlsState> {
    Ok(project_constraint(&advance_levelsets(state, sensitivities, steps, smoothers)?))
}

/// The reaction-diffusion step and clamp of [`update_levelsets`] without
/// the final projection.
pub fn advance_levelsets(
    state: &XlsState,
    sensitivities: &[NodeField; 3],
    steps: &[PairStep; 3],
    smoothers: &[&HelmholtzSolver; 3],
) -> Result<XlsState> {
    let mut fields = state.fields.clone();
    for k in 0..3 {
        let PairStep { alpha, .. } = steps[k];
        if !(alpha >= 0.0) {
            return Err(Error::validation("alpha_ab", format!("must be nonnegative, got {alpha}")));
        }
        let rhs = NodeField(
            state.fields[k]
                .iter()
                .zip(sensitivities[k].iter())
                .map(|(p, d)| p - alpha * d)
                .collect(),
        );
        fields[k] = smoothers[k].solve(&rhs);
    }
    Ok(clamp(&XlsState { fields }))
}

/// Sum over neighbouring node pairs of `|φ_i − φ_j|`, used to compare
/// oscillation between fields.
pub fn total_variation(mesh: &Mesh, f: &NodeField) -> f64 {
    let mut tv = 0.0;
    for ix in 0..=mesh.nx {
        for iy in 0..=mesh.ny {
            let n = mesh.node(ix, iy);
            if ix < mesh.nx {
                tv += (f[n] - f[mesh.node(ix + 1, iy)]).abs();
            }
            if iy < mesh.ny {
                tv += (f[n] - f[mesh.node(ix, iy + 1)]).abs();
            }
        }
    }
    tv
}
