//! The outer optimization loop: evaluate the blended design, control the
//! weight multiplier, then move the orientation and level-set fields along
//! the topological sensitivities.

mod multiplier;
mod presets;

pub use multiplier::{update_multiplier, MultiplierState, PidGains};
pub use presets::initial_design;

use std::f64::consts::PI;
use std::time::Instant;

use crate::cli_io::OptConfig;
use crate::error::{Error, Result};
use crate::fem2d::{assemble_and_solve, elements_to_nodes, ElementField, HelmholtzSolver, Mesh, NodeField, SolveState};
use crate::orientation::{update_orientation, OrientationState};
use crate::tensor2d::{MaterialCatalog, Phase, Tensor4};
use crate::topoderiv::{compute_sensitivities, DerivativeTable, SensitivityField};
use crate::xls::{advance_levelsets, project_constraint, smoothed_characteristic, PairStep, PhaseFractions, XlsState};

/// `L = J + λ g`.
#[inline]
pub fn lagrangian(j: f64, g: f64, lambda: f64) -> f64 {
    j + lambda * g
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub compliance: f64,
    /// `g_W = W − W_max`.
    pub weight_violation: f64,
    /// Multiplier used for this step's sensitivities.
    pub lambda: f64,
    pub integral: f64,
    /// Lagrangian with the compliance scaled by its step-0 value.
    pub lagrangian: f64,
    /// Largest nodal level-set change that produced this design.
    pub max_dphi: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OptHistory {
    records: Vec<StepRecord>,
}

impl OptHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; steps must be contiguous from zero.
    pub fn push(&mut self, rec: StepRecord) {
        assert_eq!(rec.step, self.records.len(), "history steps must be contiguous");
        self.records.push(rec);
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }
}

/// Convergence test over the trailing `window` records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceCriteria {
    pub window: usize,
    /// Bound on `(max L − min L) / |L|` over the window.
    pub tol_l: f64,
    /// Bound on the nodal level-set change of every step in the window.
    pub tol_field: f64,
    /// Absolute bound on `|g_W|` at the last step.
    pub feasibility: f64,
}

/// Quantile of nodal |DL| that receives the full step `phi_step`; nodes
/// above it overshoot and are caught by the clamp.
pub const STEP_QUANTILE: f64 = 0.95;

fn step_scale(dl: &[NodeField; 3]) -> f64 {
    let mut all: Vec<f64> = dl.iter().flat_map(|f| f.iter().map(|v| v.abs())).collect();
    if all.is_empty() {
        return 0.0;
    }
    let k = ((all.len() - 1) as f64 * STEP_QUANTILE).round() as usize;
    let (_, q, _) = all.select_nth_unstable_by(k, f64::total_cmp);
    *q
}

/// Per-node step gains for the five design fields (three level sets, then
/// ξ and η): a node whose increment reverses direction has its gain halved,
/// otherwise the gain recovers toward one.
#[derive(Debug, Clone)]
pub struct StepDamping {
    prev: [Vec<f64>; 5],
    gain: [Vec<f64>; 5],
}

const GAIN_SHRINK: f64 = 0.5;
const GAIN_GROW: f64 = 1.2;
const GAIN_MIN: f64 = 1.0 / 64.0;

impl StepDamping {
    pub fn new(n_nodes: usize) -> Self {
        Self {
            prev: std::array::from_fn(|_| vec![0.0; n_nodes]),
            gain: std::array::from_fn(|_| vec![1.0; n_nodes]),
        }
    }

    /// Scales the increments of field `k` in place and remembers their
    /// directions.
    fn apply(&mut self, k: usize, rates: &mut [f64]) {
        for (n, r) in rates.iter_mut().enumerate() {
            let turn = self.prev[k][n] * *r;
            let g = &mut self.gain[k][n];
            if turn < 0.0 {
                *g = (*g * GAIN_SHRINK).max(GAIN_MIN);
            } else if turn > 0.0 {
                *g = (*g * GAIN_GROW).min(1.0);
            }
            self.prev[k][n] = *r;
            *r *= *g;
        }
    }

    /// Replaces `new` by `old + gain · (new − old)`.
    fn relax(&mut self, k: usize, old: &NodeField, new: &mut NodeField) {
        let mut inc: Vec<f64> = new.iter().zip(old.iter()).map(|(a, b)| a - b).collect();
        self.apply(k, &mut inc);
        for ((v, o), d) in new.0.iter_mut().zip(old.iter()).zip(inc) {
            *v = o + d;
        }
    }
}

pub fn check_convergence(history: &OptHistory, c: &ConvergenceCriteria) -> bool {
    assert!(c.window >= 2, "convergence window must be at least 2");
    let recs = history.records();
    if recs.len() < c.window {
        return false;
    }
    let tail = &recs[recs.len() - c.window..];
    let last = tail[tail.len() - 1];
    if !(last.weight_violation.abs() <= c.feasibility) {
        return false;
    }
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.lagrangian), hi.max(r.lagrangian)));
    let scale = last.lagrangian.abs().max(f64::MIN_POSITIVE);
    if !((hi - lo) / scale < c.tol_l) {
        return false;
    }
    tail.iter().all(|r| r.max_dphi < c.tol_field)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    /// Clamped level sets as evolved; the phase layout is read from their
    /// projection, which is never written back.
    pub levelsets: XlsState,
    pub orientation: OrientationState,
}

/// Everything derived from a design by one state solve.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub fractions: PhaseFractions,
    pub angles: ElementField<f64>,
    pub indeterminate: Vec<bool>,
    pub state: SolveState,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    NonConvergence,
}

/// Fields handed to snapshot observers.
pub struct Snapshot<'a> {
    pub step: usize,
    pub mesh: &'a Mesh,
    pub design: &'a Design,
    pub evaluation: &'a Evaluation,
}

pub struct RunResult {
    pub design: Design,
    pub evaluation: Evaluation,
    pub history: OptHistory,
    pub status: RunStatus,
    pub weight_limit: f64,
}

/// Mesh, materials, derivative table and smoothing operators for one
/// configuration.
pub struct Problem {
    pub config: OptConfig,
    pub mesh: Mesh,
    pub catalog: MaterialCatalog,
    pub table: DerivativeTable,
    phi_smoother: HelmholtzSolver,
    theta_smoother: HelmholtzSolver,
}

impl Problem {
    pub fn new(config: &OptConfig) -> Result<Self> {
        config.validate()?;
        let mesh = Mesh::cantilever(config.width, config.height, config.nx, config.ny, config.load_height)?;
        let catalog = MaterialCatalog::new(&config.materials)?;
        let table = match &config.table_cache {
            Some(dir) => DerivativeTable::load_or_build(&catalog, config.n_angles, dir)?.0,
            None => DerivativeTable::build(&catalog, config.n_angles)?,
        };
        let phi_smoother = HelmholtzSolver::new(&mesh, config.tau_phi())?;
        let theta_smoother = HelmholtzSolver::new(&mesh, config.tau_theta())?;
        Ok(Self {
            config: config.clone(),
            mesh,
            catalog,
            table,
            phi_smoother,
            theta_smoother,
        })
    }

    pub fn weight_limit(&self) -> f64 {
        self.config.weight_limit()
    }

    pub fn gains(&self) -> PidGains {
        let w = self.weight_limit();
        let c = &self.config;
        PidGains {
            kp: c.gain_p / w,
            kd: c.gain_d / w,
            kip: c.gain_ip / w,
            kid: c.gain_id / w,
        }
    }

    /// Blended stiffness `Σ_a χ̃_a C^a(θ)` per element.
    pub fn element_tensors(&self, fractions: &PhaseFractions, angles: &[f64]) -> ElementField<Tensor4> {
        let cv = *self.catalog.tensor(Phase::Void);
        let ci = *self.catalog.tensor(Phase::Isotropic);
        ElementField(
            fractions
                .0
                .iter()
                .zip(angles)
                .map(|(f, &t)| cv.scale(f[0]) + ci.scale(f[1]) + self.catalog.fiber_at(t).scale(f[2]))
                .collect(),
        )
    }

    pub fn weight(&self, fractions: &PhaseFractions) -> f64 {
        let rho = Phase::ALL.map(|p| self.catalog.density(p));
        let area = self.mesh.element_area();
        fractions
            .0
            .iter()
            .map(|f| area * (f[0] * rho[0] + f[1] * rho[1] + f[2] * rho[2]))
            .sum()
    }

    pub fn evaluate(&self, design: &Design) -> Result<Evaluation> {
        let fractions = smoothed_characteristic(
            &self.mesh,
            &project_constraint(&design.levelsets),
            self.config.w_m,
            self.config.eps_chi,
        )?;
        let angles = design.orientation.element_angles(&self.mesh);
        let indeterminate = design.orientation.indeterminate(&self.mesh);
        let tensors = self.element_tensors(&fractions, &angles);
        let state = assemble_and_solve(&self.mesh, &tensors, self.config.traction)?;
        let weight = self.weight(&fractions);
        Ok(Evaluation {
            fractions,
            angles,
            indeterminate,
            state,
            weight,
        })
    }

    /// Sensitivities of `J/J_ref + λ g_W` at an evaluated design.
    pub fn sensitivities(&self, eval: &Evaluation, lambda: f64, j_ref: f64) -> Result<SensitivityField> {
        // Scaling the strains by 1/√J_ref scales every compliance derivative by 1/J_ref.
        let s = 1.0 / j_ref.sqrt();
        let strains: Vec<_> = eval
            .state
            .strains
            .iter()
            .map(|e| crate::tensor2d::Sym2::new(e.xx * s, e.yy * s, e.xy * s))
            .collect();
        compute_sensitivities(&self.table, &self.catalog, &eval.fractions.0, &strains, &eval.angles, lambda)
    }

    /// Applies one orientation and level-set update; returns the new design
    /// and its largest nodal level-set change.
    pub fn step(
        &self,
        design: &Design,
        eval: &Evaluation,
        sens: &SensitivityField,
        damping: &mut StepDamping,
    ) -> Result<(Design, f64)> {
        let chi_f: Vec<f64> = eval.fractions.of(Phase::Fiber).collect();
        let mut orientation = update_orientation(
            &self.mesh,
            &design.orientation,
            &sens.theta_star,
            &chi_f,
            self.config.alpha_theta,
            &self.theta_smoother,
        )?;
        damping.relax(3, &design.orientation.xi, &mut orientation.xi);
        damping.relax(4, &design.orientation.eta, &mut orientation.eta);
        // The stored field φ_ab moves against D_ab: a negative extended
        // derivative means trading a for b lowers the Lagrangian.
        let mut dl: [NodeField; 3] = std::array::from_fn(|k| {
            let neg: Vec<f64> = sens.pairwise[k].iter().map(|d| -d).collect();
            elements_to_nodes(&self.mesh, &neg)
        });
        let peak = step_scale(&dl);
        let alpha = if peak > 0.0 { self.config.phi_step / peak } else { 0.0 };
        for (k, f) in dl.iter_mut().enumerate() {
            damping.apply(k, &mut f.0);
        }
        let step = PairStep {
            alpha,
            tau: self.config.tau_phi(),
        };
        let h = &self.phi_smoother;
        let levelsets = advance_levelsets(&design.levelsets, &dl, &[step; 3], &[h, h, h])?;
        let dphi = levelsets.max_abs_diff(&design.levelsets);
        Ok((
            Design {
                levelsets,
                orientation,
            },
            dphi,
        ))
    }

    pub fn criteria(&self) -> ConvergenceCriteria {
        ConvergenceCriteria {
            window: self.config.conv_window,
            tol_l: self.config.conv_tol_l,
            tol_field: self.config.conv_tol_field,
            feasibility: self.config.feas_tol * self.weight_limit(),
        }
    }

    /// Runs from `design`, calling `observer` every `snapshot_interval`
    /// steps and at the final step.
    pub fn run_from(
        &self,
        mut design: Design,
        mut observer: impl FnMut(&Snapshot) -> Result<()>,
    ) -> Result<RunResult> {
        let cfg = &self.config;
        let gains = self.gains();
        let w_max = self.weight_limit();
        let criteria = self.criteria();
        let mut history = OptHistory::new();
        let mut mult = MultiplierState::default();
        let mut j_ref = None;
        let mut damping = StepDamping::new(self.mesh.n_nodes());
        let mut dphi = 0.0;
        let mut step = 0;
        loop {
            let t0 = Instant::now();
            let at = |e: Error| Error::AtIteration {
                iteration: step,
                source: Box::new(e),
            };
            let eval = self.evaluate(&design).map_err(at)?;
            let j = eval.state.compliance;
            let j0 = *j_ref.get_or_insert(if j > 0.0 { j } else { 1.0 });
            let g = eval.weight - w_max;
            mult = update_multiplier(&mult, g, &gains);
            let rec_base = StepRecord {
                step,
                compliance: j,
                weight_violation: g,
                lambda: mult.lambda,
                integral: mult.integral,
                lagrangian: lagrangian(j / j0, g, mult.lambda),
                max_dphi: dphi,
                wall_ms: 0.0,
            };
            let converged = {
                let mut probe = history.clone();
                probe.push(rec_base);
                check_convergence(&probe, &criteria)
            };
            let last = converged || step >= cfg.max_iters;
            let next = if last {
                None
            } else {
                let sens = self.sensitivities(&eval, mult.lambda, j0).map_err(at)?;
                Some(self.step(&design, &eval, &sens, &mut damping).map_err(at)?)
            };
            history.push(StepRecord {
                wall_ms: t0.elapsed().as_secs_f64() * 1e3,
                ..rec_base
            });
            log::debug!(
                "step {step}: J={j:.6e} g={g:.3e} lambda={:.3e} dphi={dphi:.2e}",
                mult.lambda
            );
            if last || (cfg.snapshot_interval > 0 && step % cfg.snapshot_interval == 0) {
                observer(&Snapshot {
                    step,
                    mesh: &self.mesh,
                    design: &design,
                    evaluation: &eval,
                })?;
            }
            match next {
                None => {
                    return Ok(RunResult {
                        design,
                        evaluation: eval,
                        history,
                        status: if converged {
                            RunStatus::Converged
                        } else {
                            RunStatus::NonConvergence
                        },
                        weight_limit: w_max,
                    })
                }
                Some((d, change)) => {
                    design = d;
                    dphi = change;
                    step += 1;
                }
            }
        }
    }

    pub fn initial_design(&self) -> Result<Design> {
        initial_design(&self.config, &self.mesh)
    }

    /// Compliance of the best homogeneous design at the weight limit: a
    /// uniform blend of void with either the isotropic phase or the fiber
    /// phase at a few fixed angles.
    pub fn uniform_reference(&self) -> Result<f64> {
        let w = self.weight_limit() / (self.mesh.width * self.mesh.height);
        let mut best = f64::INFINITY;
        let cv = *self.catalog.tensor(Phase::Void);
        let rho_v = self.catalog.density(Phase::Void);
        let mut candidates = vec![(Phase::Isotropic, 0.0)];
        for k in 0..4 {
            candidates.push((Phase::Fiber, k as f64 * PI / 4.0));
        }
        for (phase, angle) in candidates {
            let rho = self.catalog.density(phase);
            if rho <= rho_v {
                continue;
            }
            let s = ((w - rho_v) / (rho - rho_v)).clamp(0.0, 1.0);
            let c = cv.scale(1.0 - s) + self.catalog.oriented(phase, angle).scale(s);
            let state = assemble_and_solve(&self.mesh, &ElementField::filled(&self.mesh, c), self.config.traction)?;
            best = best.min(state.compliance);
        }
        Ok(best)
    }
}

/// Builds the problem and runs it from the configured initial design.
pub fn run(config: &OptConfig) -> Result<RunResult> {
    let problem = Problem::new(config)?;
    let design = problem.initial_design()?;
    problem.run_from(design, |_| Ok(()))
}
