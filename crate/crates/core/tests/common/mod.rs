//! Property suites shared by the `invariants` and `acceptance` targets.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::Matrix3;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use fiberopt::cli_io::{fmt_f64, OptConfig};
use fiberopt::fem2d::{
    assemble_and_solve, ElasticSystem, ElementBasis, ElementField, HelmholtzSolver, LoadPatch, Mesh, NodeField,
    Side, Support,
};
use fiberopt::optimizer::{update_multiplier, MultiplierState, PidGains, Problem, RunStatus};
use fiberopt::oracle::{angle_gap, fd_topological_derivative, FdBaseline, InsertionSpec};
use fiberopt::orientation::{theta_from_aux, update_orientation, OrientationState};
use fiberopt::tensor2d::{rotate_tensor, invert_tensor4, MaterialCatalog, MaterialParams, Phase, Sym2, Tensor4};
use fiberopt::topoderiv::{compute_sensitivities, elastic_moment, td_compliance, DerivativeTable};
use fiberopt::xls::{
    approx_heaviside, characteristic_at, clamp, heaviside, project_at, project_constraint, smoothed_characteristic,
    XlsState, PAIRS,
};

pub type Check = fn() -> Result<(), String>;

/// Every invariant suite, in module order.
pub fn suites() -> Vec<(&'static str, Check)> {
    vec![
        ("rotation_group_law", rotation_group_law),
        ("fiber_rotation_period", fiber_rotation_period),
        ("double_inverse", double_inverse),
        ("catalog_positive_definite", catalog_positive_definite),
        ("affine_patch_test", affine_patch_test),
        ("stiffness_positive_definite", stiffness_positive_definite),
        ("helmholtz_preserves_mean", helmholtz_preserves_mean),
        ("stiffening_lowers_compliance", stiffening_lowers_compliance),
        ("partition_of_unity", partition_of_unity),
        ("projection_partitions", projection_partitions),
        ("levelset_antisymmetry", levelset_antisymmetry),
        ("clamp_idempotent", clamp_idempotent),
        ("heaviside_endpoints", heaviside_endpoints),
        ("orientation_in_disc", orientation_in_disc),
        ("orientation_geometric_rate", orientation_geometric_rate),
        ("aux_angle_roundtrip", aux_angle_roundtrip),
        ("superadditivity", superadditivity),
        ("absent_source_zero", absent_source_zero),
        ("fd_refinement", fd_refinement),
        ("pid_ratchet", pid_ratchet),
        ("optimizer_run_invariants", optimizer_run_invariants),
        ("fd_identity_insertion", fd_identity_insertion),
        ("config_echo_roundtrip", config_echo_roundtrip),
        ("full_precision_numbers", full_precision_numbers),
    ]
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn unit() -> impl Strategy<Value = f64> {
    -1.0..1.0f64
}

fn strain() -> impl Strategy<Value = Sym2> {
    [unit(), unit(), unit()].prop_map(|[a, b, c]| Sym2::from_mandel(&nalgebra::Vector3::new(a, b, c)))
}

/// Symmetric positive definite Mandel matrix `LLᵀ + I/2` scaled to
/// stiffness-like magnitudes.
fn spd_tensor() -> impl Strategy<Value = Tensor4> {
    prop::array::uniform9(unit()).prop_map(|v| {
        let l = Matrix3::from_row_slice(&v);
        Tensor4::from_mandel((l * l.transpose() + Matrix3::identity() * 0.5) * 50.0)
    })
}

fn catalog() -> MaterialCatalog {
    MaterialCatalog::new(&MaterialParams::default()).unwrap()
}

fn small_mesh() -> impl Strategy<Value = Mesh> {
    (2usize..7, 2usize..6, 0.5..3.0f64, 0.5..3.0f64).prop_map(|(nx, ny, w, h)| Mesh::new(w, h, nx, ny).unwrap())
}

fn cantilever(nx: usize, ny: usize) -> Mesh {
    Mesh::cantilever(2.0, 1.0, nx, ny, 0.25).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * scale.max(1e-300)
}

pub fn rotation_group_law() -> Result<(), String> {
    check(256, (spd_tensor(), -PI..PI, -PI..PI), |(c, a, b)| {
        let lhs = rotate_tensor(&rotate_tensor(&c, a), b);
        let rhs = rotate_tensor(&c, a + b);
        let err = (*lhs.mandel() - *rhs.mandel()).abs().max();
        prop_assert!(err <= 1e-12 * c.max_abs(), "group law off by {err:e}");
        Ok(())
    })
}

pub fn fiber_rotation_period() -> Result<(), String> {
    let cat = catalog();
    check(256, -PI..PI, |t| {
        let c = *cat.fiber_base();
        let err = (*rotate_tensor(&c, t + PI).mandel() - *rotate_tensor(&c, t).mandel()).abs().max();
        prop_assert!(err <= 1e-12 * c.max_abs(), "period-π deviation {err:e}");
        Ok(())
    })
}

pub fn double_inverse() -> Result<(), String> {
    check(256, spd_tensor(), |c| {
        let back = invert_tensor4(&invert_tensor4(&c).unwrap()).unwrap();
        let err = (*back.mandel() - *c.mandel()).abs().max();
        prop_assert!(err <= 1e-10 * c.max_abs(), "double inverse off by {err:e}");
        Ok(())
    })
}

fn material_params() -> impl Strategy<Value = MaterialParams> {
    (
        (1e-3..1.0f64, 10.0..200.0f64, 10.0..200.0f64, 0.05..=1.0f64),
        (-0.9..0.49f64, -0.9..0.49f64, -0.9..0.49f64),
        (0.0..0.2f64, 0.5..2.0f64, 0.2..2.0f64),
    )
        .prop_map(|((ev, ei, ef, ratio), (nv, ni, nf), (rv, ri, rf))| MaterialParams {
            nu_void: nv,
            nu_iso: ni,
            nu_fiber: nf,
            e_void: ev,
            e_iso: ei,
            e_fiber: ef,
            back_ratio: ratio,
            rho_void: rv,
            rho_iso: ri,
            rho_fiber: rf,
        })
}

pub fn catalog_positive_definite() -> Result<(), String> {
    check(256, material_params(), |p| {
        let cat = MaterialCatalog::new(&p).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for phase in Phase::ALL {
            let m = cat.tensor(phase).min_eigenvalue();
            prop_assert!(m > 0.0, "{phase:?} has eigenvalue {m}");
        }
        Ok(())
    })
}

pub fn affine_patch_test() -> Result<(), String> {
    check(64, (small_mesh(), spd_tensor(), prop::array::uniform6(unit())), |(mesh, c, a)| {
        let affine = |x: [f64; 2]| [a[0] + a[1] * x[0] + a[2] * x[1], a[3] + a[4] * x[0] + a[5] * x[1]];
        let mut prescribed = Vec::new();
        for n in 0..mesh.n_nodes() {
            let (ix, iy) = mesh.node_grid(n);
            if ix == 0 || iy == 0 || ix == mesh.nx || iy == mesh.ny {
                let u = affine(mesh.node_coords(n));
                prescribed.push((2 * n, u[0]));
                prescribed.push((2 * n + 1, u[1]));
            }
        }
        let fixed: Vec<usize> = prescribed.iter().map(|p| p.0).collect();
        let tensors = vec![c; mesh.n_elements()];
        let system = ElasticSystem::assemble(&mesh, &tensors, &fixed).unwrap();
        let u = system.solve(&mesh, &vec![0.0; mesh.n_dofs()], &prescribed);
        for n in 0..mesh.n_nodes() {
            let exact = affine(mesh.node_coords(n));
            for k in 0..2 {
                let err = (u[2 * n + k] - exact[k]).abs();
                prop_assert!(err <= 1e-10, "node {n} component {k} off by {err:e}");
            }
        }
        Ok(())
    })
}

pub fn stiffness_positive_definite() -> Result<(), String> {
    check(64, (spd_tensor(), 0.2..3.0f64, 0.2..3.0f64, prop::array::uniform8(unit())), |(c, hx, hy, v)| {
        let k = ElementBasis::new(hx, hy).stiffness(&c);
        let asym = (k - k.transpose()).abs().max();
        prop_assert!(asym <= 1e-12 * k.abs().max(), "element stiffness asymmetric by {asym:e}");
        let mesh = cantilever(6, 3);
        let fixed = mesh.fixed_dofs();
        let tensors = vec![c; mesh.n_elements()];
        let system = ElasticSystem::assemble(&mesh, &tensors, &fixed)
            .map_err(|e| TestCaseError::fail(format!("reduced stiffness not positive definite: {e}")))?;
        let mut u: Vec<f64> = (0..mesh.n_dofs()).map(|i| v[i % 8] + 0.1 * (i as f64).sin()).collect();
        for d in fixed {
            u[d] = 0.0;
        }
        prop_assert!(system.energy_norm(&mesh, &u) > 0.0);
        Ok(())
    })
}

pub fn helmholtz_preserves_mean() -> Result<(), String> {
    check(64, (small_mesh(), 0.0..0.5f64, any::<u64>()), |(mesh, tau, seed)| {
        let solver = HelmholtzSolver::new(&mesh, tau).unwrap();
        let f = NodeField((0..mesh.n_nodes()).map(|i| ((i as u64 ^ seed) % 97) as f64 / 48.0 - 1.0).collect());
        let w = solver.solve(&f);
        let integral = |g: &NodeField| g.iter().zip(solver.mass()).map(|(v, m)| v * m).sum::<f64>();
        let scale: f64 = f.iter().zip(solver.mass()).map(|(v, m)| (v * m).abs()).sum();
        prop_assert!(rel_close(integral(&w), integral(&f), 1e-8, scale));
        Ok(())
    })
}

pub fn stiffening_lowers_compliance() -> Result<(), String> {
    let mesh = cantilever(12, 6);
    let cat = catalog();
    check(48, (0..mesh.n_elements(), spd_tensor(), 1e-3..1.0f64), |(e, dc, s)| {
        let base = ElementField::filled(&mesh, *cat.tensor(Phase::Isotropic));
        let mut stiff = base.clone();
        stiff[e] = stiff[e] + dc.scale(s);
        let j1 = assemble_and_solve(&mesh, &base, [0.0, -1.0]).unwrap().compliance;
        let j2 = assemble_and_solve(&mesh, &stiff, [0.0, -1.0]).unwrap().compliance;
        prop_assert!(j2 <= j1 * (1.0 + 1e-12), "J rose from {j1} to {j2}");
        Ok(())
    })
}

fn pair_values() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.5..1.5f64)
}

fn levelsets(mesh: &Mesh) -> impl Strategy<Value = XlsState> {
    let n = mesh.n_nodes();
    let mesh = mesh.clone();
    prop::collection::vec(pair_values(), n).prop_map(move |v| {
        let fields = std::array::from_fn(|k| NodeField(v.iter().map(|p| p[k]).collect()));
        XlsState::from_fields(&mesh, fields).unwrap()
    })
}

pub fn partition_of_unity() -> Result<(), String> {
    let mesh = cantilever(6, 4);
    check(128, (levelsets(&mesh), 0.05..0.95f64, 1e-8..1e-2f64), |(state, w, eps)| {
        let fr = smoothed_characteristic(&mesh, &state, w, eps).unwrap();
        for (e, f) in fr.0.iter().enumerate() {
            let s: f64 = f.iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-14, "element {e} sums to {s}");
        }
        Ok(())
    })
}

pub fn projection_partitions() -> Result<(), String> {
    check(1024, pair_values(), |v| {
        let p = project_at(&v);
        prop_assume!(p.iter().all(|x| *x != 0.0));
        let s: f64 = characteristic_at(&p).iter().sum();
        prop_assert_eq!(s, 1.0, "projected {:?} -> {:?}", v, p);
        Ok(())
    })
}

pub fn levelset_antisymmetry() -> Result<(), String> {
    let mesh = cantilever(4, 3);
    check(64, levelsets(&mesh), |state| {
        for s in [state.clone(), clamp(&state), project_constraint(&state)] {
            for (a, b) in PAIRS {
                let ab = s.field(a, b);
                let ba = s.field(b, a);
                prop_assert!(ab.iter().zip(ba.iter()).all(|(x, y)| *x == -*y));
            }
        }
        Ok(())
    })
}

pub fn clamp_idempotent() -> Result<(), String> {
    let mesh = cantilever(4, 3);
    let zero = XlsState::from_fields(&mesh, std::array::from_fn(|_| NodeField::filled(&mesh, 0.0))).unwrap();
    if project_constraint(&zero) != zero {
        return Err("projection moved the all-zero state".into());
    }
    check(64, levelsets(&mesh), |state| {
        let once = clamp(&state);
        prop_assert_eq!(clamp(&once), once);
        Ok(())
    })
}

pub fn heaviside_endpoints() -> Result<(), String> {
    if heaviside(0.0) != 1.0 || heaviside(-1e-300) != 0.0 {
        return Err("hard Heaviside endpoint convention broken".into());
    }
    if approx_heaviside(-1.0) != 0.0 || approx_heaviside(1.0) != 1.0 || approx_heaviside(0.0) != 0.5 {
        return Err("smoothed Heaviside endpoints wrong".into());
    }
    check(1024, (-2.0..2.0f64, -2.0..2.0f64), |(s, t)| {
        let h = approx_heaviside(s);
        prop_assert!((0.0..=1.0).contains(&h));
        prop_assert!((h + approx_heaviside(-s) - 1.0).abs() <= 1e-15);
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        prop_assert!(approx_heaviside(lo) <= approx_heaviside(hi) + 1e-15);
        if s.abs() >= 1.0 {
            prop_assert_eq!(h, heaviside(s));
        }
        Ok(())
    })
}

fn disc_point() -> impl Strategy<Value = (f64, f64)> {
    (0.0..=1.0f64, -PI..PI).prop_map(|(r, t)| (r.sqrt() * t.cos(), r.sqrt() * t.sin()))
}

pub fn orientation_in_disc() -> Result<(), String> {
    let mesh = cantilever(6, 4);
    let ne = mesh.n_elements();
    let nn = mesh.n_nodes();
    check(
        64,
        (
            prop::collection::vec(disc_point(), nn),
            prop::collection::vec((0.0..PI, 0.0..=1.0f64), ne),
            0.01..=1.0f64,
            0.0..1e-2f64,
        ),
        |(init, targets, alpha, tau)| {
            let smoother = HelmholtzSolver::new(&mesh, tau).unwrap();
            let mut state = OrientationState {
                xi: NodeField(init.iter().map(|p| p.0).collect()),
                eta: NodeField(init.iter().map(|p| p.1).collect()),
            };
            let theta: Vec<f64> = targets.iter().map(|t| t.0).collect();
            let chi: Vec<f64> = targets.iter().map(|t| t.1).collect();
            for _ in 0..5 {
                state = update_orientation(&mesh, &state, &theta, &chi, alpha, &smoother).unwrap();
                prop_assert!(state.max_radius_sq() <= 1.0 + 1e-12);
            }
            Ok(())
        },
    )
}

pub fn orientation_geometric_rate() -> Result<(), String> {
    let mesh = cantilever(5, 3);
    let ne = mesh.n_elements();
    let smoother = HelmholtzSolver::new(&mesh, 0.0).unwrap();
    check(64, (disc_point(), 0.0..PI, 0.0..=1.0f64, 0.05..=0.9f64), |(p, t, chi, alpha)| {
        let target = (chi * (2.0 * t).cos(), chi * (2.0 * t).sin());
        let mut state = OrientationState {
            xi: NodeField::filled(&mesh, p.0),
            eta: NodeField::filled(&mesh, p.1),
        };
        let d0 = (p.0 - target.0).hypot(p.1 - target.1);
        for k in 1..=8 {
            state = update_orientation(&mesh, &state, &vec![t; ne], &vec![chi; ne], alpha, &smoother).unwrap();
            let expect = d0 * (1.0 - alpha).powi(k);
            for n in 0..mesh.n_nodes() {
                let d = (state.xi[n] - target.0).hypot(state.eta[n] - target.1);
                prop_assert!((d - expect).abs() <= 1e-12, "step {k}: distance {d} vs {expect}");
            }
        }
        Ok(())
    })
}

pub fn aux_angle_roundtrip() -> Result<(), String> {
    check(4096, 0.0..PI, |t| {
        let (back, flat) = theta_from_aux((2.0 * t).cos(), (2.0 * t).sin());
        prop_assert!(!flat);
        prop_assert!(angle_gap(back, t) <= 1e-12, "{t} -> {back}");
        Ok(())
    })
}

pub fn superadditivity() -> Result<(), String> {
    let cat = catalog();
    let table = DerivativeTable::build(&cat, 36).map_err(|e| e.to_string())?;
    check(512, (strain(), strain(), 0.0..PI, prop::bool::ANY), |(e1, e2, theta, fiber)| {
        let a = if fiber { Phase::Fiber } else { Phase::Isotropic };
        let v1 = table.per_angle(a, &e1, theta);
        let v2 = table.per_angle(a, &e2, theta);
        let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
        let sum: Vec<f64> = v1.iter().zip(&v2).map(|(x, y)| x + y).collect();
        let scale = v1.iter().chain(&v2).map(|x| x.abs()).fold(0.0, f64::max);
        prop_assert!(min(&sum) >= min(&v1) + min(&v2) - 1e-14 * scale);
        Ok(())
    })
}

pub fn absent_source_zero() -> Result<(), String> {
    let cat = catalog();
    let table = DerivativeTable::build(&cat, 36).map_err(|e| e.to_string())?;
    check(
        256,
        (0usize..3, 0.0..=1.0f64, strain(), 0.0..PI, -1.0..1.0f64),
        |(absent, split, e, theta, lambda)| {
            let mut chi = [0.0; 3];
            let others: Vec<usize> = (0..3).filter(|&k| k != absent).collect();
            chi[others[0]] = split;
            chi[others[1]] = 1.0 - split;
            let s = compute_sensitivities(&table, &cat, &[chi], &[e], &[theta], lambda).unwrap();
            prop_assert!(s.directed[0][absent].iter().all(|v| *v == 0.0));
            Ok(())
        },
    )
}

/// Uniaxially loaded plate: left edge on rollers with one pinned corner,
/// uniform `x` traction over the whole right edge.
pub fn uniaxial_plate(nx: usize, ny: usize) -> Mesh {
    let mut mesh = Mesh::new(2.0, 1.0, nx, ny).unwrap();
    mesh.supports.push(Support::Side {
        side: Side::Left,
        fix_x: true,
        fix_y: false,
    });
    mesh.supports.push(Support::Node {
        node: 0,
        fix_x: true,
        fix_y: true,
    });
    mesh.load = Some(LoadPatch {
        side: Side::Right,
        from: 0.0,
        to: 1.0,
    });
    mesh
}

/// `|R(ε) − D| / |D|` for a fixed disc radius on the plate refined `m` times.
pub fn refined_insertion_error(from: Phase, to: Phase, radius: f64, m: usize) -> fiberopt::Result<f64> {
    let cat = catalog();
    let coarse = uniaxial_plate(160, 80);
    let ca = cat.oriented(from, 0.0);
    let cb = cat.oriented(to, 0.0);
    let st = assemble_and_solve(&coarse, &ElementField::filled(&coarse, ca), [1.0, 0.0])?;
    let elem = coarse.element(80, 40);
    let d = td_compliance(&st.strains[elem], &elastic_moment(&ca, &cb)?);
    let fine = uniaxial_plate(160 * m, 80 * m);
    let tensors = ElementField::filled(&fine, ca);
    let base = FdBaseline::solve(&fine, &tensors, [1.0, 0.0])?;
    let spec = InsertionSpec {
        center: coarse.element_centroid(elem),
        radius,
        from,
        to,
        angle: 0.0,
    };
    let r = fd_topological_derivative(&base, &cat, &spec)?;
    Ok((r - d).abs() / d.abs())
}

pub fn fd_refinement() -> Result<(), String> {
    let h = 2.0 / 160.0;
    for (from, to) in [
        (Phase::Isotropic, Phase::Void),
        (Phase::Isotropic, Phase::Fiber),
        (Phase::Fiber, Phase::Isotropic),
    ] {
        let errs: Vec<f64> = [1, 2]
            .iter()
            .map(|&m| refined_insertion_error(from, to, 2.0 * h, m))
            .collect::<fiberopt::Result<_>>()
            .map_err(|e| e.to_string())?;
        if !(errs[0] > errs[1]) {
            return Err(format!("{from:?}->{to:?}: errors {errs:?} do not shrink under refinement"));
        }
    }
    Ok(())
}

pub fn pid_ratchet() -> Result<(), String> {
    check(
        512,
        (prop::array::uniform4(0.0..50.0f64), prop::collection::vec(-1.0..1.0f64, 1..60)),
        |(k, gs)| {
            let gains = PidGains {
                kp: k[0],
                kd: k[1],
                kip: k[2],
                kid: k[3],
            };
            let mut m = MultiplierState::default();
            for g in gs {
                m = update_multiplier(&m, g, &gains);
                prop_assert!(m.integral >= 0.0);
            }
            Ok(())
        },
    )
}

pub fn small_config() -> OptConfig {
    OptConfig {
        nx: 40,
        ny: 20,
        ..OptConfig::default()
    }
}

pub fn optimizer_run_invariants() -> Result<(), String> {
    let cfg = small_config();
    let problem = Problem::new(&cfg).map_err(|e| e.to_string())?;
    let run = || problem.run_from(problem.initial_design().unwrap(), |_| Ok(())).map_err(|e| e.to_string());
    let first = run()?;
    let gains = problem.gains();
    let mut m = MultiplierState::default();
    for rec in first.history.records() {
        m = update_multiplier(&m, rec.weight_violation, &gains);
        if m.lambda != rec.lambda || m.integral != rec.integral {
            return Err(format!("step {}: history multiplier differs from the one applied", rec.step));
        }
        if rec.integral < 0.0 {
            return Err(format!("step {}: negative integral {}", rec.step, rec.integral));
        }
    }
    let last = first.history.last().unwrap();
    if first.status == RunStatus::Converged && last.weight_violation.abs() > cfg.feas_tol * first.weight_limit {
        return Err(format!("converged with |g_W| = {:e}", last.weight_violation.abs()));
    }
    let second = run()?;
    let strip = |r: &fiberopt::optimizer::RunResult| {
        r.history
            .records()
            .iter()
            .map(|s| fiberopt::optimizer::StepRecord { wall_ms: 0.0, ..*s })
            .collect::<Vec<_>>()
    };
    let (a, b) = (strip(&first), strip(&second));
    let same = a.len() == b.len()
        && a.iter().zip(&b).all(|(x, y)| {
            [x.compliance, x.weight_violation, x.lambda, x.integral, x.lagrangian, x.max_dphi]
                .iter()
                .zip([y.compliance, y.weight_violation, y.lambda, y.integral, y.lagrangian, y.max_dphi])
                .all(|(p, q)| p.to_bits() == q.to_bits())
                && x.step == y.step
        });
    if !same {
        return Err("repeated run produced a different history".into());
    }
    Ok(())
}

pub fn fd_identity_insertion() -> Result<(), String> {
    let cat = catalog();
    let mesh = uniaxial_plate(16, 8);
    check(32, (prop::bool::ANY, 0.0..PI, 0.3..1.7f64, 0.3..0.7f64), |(fiber, angle, x, y)| {
        let phase = if fiber { Phase::Fiber } else { Phase::Isotropic };
        let tensors = ElementField::filled(&mesh, cat.oriented(phase, angle));
        let base = FdBaseline::solve(&mesh, &tensors, [1.0, 0.0]).unwrap();
        let spec = InsertionSpec {
            center: [x, y],
            radius: 0.25,
            from: phase,
            to: phase,
            angle,
        };
        prop_assert_eq!(fd_topological_derivative(&base, &cat, &spec).unwrap(), 0.0);
        Ok(())
    })
}

pub fn config_echo_roundtrip() -> Result<(), String> {
    check(
        128,
        (
            (2usize..400, 2usize..200, 0.1..10.0f64, 0.1..10.0f64),
            (1.0..200.0f64, 0.05..=1.0f64, 0.01..0.99f64, any::<u64>()),
            (prop::option::of(1e-6..1.0f64), prop::option::of(0.01..5.0f64), 0.01..1.0f64),
        ),
        |((nx, ny, w, h), (ei, ratio, wf, seed), (tau, wmax, step))| {
            let mut cfg = OptConfig {
                nx,
                ny,
                width: w,
                height: h,
                load_height: 0.5 * h,
                w_max_fraction: wf,
                w_max: wmax,
                tau_phi: tau,
                phi_step: step,
                seed,
                ..OptConfig::default()
            };
            cfg.materials.e_iso = ei;
            cfg.materials.back_ratio = ratio;
            prop_assume!(cfg.validate().is_ok());
            let back = OptConfig::parse(&cfg.echo(), Path::new("echo.cfg")).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(back, cfg);
            Ok(())
        },
    )
}

pub fn full_precision_numbers() -> Result<(), String> {
    check(4096, any::<f64>(), |x| {
        prop_assume!(x.is_finite());
        let s = fmt_f64(x);
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{} printed as {}", x, s);
        Ok(())
    })
}
