//! Brute-force reference computations for checking the topological
//! derivative machinery. Only tensor algebra is shared with
//! [`crate::topoderiv`]: the Eshelby tensor here uses a periodic trapezoid
//! rule over the full circle and the moment tensor the polarization form.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cli_io::OptConfig;
use crate::error::{Error, Result};
use crate::fem2d::{assemble_and_solve, ElementField, Mesh};
use crate::tensor2d::{MaterialCatalog, Phase, Sym2, Tensor4};
use crate::topoderiv::{eshelby_interior, DerivativeTable};

/// Classical interior Eshelby tensor of a circular inclusion in an isotropic
/// plane-stress matrix (plane-strain formulas with `ν* = ν/(1+ν)`).
pub fn eshelby_closed_form(nu: f64) -> Tensor4 {
    let v = nu / (1.0 + nu);
    let d = 8.0 * (1.0 - v);
    let s1111 = (5.0 - 4.0 * v) / d;
    let s1122 = (4.0 * v - 1.0) / d;
    let s1212 = (3.0 - 4.0 * v) / d;
    Tensor4::from_fn(|i, j, k, l| {
        if i == j && k == l {
            if i == k {
                s1111
            } else {
                s1122
            }
        } else if i != j && k != l {
            s1212
        } else {
            0.0
        }
    })
}

/// Eshelby tensor by the trapezoid rule on `[0, 2π)` with `points` samples.
pub fn eshelby_trapezoid(c: &Tensor4, points: usize) -> Result<Tensor4> {
    let mut acc = [[[[0.0f64; 2]; 2]; 2]; 2];
    let w = 1.0 / points as f64;
    for p in 0..points {
        let t = 2.0 * PI * p as f64 / points as f64;
        let a = [t.cos(), t.sin()];
        let k = Matrix2::from_fn(|i, k| {
            (0..2)
                .flat_map(|j| (0..2).map(move |l| (j, l)))
                .map(|(j, l)| c.get(i, j, k, l) * a[j] * a[l])
                .sum::<f64>()
        });
        let n = k.try_inverse().ok_or(Error::SingularTensor {
            condition: f64::INFINITY,
        })?;
        for (i, ai) in acc.iter_mut().enumerate() {
            for (j, aij) in ai.iter_mut().enumerate() {
                for (m, aijm) in aij.iter_mut().enumerate() {
                    for (q, v) in aijm.iter_mut().enumerate() {
                        let mut s = 0.0;
                        for kk in 0..2 {
                            for l in 0..2 {
                                s += 0.5 * (n[(i, kk)] * a[j] + n[(j, kk)] * a[i]) * a[l] * c.get(kk, l, m, q);
                            }
                        }
                        *v += w * s;
                    }
                }
            }
        }
    }
    Ok(Tensor4::from_full(&acc))
}

const TRAPEZOID_POINTS: usize = 512;

/// `A = ΔC (I + S C_a⁻¹ ΔC)⁻¹`, background `ca`, inclusion `cb`.
pub fn moment_reference(ca: &Tensor4, cb: &Tensor4, s: &Tensor4) -> Result<Tensor4> {
    let dc = *cb - *ca;
    let inner = Tensor4::identity() + *s * ca.inverse()? * dc;
    Ok(dc * inner.inverse()?)
}

/// Exact argmin over `resolution` equally spaced inserted angles of
/// `−E:A^{aF}(θ̃):E`, for background `a` (at fiber angle `theta` when `a` is
/// the fiber phase).
pub fn dense_theta_argmin(
    catalog: &MaterialCatalog,
    e: &Sym2,
    a: Phase,
    theta: f64,
    resolution: usize,
) -> Result<f64> {
    if resolution < 360 {
        return Err(Error::validation("resolution", "must be at least 360"));
    }
    let ca = catalog.oriented(a, theta);
    let s = eshelby_trapezoid(&ca, TRAPEZOID_POINTS)?;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..resolution {
        let t = PI * k as f64 / resolution as f64;
        let cb = catalog.fiber_at(t);
        let d = if cb == ca {
            0.0
        } else {
            -moment_reference(&ca, &cb, &s)?.quadratic(e)
        };
        if d < best.0 {
            best = (d, t);
        }
    }
    Ok(best.1)
}

/// `D_{a→b} J_C` evaluated directly (no table), for oracle comparisons.
pub fn direct_td(ca: &Tensor4, cb: &Tensor4, e: &Sym2) -> Result<f64> {
    if ca == cb {
        return Ok(0.0);
    }
    let s = eshelby_trapezoid(ca, TRAPEZOID_POINTS)?;
    Ok(-moment_reference(ca, cb, &s)?.quadratic(e))
}

/// Area of the intersection of the disc `|x − center| < r` with an
/// axis-aligned rectangle.
pub fn circle_rect_overlap(center: [f64; 2], r: f64, lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let g = |x: f64, y: f64| lower_left_area(x - center[0], y - center[1], r);
    let area = g(hi[0], hi[1]) - g(lo[0], hi[1]) - g(hi[0], lo[1]) + g(lo[0], lo[1]);
    area.max(0.0)
}

/// Area of the origin-centred disc of radius `r` within `X ≤ x, Y ≤ y`.
fn lower_left_area(x: f64, y: f64, r: f64) -> f64 {
    if x <= -r || y <= -r {
        return 0.0;
    }
    let x = x.min(r);
    // Antiderivative of √(r² − X²).
    let s = |t: f64| 0.5 * (t * (r * r - t * t).max(0.0).sqrt() + r * r * (t / r).clamp(-1.0, 1.0).asin());
    if y >= r {
        return 2.0 * (s(x) - s(-r));
    }
    let a = (r * r - y * y).sqrt();
    let m = x.clamp(-a, a);
    if y >= 0.0 {
        2.0 * (s(x) - s(-r)) - (s(m) - s(-a) - y * (m + a))
    } else {
        s(m) - s(-a) + y * (m + a)
    }
}

/// The unperturbed problem an insertion is measured against.
pub struct FdBaseline<'a> {
    pub mesh: &'a Mesh,
    pub tensors: &'a ElementField<Tensor4>,
    pub traction: [f64; 2],
    pub compliance: f64,
}

impl<'a> FdBaseline<'a> {
    pub fn solve(mesh: &'a Mesh, tensors: &'a ElementField<Tensor4>, traction: [f64; 2]) -> Result<Self> {
        let compliance = assemble_and_solve(mesh, tensors, traction)?.compliance;
        Ok(Self {
            mesh,
            tensors,
            traction,
            compliance,
        })
    }
}

/// A disc of material `target` (phase `to` at angle `angle`) replacing phase
/// `from` around `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsertionSpec {
    pub center: [f64; 2],
    pub radius: f64,
    pub from: Phase,
    pub to: Phase,
    pub angle: f64,
}

/// `(J(Ω_ε) − J) / (π ε²)` with partially covered elements blended by
/// their exact overlap fraction.
pub fn fd_topological_derivative(
    base: &FdBaseline,
    catalog: &MaterialCatalog,
    spec: &InsertionSpec,
) -> Result<f64> {
    let mesh = base.mesh;
    let h = mesh.hx().max(mesh.hy());
    let [cx, cy] = spec.center;
    let r = spec.radius;
    if r < 2.0 * h - 1e-12 {
        return Err(Error::Precondition(format!("disc radius {r} below two element sizes ({h})")));
    }
    if cx - r <= 0.0 || cy - r <= 0.0 || cx + r >= mesh.width || cy + r >= mesh.height {
        return Err(Error::Precondition("disc must lie strictly inside the domain".into()));
    }
    let target = catalog.oriented(spec.to, spec.angle);
    let area = mesh.element_area();
    let mut tensors = base.tensors.clone();
    let mut changed = false;
    for e in 0..mesh.n_elements() {
        let (lo, hi) = mesh.element_bounds(e);
        let f = circle_rect_overlap(spec.center, r, lo, hi) / area;
        if f <= 0.0 {
            continue;
        }
        let old = base.tensors[e];
        if old != target {
            changed = true;
            tensors[e] = old.scale(1.0 - f) + target.scale(f);
        }
    }
    if !changed {
        return Ok(0.0);
    }
    let j = assemble_and_solve(mesh, &tensors, base.traction)?.compliance;
    Ok((j - base.compliance) / (PI * r * r))
}

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Strain with components drawn uniformly from `[−1, 1]`.
pub fn random_strain(rng: &mut impl Rng) -> Sym2 {
    Sym2::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

/// One table lookup compared with direct evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LookupError {
    /// `|table − direct| / |direct|`.
    pub relative: f64,
    /// `|table − direct| / (‖A‖₂ ‖E‖²)`: the deviation relative to the
    /// largest value the derivative can take at this strain magnitude, which
    /// stays meaningful where the sign-indefinite derivative crosses zero.
    pub scaled: f64,
}

/// Table lookups against direct evaluation for a fiber background at
/// random off-grid angles: both isotropic targets and one random fiber
/// target per sample.
pub fn interpolation_errors(
    table: &DerivativeTable,
    catalog: &MaterialCatalog,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<Vec<LookupError>> {
    let mut errs = Vec::with_capacity(3 * samples);
    for _ in 0..samples {
        let e = random_strain(rng);
        let theta = rng.gen_range(0.0..PI);
        let ca = catalog.fiber_at(theta);
        let s = eshelby_trapezoid(&ca, TRAPEZOID_POINTS)?;
        let j = rng.gen_range(0..table.n());
        let lookups = [
            (table.isotropic_target(Phase::Fiber, Phase::Void, &e, theta), *catalog.tensor(Phase::Void)),
            (table.isotropic_target(Phase::Fiber, Phase::Isotropic, &e, theta), *catalog.tensor(Phase::Isotropic)),
            (table.per_angle(Phase::Fiber, &e, theta)[j], catalog.fiber_at(table.angle(j))),
        ];
        for (t, cb) in lookups {
            let a = moment_reference(&ca, &cb, &s)?;
            let d = -a.quadratic(&e);
            let bound = a.mandel().singular_values().max() * e.norm().powi(2);
            errs.push(LookupError {
                relative: ((t - d) / d).abs(),
                scaled: (t - d).abs() / bound,
            });
        }
    }
    Ok(errs)
}

/// Periodic distance between two fiber angles.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Fraction of random strain states whose table-estimated optimal angle lies
/// within one grid spacing of the dense search, for background `a`.
pub fn theta_star_agreement(
    table: &DerivativeTable,
    catalog: &MaterialCatalog,
    a: Phase,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    let mut hits = 0;
    for _ in 0..samples {
        let e = random_strain(rng);
        let theta = if a == Phase::Fiber { rng.gen_range(0.0..PI) } else { 0.0 };
        let est = table.theta_star(a, &e, theta).angle;
        let dense = dense_theta_argmin(catalog, &e, a, theta, DENSE_RESOLUTION)?;
        if angle_gap(est, dense) <= table.spacing() {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}

const DENSE_RESOLUTION: usize = 3600;
const SUITE_SAMPLES: usize = 100;

/// Oracle comparisons for the configured materials: Eshelby tensor against
/// the closed form, table interpolation against direct evaluation, and the
/// estimated optimal orientation against a dense angle search.
pub fn verification_suite(config: &OptConfig) -> Result<Vec<CheckOutcome>> {
    let catalog = MaterialCatalog::new(&config.materials)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::new();

    let s = eshelby_interior(catalog.tensor(Phase::Isotropic))?;
    let diff = max_component_diff(&s, &eshelby_closed_form(config.materials.nu_iso));
    out.push(CheckOutcome {
        name: "eshelby_closed_form",
        passed: diff <= 1e-8,
        detail: format!("max component difference {diff:.3e} (limit 1e-8)"),
    });

    let table = DerivativeTable::build(&catalog, config.n_angles)?;
    let errs = interpolation_errors(&table, &catalog, SUITE_SAMPLES, &mut rng)?;
    let worst = errs.iter().map(|e| e.scaled).fold(0.0, f64::max);
    let within = errs.iter().filter(|e| e.relative <= 0.02).count();
    out.push(CheckOutcome {
        name: "table_interpolation",
        passed: worst <= 0.02,
        detail: format!(
            "worst scaled error {worst:.3e} (limit 2e-2); {within}/{} lookups within 2% of the direct value",
            errs.len()
        ),
    });

    for (name, a) in [("theta_star_iso", Phase::Isotropic), ("theta_star_fiber", Phase::Fiber)] {
        let frac = theta_star_agreement(&table, &catalog, a, SUITE_SAMPLES, &mut rng)?;
        out.push(CheckOutcome {
            name,
            passed: frac >= 0.99,
            detail: format!("{:.1}% within one grid spacing (limit 99%)", 100.0 * frac),
        });
    }
    Ok(out)
}

/// Mandel matrix helper for tests comparing tensors.
pub fn max_component_diff(a: &Tensor4, b: &Tensor4) -> f64 {
    let d: Matrix3<f64> = a.mandel() - b.mandel();
    d.amax()
}
