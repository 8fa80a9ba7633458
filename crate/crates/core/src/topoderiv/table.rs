//! Moment tensors on a discrete angle grid `θ_i = iπ/n`, with periodic
//! three-point quadratic interpolation in the background angle and
//! vertex refinement for the optimal inserted angle.

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::Matrix3;
use sha2::{Digest, Sha256};

use super::{eshelby_interior, elastic_moment_with};
use crate::error::{Error, Result};
use crate::orientation::wrap_angle;
use crate::tensor2d::{MaterialCatalog, Phase, Sym2, Tensor4};

pub const TABLE_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"FOTABLE\0";

/// Precomputed `A^{ab}` for every ordered pair of distinct phases, plus
/// fiber-into-fiber at every pair of grid angles.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTable {
    n: usize,
    /// `[V→I, I→V]`.
    iso_pairs: [Tensor4; 2],
    /// Background V or I, fiber inserted at `θ̃_j`.
    into_fiber: [Vec<Tensor4>; 2],
    /// Fiber background at `θ_i`, V or I inserted.
    from_fiber: [Vec<Tensor4>; 2],
    /// Fiber background at `θ_i`, fiber inserted at `θ̃_j`; index `i * n + j`.
    fiber_fiber: Vec<Tensor4>,
}

/// Result of an orientation search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaStar {
    pub angle: f64,
    /// Minimum of the per-angle derivative (quadratic vertex value).
    pub value: f64,
    /// The per-angle derivative is flat to `1e-12`; `angle` is the input angle.
    pub degenerate: bool,
}

const FLAT_TOLERANCE: f64 = 1e-12;

fn iso_slot(p: Phase) -> usize {
    match p {
        Phase::Void => 0,
        Phase::Isotropic => 1,
        Phase::Fiber => panic!("fiber has no isotropic slot"),
    }
}

impl DerivativeTable {
    pub fn build(catalog: &MaterialCatalog, n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::validation("n_angles", format!("must be even and at least 8, got {n}")));
        }
        let grid: Vec<f64> = (0..n).map(|i| i as f64 * PI / n as f64).collect();
        let cv = *catalog.tensor(Phase::Void);
        let ci = *catalog.tensor(Phase::Isotropic);
        let fibers: Vec<Tensor4> = grid.iter().map(|&t| catalog.fiber_at(t)).collect();
        let ctx = |from: Phase, to: Phase, i: usize, j: usize| {
            move |e: Error| Error::TableEntry {
                from: from.symbol(),
                to: to.symbol(),
                i,
                j,
                source: Box::new(e),
            }
        };
        let sv = eshelby_interior(&cv).map_err(ctx(Phase::Void, Phase::Void, 0, 0))?;
        let si = eshelby_interior(&ci).map_err(ctx(Phase::Isotropic, Phase::Isotropic, 0, 0))?;
        let sf: Vec<Tensor4> = fibers
            .iter()
            .enumerate()
            .map(|(i, c)| eshelby_interior(c).map_err(ctx(Phase::Fiber, Phase::Fiber, i, i)))
            .collect::<Result<_>>()?;

        let iso_pairs = [
            elastic_moment_with(&cv, &ci, &sv).map_err(ctx(Phase::Void, Phase::Isotropic, 0, 0))?,
            elastic_moment_with(&ci, &cv, &si).map_err(ctx(Phase::Isotropic, Phase::Void, 0, 0))?,
        ];
        let mut into_fiber = [Vec::with_capacity(n), Vec::with_capacity(n)];
        let mut from_fiber = [Vec::with_capacity(n), Vec::with_capacity(n)];
        for (slot, (c, s, p)) in [(cv, sv, Phase::Void), (ci, si, Phase::Isotropic)].into_iter().enumerate() {
            for j in 0..n {
                into_fiber[slot].push(
                    elastic_moment_with(&c, &fibers[j], &s).map_err(ctx(p, Phase::Fiber, 0, j))?,
                );
                from_fiber[slot].push(
                    elastic_moment_with(&fibers[j], &c, &sf[j]).map_err(ctx(Phase::Fiber, p, j, 0))?,
                );
            }
        }
        let mut fiber_fiber = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                fiber_fiber.push(
                    elastic_moment_with(&fibers[i], &fibers[j], &sf[i])
                        .map_err(ctx(Phase::Fiber, Phase::Fiber, i, j))?,
                );
            }
        }
        Ok(Self {
            n,
            iso_pairs,
            into_fiber,
            from_fiber,
            fiber_fiber,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        PI / self.n as f64
    }

    pub fn angle(&self, i: usize) -> f64 {
        (i % self.n) as f64 * self.spacing()
    }

    /// Stored `A^{ab}(θ_i, θ̃_j)`; indices are taken mod `n` and ignored for
    /// isotropic phases. Same-phase isotropic entries are zero.
    pub fn entry(&self, a: Phase, b: Phase, i: usize, j: usize) -> Tensor4 {
        let (i, j) = (i % self.n, j % self.n);
        match (a, b) {
            (Phase::Fiber, Phase::Fiber) => self.fiber_fiber[i * self.n + j],
            (Phase::Fiber, b) => self.from_fiber[iso_slot(b)][i],
            (a, Phase::Fiber) => self.into_fiber[iso_slot(a)][j],
            (Phase::Void, Phase::Isotropic) => self.iso_pairs[0],
            (Phase::Isotropic, Phase::Void) => self.iso_pairs[1],
            _ => Tensor4::zero(),
        }
    }

    /// `D_{a→b} J_C` for an isotropic target `b`. A fiber background at an
    /// off-grid angle is interpolated over the three nearest grid angles.
    pub fn isotropic_target(&self, a: Phase, b: Phase, e: &Sym2, theta: f64) -> f64 {
        assert!(b != Phase::Fiber);
        if a != Phase::Fiber {
            return -self.entry(a, b, 0, 0).quadratic(e);
        }
        let tensors = &self.from_fiber[iso_slot(b)];
        self.interp_background(theta, |i| -tensors[i].quadratic(e))
    }

    /// `D_{a→F,θ̃_j} J_C` at every grid angle `θ̃_j`.
    pub fn per_angle(&self, a: Phase, e: &Sym2, theta: f64) -> Vec<f64> {
        let n = self.n;
        match a {
            Phase::Fiber => {
                let (i0, s) = self.locate(theta);
                let im = (i0 + n - 1) % n;
                let ip = (i0 + 1) % n;
                (0..n)
                    .map(|j| {
                        let f = |i: usize| -self.fiber_fiber[i * n + j].quadratic(e);
                        interp_periodic(f(im), f(i0), f(ip), s)
                    })
                    .collect()
            }
            a => self.into_fiber[iso_slot(a)].iter().map(|t| -t.quadratic(e)).collect(),
        }
    }

    /// Minimizing inserted fiber angle for background `a` at angle `theta`.
    pub fn theta_star(&self, a: Phase, e: &Sym2, theta: f64) -> ThetaStar {
        minimize_periodic(&self.per_angle(a, e, theta), self.spacing(), theta)
    }

    /// Grid index nearest to `theta` and the signed offset in grid units.
    fn locate(&self, theta: f64) -> (usize, f64) {
        let pos = wrap_angle(theta) / self.spacing();
        let i0 = pos.round();
        ((i0 as usize) % self.n, pos - i0)
    }

    fn interp_background(&self, theta: f64, f: impl Fn(usize) -> f64) -> f64 {
        let n = self.n;
        let (i0, s) = self.locate(theta);
        interp_periodic(f((i0 + n - 1) % n), f(i0), f((i0 + 1) % n), s)
    }

    fn key(catalog: &MaterialCatalog, n: usize) -> [u8; 32] {
        let p = catalog.params();
        let mut h = Sha256::new();
        h.update(MAGIC);
        h.update(TABLE_FORMAT_VERSION.to_le_bytes());
        h.update((n as u64).to_le_bytes());
        for v in [
            p.nu_void,
            p.nu_iso,
            p.nu_fiber,
            p.e_void,
            p.e_iso,
            p.e_fiber,
            p.back_ratio,
        ] {
            h.update(v.to_le_bytes());
        }
        h.finalize().into()
    }

    fn tensors(&self) -> impl Iterator<Item = &Tensor4> {
        self.iso_pairs
            .iter()
            .chain(self.into_fiber.iter().flatten())
            .chain(self.from_fiber.iter().flatten())
            .chain(self.fiber_fiber.iter())
    }

    /// Cache file path for a catalog and grid size inside `dir`.
    pub fn cache_path(dir: &Path, catalog: &MaterialCatalog, n: usize) -> PathBuf {
        let key = Self::key(catalog, n);
        let hex: String = key[..8].iter().map(|b| format!("{b:02x}")).collect();
        dir.join(format!("table_n{n}_{hex}.bin"))
    }

    pub fn write_cache(&self, path: &Path, catalog: &MaterialCatalog) -> Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&TABLE_FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.n as u64).to_le_bytes());
        buf.extend_from_slice(&Self::key(catalog, self.n));
        for t in self.tensors() {
            for v in t.mandel().iter() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("tmp");
        fs::File::create(&tmp)?.write_all(&buf)?;
        fs::rename(tmp, path)?;
        Ok(())
    }

    /// Reads a cached table; `Ok(None)` when the file is missing or was
    /// written for a different catalog, grid size or format version.
    pub fn read_cache(path: &Path, catalog: &MaterialCatalog, n: usize) -> Result<Option<Self>> {
        let mut buf = Vec::new();
        match fs::File::open(path) {
            Ok(mut f) => f.read_to_end(&mut buf)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let header = MAGIC.len() + 4 + 8 + 32;
        let count = 2 + 4 * n + n * n;
        if buf.len() != header + count * 72
            || &buf[..8] != MAGIC
            || buf[8..12] != TABLE_FORMAT_VERSION.to_le_bytes()
            || buf[12..20] != (n as u64).to_le_bytes()
            || buf[20..52] != Self::key(catalog, n)
        {
            return Ok(None);
        }
        let mut vals = buf[header..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let mut next = || Tensor4::from_mandel(Matrix3::from_iterator(vals.by_ref().take(9)));
        let iso_pairs = [next(), next()];
        let mut vecs = |len: usize| (0..len).map(|_| next()).collect::<Vec<_>>();
        let into_fiber = [vecs(n), vecs(n)];
        let from_fiber = [vecs(n), vecs(n)];
        let fiber_fiber = vecs(n * n);
        Ok(Some(Self {
            n,
            iso_pairs,
            into_fiber,
            from_fiber,
            fiber_fiber,
        }))
    }

    /// Loads from `dir` when a matching cache exists, else builds and
    /// stores it. Returns the table and whether the cache was hit.
    pub fn load_or_build(catalog: &MaterialCatalog, n: usize, dir: &Path) -> Result<(Self, bool)> {
        let path = Self::cache_path(dir, catalog, n);
        if let Some(t) = Self::read_cache(&path, catalog, n)? {
            return Ok((t, true));
        }
        let t = Self::build(catalog, n)?;
        t.write_cache(&path, catalog)?;
        Ok((t, false))
    }
}

/// Quadratic through `(−1, fm)`, `(0, f0)`, `(1, fp)` evaluated at `s`.
#[inline]
pub fn interp_periodic(fm: f64, f0: f64, fp: f64, s: f64) -> f64 {
    f0 + 0.5 * s * (fp - fm) + 0.5 * s * s * (fp - 2.0 * f0 + fm)
}

/// Vertex offset (grid units) and value of the parabola through three
/// samples whose middle one is the smallest. Falls back to the middle
/// sample when the curvature is not positive.
#[inline]
pub fn quadratic_vertex(fm: f64, f0: f64, fp: f64) -> (f64, f64) {
    let curv = fm - 2.0 * f0 + fp;
    if !(curv > 0.0) {
        return (0.0, f0);
    }
    let offset = (0.5 * (fm - fp) / curv).clamp(-0.5, 0.5);
    (offset, interp_periodic(fm, f0, fp, offset))
}

/// Periodic argmin with vertex refinement; ties go to the smallest angle.
pub fn minimize_periodic(values: &[f64], spacing: f64, current: f64) -> ThetaStar {
    let n = values.len();
    let mut best = 0;
    let (mut lo, mut hi) = (values[0], values[0]);
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = j;
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi - lo < FLAT_TOLERANCE {
        return ThetaStar {
            angle: wrap_angle(current),
            value: lo,
            degenerate: true,
        };
    }
    let fm = values[(best + n - 1) % n];
    let fp = values[(best + 1) % n];
    let (offset, value) = quadratic_vertex(fm, values[best], fp);
    ThetaStar {
        angle: wrap_angle((best as f64 + offset) * spacing),
        value,
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor2d::MaterialParams;
    use crate::topoderiv::elastic_moment;

    fn setup() -> (MaterialCatalog, DerivativeTable) {
        let cat = MaterialCatalog::new(&MaterialParams::default()).unwrap();
        let t = DerivativeTable::build(&cat, 12).unwrap();
        (cat, t)
    }

    #[test]
    fn fiber_diagonal_is_zero() {
        let (_, t) = setup();
        for i in 0..t.n() {
            assert_eq!(t.entry(Phase::Fiber, Phase::Fiber, i, i), Tensor4::zero());
        }
    }

    #[test]
    fn indices_wrap() {
        let (_, t) = setup();
        let n = t.n();
        assert_eq!(t.entry(Phase::Isotropic, Phase::Fiber, 0, 3 + n), t.entry(Phase::Isotropic, Phase::Fiber, 0, 3));
        assert_eq!(t.entry(Phase::Fiber, Phase::Fiber, 2 + n, 5), t.entry(Phase::Fiber, Phase::Fiber, 2, 5));
    }

    #[test]
    fn entries_match_direct_recomputation() {
        let (cat, t) = setup();
        let n = t.n();
        let oriented = |p: Phase, k: usize| cat.oriented(p, k as f64 * PI / n as f64);
        for a in Phase::ALL {
            for b in Phase::ALL {
                if a == b && a != Phase::Fiber {
                    continue;
                }
                for (i, j) in [(0, 0), (3, 7), (11, 1)] {
                    let direct = elastic_moment(&oriented(a, i), &oriented(b, j)).unwrap();
                    assert_eq!(t.entry(a, b, i, j), direct, "{a:?}->{b:?} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn grid_angles_reproduce_table() {
        let (_, t) = setup();
        let e = Sym2::new(0.2, -0.5, 0.3);
        let direct = -t.entry(Phase::Fiber, Phase::Void, 4, 0).quadratic(&e);
        assert!((t.isotropic_target(Phase::Fiber, Phase::Void, &e, t.angle(4)) - direct).abs() < 1e-12 * direct.abs());
        let row = t.per_angle(Phase::Fiber, &e, t.angle(5));
        for j in 0..t.n() {
            let d = -t.entry(Phase::Fiber, Phase::Fiber, 5, j).quadratic(&e);
            assert!((row[j] - d).abs() <= 1e-12 * d.abs().max(1e-30));
        }
    }

    #[test]
    fn vertex_of_exact_parabola() {
        // f(s) = (s − 0.3)² sampled at −1, 0, 1.
        let f = |s: f64| (s - 0.3) * (s - 0.3);
        let (off, val) = quadratic_vertex(f(-1.0), f(0.0), f(1.0));
        assert!((off - 0.3).abs() < 1e-15);
        assert!(val.abs() < 1e-15);
        assert_eq!(quadratic_vertex(1.0, 1.0, 1.0), (0.0, 1.0));
    }

    #[test]
    fn ties_pick_smallest_angle_and_flat_is_degenerate() {
        let v = [1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        let r = minimize_periodic(&v, PI / 6.0, 2.0);
        assert!((r.angle - PI / 6.0).abs() < 1e-15);
        let flat = minimize_periodic(&[0.5; 6], PI / 6.0, 2.0);
        assert!(flat.degenerate);
        assert_eq!(flat.angle, 2.0);
    }

    #[test]
    fn uniaxial_strain_picks_axis() {
        let (_, t) = setup();
        let x = t.theta_star(Phase::Isotropic, &Sym2::new(1.0, 0.0, 0.0), 0.0);
        assert!(x.angle < 1e-9 || PI - x.angle < 1e-9);
        let y = t.theta_star(Phase::Fiber, &Sym2::new(0.0, 1.0, 0.0), 0.4);
        assert!((y.angle - PI / 2.0).abs() < t.spacing());
    }

    #[test]
    fn cache_round_trip() {
        let (cat, t) = setup();
        let dir = tempfile::tempdir().unwrap();
        let (built, hit) = DerivativeTable::load_or_build(&cat, 12, dir.path()).unwrap();
        assert!(!hit);
        assert_eq!(built, t);
        let (loaded, hit) = DerivativeTable::load_or_build(&cat, 12, dir.path()).unwrap();
        assert!(hit);
        assert_eq!(loaded, t);
        // A different catalog misses.
        let other = MaterialCatalog::new(&MaterialParams {
            e_iso: 50.0,
            ..Default::default()
        })
        .unwrap();
        let path = DerivativeTable::cache_path(dir.path(), &cat, 12);
        assert!(DerivativeTable::read_cache(&path, &other, 12).unwrap().is_none());
    }

    #[test]
    fn rejects_bad_grid() {
        let cat = MaterialCatalog::new(&MaterialParams::default()).unwrap();
        assert!(DerivativeTable::build(&cat, 7).is_err());
        assert!(DerivativeTable::build(&cat, 9).is_err());
    }
}
