//! Fourth-order tensors in two dimensions.
//!
//! Every tensor with minor symmetries (`T_ijkl = T_jikl = T_ijlk`) is stored
//! as a 3×3 matrix in the Mandel basis over the index pairs `{xx, yy, xy}`:
//!
//! ```text
//! M[p][q] = w_p w_q T_{ij kl},   p = (ij), q = (kl),   w = (1, 1, √2)
//! ```
//!
//! and a symmetric strain `E` maps to the 3-vector `(E_xx, E_yy, √2 E_xy)`.
//! With this convention the double contraction `A_ijmn B_mnkl` is the matrix
//! product, `E_ij T_ijkl E_kl` is `eᵀ M e`, and the inverse on symmetric
//! tensors is the ordinary matrix inverse. Major symmetry is not assumed:
//! Eshelby and moment tensors are generally non-symmetric matrices here.

mod catalog;

pub use catalog::{build_catalog, isotropic_plane_stress, MaterialCatalog, MaterialParams, Phase};

use std::f64::consts::SQRT_2;
use std::ops::{Add, Mul, Sub};

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};

/// Default upper bound on the 2-norm condition number accepted by
/// [`Tensor4::inverse`].
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e12;

const PAIR: [[usize; 2]; 2] = [[0, 2], [2, 1]];
const WEIGHT: [f64; 3] = [1.0, 1.0, SQRT_2];

/// Mandel slot of the index pair `(i, j)`.
#[inline]
pub fn pair_index(i: usize, j: usize) -> usize {
    PAIR[i][j]
}

/// Full index form `T[i][j][k][l]`, used for rotations and reference loops.
pub type Full4 = [[[[f64; 2]; 2]; 2]; 2];

/// Symmetric second-order tensor (strain or stress), tensorial shear.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl Sym2 {
    pub const fn new(xx: f64, yy: f64, xy: f64) -> Self {
        Self { xx, yy, xy }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            _ => self.xy,
        }
    }

    pub fn mandel(&self) -> Vector3<f64> {
        Vector3::new(self.xx, self.yy, SQRT_2 * self.xy)
    }

    pub fn from_mandel(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2] / SQRT_2)
    }

    pub fn norm(&self) -> f64 {
        self.mandel().norm()
    }

    /// Components in a frame rotated by `angle`: `E'_ij = Q_pi Q_qj E_pq`
    /// with `Q` the counterclockwise rotation.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        // Q E Qᵀ with Q = [[c, -s], [s, c]].
        let xx = c * c * self.xx - 2.0 * c * s * self.xy + s * s * self.yy;
        let yy = s * s * self.xx + 2.0 * c * s * self.xy + c * c * self.yy;
        let xy = c * s * (self.xx - self.yy) + (c * c - s * s) * self.xy;
        Self::new(xx, yy, xy)
    }
}

/// A 2D fourth-order tensor with minor symmetries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor4 {
    m: Matrix3<f64>,
}

impl Default for Tensor4 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Tensor4 {
    pub fn zero() -> Self {
        Self { m: Matrix3::zeros() }
    }

    /// Symmetrized identity `½(δ_ik δ_jl + δ_il δ_jk)`.
    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
        }
    }

    pub fn from_mandel(m: Matrix3<f64>) -> Self {
        Self { m }
    }

    pub fn mandel(&self) -> &Matrix3<f64> {
        &self.m
    }

    /// Builds a tensor from index components; minor symmetries are enforced
    /// by averaging over `(i,j)` and `(k,l)` swaps.
    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut full: Full4 = Default::default();
        for (i, fi) in full.iter_mut().enumerate() {
            for (j, fj) in fi.iter_mut().enumerate() {
                for (k, fk) in fj.iter_mut().enumerate() {
                    for (l, v) in fk.iter_mut().enumerate() {
                        *v = f(i, j, k, l);
                    }
                }
            }
        }
        Self::from_full(&full)
    }

    pub fn from_full(t: &Full4) -> Self {
        let mut m = Matrix3::zeros();
        for p in 0..3 {
            let (i, j) = pair_of(p);
            for q in 0..3 {
                let (k, l) = pair_of(q);
                let avg =
                    0.25 * (t[i][j][k][l] + t[j][i][k][l] + t[i][j][l][k] + t[j][i][l][k]);
                m[(p, q)] = WEIGHT[p] * WEIGHT[q] * avg;
            }
        }
        Self { m }
    }

    pub fn to_full(&self) -> Full4 {
        let mut t: Full4 = Default::default();
        for (i, ti) in t.iter_mut().enumerate() {
            for (j, tj) in ti.iter_mut().enumerate() {
                for (k, tk) in tj.iter_mut().enumerate() {
                    for (l, v) in tk.iter_mut().enumerate() {
                        *v = self.get(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let p = PAIR[i][j];
        let q = PAIR[k][l];
        self.m[(p, q)] / (WEIGHT[p] * WEIGHT[q])
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: self.m.transpose(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: self.m * s }
    }

    /// `T : E`, i.e. `T_ijkl E_kl`.
    pub fn apply(&self, e: &Sym2) -> Sym2 {
        Sym2::from_mandel(&(self.m * e.mandel()))
    }

    /// `E_ij T_ijkl E_kl`.
    #[inline]
    pub fn quadratic(&self, e: &Sym2) -> f64 {
        let v = e.mandel();
        v.dot(&(self.m * v))
    }

    /// `E_ij T_ijkl F_kl`.
    pub fn bilinear(&self, e: &Sym2, f: &Sym2) -> f64 {
        e.mandel().dot(&(self.m * f.mandel()))
    }

    pub fn max_abs(&self) -> f64 {
        self.m.amax()
    }

    pub fn is_major_symmetric(&self, tol: f64) -> bool {
        (self.m - self.m.transpose()).amax() <= tol * self.m.amax().max(f64::MIN_POSITIVE)
    }

    /// Smallest eigenvalue of the symmetric part of the Mandel matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (self.m + self.m.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }

    pub fn condition_number(&self) -> f64 {
        let sv = self.m.singular_values();
        let (lo, hi) = (sv.min(), sv.max());
        if lo == 0.0 || !lo.is_finite() {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Inverse on the space of symmetric 2×2 tensors.
    pub fn inverse(&self) -> Result<Self> {
        self.inverse_with_limit(DEFAULT_CONDITION_LIMIT)
    }

    pub fn inverse_with_limit(&self, condition_limit: f64) -> Result<Self> {
        let condition = self.condition_number();
        if !(condition <= condition_limit) {
            return Err(Error::SingularTensor { condition });
        }
        self.m
            .try_inverse()
            .map(|m| Self { m })
            .ok_or(Error::SingularTensor { condition })
    }

    /// `C_ijkl(θ) = C_pqmn R_pi R_qj R_mk R_nl`, where `R = Qᵀ` and `Q` is the
    /// counterclockwise rotation by `angle`. A material whose stiff axis is
    /// `x` ends up with its stiff axis along `(cos θ, sin θ)`.
    pub fn rotated(&self, angle: f64) -> Self {
        let r = rotation_r(angle);
        let src = self.to_full();
        // Four single-index contractions instead of one 8-fold loop.
        let mut a: Full4 = Default::default();
        for i in 0..2 {
            for q in 0..2 {
                for m in 0..2 {
                    for n in 0..2 {
                        a[i][q][m][n] = r[0][i] * src[0][q][m][n] + r[1][i] * src[1][q][m][n];
                    }
                }
            }
        }
        let mut b: Full4 = Default::default();
        for i in 0..2 {
            for j in 0..2 {
                for m in 0..2 {
                    for n in 0..2 {
                        b[i][j][m][n] = r[0][j] * a[i][0][m][n] + r[1][j] * a[i][1][m][n];
                    }
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for n in 0..2 {
                        a[i][j][k][n] = r[0][k] * b[i][j][0][n] + r[1][k] * b[i][j][1][n];
                    }
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        b[i][j][k][l] = r[0][l] * a[i][j][k][0] + r[1][l] * a[i][j][k][1];
                    }
                }
            }
        }
        Self::from_full(&b)
    }
}

impl Add for Tensor4 {
    type Output = Tensor4;
    fn add(self, rhs: Tensor4) -> Tensor4 {
        Tensor4 { m: self.m + rhs.m }
    }
}

impl Sub for Tensor4 {
    type Output = Tensor4;
    fn sub(self, rhs: Tensor4) -> Tensor4 {
        Tensor4 { m: self.m - rhs.m }
    }
}

/// Double contraction `(A:B)_ijkl = A_ijmn B_mnkl`.
impl Mul for Tensor4 {
    type Output = Tensor4;
    fn mul(self, rhs: Tensor4) -> Tensor4 {
        Tensor4 { m: self.m * rhs.m }
    }
}

fn pair_of(p: usize) -> (usize, usize) {
    match p {
        0 => (0, 0),
        1 => (1, 1),
        _ => (0, 1),
    }
}

/// `R[p][i]` as used in [`Tensor4::rotated`].
pub fn rotation_r(angle: f64) -> [[f64; 2]; 2] {
    let (s, c) = angle.sin_cos();
    [[c, s], [-s, c]]
}

/// Rotates `c` by `angle`.
pub fn rotate_tensor(c: &Tensor4, angle: f64) -> Tensor4 {
    c.rotated(angle)
}

/// Inverse on symmetric tensors with the default condition bound.
pub fn invert_tensor4(t: &Tensor4) -> Result<Tensor4> {
    t.inverse()
}

/// `N = K⁻¹` with `K_ik = C_ijkl α_j α_l`.
pub fn acoustic_tensor(c: &Tensor4, alpha: Vector2<f64>) -> Result<Matrix2<f64>> {
    let mut k = Matrix2::zeros();
    for i in 0..2 {
        for kk in 0..2 {
            let mut s = 0.0;
            for j in 0..2 {
                for l in 0..2 {
                    s += c.get(i, j, kk, l) * alpha[j] * alpha[l];
                }
            }
            k[(i, kk)] = s;
        }
    }
    let det = k.determinant();
    let scale = k.amax().powi(2);
    if !(det.abs() > 1e-14 * scale) {
        return Err(Error::SingularTensor {
            condition: f64::INFINITY,
        });
    }
    k.try_inverse().ok_or(Error::SingularTensor {
        condition: f64::INFINITY,
    })
}
