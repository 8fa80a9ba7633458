use crate::error::{Error, Result};

use super::Tensor4;

/// The three phases of the design domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Void,
    Isotropic,
    Fiber,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Void, Phase::Isotropic, Phase::Fiber];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Phase {
        Phase::ALL[i]
    }

    pub fn symbol(self) -> char {
        match self {
            Phase::Void => 'V',
            Phase::Isotropic => 'I',
            Phase::Fiber => 'F',
        }
    }

    pub fn is_anisotropic(self) -> bool {
        self == Phase::Fiber
    }

    /// The phase that is neither `self` nor `other`.
    pub fn third(self, other: Phase) -> Phase {
        debug_assert_ne!(self, other);
        Phase::from_index(3 - self.index() - other.index())
    }
}

/// Scalar material inputs. Moduli in GPa, densities as mass per unit area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub nu_void: f64,
    pub nu_iso: f64,
    pub nu_fiber: f64,
    pub e_void: f64,
    pub e_iso: f64,
    pub e_fiber: f64,
    /// `E_back / E_fib`, in `(0, 1]`.
    pub back_ratio: f64,
    pub rho_void: f64,
    pub rho_iso: f64,
    pub rho_fiber: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            nu_void: 0.3,
            nu_iso: 0.3,
            nu_fiber: 0.3,
            e_void: 0.01,
            e_iso: 80.0,
            e_fiber: 100.0,
            back_ratio: 0.2,
            rho_void: 0.0,
            rho_iso: 1.0,
            rho_fiber: 0.5,
        }
    }
}

impl MaterialParams {
    pub fn e_back(&self) -> f64 {
        self.back_ratio * self.e_fiber
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("E_V", self.e_void),
            ("E_I", self.e_iso),
            ("E_fib", self.e_fiber),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidMaterial {
                    name,
                    reason: format!("modulus must be positive, got {v}"),
                });
            }
        }
        if !(self.back_ratio > 0.0 && self.back_ratio <= 1.0) {
            return Err(Error::InvalidMaterial {
                name: "E_back_ratio",
                reason: format!("must lie in (0, 1], got {}", self.back_ratio),
            });
        }
        for (name, nu) in [("nu_V", self.nu_void), ("nu_I", self.nu_iso), ("nu_F", self.nu_fiber)] {
            if !(nu > -1.0 && nu < 0.5) {
                return Err(Error::InvalidMaterial {
                    name,
                    reason: format!("Poisson ratio must lie in (-1, 0.5), got {nu}"),
                });
            }
        }
        for (name, rho) in [("rho_V", self.rho_void), ("rho_I", self.rho_iso), ("rho_F", self.rho_fiber)] {
            if !(rho >= 0.0 && rho.is_finite()) {
                return Err(Error::InvalidMaterial {
                    name,
                    reason: format!("density must be nonnegative, got {rho}"),
                });
            }
        }
        if self.rho_void > self.rho_iso || self.rho_void > self.rho_fiber {
            return Err(Error::InvalidMaterial {
                name: "rho_V",
                reason: "void density may not exceed the solid densities".into(),
            });
        }
        Ok(())
    }
}

/// Per-phase plane-stress stiffness tensors and densities.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialCatalog {
    params: MaterialParams,
    tensors: [Tensor4; 3],
}

/// Plane-stress isotropic stiffness.
pub fn isotropic_plane_stress(e: f64, nu: f64) -> Tensor4 {
    let f = e / (1.0 - nu * nu);
    let shear = e / (2.0 * (1.0 + nu));
    Tensor4::from_fn(|i, j, k, l| {
        if i == j && j == k && k == l {
            f
        } else if i == j && k == l {
            f * nu
        } else if i != j && k != l {
            shear
        } else {
            0.0
        }
    })
}

/// Orthotropic fiber stiffness with the fiber axis along `x`.
pub fn fiber_plane_stress(e_fib: f64, e_back: f64, nu: f64) -> Tensor4 {
    let d = 1.0 - nu * nu;
    Tensor4::from_fn(|i, j, k, l| {
        if i == j && j == k && k == l {
            if i == 0 {
                e_fib / d
            } else {
                e_back / d
            }
        } else if i == j && k == l {
            e_back * nu / d
        } else if i != j && k != l {
            e_back / (2.0 * (1.0 + nu))
        } else {
            0.0
        }
    })
}

impl MaterialCatalog {
    pub fn new(params: &MaterialParams) -> Result<Self> {
        params.validate()?;
        let tensors = [
            isotropic_plane_stress(params.e_void, params.nu_void),
            isotropic_plane_stress(params.e_iso, params.nu_iso),
            fiber_plane_stress(params.e_fiber, params.e_back(), params.nu_fiber),
        ];
        Ok(Self {
            params: *params,
            tensors,
        })
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    /// Stiffness of `phase`; for the fiber phase this is the unrotated base tensor.
    pub fn tensor(&self, phase: Phase) -> &Tensor4 {
        &self.tensors[phase.index()]
    }

    pub fn fiber_base(&self) -> &Tensor4 {
        &self.tensors[Phase::Fiber.index()]
    }

    pub fn fiber_at(&self, angle: f64) -> Tensor4 {
        self.fiber_base().rotated(angle)
    }

    /// Stiffness of `phase` with fiber orientation `angle` (ignored for isotropic phases).
    pub fn oriented(&self, phase: Phase, angle: f64) -> Tensor4 {
        match phase {
            Phase::Fiber => self.fiber_at(angle),
            other => *self.tensor(other),
        }
    }

    pub fn density(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Void => self.params.rho_void,
            Phase::Isotropic => self.params.rho_iso,
            Phase::Fiber => self.params.rho_fiber,
        }
    }
}

/// Builds the catalog; alias matching the operation name used in the docs.
pub fn build_catalog(params: &MaterialParams) -> Result<MaterialCatalog> {
    MaterialCatalog::new(params)
}
