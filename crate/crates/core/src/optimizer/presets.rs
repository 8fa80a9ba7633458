//! Named starting designs.

use crate::cli_io::{read_snapshot_fields, InitialDesign, InitialSource, OptConfig};
use crate::error::{Error, Result};
use crate::fem2d::Mesh;
use crate::orientation::OrientationState;
use crate::xls::{clamp, project_constraint, XlsState};

use super::Design;

// Level-set values `[φ_VI, φ_VF, φ_IF]` of the pure phases.
const VOID: [f64; 3] = [1.0, 1.0, 0.0];
const ISO: [f64; 3] = [-1.0, 0.0, 1.0];
const FIBER: [f64; 3] = [0.0, -1.0, -1.0];

/// Checkerboard cells per unit height for preset E.
const CHECKER_CELLS: f64 = 4.0;

pub fn initial_design(config: &OptConfig, mesh: &Mesh) -> Result<Design> {
    let preset = match &config.initial {
        InitialSource::Preset(p) => *p,
        InitialSource::File(path) => {
            let f = read_snapshot_fields(path, mesh)?;
            let levelsets = XlsState::from_fields(mesh, [f.phi_vi, f.phi_vf, f.phi_if])?;
            if f.xi.len() != mesh.n_nodes() {
                return Err(Error::validation("initial_file", "snapshot does not match the mesh"));
            }
            return Ok(Design {
                levelsets: project_constraint(&clamp(&levelsets)),
                orientation: OrientationState { xi: f.xi, eta: f.eta },
            });
        }
    };
    let (w, h) = (mesh.width, mesh.height);
    let design = match preset {
        InitialDesign::A => Design {
            levelsets: XlsState::uniform(mesh, 0.0, 0.0, 0.0),
            orientation: OrientationState::zeros(mesh),
        },
        InitialDesign::B => Design {
            levelsets: XlsState::from_fn(mesh, |_| FIBER),
            orientation: OrientationState::from_angle_fn(mesh, |_| 0.0),
        },
        InitialDesign::C => Design {
            levelsets: XlsState::from_fn(mesh, |[_, y]| if y < 0.5 * h { VOID } else { FIBER }),
            orientation: OrientationState::from_angle_fn(mesh, |_| 0.0),
        },
        InitialDesign::D => Design {
            levelsets: XlsState::from_fn(mesh, |_| FIBER),
            orientation: OrientationState::from_angle_fn(mesh, |[x, y]| (y - 0.5 * h).atan2(x - 0.5 * w)),
        },
        InitialDesign::E => {
            let cell = h / CHECKER_CELLS;
            Design {
                levelsets: XlsState::from_fn(mesh, |[x, y]| {
                    let (i, j) = ((x / cell).floor() as i64, (y / cell).floor() as i64);
                    if (i + j).rem_euclid(2) == 0 {
                        FIBER
                    } else {
                        ISO
                    }
                }),
                orientation: OrientationState::from_angle_fn(mesh, |_| 0.0),
            }
        }
    };
    Ok(Design {
        levelsets: project_constraint(&clamp(&design.levelsets)),
        orientation: design.orientation,
    })
}
