//! Configuration loading and result export (legacy VTK snapshots, CSV
//! history).

mod config;
mod vtk;

pub use config::{fmt_f64, load_config, InitialDesign, InitialSource, OptConfig};
pub use vtk::{parse_vtk, read_snapshot_fields, snapshot_vtk, write_snapshot, SnapshotFields, VtkData};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::optimizer::OptHistory;

pub const HISTORY_HEADER: &str = "step,J_C,g_W,lambda,Lambda,max_dphi,wall_ms";

/// History as CSV text, one row per step.
pub fn history_csv(history: &OptHistory) -> String {
    let mut s = String::from(HISTORY_HEADER);
    s.push('\n');
    for r in history.records() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.step,
            fmt_f64(r.compliance),
            fmt_f64(r.weight_violation),
            fmt_f64(r.lambda),
            fmt_f64(r.integral),
            fmt_f64(r.max_dphi),
            fmt_f64(r.wall_ms)
        );
    }
    s
}

/// Writes `history.csv` into `dir`.
pub fn write_history(dir: &Path, history: &OptHistory) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("history.csv");
    fs::write(&path, history_csv(history))?;
    Ok(path)
}
