//! Legacy ASCII VTK unstructured-grid snapshots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::fmt_f64;
use crate::error::{Error, Result};
use crate::fem2d::{Mesh, NodeField};
use crate::optimizer::Snapshot;
use crate::tensor2d::Phase;

const VTK_QUAD: u8 = 9;

fn scalars(out: &mut String, name: &str, values: impl Iterator<Item = String>) {
    let _ = writeln!(out, "SCALARS {name} double 1");
    out.push_str("LOOKUP_TABLE default\n");
    for v in values {
        out.push_str(&v);
        out.push('\n');
    }
}

/// Snapshot text; identical inputs give identical bytes.
pub fn snapshot_vtk(snap: &Snapshot) -> String {
    let mesh = snap.mesh;
    let eval = snap.evaluation;
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "fiberopt step {}", snap.step);
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.n_nodes());
    for n in 0..mesh.n_nodes() {
        let [x, y] = mesh.node_coords(n);
        let _ = writeln!(s, "{} {} 0", fmt_f64(x), fmt_f64(y));
    }
    let ne = mesh.n_elements();
    let _ = writeln!(s, "CELLS {} {}", ne, 5 * ne);
    for e in 0..ne {
        let [a, b, c, d] = mesh.element_nodes(e);
        let _ = writeln!(s, "4 {a} {b} {c} {d}");
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        let _ = writeln!(s, "{VTK_QUAD}");
    }
    let _ = writeln!(s, "CELL_DATA {ne}");
    for (name, phase) in [("chi_V", Phase::Void), ("chi_I", Phase::Isotropic), ("chi_F", Phase::Fiber)] {
        scalars(&mut s, name, eval.fractions.of(phase).map(fmt_f64));
    }
    scalars(&mut s, "theta", eval.angles.iter().map(|&t| fmt_f64(t)));
    scalars(
        &mut s,
        "indeterminate",
        eval.indeterminate.iter().map(|&f| fmt_f64(if f { 1.0 } else { 0.0 })),
    );
    let umag = eval.state.displacement_magnitude(mesh);
    scalars(&mut s, "u_mag", umag.into_iter().map(fmt_f64));
    let _ = writeln!(s, "POINT_DATA {}", mesh.n_nodes());
    let ls = snap.design.levelsets.fields();
    for (name, field) in [
        ("phi_VI", &ls[0]),
        ("phi_VF", &ls[1]),
        ("phi_IF", &ls[2]),
        ("xi", &snap.design.orientation.xi),
        ("eta", &snap.design.orientation.eta),
    ] {
        scalars(&mut s, name, field.iter().map(|&v| fmt_f64(v)));
    }
    s
}

/// Writes `step_<N>.vtk` into `dir`.
pub fn write_snapshot(dir: &Path, snap: &Snapshot) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("step_{}.vtk", snap.step));
    fs::write(&path, snapshot_vtk(snap))?;
    Ok(path)
}

/// The parts of a legacy VTK file this crate writes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VtkData {
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    pub cell_data: BTreeMap<String, Vec<f64>>,
    pub point_data: BTreeMap<String, Vec<f64>>,
}

/// Minimal legacy-ASCII unstructured-grid reader (scalar attributes only).
pub fn parse_vtk(text: &str, path: &Path) -> Result<VtkData> {
    let lines: Vec<&str> = text.lines().collect();
    let err = |line: usize, msg: &str| Error::Parse {
        path: path.to_path_buf(),
        line: line + 1,
        column: 1,
        message: msg.to_string(),
    };
    // Reads `n` whitespace-separated numbers starting at line `*at`.
    let nums = |at: &mut usize, n: usize| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let l = lines.get(*at).ok_or_else(|| err(*at, "unexpected end of file"))?;
            for t in l.split_whitespace() {
                out.push(t.parse().map_err(|_| err(*at, &format!("bad number `{t}`")))?);
            }
            *at += 1;
        }
        if out.len() != n {
            return Err(err(*at - 1, "value count mismatch"));
        }
        Ok(out)
    };
    let mut data = VtkData::default();
    for (i, expect) in ["# vtk DataFile", "", "ASCII", "DATASET UNSTRUCTURED_GRID"].iter().enumerate() {
        let l = lines.get(i).ok_or_else(|| err(i, "truncated header"))?;
        if !l.starts_with(expect) {
            return Err(err(i, &format!("expected `{expect}`")));
        }
    }
    let mut at = 4;
    let mut cell_section: Option<bool> = None;
    let mut expected_len = 0usize;
    while at < lines.len() {
        let i = at;
        let mut tok = lines[i].split_whitespace();
        at += 1;
        let Some(kw) = tok.next() else { continue };
        let count = |t: Option<&str>| -> Result<usize> {
            t.and_then(|v| v.parse().ok()).ok_or_else(|| err(i, "missing count"))
        };
        match kw {
            "POINTS" => {
                let n = count(tok.next())?;
                let v = nums(&mut at, 3 * n)?;
                data.points = v.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
            }
            "CELLS" => {
                let n = count(tok.next())?;
                let total = count(tok.next())?;
                let v = nums(&mut at, total)?;
                let mut k = 0;
                for _ in 0..n {
                    let m = *v.get(k).ok_or_else(|| err(i, "cell list too short"))? as usize;
                    let ids = v.get(k + 1..k + 1 + m).ok_or_else(|| err(i, "cell list too short"))?;
                    data.cells.push(ids.iter().map(|&x| x as usize).collect());
                    k += m + 1;
                }
            }
            "CELL_TYPES" => {
                let n = count(tok.next())?;
                data.cell_types = nums(&mut at, n)?.into_iter().map(|x| x as u8).collect();
            }
            "CELL_DATA" | "POINT_DATA" => {
                cell_section = Some(kw == "CELL_DATA");
                expected_len = count(tok.next())?;
            }
            "SCALARS" => {
                let name = tok.next().ok_or_else(|| err(i, "missing scalar name"))?.to_string();
                if !lines.get(at).is_some_and(|l| l.starts_with("LOOKUP_TABLE")) {
                    return Err(err(at, "expected LOOKUP_TABLE"));
                }
                at += 1;
                let v = nums(&mut at, expected_len)?;
                match cell_section {
                    Some(true) => data.cell_data.insert(name, v),
                    Some(false) => data.point_data.insert(name, v),
                    None => return Err(err(i, "SCALARS outside a data section")),
                };
            }
            other => return Err(err(i, &format!("unsupported keyword `{other}`"))),
        }
    }
    Ok(data)
}

/// Design fields recovered from a snapshot's point data.
pub struct SnapshotFields {
    pub phi_vi: NodeField,
    pub phi_vf: NodeField,
    pub phi_if: NodeField,
    pub xi: NodeField,
    pub eta: NodeField,
}

pub fn read_snapshot_fields(path: &Path, mesh: &Mesh) -> Result<SnapshotFields> {
    let text = fs::read_to_string(path)?;
    let mut data = parse_vtk(&text, path)?;
    if data.points.len() != mesh.n_nodes() {
        return Err(Error::validation(
            "initial_file",
            format!("snapshot has {} points, mesh has {} nodes", data.points.len(), mesh.n_nodes()),
        ));
    }
    let mut take = |name: &str| {
        data.point_data
            .remove(name)
            .map(NodeField)
            .ok_or_else(|| Error::validation("initial_file", format!("snapshot lacks point data `{name}`")))
    };
    Ok(SnapshotFields {
        phi_vi: take("phi_VI")?,
        phi_vf: take("phi_VF")?,
        phi_if: take("phi_IF")?,
        xi: take("xi")?,
        eta: take("eta")?,
    })
}
