//! CSV and JSON artifacts.
//!
//! `solution.csv` has the header `x,y,class,u,psi1,psi2` and one row per
//! mesh node in mesh order, numbers written with 17 significant digits so
//! they read back bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dpp::GridFunction;
use crate::error::{Error, Result};
use crate::fields::NodeData;
use crate::mesh::{Mesh, NodeClass};

pub const SOLUTION_HEADER: &str = "x,y,class,u,psi1,psi2";
pub const BENCH_HEADER: &str = "radius_units,k,runtime_s,iterations,error1,error2";
pub const SWEEP_HEADER: &str = "p,no_obstacle,one_obstacle,two_obstacles";

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn class_name(c: NodeClass) -> &'static str {
    match c {
        NodeClass::Interior => "interior",
        NodeClass::Collar => "collar",
    }
}

pub fn solution_csv(mesh: &Mesh, u: &GridFunction, data: &NodeData) -> String {
    let mut out = String::with_capacity(mesh.len() * 120);
    out.push_str(SOLUTION_HEADER);
    out.push('\n');
    for i in 0..mesh.len() {
        let [x, y] = mesh.node(i);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(x),
            fmt_f64(y),
            class_name(mesh.class(i)),
            fmt_f64(u[i]),
            fmt_f64(data.psi1[i]),
            fmt_f64(data.psi2[i]),
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionRow {
    pub x: f64,
    pub y: f64,
    pub class: NodeClass,
    pub u: f64,
    pub psi1: f64,
    pub psi2: f64,
}

/// Parses a `solution.csv` document. `source` only labels errors.
pub fn parse_solution_csv(bytes: &[u8], source: &Path) -> Result<Vec<SolutionRow>> {
    let bad = |msg: String| Error::SolutionFormat {
        path: source.to_path_buf(),
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != SOLUTION_HEADER {
        return Err(bad(format!("expected header `{SOLUTION_HEADER}`")));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 6 {
            return Err(bad(format!("row {}: expected 6 fields, got {}", line + 1, rec.len())));
        }
        let num = |j: usize| -> Result<f64> {
            rec[j]
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("row {}: bad number `{}`", line + 1, &rec[j])))
        };
        let class = match rec[2].trim() {
            "interior" => NodeClass::Interior,
            "collar" => NodeClass::Collar,
            other => return Err(bad(format!("row {}: bad class `{other}`", line + 1))),
        };
        rows.push(SolutionRow {
            x: num(0)?,
            y: num(1)?,
            class,
            u: num(3)?,
            psi1: num(4)?,
            psi2: num(5)?,
        });
    }
    Ok(rows)
}

pub fn read_solution_csv(path: &Path) -> Result<Vec<SolutionRow>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_solution_csv(&bytes, path)
}

/// Rebuilds the grid function from parsed rows, checking that they line up
/// with `mesh` node by node.
pub fn rows_to_grid(rows: &[SolutionRow], mesh: &Mesh, source: &Path) -> Result<GridFunction> {
    if rows.len() != mesh.len() {
        return Err(Error::SolutionFormat {
            path: source.to_path_buf(),
            msg: format!("{} rows for a mesh of {} nodes", rows.len(), mesh.len()),
        });
    }
    for (i, r) in rows.iter().enumerate() {
        let [x, y] = mesh.node(i);
        if r.x != x || r.y != y || r.class != mesh.class(i) {
            return Err(Error::SolutionFormat {
                path: source.to_path_buf(),
                msg: format!("row {} does not match mesh node {i}", i + 1),
            });
        }
    }
    Ok(GridFunction::new(rows.iter().map(|r| r.u).collect()))
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp: PathBuf = path.to_path_buf();
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    tmp.set_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
