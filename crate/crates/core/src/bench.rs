//! Benchmark manifests: a per-radius table (runtime, iterations, errors on
//! the two known-solution problems) and a per-`p` iteration-count sweep.

use std::time::Instant;

use serde::Serialize;

use crate::dpp::DppProblem;
use crate::error::Result;
use crate::fields::{builtin_dataset, known_solution, ProblemSpec, ScalarField, INACTIVE};
use crate::mesh::Mesh;
use crate::validate::known_solution_error;

/// Problems averaged over in each row of the radius table.
pub const RADIUS_DATASETS: &[&str] = &["try1_p2", "try1_p100", "case_a_p10", "case_b_p10", "case_c_p10"];

/// Boundary data of the p-sweep. Only the first three come from the shipped
/// datasets; the rest are fillers chosen to give varied boundary profiles.
pub const SWEEP_BOUNDARY_DATA: &[&str] = &[
    "0",
    "1 - 2*y^2",
    "2 - (x+y)^2",
    "x^2 - y^2 - y",
    "exp(x)*sin(y)",
    "x*y - 0.5*x",
];

const SMOOTH_LOWER: &str = "max(2 - 33*(x+0.5)^2 - 27*(y+0.1)^2, \
     1.5 - 40*(x+0.3)^2 - 34*(y+0.4)^2, \
     2.5 - 36*(x-0.6)^2 - 51*(y-0.7)^2, -3)";
const SMOOTH_UPPER: &str = "min(33*(x+0.6)^2 + 27*(y-0.6)^2 - 3, 33*(x-0.6)^2 + 27*(y+0.6)^2 - 3, 3)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Obstacles {
    None,
    Lower,
    Both,
}

/// Sweep problem: boundary datum `f` with none, the lower, or both of the
/// smooth obstacles, reconciled on `(-1, 1)²` so the ordering holds.
pub fn sweep_problem(f: &str, obstacles: Obstacles, p: f64) -> Result<ProblemSpec> {
    let lower = match obstacles {
        Obstacles::None => ScalarField::constant(-INACTIVE),
        _ => ScalarField::parse(SMOOTH_LOWER)?,
    };
    let upper = match obstacles {
        Obstacles::Both => ScalarField::parse(SMOOTH_UPPER)?,
        _ => ScalarField::constant(INACTIVE),
    };
    ProblemSpec::new(p, lower, upper, ScalarField::parse(f)?).reconciled(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusRow {
    pub radius_units: usize,
    pub k: usize,
    pub runtime_s: f64,
    pub iterations: f64,
    /// Error against `exp(x) sin(y)` at `p = 2`.
    pub error1: f64,
    /// Error against `x^2 - y^2 - y` at `p = 2`.
    pub error2: f64,
}

pub struct MeshParams {
    pub h: f64,
    pub a: f64,
    pub collar: f64,
}

pub fn radius_table(
    geom: &MeshParams,
    radii: &[usize],
    tol: f64,
    error_tol: f64,
    max_iter: usize,
) -> Result<Vec<RadiusRow>> {
    let mut rows = Vec::new();
    for &m in radii {
        let mesh = Mesh::with_radius_units(geom.h, geom.a, geom.collar, m)?;
        let mut runtime = 0.0;
        let mut iterations = 0usize;
        for name in RADIUS_DATASETS {
            let problem = DppProblem::new(&mesh, &builtin_dataset(name)?)?;
            let started = Instant::now();
            let (_, report) = problem.solve_bracket(tol, max_iter)?;
            runtime += started.elapsed().as_secs_f64();
            iterations += report.iterations;
        }
        let error = |name: &str| -> Result<f64> {
            let problem = DppProblem::new(&mesh, &builtin_dataset(name)?)?;
            let (u, _) = problem.solve_bracket(error_tol, max_iter)?;
            known_solution_error(&u, &known_solution(name).expect("known solution"), &mesh)
        };
        let n = RADIUS_DATASETS.len() as f64;
        rows.push(RadiusRow {
            radius_units: m,
            k: mesh.stencil_size(),
            runtime_s: runtime / n,
            iterations: iterations as f64 / n,
            error1: error("harmonic_expsin_p2")?,
            error2: error("harmonic_quadratic_p2")?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub no_obstacle: f64,
    pub one_obstacle: f64,
    pub two_obstacles: f64,
}

/// Mean iteration count over [`SWEEP_BOUNDARY_DATA`] for each `p` and
/// obstacle configuration.
pub fn p_sweep(mesh: &Mesh, ps: &[f64], tol: f64, max_iter: usize) -> Result<Vec<SweepRow>> {
    let mean_iters = |obstacles: Obstacles, p: f64| -> Result<f64> {
        let mut total = 0usize;
        for f in SWEEP_BOUNDARY_DATA {
            let problem = DppProblem::new(mesh, &sweep_problem(f, obstacles, p)?)?;
            total += problem.solve_bracket(tol, max_iter)?.1.iterations;
        }
        Ok(total as f64 / SWEEP_BOUNDARY_DATA.len() as f64)
    };
    ps.iter()
        .map(|&p| {
            Ok(SweepRow {
                p,
                no_obstacle: mean_iters(Obstacles::None, p)?,
                one_obstacle: mean_iters(Obstacles::Lower, p)?,
                two_obstacles: mean_iters(Obstacles::Both, p)?,
            })
        })
        .collect()
}

pub fn radius_csv(rows: &[RadiusRow]) -> String {
    let mut out = format!("{}\n", crate::output::BENCH_HEADER);
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{},{:.6e},{:.6e}\n",
            r.radius_units, r.k, r.runtime_s, r.iterations, r.error1, r.error2
        ));
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{}\n", crate::output::SWEEP_HEADER);
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.p, r.no_obstacle, r.one_obstacle, r.two_obstacles
        ));
    }
    out
}
