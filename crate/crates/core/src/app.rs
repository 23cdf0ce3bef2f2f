//! The four command-line workflows. Each writes its artifacts into an
//! output directory and returns the JSON report it wrote.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::bench::{p_sweep, radius_csv, radius_table, sweep_csv, MeshParams};
use crate::config::{Command, RunConfig};
use crate::dpp::{DppProblem, GridFunction};
use crate::error::{Error, Result};
use crate::fields::known_solution;
use crate::game::{estimate_value, GameOptions};
use crate::mesh::Mesh;
use crate::output::{read_solution_csv, rows_to_grid, solution_csv, write_atomic};
use crate::validate::{known_solution_error, p_laplace_residual, refinement_study};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Points used to admit a known solution as an oracle.
const ORACLE_POINTS: usize = 25;
const ORACLE_LIMIT: f64 = 1e-4;

impl Error {
    /// Process exit code: 2 config, 3 convergence, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MaxIterationsExceeded(_) | Error::StepCapExceeded { .. } | Error::NonSolvedInput { .. } => 3,
            Error::Io { .. } | Error::SolutionFormat { .. } => 4,
            _ => 2,
        }
    }
}

pub fn build_mesh_for(config: &RunConfig) -> Result<Mesh> {
    Mesh::with_radius_units(config.h, config.a, config.collar, config.radius_in_mesh_units)
}

fn mesh_json(mesh: &Mesh) -> Value {
    json!({
        "h": mesh.h(),
        "a": mesh.half_width(),
        "collar": mesh.collar(),
        "radius_units": mesh.radius_units(),
        "epsilon": mesh.epsilon(),
        "nodes": mesh.len(),
        "interior_nodes": mesh.interior_nodes().len(),
        "k": mesh.stencil_size(),
    })
}

fn envelope(config: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("version".into(), json!(VERSION));
    m.insert("command".into(), json!(config.command));
    m.insert("config".into(), serde_json::to_value(config).expect("config serializes"));
    m
}

fn write_report(out: &Path, report: &serde_json::Map<String, Value>) -> Result<Value> {
    let value = Value::Object(report.clone());
    let text = serde_json::to_string_pretty(&value).expect("report serializes") + "\n";
    write_atomic(&out.join("report.json"), text.as_bytes())?;
    Ok(value)
}

/// Runs `config.command`, writing artifacts under `out`.
pub fn run(config: &RunConfig, out: &Path) -> Result<Value> {
    let started = Instant::now();
    let mut report = envelope(config);
    match config.command {
        Command::Solve => solve_cmd(config, out, &mut report)?,
        Command::Simulate => simulate_cmd(config, out, &mut report)?,
        Command::Validate => validate_cmd(config, out, &mut report)?,
        Command::Bench => bench_cmd(config, out, &mut report)?,
    }
    report.insert("wall_time_s".into(), json!(started.elapsed().as_secs_f64()));
    write_report(out, &report)
}

fn solve_and_write<'m>(
    config: &RunConfig,
    mesh: &'m Mesh,
    out: &Path,
    report: &mut serde_json::Map<String, Value>,
) -> Result<(DppProblem<'m>, GridFunction)> {
    let spec = config.problem()?;
    let problem = DppProblem::new(mesh, &spec)?;
    report.insert("mesh".into(), mesh_json(mesh));
    report.insert("coefficients".into(), json!(problem.coefficients()));
    let (u, solve) = match problem.solve_bracket(config.tolerance, config.max_iterations) {
        Ok(r) => r,
        Err(Error::MaxIterationsExceeded(r)) => {
            report.insert("solve".into(), json!(*r));
            report.insert("status".into(), json!("max_iterations_exceeded"));
            write_report(out, report)?;
            return Err(Error::MaxIterationsExceeded(r));
        }
        Err(e) => return Err(e),
    };
    write_atomic(&out.join("solution.csv"), solution_csv(mesh, &u, problem.data()).as_bytes())?;
    report.insert("solve".into(), json!(solve));
    Ok((problem, u))
}

fn solve_cmd(config: &RunConfig, out: &Path, report: &mut serde_json::Map<String, Value>) -> Result<()> {
    let mesh = build_mesh_for(config)?;
    solve_and_write(config, &mesh, out, report)?;
    Ok(())
}

fn simulate_cmd(config: &RunConfig, out: &Path, report: &mut serde_json::Map<String, Value>) -> Result<()> {
    let mesh = build_mesh_for(config)?;
    let (problem, u) = solve_and_write(config, &mesh, out, report)?;
    let opts = GameOptions {
        tol: config.tolerance,
        eta_stop: config.eta_stop,
        max_steps: config.max_steps,
    };
    let mut estimates = Vec::new();
    for (i, &[x, y]) in config.probes.iter().enumerate() {
        let node = mesh.nearest_node(x, y);
        // one seed per probe so adding probes does not change earlier ones
        let seed = config.seed.wrapping_add((i as u64) << 32);
        let est = estimate_value(&problem, &u, node, config.runs, seed, opts)?;
        estimates.push(json!({
            "probe": [x, y],
            "node_xy": mesh.node(node),
            "u": u[node],
            "difference": est.mean - u[node],
            "estimate": est,
        }));
    }
    report.insert("simulate".into(), Value::Array(estimates));
    Ok(())
}

fn validate_cmd(config: &RunConfig, out: &Path, report: &mut serde_json::Map<String, Value>) -> Result<()> {
    let mesh = build_mesh_for(config)?;
    let (problem, u) = solve_and_write(config, &mesh, out, report)?;
    let spec = config.problem()?;
    let mut checks = serde_json::Map::new();

    let exact = config.dataset.as_deref().and_then(known_solution);
    if let Some(exact) = exact.filter(|_| config.f.is_none() && config.p.is_none()) {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let interior = mesh.interior_nodes();
        let mut worst = 0.0f64;
        for _ in 0..ORACLE_POINTS {
            let [x, y] = mesh.node(interior[rng.random_range(0..interior.len())]);
            worst = worst.max(p_laplace_residual(&exact, [x, y], spec.p, config.fd_step)?.abs());
        }
        checks.insert(
            "oracle".into(),
            json!({
                "exact": exact.source(),
                "max_fd_residual": worst,
                "admitted": worst <= ORACLE_LIMIT,
            }),
        );
        checks.insert("known_solution_error".into(), json!(known_solution_error(&u, &exact, &mesh)?));
    }

    // the written CSV must reproduce the solver's residual
    let path = out.join("solution.csv");
    let reread = rows_to_grid(&read_solution_csv(&path)?, &mesh, &path)?;
    checks.insert("csv_residual".into(), json!(problem.residual(&reread)?));

    if !config.refinement_radii.is_empty() {
        let study = refinement_study(
            &spec,
            config.h,
            config.a,
            config.collar,
            &config.refinement_radii,
            config.tolerance,
            config.max_iterations,
        )?;
        checks.insert(
            "refinement".into(),
            json!({
                "radii": study.radii,
                "successive_diffs": study.successive_diffs,
                "iterations": study.iterations,
            }),
        );
    }
    report.insert("validate".into(), Value::Object(checks));
    Ok(())
}

fn bench_cmd(config: &RunConfig, out: &Path, report: &mut serde_json::Map<String, Value>) -> Result<()> {
    let geom = MeshParams {
        h: config.h,
        a: config.a,
        collar: config.collar,
    };
    let rows = radius_table(
        &geom,
        &config.bench_radii,
        config.tolerance,
        config.bench_error_tolerance,
        config.max_iterations,
    )?;
    write_atomic(&out.join("bench.csv"), radius_csv(&rows).as_bytes())?;
    report.insert("bench".into(), json!(rows));
    if config.bench_sweep {
        let mesh = Mesh::with_radius_units(config.h, config.a, config.collar, config.bench_sweep_radius)?;
        let sweep = p_sweep(&mesh, &config.bench_p, config.tolerance, config.max_iterations)?;
        write_atomic(&out.join("bench_p.csv"), sweep_csv(&sweep).as_bytes())?;
        report.insert("p_sweep".into(), json!(sweep));
    }
    Ok(())
}

/// Re-reads a written `solution.csv` and evaluates the operator residual
/// on it.
pub fn residual_from_csv(config: &RunConfig, path: &Path) -> Result<f64> {
    let mesh = build_mesh_for(config)?;
    let problem = DppProblem::new(&mesh, &config.problem()?)?;
    let u = rows_to_grid(&read_solution_csv(path)?, &mesh, path)?;
    problem.residual(&u)
}
