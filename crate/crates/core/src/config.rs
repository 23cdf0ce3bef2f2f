//! Run configuration: a TOML file plus `key=value` overrides.
//!
//! Precedence is overrides, then file, then built-in defaults. Every key is
//! listed in [`KEYS`]; anything else is rejected.

use std::path::Path;

use serde::Serialize;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::fields::{builtin_dataset, check_exponent, ProblemSpec, ScalarField, INACTIVE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Simulate,
    Validate,
    Bench,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        Some(match s {
            "solve" => Command::Solve,
            "simulate" => Command::Simulate,
            "validate" => Command::Validate,
            "bench" => Command::Bench,
            _ => return None,
        })
    }
}

/// Accepted keys. `tol` is an alias for `tolerance`.
pub const KEYS: &[&str] = &[
    "command",
    "p",
    "dataset",
    "psi1",
    "psi2",
    "f",
    "h",
    "a",
    "collar",
    "radius_in_mesh_units",
    "tolerance",
    "max_iterations",
    "seed",
    "runs",
    "probes",
    "eta_stop",
    "max_steps",
    "fd_step",
    "refinement_radii",
    "bench_radii",
    "bench_error_tolerance",
    "bench_p",
    "bench_sweep",
    "bench_sweep_radius",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub p: Option<f64>,
    pub dataset: Option<String>,
    pub psi1: Option<String>,
    pub psi2: Option<String>,
    pub f: Option<String>,
    pub h: f64,
    pub a: f64,
    pub collar: f64,
    pub radius_in_mesh_units: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub runs: u64,
    pub probes: Vec<[f64; 2]>,
    pub eta_stop: Option<f64>,
    pub max_steps: u64,
    pub fd_step: f64,
    pub refinement_radii: Vec<usize>,
    pub bench_radii: Vec<usize>,
    pub bench_error_tolerance: f64,
    pub bench_p: Vec<f64>,
    pub bench_sweep: bool,
    pub bench_sweep_radius: usize,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        RunConfig {
            command,
            p: None,
            dataset: None,
            psi1: None,
            psi2: None,
            f: None,
            h: 0.05,
            a: 1.0,
            collar: 0.2,
            radius_in_mesh_units: 3,
            tolerance: crate::dpp::DEFAULT_TOLERANCE,
            max_iterations: crate::dpp::DEFAULT_MAX_ITERATIONS,
            seed: 0,
            runs: 10_000,
            probes: vec![[0.0, 0.0]],
            eta_stop: None,
            max_steps: crate::game::DEFAULT_MAX_STEPS,
            fd_step: crate::validate::DEFAULT_FD_STEP,
            refinement_radii: Vec::new(),
            bench_radii: vec![15, 10, 5, 3],
            bench_error_tolerance: 1e-8,
            bench_p: vec![2.0, 3.0, 4.0, 5.0, 10.0, 25.0, 50.0, 100.0],
            bench_sweep: true,
            bench_sweep_radius: 3,
        }
    }

    /// Builds a config from optional TOML text, `key=value` overrides and
    /// an optional command (the CLI subcommand).
    pub fn from_sources(file: Option<&str>, overrides: &[String], command: Option<Command>) -> Result<Self> {
        let mut table = match file {
            Some(text) => toml::from_str::<Table>(text).map_err(|e| Error::Config(e.to_string()))?,
            None => Table::new(),
        };
        canonicalize(&mut table)?;
        for ov in overrides {
            let (k, v) = parse_override(ov)?;
            table.insert(canonical_key(&k).to_string(), v);
        }
        if let Some(cmd) = command {
            table.insert("command".into(), Value::String(format!("{cmd:?}").to_lowercase()));
        }
        Self::from_table(table)
    }

    pub fn load(path: Option<&Path>, overrides: &[String], command: Option<Command>) -> Result<Self> {
        let text = match path {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
            None => None,
        };
        Self::from_sources(text.as_deref(), overrides, command)
    }

    pub fn from_table(mut table: Table) -> Result<Self> {
        canonicalize(&mut table)?;
        if let Some(k) = table.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::UnknownKey(k.clone()));
        }
        let command = match table.get("command") {
            Some(v) => {
                let s = as_str("command", v)?;
                Command::parse(&s).ok_or_else(|| type_err("command", "expected solve, simulate, validate or bench"))?
            }
            None => return Err(Error::MissingRequired("command".into())),
        };
        let mut c = RunConfig::defaults(command);
        let t = &table;
        if let Some(v) = opt(t, "p", as_f64)? {
            c.p = Some(v);
        }
        if let Some(v) = opt(t, "dataset", as_str)? {
            c.dataset = Some(v);
        }
        if let Some(v) = opt(t, "psi1", as_str)? {
            c.psi1 = Some(v);
        }
        if let Some(v) = opt(t, "psi2", as_str)? {
            c.psi2 = Some(v);
        }
        if let Some(v) = opt(t, "f", as_str)? {
            c.f = Some(v);
        }
        if let Some(v) = opt(t, "h", positive)? {
            c.h = v;
        }
        if let Some(v) = opt(t, "a", positive)? {
            c.a = v;
        }
        if let Some(v) = opt(t, "collar", positive)? {
            c.collar = v;
        }
        if let Some(v) = opt(t, "radius_in_mesh_units", as_count)? {
            c.radius_in_mesh_units = v as usize;
        }
        if let Some(v) = opt(t, "tolerance", positive)? {
            c.tolerance = v;
        }
        if let Some(v) = opt(t, "max_iterations", as_count)? {
            c.max_iterations = v as usize;
        }
        if let Some(v) = opt(t, "seed", as_u64)? {
            c.seed = v;
        }
        if let Some(v) = opt(t, "runs", as_count)? {
            c.runs = v;
        }
        if let Some(v) = opt(t, "probes", as_points)? {
            c.probes = v;
        }
        if let Some(v) = opt(t, "eta_stop", non_negative)? {
            c.eta_stop = Some(v);
        }
        if let Some(v) = opt(t, "max_steps", as_count)? {
            c.max_steps = v;
        }
        if let Some(v) = opt(t, "fd_step", positive)? {
            c.fd_step = v;
        }
        if let Some(v) = opt(t, "refinement_radii", as_counts)? {
            c.refinement_radii = v;
        }
        if let Some(v) = opt(t, "bench_radii", as_counts)? {
            c.bench_radii = v;
        }
        if let Some(v) = opt(t, "bench_error_tolerance", positive)? {
            c.bench_error_tolerance = v;
        }
        if let Some(v) = opt(t, "bench_p", as_f64s)? {
            c.bench_p = v;
        }
        if let Some(v) = opt(t, "bench_sweep", as_bool)? {
            c.bench_sweep = v;
        }
        if let Some(v) = opt(t, "bench_sweep_radius", as_count)? {
            c.bench_sweep_radius = v as usize;
        }

        if let Some(p) = c.p {
            check_exponent(p).map_err(|e| type_err("p", e.to_string()))?;
        }
        if let Some(&p) = c.bench_p.iter().find(|p| check_exponent(**p).is_err()) {
            return Err(type_err("bench_p", format!("exponent {p} is outside [2, inf)")));
        }
        if c.dataset.is_none() && c.f.is_none() && command != Command::Bench {
            return Err(Error::MissingRequired("problem source (`dataset` or `f`)".into()));
        }
        Ok(c)
    }

    /// The problem described by `dataset` and/or inline expressions; inline
    /// fields and `p` override the dataset's.
    pub fn problem(&self) -> Result<ProblemSpec> {
        let parse = |key: &str, src: &str| {
            ScalarField::parse(src).map_err(|e| type_err(key, e.to_string()))
        };
        let mut spec = match &self.dataset {
            Some(name) => builtin_dataset(name)?,
            None => {
                let p = self.p.ok_or_else(|| Error::MissingRequired("p".into()))?;
                let f = self.f.as_deref().ok_or_else(|| Error::MissingRequired("f".into()))?;
                ProblemSpec::new(
                    p,
                    ScalarField::constant(-INACTIVE),
                    ScalarField::constant(INACTIVE),
                    parse("f", f)?,
                )
            }
        };
        if let Some(p) = self.p {
            spec.p = p;
        }
        if let Some(s) = &self.psi1 {
            spec.psi1 = parse("psi1", s)?;
        }
        if let Some(s) = &self.psi2 {
            spec.psi2 = parse("psi2", s)?;
        }
        if let Some(s) = &self.f {
            spec.f = parse("f", s)?;
        }
        Ok(spec)
    }

    /// `eps` in length units.
    pub fn epsilon(&self) -> f64 {
        self.radius_in_mesh_units as f64 * self.h
    }
}

/// Splits `key=value`. The value is read as a TOML value when it parses as
/// one, and as a bare string otherwise (so `dataset=try1_p2` works).
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{s}` is not of the form key=value")))?;
    let key = k.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override `{s}` has an empty key")));
    }
    let raw = v.trim();
    let value = match toml::from_str::<Table>(&format!("v = {raw}")) {
        Ok(mut t) if t.len() == 1 => t.remove("v").expect("single key"),
        _ => Value::String(raw.to_string()),
    };
    Ok((key.to_string(), value))
}

fn canonical_key(k: &str) -> &str {
    match k {
        "tol" => "tolerance",
        other => other,
    }
}

fn canonicalize(table: &mut Table) -> Result<()> {
    if let Some(v) = table.remove("tol") {
        if table.contains_key("tolerance") {
            return Err(Error::Config("both `tol` and `tolerance` are set".into()));
        }
        table.insert("tolerance".into(), v);
    }
    Ok(())
}

fn type_err(key: &str, msg: impl Into<String>) -> Error {
    Error::ConfigType {
        key: key.into(),
        msg: msg.into(),
    }
}

fn opt<T>(t: &Table, key: &str, conv: fn(&str, &Value) -> Result<T>) -> Result<Option<T>> {
    t.get(key).map(|v| conv(key, v)).transpose()
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) if f.is_finite() => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(type_err(key, format!("expected a finite number, got {v}"))),
    }
}

fn positive(key: &str, v: &Value) -> Result<f64> {
    let x = as_f64(key, v)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(type_err(key, format!("must be positive, got {x}")))
    }
}

fn non_negative(key: &str, v: &Value) -> Result<f64> {
    let x = as_f64(key, v)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(type_err(key, format!("must be non-negative, got {x}")))
    }
}

fn as_u64(key: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(type_err(key, format!("expected a non-negative integer, got {v}"))),
    }
}

fn as_count(key: &str, v: &Value) -> Result<u64> {
    match as_u64(key, v)? {
        0 => Err(type_err(key, "must be at least 1")),
        n => Ok(n),
    }
}

fn as_str(key: &str, v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        _ => Err(type_err(key, format!("expected a string, got {v}"))),
    }
}

fn as_bool(key: &str, v: &Value) -> Result<bool> {
    match v {
        Value::Boolean(b) => Ok(*b),
        _ => Err(type_err(key, format!("expected true or false, got {v}"))),
    }
}

fn as_array<'v>(key: &str, v: &'v Value) -> Result<&'v Vec<Value>> {
    v.as_array()
        .ok_or_else(|| type_err(key, format!("expected an array, got {v}")))
}

fn as_counts(key: &str, v: &Value) -> Result<Vec<usize>> {
    as_array(key, v)?
        .iter()
        .map(|x| as_count(key, x).map(|n| n as usize))
        .collect()
}

fn as_f64s(key: &str, v: &Value) -> Result<Vec<f64>> {
    as_array(key, v)?.iter().map(|x| as_f64(key, x)).collect()
}

fn as_points(key: &str, v: &Value) -> Result<Vec<[f64; 2]>> {
    as_array(key, v)?
        .iter()
        .map(|pt| match as_f64s(key, pt)?.as_slice() {
            &[x, y] => Ok([x, y]),
            _ => Err(type_err(key, "each probe must be [x, y]")),
        })
        .collect()
}
