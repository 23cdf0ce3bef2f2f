//! The discrete min-max operator and its two-sided monotone iteration.
//!
//! For an interior node `p` with stencil `{p_1, ..., p_k}` the operator is
//!
//! ```text
//! vbar(p) = a/2 max_j v(p_j) + a/2 min_j v(p_j) + b/k sum_j v(p_j)
//! T v(p)  = max{ psi1(p), min{ psi2(p), vbar(p) } }
//! ```
//!
//! with `a = (p - 2)/(p + N)` and `b = 1 - a`. Collar values are copied
//! through unchanged. `T` is monotone and 1-Lipschitz in the sup norm, so
//! iterating it from `psi1` and from `psi2` gives a non-decreasing and a
//! non-increasing sequence that squeeze the unique fixed point.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{check_exponent, NodeData, ProblemSpec};
use crate::mesh::Mesh;

pub const DEFAULT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_MAX_ITERATIONS: usize = 200_000;

/// Spatial dimension of every mesh in this crate.
pub const DIMENSION: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients {
    pub alpha: f64,
    pub beta: f64,
}

impl Coefficients {
    pub fn new(p: f64, n: usize) -> Result<Self> {
        check_exponent(p)?;
        if n == 0 {
            return Err(Error::InvalidGeometry("dimension must be at least 1".into()));
        }
        let alpha = (p - 2.0) / (p + n as f64);
        Ok(Coefficients {
            alpha,
            beta: 1.0 - alpha,
        })
    }
}

/// One value per mesh node, in mesh order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction(Vec<f64>);

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Self {
        GridFunction(values)
    }

    pub fn from_fn(mesh: &Mesh, mut f: impl FnMut(usize, [f64; 2]) -> f64) -> Self {
        GridFunction(mesh.nodes().iter().enumerate().map(|(i, &p)| f(i, p)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `max_i |self_i - other_i|` over the given nodes.
    pub fn sup_distance_on(&self, other: &GridFunction, nodes: &[usize]) -> f64 {
        nodes
            .iter()
            .map(|&i| (self.0[i] - other.0[i]).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for GridFunction {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_gap: f64,
    pub residual: f64,
    pub wall_time_s: f64,
    pub k: usize,
}

/// A mesh, the scheme coefficients and the sampled data: everything the
/// operator needs.
#[derive(Debug, Clone)]
pub struct DppProblem<'m> {
    mesh: &'m Mesh,
    coeff: Coefficients,
    data: NodeData,
}

impl<'m> DppProblem<'m> {
    /// Samples and validates `spec` on `mesh`.
    pub fn new(mesh: &'m Mesh, spec: &ProblemSpec) -> Result<Self> {
        let coeff = Coefficients::new(spec.p, DIMENSION)?;
        Self::from_node_data(mesh, coeff, NodeData::sample(spec, mesh)?)
    }

    pub fn from_node_data(mesh: &'m Mesh, coeff: Coefficients, data: NodeData) -> Result<Self> {
        data.check_order(mesh)?;
        Ok(DppProblem { mesh, coeff, data })
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn coefficients(&self) -> Coefficients {
        self.coeff
    }

    pub fn data(&self) -> &NodeData {
        &self.data
    }

    /// `psi1` on interior nodes, `f` on the collar.
    pub fn lower_start(&self) -> GridFunction {
        self.start(&self.data.psi1)
    }

    /// `psi2` on interior nodes, `f` on the collar.
    pub fn upper_start(&self) -> GridFunction {
        self.start(&self.data.psi2)
    }

    fn start(&self, obstacle: &[f64]) -> GridFunction {
        GridFunction::from_fn(self.mesh, |i, _| {
            if self.mesh.is_interior(i) {
                obstacle[i]
            } else {
                self.data.f[i]
            }
        })
    }

    fn check_input(&self, v: &GridFunction) -> Result<()> {
        if v.len() != self.mesh.len() {
            return Err(Error::ShapeMismatch {
                expected: self.mesh.len(),
                got: v.len(),
            });
        }
        match v.values().iter().position(|x| !x.is_finite()) {
            Some(i) => Err(Error::NonFinite(i)),
            None => Ok(()),
        }
    }

    /// Averaged value `vbar(p)` before the obstacle clamp.
    pub fn averaged(&self, v: &[f64], node: usize) -> f64 {
        let Coefficients { alpha, beta } = self.coeff;
        let k = self.mesh.stencil_size() as f64;
        let base = node as isize;
        let mut sum = 0.0;
        if alpha == 0.0 {
            for row in self.mesh.stencil_rows() {
                let start = (base + row.start) as usize;
                for &x in &v[start..start + row.len] {
                    sum += x;
                }
            }
            return beta / k * sum;
        }
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for row in self.mesh.stencil_rows() {
            let start = (base + row.start) as usize;
            for &x in &v[start..start + row.len] {
                sum += x;
                if x > hi {
                    hi = x;
                }
                if x < lo {
                    lo = x;
                }
            }
        }
        0.5 * alpha * hi + 0.5 * alpha * lo + beta / k * sum
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let side = self.mesh.side();
        let interior = self.mesh.interior_nodes();
        let (first, last) = (interior[0], interior[interior.len() - 1]);
        let psi1 = &self.data.psi1;
        let psi2 = &self.data.psi2;
        out.copy_from_slice(v);
        // interior nodes form a square block: clamp row by row
        out.par_chunks_mut(side)
            .enumerate()
            .filter(|(r, _)| (first / side..=last / side).contains(r))
            .for_each(|(r, row)| {
                let (c0, c1) = (first % side, last % side);
                for (c, out) in row[c0..=c1].iter_mut().enumerate() {
                    let i = r * side + c0 + c;
                    *out = psi1[i].max(psi2[i].min(self.averaged(v, i)));
                }
            });
    }

    /// One synchronous application of the operator.
    pub fn apply_tbar(&self, v: &GridFunction) -> Result<GridFunction> {
        self.check_input(v)?;
        let mut out = vec![0.0; v.len()];
        self.apply_into(v.values(), &mut out);
        Ok(GridFunction(out))
    }

    /// `max` over interior nodes of `|T u - u|`.
    pub fn residual(&self, u: &GridFunction) -> Result<f64> {
        let tu = self.apply_tbar(u)?;
        Ok(tu.sup_distance_on(u, self.mesh.interior_nodes()))
    }

    /// Iterates from both obstacles until the bracket gap drops below
    /// `tol`, returning the midpoint. On `MaxIterationsExceeded` the report
    /// is carried in the error.
    pub fn solve_bracket(&self, tol: f64, max_iter: usize) -> Result<(GridFunction, SolveReport)> {
        if !(tol > 0.0) {
            return Err(Error::InvalidTolerance(tol));
        }
        let started = Instant::now();
        let mut bracket = Bracket::new(self);
        while bracket.state().gap >= tol {
            if bracket.state().iteration >= max_iter {
                let mid = bracket.midpoint();
                let report = SolveReport {
                    iterations: bracket.state().iteration,
                    final_gap: bracket.state().gap,
                    residual: self.residual(&mid)?,
                    wall_time_s: started.elapsed().as_secs_f64(),
                    k: self.mesh.stencil_size(),
                };
                return Err(Error::MaxIterationsExceeded(Box::new(report)));
            }
            bracket.step();
        }
        let mid = bracket.midpoint();
        let report = SolveReport {
            iterations: bracket.state().iteration,
            final_gap: bracket.state().gap,
            residual: self.residual(&mid)?,
            wall_time_s: started.elapsed().as_secs_f64(),
            k: self.mesh.stencil_size(),
        };
        Ok((mid, report))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BracketState {
    pub lower: GridFunction,
    pub upper: GridFunction,
    pub iteration: usize,
    /// `max(upper - lower)` over all nodes.
    pub gap: f64,
}

/// The pair of monotone sequences started from the two obstacles.
#[derive(Debug)]
pub struct Bracket<'a, 'm> {
    problem: &'a DppProblem<'m>,
    state: BracketState,
    scratch: Vec<f64>,
}

impl<'a, 'm> Bracket<'a, 'm> {
    pub fn new(problem: &'a DppProblem<'m>) -> Self {
        let lower = problem.lower_start();
        let upper = problem.upper_start();
        let gap = max_gap(&lower, &upper);
        let scratch = vec![0.0; lower.len()];
        Bracket {
            problem,
            state: BracketState {
                lower,
                upper,
                iteration: 0,
                gap,
            },
            scratch,
        }
    }

    pub fn state(&self) -> &BracketState {
        &self.state
    }

    pub fn step(&mut self) {
        let s = &mut self.state;
        for v in [&mut s.lower, &mut s.upper] {
            self.problem.apply_into(v.values(), &mut self.scratch);
            std::mem::swap(&mut v.0, &mut self.scratch);
        }
        s.iteration += 1;
        s.gap = max_gap(&s.lower, &s.upper);
    }

    pub fn midpoint(&self) -> GridFunction {
        let s = &self.state;
        GridFunction(
            s.lower
                .values()
                .iter()
                .zip(s.upper.values())
                .map(|(l, u)| 0.5 * (l + u))
                .collect(),
        )
    }
}

fn max_gap(lower: &GridFunction, upper: &GridFunction) -> f64 {
    lower
        .values()
        .iter()
        .zip(upper.values())
        .map(|(l, u)| u - l)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Builds the problem for `spec` on `mesh` and solves it.
pub fn solve(mesh: &Mesh, spec: &ProblemSpec, tol: f64, max_iter: usize) -> Result<(GridFunction, SolveReport)> {
    DppProblem::new(mesh, spec)?.solve_bracket(tol, max_iter)
}
