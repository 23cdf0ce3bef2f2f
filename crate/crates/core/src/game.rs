//! Tug-of-war with noise and two stopping players, simulated on the mesh.
//!
//! At an interior token position a biased coin is tossed: with probability
//! `alpha/2` Player I moves the token, with `alpha/2` Player II does, and
//! with `beta` it jumps to a uniformly chosen stencil node. Before every
//! toss Player I may stop (payoff `psi1`) and Player II may stop (payoff
//! `psi2`); reaching the collar pays `f`. Player I maximizes, Player II
//! minimizes.
//!
//! Strategies and stopping rules are read off a solved grid function `u`:
//! Player I moves to the stencil argmax of `u`, Player II to the argmin,
//! Player I stops where `u` touches `psi1`, Player II where it touches
//! `psi2`. With those choices `u` is the value of the game, which the
//! estimator checks by sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dpp::{DppProblem, GridFunction};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;

/// Markovian move tables, one destination per node. Collar entries point at
/// themselves and are never used.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategies {
    pub max_player: Vec<usize>,
    pub min_player: Vec<usize>,
}

/// Stencil argmax / argmin of `u` at every interior node; ties go to the
/// lowest node index.
pub fn greedy_strategies(mesh: &Mesh, u: &GridFunction) -> Result<Strategies> {
    if u.len() != mesh.len() {
        return Err(Error::ShapeMismatch {
            expected: mesh.len(),
            got: u.len(),
        });
    }
    let offsets = mesh.linear_offsets();
    let mut max_player: Vec<usize> = (0..mesh.len()).collect();
    let mut min_player = max_player.clone();
    for &p in mesh.interior_nodes() {
        let mut best_hi = p.wrapping_add_signed(offsets[0]);
        let mut best_lo = best_hi;
        // offsets ascend, so strict comparisons keep the lowest index on ties
        for &o in &offsets[1..] {
            let q = p.wrapping_add_signed(o);
            if u[q] > u[best_hi] {
                best_hi = q;
            }
            if u[q] < u[best_lo] {
                best_lo = q;
            }
        }
        max_player[p] = best_hi;
        min_player[p] = best_lo;
    }
    Ok(Strategies {
        max_player,
        min_player,
    })
}

/// Node-wise stopping sets.
#[derive(Debug, Clone, PartialEq)]
pub struct StopRule {
    pub stop_max: Vec<bool>,
    pub stop_min: Vec<bool>,
    pub eta: f64,
}

impl StopRule {
    /// Player I stops where `u <= psi1 + eta`, Player II where
    /// `u >= psi2 - eta`.
    pub fn from_contact(problem: &DppProblem<'_>, u: &GridFunction, eta: f64) -> Self {
        let d = problem.data();
        let n = u.len();
        StopRule {
            stop_max: (0..n).map(|i| u[i] <= d.psi1[i] + eta).collect(),
            stop_min: (0..n).map(|i| u[i] >= d.psi2[i] - eta).collect(),
            eta,
        }
    }

    pub fn never(n: usize) -> Self {
        StopRule {
            stop_max: vec![false; n],
            stop_min: vec![false; n],
            eta: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    ExitBoundary,
    StoppedByI,
    StoppedByII,
    /// Both players stop at once; pays `psi2`.
    TieStop,
    /// The step cap was hit; the payoff is meaningless.
    StepCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameOutcome {
    pub payoff: f64,
    pub steps: u64,
    pub node: usize,
    pub terminal: Terminal,
}

/// Which of the three coin outcomes moved the token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    MaxPlayer,
    MinPlayer,
    Noise,
}

#[derive(Debug, Clone)]
pub struct Game<'a, 'm> {
    problem: &'a DppProblem<'m>,
    strategies: Strategies,
    stops: StopRule,
    max_steps: u64,
}

impl<'a, 'm> Game<'a, 'm> {
    pub fn new(
        problem: &'a DppProblem<'m>,
        strategies: Strategies,
        stops: StopRule,
        max_steps: u64,
    ) -> Result<Self> {
        let n = problem.mesh().len();
        for len in [
            strategies.max_player.len(),
            strategies.min_player.len(),
            stops.stop_max.len(),
            stops.stop_min.len(),
        ] {
            if len != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        Ok(Game {
            problem,
            strategies,
            stops,
            max_steps,
        })
    }

    /// Tosses the coin and moves the token once from the interior node `x`.
    pub fn transition<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> (usize, Branch) {
        let alpha = self.problem.coefficients().alpha;
        let r: f64 = rng.random();
        if r < 0.5 * alpha {
            (self.strategies.max_player[x], Branch::MaxPlayer)
        } else if r < alpha {
            (self.strategies.min_player[x], Branch::MinPlayer)
        } else {
            let offsets = self.problem.mesh().linear_offsets();
            let o = offsets[rng.random_range(0..offsets.len())];
            (x.wrapping_add_signed(o), Branch::Noise)
        }
    }

    /// Plays one game from `x0`. Hitting the step cap returns
    /// `StepCapExceeded`; [`estimate_value`] counts those instead.
    pub fn simulate_run<R: Rng + ?Sized>(&self, x0: usize, rng: &mut R) -> Result<GameOutcome> {
        let outcome = self.play(x0, rng)?;
        if outcome.terminal == Terminal::StepCap {
            return Err(Error::StepCapExceeded { cap: self.max_steps });
        }
        Ok(outcome)
    }

    fn play<R: Rng + ?Sized>(&self, x0: usize, rng: &mut R) -> Result<GameOutcome> {
        let mesh = self.problem.mesh();
        if x0 >= mesh.len() {
            return Err(Error::NodeOutOfRange(x0));
        }
        let data = self.problem.data();
        let mut x = x0;
        let mut steps = 0u64;
        loop {
            if !mesh.is_interior(x) {
                return Ok(GameOutcome {
                    payoff: data.f[x],
                    steps,
                    node: x,
                    terminal: Terminal::ExitBoundary,
                });
            }
            let (stop_i, stop_ii) = (self.stops.stop_max[x], self.stops.stop_min[x]);
            let terminal = match (stop_i, stop_ii) {
                (true, false) => Some((Terminal::StoppedByI, data.psi1[x])),
                (false, true) => Some((Terminal::StoppedByII, data.psi2[x])),
                (true, true) => Some((Terminal::TieStop, data.psi2[x])),
                (false, false) => None,
            };
            if let Some((terminal, payoff)) = terminal {
                return Ok(GameOutcome {
                    payoff,
                    steps,
                    node: x,
                    terminal,
                });
            }
            if steps >= self.max_steps {
                return Ok(GameOutcome {
                    payoff: f64::NAN,
                    steps,
                    node: x,
                    terminal: Terminal::StepCap,
                });
            }
            x = self.transition(x, rng).0;
            steps += 1;
        }
    }
}

/// Generator for run `index` of an experiment seeded with `seed`: each run
/// gets its own ChaCha stream, so results do not depend on scheduling.
pub fn run_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueEstimate {
    pub node: usize,
    pub mean: f64,
    pub stderr: f64,
    /// Completed runs (those that did not hit the step cap).
    pub runs: u64,
    pub max_steps_hit: u64,
    pub mean_steps: f64,
    pub exits: u64,
    pub stops_i: u64,
    pub stops_ii: u64,
    pub tie_stops: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameOptions {
    /// Solver tolerance the input was produced with.
    pub tol: f64,
    /// Contact tolerance of the stopping rules; defaults to `tol`.
    pub eta_stop: Option<f64>,
    pub max_steps: u64,
}

impl GameOptions {
    pub fn new(tol: f64) -> Self {
        GameOptions {
            tol,
            eta_stop: None,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

/// Summarizes outcomes in run order (deterministic reduction).
pub fn summarize(node: usize, outcomes: &[GameOutcome]) -> ValueEstimate {
    let done: Vec<&GameOutcome> = outcomes
        .iter()
        .filter(|o| o.terminal != Terminal::StepCap)
        .collect();
    let n = done.len() as f64;
    let mean = done.iter().map(|o| o.payoff).sum::<f64>() / n;
    let var = if done.len() > 1 {
        done.iter().map(|o| (o.payoff - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let count = |t: Terminal| done.iter().filter(|o| o.terminal == t).count() as u64;
    ValueEstimate {
        node,
        mean,
        stderr: (var / n).sqrt(),
        runs: done.len() as u64,
        max_steps_hit: (outcomes.len() - done.len()) as u64,
        mean_steps: done.iter().map(|o| o.steps as f64).sum::<f64>() / n,
        exits: count(Terminal::ExitBoundary),
        stops_i: count(Terminal::StoppedByI),
        stops_ii: count(Terminal::StoppedByII),
        tie_stops: count(Terminal::TieStop),
    }
}

/// Monte-Carlo estimate of the game value at `x0` when both players follow
/// the greedy strategies and contact stopping rules derived from `u`.
pub fn estimate_value(
    problem: &DppProblem<'_>,
    u: &GridFunction,
    x0: usize,
    runs: u64,
    seed: u64,
    opts: GameOptions,
) -> Result<ValueEstimate> {
    if runs == 0 {
        return Err(Error::NoRuns);
    }
    let residual = problem.residual(u)?;
    let limit = 10.0 * opts.tol;
    if !(residual <= limit) {
        return Err(Error::NonSolvedInput { residual, limit });
    }
    let mesh = problem.mesh();
    let strategies = greedy_strategies(mesh, u)?;
    let stops = StopRule::from_contact(problem, u, opts.eta_stop.unwrap_or(opts.tol));
    let game = Game::new(problem, strategies, stops, opts.max_steps)?;
    let outcomes: Vec<GameOutcome> = (0..runs)
        .into_par_iter()
        .map(|i| game.play(x0, &mut run_rng(seed, i)))
        .collect::<Result<_>>()?;
    Ok(summarize(x0, &outcomes))
}
