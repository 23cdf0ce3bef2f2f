//! Double-obstacle problems for the p-Laplacian (`p >= 2`) on a square,
//! solved through the discrete min-max dynamic programming principle.
//!
//! The pieces:
//!
//! - [`mesh`]: the lattice over the square plus its collar, with the discrete
//!   `eps`-ball stencil.
//! - [`fields`] and [`expr`]: obstacles and boundary data, either shipped
//!   datasets or small user expressions.
//! - [`dpp`]: the averaged min-max operator and the two-sided monotone
//!   iteration that brackets its unique fixed point.
//! - [`game`]: a Monte-Carlo tug-of-war with noise whose value is the same
//!   fixed point, used as an independent cross-check.
//! - [`validate`]: finite-difference and refinement checks.
//! - [`config`] and [`output`]: run configuration and CSV/JSON artifacts for
//!   the command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod bench;
pub mod config;
pub mod dpp;
pub mod error;
pub mod expr;
pub mod fields;
pub mod game;
pub mod mesh;
pub mod output;
pub mod validate;

pub use dpp::{Coefficients, DppProblem, GridFunction, SolveReport};
pub use error::{Error, Result};
pub use fields::{builtin_dataset, NodeData, ProblemSpec, ScalarField};
pub use mesh::{build_mesh, Mesh, NodeClass};
