//! Inexact augmented Lagrangian method for nonconvex constrained minimization.
//!
//! The crate is organised around the outer loop in [`outer::solve`]:
//!
//! * [`problem`] defines objectives, constraint sets, the built-in test corpus
//!   and the JSON problem-file loader.
//! * [`lagrangian`] evaluates the Lagrangian, the augmented Lagrangian (in two
//!   algebraically equivalent forms that are cross-checked on every call), its
//!   gradient, the feasibility statistic θ and the multiplier and penalty
//!   updates.
//! * [`inner`] holds the monotone unconstrained solvers used for the
//!   subproblems: fixed-step and backtracking gradient descent and an adaptive
//!   cubic-regularized Newton method.
//! * [`outer`] runs the method of multipliers, checks ε-KKT termination and
//!   monitors the per-iteration inequalities the complexity analysis relies on.
//! * [`complexity`] evaluates the closed-form outer iteration bounds, certifies
//!   finished runs against them and fits growth laws over ε sweeps.

pub mod complexity;
pub mod config;
pub mod inner;
pub mod lagrangian;
pub mod outer;
pub mod problem;
pub mod selftest;

pub use config::{ConfigError, MonitorMode, SolverConfig};
pub use lagrangian::{PenaltyPolicy, PenaltyState, ThetaStat};
pub use outer::{solve, KktReport, RunReport, SolveError, Termination};
pub use problem::{ConstraintSet, ObjectiveKind, ObjectiveOracle, ProblemError, ProblemSpec};
