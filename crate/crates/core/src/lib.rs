//! Restarted parameter-free strongly convex FISTA (RPF-SFISTA), the
//! aggressive regularization outer loop (A-REG), FISTA-family baselines,
//! exact projections, benchmark problem generators and a benchmark harness.
//!
//! Problems are `φ = f + h` with `f` convex and smooth and `h` an indicator
//! (or any closed convex function with a cheap prox).

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod areg;
pub mod baselines;
pub mod bench;
pub mod error;
pub mod linalg;
pub mod problem;
pub mod problems;
pub mod prox_ops;
pub mod sfista;
pub mod solver;

pub use areg::{solve_areg, ARegConfig, ARegOutput};
pub use baselines::{solve_baseline, BaselineConfig, BaselineMethod};
pub use error::{Error, Result};
pub use problem::{CompositeProblem, ExtendedReal, OracleCounters, ProxOperator, SmoothFunction};
pub use prox_ops::ProjectionSpec;
pub use sfista::{solve_sfista, Mu0Mode, SfistaConfig};
pub use solver::{relative_residual, ResidualMode, SolveOutput, SolveStatus, TraceRow};
