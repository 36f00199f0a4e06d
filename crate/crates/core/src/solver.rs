//! Types shared by every solver: status, residual rule, output and trace rows.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::linalg::norm;
use crate::problem::OracleCounters;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    IterCap,
    TimeCap,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::IterCap => "iter_cap",
            SolveStatus::TimeCap => "time_cap",
        }
    }
}

/// How the stationarity residual `‖v‖` is compared with the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidualMode {
    /// `‖v‖ ≤ ε̂`
    Absolute,
    /// `‖v‖ / (1 + ‖∇f(z₀)‖) ≤ ε̂`
    RelativeToInitialGrad,
}

/// `‖v‖ / (1 + ‖∇f(z₀)‖)`
pub fn relative_residual(v: &[f64], grad_f_z0: &[f64]) -> f64 {
    norm(v) / (1.0 + norm(grad_f_z0))
}

/// Residual test state fixed at the start of a solve.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ResidualRule {
    pub mode: ResidualMode,
    pub eps_hat: f64,
    pub grad_z0_norm: f64,
}

impl ResidualRule {
    pub fn measure(&self, v_norm: f64) -> f64 {
        match self.mode {
            ResidualMode::Absolute => v_norm,
            ResidualMode::RelativeToInitialGrad => v_norm / (1.0 + self.grad_z0_norm),
        }
    }

    pub fn passes(&self, v_norm: f64) -> bool {
        self.measure(v_norm) <= self.eps_hat
    }
}

/// Cooperative iteration and wall-clock caps, checked between iterations.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Budget {
    start: Instant,
    limit: Duration,
    max_iters: u64,
}

impl Budget {
    pub fn new(max_iters: u64, time_limit_s: f64) -> Self {
        let limit = if time_limit_s.is_finite() {
            Duration::from_secs_f64(time_limit_s.max(0.0))
        } else {
            Duration::MAX
        };
        Budget { start: Instant::now(), limit, max_iters }
    }

    pub fn exhausted(&self, iters_done: u64) -> Option<SolveStatus> {
        if iters_done >= self.max_iters {
            Some(SolveStatus::IterCap)
        } else if self.start.elapsed() >= self.limit {
            Some(SolveStatus::TimeCap)
        } else {
            None
        }
    }

    pub fn elapsed_s(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// One row of a per-iteration trace.
///
/// For the FISTA baselines `tau` holds the momentum scalar `t_j` and `a_sum`
/// holds `t_j² / L_j`, the usual FISTA analogue of the accumulated step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub cycle: u32,
    pub j: u64,
    pub l: f64,
    pub a_sum: f64,
    pub tau: f64,
    pub v_norm: f64,
    pub phi_xi: f64,
    pub restarted: bool,
}

/// Result of a single solve.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub y: Vec<f64>,
    pub v: Vec<f64>,
    /// Best-objective point seen.
    pub xi: Vec<f64>,
    pub phi_xi: f64,
    pub l_final: f64,
    /// Cycles (restarts + 1).
    pub cycles: u32,
    /// Inner iterations summed over cycles.
    pub total_iters: u64,
    pub counters: OracleCounters,
    pub status: SolveStatus,
    /// `‖v‖` at the returned pair.
    pub abs_residual: f64,
    /// `‖v‖ / (1 + ‖∇f(z₀)‖)` at the returned pair.
    pub rel_residual: f64,
    pub grad_z0_norm: f64,
    /// Final strong-convexity estimate (RPF-SFISTA only).
    pub mu_final: Option<f64>,
    pub elapsed_s: f64,
    pub trace: Option<Vec<TraceRow>>,
}
