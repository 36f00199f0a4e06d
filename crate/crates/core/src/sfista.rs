//! Restarted parameter-free strongly convex FISTA (RPF-SFISTA).
//!
//! Each cycle runs a strongly convex accelerated composite gradient method
//! with a fixed estimate `μ` of the strong convexity of `φ = f + h` and a
//! backtracking search on the smoothness estimate `L`. After every iteration
//! the checkable inequality
//!
//! ```text
//! ‖ξ_j − x₀‖² ≥ χ·A_j·L_j·‖y_j − x̃_{j−1}‖²
//! ```
//!
//! decides whether the cycle continues. When it fails, the method restarts
//! from the best point found so far with a smaller `μ`. Neither `μ̄` nor the
//! Lipschitz constant of `∇f` is needed.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist_sq, dot, norm, norm_sq, sub};
use crate::problem::{quadratic_difference, CompositeProblem, CountingOracle, OracleCounters};
use crate::solver::{Budget, ResidualMode, ResidualRule, SolveOutput, SolveStatus, TraceRow};

/// Backtracking stops with an error once `L` grows past this.
pub const L_OVERFLOW: f64 = 1e30;

/// `‖y − x̃‖ ≤ NEAR_STATIONARY·(1 + ‖x̃‖)` skips the restart test.
pub const NEAR_STATIONARY: f64 = 1e-14;

/// Relative roundoff slack in the descent test of the line search.
pub const LINE_SEARCH_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mu0Mode {
    /// Estimate `μ₀` from the curvature seen by the first accepted step.
    Bootstrap,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfistaConfig {
    /// Multiplier applied to `L` on a failed descent test; `> 1`.
    pub beta: f64,
    /// Restart-test weight in `(0, 1)`.
    pub chi: f64,
    /// Initial lower smoothness estimate `M̲₁` (also `M̄₀`).
    pub m_lower_init: f64,
    pub mu0_mode: Mu0Mode,
    /// `μ_l = mu_shrink·μ_{l−1}` on restart; in `(0, 1)`.
    pub mu_shrink: f64,
    /// `M̲_{l+1} = m_reuse_factor·M̄_l`, clamped into the admissible interval.
    pub m_reuse_factor: f64,
    /// When false, `M̲_{l+1} = m_reuse_factor·M̄_l` exactly, which may fall
    /// below `M̄₀` (the rule used in the benchmark runs).
    pub clamp_lower_estimate: bool,
    pub eps_hat: f64,
    pub residual_mode: ResidualMode,
    pub max_total_iters: u64,
    pub time_limit_s: f64,
    pub record_trace: bool,
}

impl Default for SfistaConfig {
    fn default() -> Self {
        SfistaConfig {
            beta: 1.25,
            chi: 0.001,
            m_lower_init: 10.0,
            mu0_mode: Mu0Mode::Bootstrap,
            mu_shrink: 0.5,
            m_reuse_factor: 0.4,
            clamp_lower_estimate: true,
            eps_hat: 1e-8,
            residual_mode: ResidualMode::Absolute,
            max_total_iters: 1_000_000,
            time_limit_s: 7200.0,
            record_trace: false,
        }
    }
}

impl SfistaConfig {
    /// The settings used for benchmarking: `μ` shrinks by 0.1 per restart,
    /// `M̲_{l+1} = 0.4·M̄_l` unclamped, and the residual is measured relative
    /// to `1 + ‖∇f(z₀)‖`.
    pub fn experimental() -> Self {
        SfistaConfig {
            mu_shrink: 0.1,
            clamp_lower_estimate: false,
            residual_mode: ResidualMode::RelativeToInitialGrad,
            ..SfistaConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.beta > 1.0) || !self.beta.is_finite() {
            return bad(format!("beta must exceed 1, got {}", self.beta));
        }
        if !(self.chi > 0.0 && self.chi < 1.0) {
            return bad(format!("chi must lie in (0,1), got {}", self.chi));
        }
        if !(self.m_lower_init > 0.0) || !self.m_lower_init.is_finite() {
            return bad(format!("m_lower_init must be positive, got {}", self.m_lower_init));
        }
        if let Mu0Mode::Fixed(mu) = self.mu0_mode {
            if !(mu > 0.0) || !mu.is_finite() {
                return bad(format!("fixed mu0 must be positive, got {mu}"));
            }
        }
        if !(self.mu_shrink > 0.0 && self.mu_shrink < 1.0) {
            return bad(format!("mu_shrink must lie in (0,1), got {}", self.mu_shrink));
        }
        if !(self.m_reuse_factor > 0.0) || !self.m_reuse_factor.is_finite() {
            return bad(format!("m_reuse_factor must be positive, got {}", self.m_reuse_factor));
        }
        if !(self.eps_hat > 0.0) {
            return bad(format!("eps_hat must be positive, got {}", self.eps_hat));
        }
        if self.max_total_iters == 0 {
            return bad("max_total_iters must be positive".into());
        }
        if !(self.time_limit_s > 0.0) {
            return bad(format!("time_limit_s must be positive, got {}", self.time_limit_s));
        }
        Ok(())
    }
}

/// `clamp(factor·m_bar, [max{0.25·m_bar, m_bar0}, m_bar])`: the next lower
/// smoothness estimate after a cycle that ended with `m_bar`.
pub fn next_lower_estimate(factor: f64, m_bar: f64, m_bar0: f64) -> f64 {
    let lo = (0.25 * m_bar).max(m_bar0);
    let hi = m_bar.max(lo);
    (factor * m_bar).clamp(lo, hi)
}

/// Every per-iteration quantity of one RPF-SFISTA run.
///
/// Between iterations `y`, `x_tilde`, `s`, `v` and `l` hold the values of the
/// last completed iteration `j`, while `a_sum` and `tau` are `A_j` and `τ_j`.
#[derive(Debug, Clone)]
pub struct SfistaState {
    pub cycle: u32,
    /// Iteration index within the cycle; 0 before the first step.
    pub iter: u64,
    pub a_sum: f64,
    pub tau: f64,
    pub l: f64,
    pub mu: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_tilde: Vec<f64>,
    pub xi: Vec<f64>,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
    /// Starting point `z_{l−1}` of the current cycle.
    pub x0_cycle: Vec<f64>,
    pub phi_xi: f64,
    /// `M̲_l` of the current cycle.
    pub m_lower: f64,
    pub counters: OracleCounters,
}

impl SfistaState {
    /// Step 0: a fresh cycle at `z` with estimates `(m_lower, mu)`.
    pub fn begin_cycle(cycle: u32, z: &[f64], phi_z: f64, m_lower: f64, mu: f64, counters: OracleCounters) -> Self {
        SfistaState {
            cycle,
            iter: 0,
            a_sum: 0.0,
            tau: 1.0,
            l: m_lower,
            mu,
            x: z.to_vec(),
            y: z.to_vec(),
            x_tilde: z.to_vec(),
            xi: z.to_vec(),
            s: vec![0.0; z.len()],
            v: vec![0.0; z.len()],
            x0_cycle: z.to_vec(),
            phi_xi: phi_z,
            m_lower,
            counters,
        }
    }
}

/// Accepted trial point of the line search.
#[derive(Debug, Clone)]
pub struct LineSearchOutcome {
    /// `a_{j−1}`
    pub a: f64,
    pub x_tilde: Vec<f64>,
    pub y: Vec<f64>,
    /// Accepted `L_j`.
    pub l: f64,
    pub f_y: f64,
    pub phi_y: f64,
    /// NaN when the gap formula is exact and `f(x̃)` was never evaluated.
    pub f_x_tilde: f64,
    pub grad_x_tilde: Vec<f64>,
    pub grad_y: Vec<f64>,
    /// `f(y) − ℓ_f(y; x̃)`
    pub gap: f64,
    pub rejections: u32,
}

/// `a = (τ + √(τ² + 4τAL)) / (2L)`, the positive root of `L a² = τ(A + a)`.
pub fn step_coefficient(tau: f64, a_sum: f64, l: f64) -> f64 {
    (tau + (tau * tau + 4.0 * tau * a_sum * l).sqrt()) / (2.0 * l)
}

/// Descent test `ℓ_f(y;x̃) + (1−χ)L‖y−x̃‖²/4 ≥ f(y)`, allowing `slack`.
pub fn descent_test(gap: f64, l: f64, chi: f64, dist_sq: f64, slack: f64) -> bool {
    -gap + 0.25 * (1.0 - chi) * l * dist_sq >= -slack
}

/// Roundoff allowance for the descent test. Quadratics get none: their gap
/// formula has no cancellation, and an absolute slack would accept any
/// tiny step near the optimum regardless of `L`.
pub fn gap_slack(quadratic: bool, f_y: f64) -> f64 {
    if quadratic {
        0.0
    } else {
        LINE_SEARCH_SLACK * (1.0 + f_y.abs())
    }
}

fn line_search(
    state: &SfistaState,
    oracle: &mut CountingOracle<'_>,
    config: &SfistaConfig,
) -> Result<LineSearchOutcome> {
    let problem = oracle.problem;
    let mut l = state.l;
    let mut rejections = 0u32;
    // with A = 0 the extrapolation point is x itself for every trial L
    let mut cached: Option<(Vec<f64>, f64, Vec<f64>)> = None;
    loop {
        if !(l <= L_OVERFLOW) {
            return Err(Error::Internal(format!(
                "smoothness estimate exceeded {L_OVERFLOW:e}; f may be nonsmooth or its gradient inconsistent"
            )));
        }
        let a = step_coefficient(state.tau, state.a_sum, l);
        let (x_tilde, f_x_tilde, grad_x_tilde) = match (&cached, state.a_sum == 0.0) {
            (Some(c), true) => c.clone(),
            _ => {
                let denom = state.a_sum + a;
                let xt: Vec<f64> = state
                    .y
                    .iter()
                    .zip(&state.x)
                    .map(|(yp, xp)| (state.a_sum * yp + a * xp) / denom)
                    .collect();
                let fx = oracle.f_for_gap(&xt);
                let gx = oracle.grad(&xt);
                let c = (xt, fx, gx);
                if state.a_sum == 0.0 {
                    cached = Some(c.clone());
                }
                c
            }
        };
        let point: Vec<f64> = x_tilde.iter().zip(&grad_x_tilde).map(|(x, g)| x - g / l).collect();
        let y = oracle.prox(&point, 1.0 / l)?;
        // ∇f(y) rides along with f(y); rejections are rare
        let (f_y, grad_y) = oracle.f_and_grad(&y);
        let gap = problem.smooth().linearization_gap(&y, f_y, &x_tilde, f_x_tilde, &grad_x_tilde);
        let d2 = dist_sq(&y, &x_tilde);
        if descent_test(gap, l, config.chi, d2, gap_slack(problem.smooth().is_quadratic(), f_y)) {
            let phi_y = f_y + oracle.h_at_prox(&y)?;
            return Ok(LineSearchOutcome {
                a,
                x_tilde,
                y,
                l,
                f_y,
                phi_y,
                f_x_tilde,
                grad_x_tilde,
                grad_y,
                gap,
                rejections,
            });
        }
        l *= config.beta;
        rejections += 1;
    }
}

/// Steps 1–2: starting from `L_j = L_{j−1}`, multiply by `β` until the
/// descent test holds. Every trial costs one prox evaluation.
pub fn backtracking_step(
    state: &mut SfistaState,
    problem: &CompositeProblem,
    config: &SfistaConfig,
) -> Result<LineSearchOutcome> {
    let mut oracle = CountingOracle::new(problem);
    let out = line_search(state, &mut oracle, config);
    state.counters.merge(&oracle.counters);
    out
}

/// Step 3: best point, `A`, `τ`, `s`, `x` and the residual vector `v`.
///
/// `grad_y` is `∇f(y_j)`. Ties keep the new point.
pub fn momentum_update(state: &mut SfistaState, step: &LineSearchOutcome, grad_y: &[f64]) {
    let improves = step.phi_y <= state.phi_xi;
    momentum_update_with(state, step, grad_y, improves);
}

/// [`momentum_update`] with the `φ(y_j) ≤ φ(ξ_{j−1})` decision made by the
/// caller.
pub fn momentum_update_with(state: &mut SfistaState, step: &LineSearchOutcome, grad_y: &[f64], improves: bool) {
    if improves {
        state.xi.clone_from(&step.y);
        // the caller may resolve differences below the rounding of φ itself;
        // the stored value then stays within an ulp of φ(ξ) and never rises
        state.phi_xi = step.phi_y.min(state.phi_xi);
    }
    let a = step.a;
    let tau_prev = state.tau;
    state.a_sum += a;
    state.tau = tau_prev + 0.5 * a * state.mu;
    let l = step.l;
    state.s = step.x_tilde.iter().zip(&step.y).map(|(xt, y)| l * (xt - y)).collect();
    let half_mu_a = 0.5 * state.mu * a;
    state.x = (0..step.y.len())
        .map(|i| (half_mu_a * step.y[i] + tau_prev * state.x[i] - a * state.s[i]) / state.tau)
        .collect();
    state.v = (0..step.y.len()).map(|i| grad_y[i] - step.grad_x_tilde[i] + state.s[i]).collect();
    state.y.clone_from(&step.y);
    state.x_tilde.clone_from(&step.x_tilde);
    state.l = l;
    state.iter += 1;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestartDecision {
    Continue,
    Restart,
}

/// Step 4: continue while `‖ξ_j − x₀‖² ≥ χ·A_j·L_j·‖y_j − x̃_{j−1}‖²`.
pub fn restart_check(state: &SfistaState, chi: f64) -> RestartDecision {
    let step_sq = dist_sq(&state.y, &state.x_tilde);
    let guard = NEAR_STATIONARY * (1.0 + norm(&state.x_tilde));
    if step_sq <= guard * guard {
        return RestartDecision::Continue;
    }
    let lhs = dist_sq(&state.xi, &state.x0_cycle);
    if lhs >= chi * state.a_sum * state.l * step_sq {
        RestartDecision::Continue
    } else {
        RestartDecision::Restart
    }
}

fn mu0_from_gap(gap: f64, step_sq: f64, chi: f64) -> Option<f64> {
    let mu = 4.0 * gap / ((1.0 - chi) * step_sq);
    (step_sq > 0.0 && mu.is_finite() && mu > 0.0).then_some(mu)
}

fn stationary_scale(x: &[f64]) -> f64 {
    let s = NEAR_STATIONARY * (1.0 + norm(x));
    s * s
}

/// Initial strong convexity estimate
/// `μ₀ = 4[f(y₁) − ℓ_f(y₁; x₀)] / ((1−χ)‖y₁ − x₀‖²)`.
///
/// Returns `None` when the curvature between the two points cannot be
/// measured (coincident points or a nonpositive gap); callers then fall back
/// to a fixed estimate.
pub fn bootstrap_mu0(y1: &[f64], x0: &[f64], problem: &CompositeProblem, chi: f64) -> Option<f64> {
    let d2 = dist_sq(y1, x0);
    if d2 <= stationary_scale(x0) {
        return None;
    }
    let f_y = problem.f(y1);
    let f_x = problem.f(x0);
    let g_x = problem.grad(x0);
    let gap = problem.smooth().linearization_gap(y1, f_y, x0, f_x, &g_x);
    mu0_from_gap(gap, d2, chi)
}

/// Data of a completed iteration needed to evaluate `γ_j`.
#[derive(Debug, Clone)]
pub struct GammaSnapshot {
    pub y: Vec<f64>,
    pub x_tilde: Vec<f64>,
    pub s: Vec<f64>,
    pub mu: f64,
}

impl GammaSnapshot {
    pub fn of(state: &SfistaState) -> Self {
        GammaSnapshot { y: state.y.clone(), x_tilde: state.x_tilde.clone(), s: state.s.clone(), mu: state.mu }
    }
}

/// `γ_j(x) = φ(y) + 2[ℓ_f(y; x̃) − f(y)] + ⟨s, x − y⟩ + (μ/4)‖x − y‖²`,
/// the quadratic under-estimator of `φ` built at iteration `j`.
pub fn eval_gamma(snapshot: &GammaSnapshot, problem: &CompositeProblem, x: &[f64]) -> Result<f64> {
    check_dim(problem.dim(), x.len())?;
    let phi_y = problem
        .eval_phi(&snapshot.y)?
        .finite()
        .ok_or_else(|| Error::InvalidArgument("snapshot point is outside dom h".into()))?;
    let f_y = problem.f(&snapshot.y);
    let f_xt = problem.f(&snapshot.x_tilde);
    let g_xt = problem.grad(&snapshot.x_tilde);
    let gap = problem.smooth().linearization_gap(&snapshot.y, f_y, &snapshot.x_tilde, f_xt, &g_xt);
    let d = sub(x, &snapshot.y);
    Ok(phi_y - 2.0 * gap + dot(&snapshot.s, &d) + 0.25 * snapshot.mu * norm_sq(&d))
}

/// What an observer sees after steps 3–4 of an iteration.
#[derive(Debug)]
pub struct IterationView<'a> {
    pub state: &'a SfistaState,
    /// `a_{j−1}`
    pub a: f64,
    /// `τ_{j−1}`
    pub tau_prev: f64,
    /// `A_{j−1}`
    pub a_sum_prev: f64,
    pub phi_y: f64,
    pub rejections: u32,
    pub decision: RestartDecision,
    /// Iterations completed across all cycles, this one included.
    pub total_iters: u64,
}

/// Runs RPF-SFISTA from `z0`.
pub fn solve_sfista(problem: &CompositeProblem, config: &SfistaConfig, z0: &[f64]) -> Result<SolveOutput> {
    solve_sfista_observed(problem, config, z0, |_| {})
}

/// Like [`solve_sfista`], calling `observer` once per iteration.
pub fn solve_sfista_observed(
    problem: &CompositeProblem,
    config: &SfistaConfig,
    z0: &[f64],
    mut observer: impl FnMut(&IterationView<'_>),
) -> Result<SolveOutput> {
    config.validate()?;
    check_dim(problem.dim(), z0.len())?;
    let h0 = problem
        .h(z0)
        .finite()
        .ok_or_else(|| Error::InvalidArgument("initial point is outside dom h".into()))?;
    let budget = Budget::new(config.max_total_iters, config.time_limit_s);

    let mut oracle = CountingOracle::new(problem);
    let grad_z0 = oracle.grad(z0);
    let phi_z0 = oracle.f(z0) + h0;
    let rule = ResidualRule { mode: config.residual_mode, eps_hat: config.eps_hat, grad_z0_norm: norm(&grad_z0) };

    let m_bar0 = config.m_lower_init;
    let (mut mu, mut bootstrap_pending) = match config.mu0_mode {
        Mu0Mode::Fixed(m) => (m, false),
        // placeholder until the first accepted step; a₀ and y₁ do not depend on μ
        Mu0Mode::Bootstrap => (f64::NAN, true),
    };
    let mut state = SfistaState::begin_cycle(1, z0, phi_z0, m_bar0, mu, oracle.counters);
    let mut total_iters = 0u64;
    let mut trace = config.record_trace.then(Vec::new);
    // near the optimum φ(y) − φ(ξ) sinks below the rounding of φ; for quadratic
    // f the difference is taken from gradients instead, which keeps ξ moving
    let mut xi_grad = problem.smooth().is_quadratic().then(|| grad_z0.clone());
    let mut h_xi = h0;

    loop {
        let step = backtracking_step(&mut state, problem, config)?;

        if bootstrap_pending {
            let d2 = dist_sq(&step.y, &step.x_tilde);
            mu = if d2 > stationary_scale(&step.x_tilde) {
                mu0_from_gap(step.gap, d2, config.chi).unwrap_or(m_bar0)
            } else {
                m_bar0
            };
            state.mu = mu;
            bootstrap_pending = false;
        }

        let tau_prev = state.tau;
        let a_sum_prev = state.a_sum;
        let improves = match &xi_grad {
            Some(g_xi) => {
                let h_y = step.phi_y - step.f_y;
                quadratic_difference(&step.y, &step.grad_y, &state.xi, g_xi) + (h_y - h_xi) <= 0.0
            }
            None => step.phi_y <= state.phi_xi,
        };
        if improves && xi_grad.is_some() {
            xi_grad = Some(step.grad_y.clone());
            h_xi = step.phi_y - step.f_y;
        }
        momentum_update_with(&mut state, &step, &step.grad_y, improves);
        total_iters += 1;

        let decision = restart_check(&state, config.chi);
        let v_norm = norm(&state.v);
        observer(&IterationView {
            state: &state,
            a: step.a,
            tau_prev,
            a_sum_prev,
            phi_y: step.phi_y,
            rejections: step.rejections,
            decision,
            total_iters,
        });
        if let Some(rows) = trace.as_mut() {
            rows.push(TraceRow {
                cycle: state.cycle,
                j: state.iter,
                l: state.l,
                a_sum: state.a_sum,
                tau: state.tau,
                v_norm,
                phi_xi: state.phi_xi,
                restarted: decision == RestartDecision::Restart,
            });
        }

        match decision {
            RestartDecision::Restart => {
                let m_bar = state.l;
                mu *= config.mu_shrink;
                let m_lower = if config.clamp_lower_estimate {
                    next_lower_estimate(config.m_reuse_factor, m_bar, m_bar0)
                } else {
                    config.m_reuse_factor * m_bar
                };
                log::debug!(
                    "restart after cycle {} (j = {}): L = {m_bar:e}, next mu = {mu:e}",
                    state.cycle,
                    state.iter
                );
                let z = std::mem::take(&mut state.xi);
                let next = SfistaState::begin_cycle(state.cycle + 1, &z, state.phi_xi, m_lower, mu, state.counters);
                // keep the last certificate pair in case a cap ends the run
                let (y_last, v_last) = (std::mem::take(&mut state.y), std::mem::take(&mut state.v));
                state = next;
                if let Some(status) = budget.exhausted(total_iters) {
                    return Ok(finish(y_last, v_last, m_bar, &state, status, rule, total_iters, &budget, trace, mu));
                }
            }
            RestartDecision::Continue => {
                if rule.passes(v_norm) {
                    let (y, v) = (state.y.clone(), state.v.clone());
                    return Ok(finish(y, v, state.l, &state, SolveStatus::Converged, rule, total_iters, &budget, trace, mu));
                }
                if let Some(status) = budget.exhausted(total_iters) {
                    let (y, v) = (state.y.clone(), state.v.clone());
                    return Ok(finish(y, v, state.l, &state, status, rule, total_iters, &budget, trace, mu));
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    y: Vec<f64>,
    v: Vec<f64>,
    l_final: f64,
    state: &SfistaState,
    status: SolveStatus,
    rule: ResidualRule,
    total_iters: u64,
    budget: &Budget,
    trace: Option<Vec<TraceRow>>,
    mu: f64,
) -> SolveOutput {
    let v_norm = norm(&v);
    SolveOutput {
        y,
        v,
        xi: state.xi.clone(),
        phi_xi: state.phi_xi,
        l_final,
        cycles: state.cycle,
        total_iters,
        counters: state.counters,
        status,
        abs_residual: v_norm,
        rel_residual: v_norm / (1.0 + rule.grad_z0_norm),
        grad_z0_norm: rule.grad_z0_norm,
        mu_final: Some(mu),
        elapsed_s: budget.elapsed_s(),
        trace,
    }
}

/// `κ = 2β/(1−χ)`: accepted smoothness estimates never exceed
/// `max{M̲_l, κ·L̄}`.
pub fn kappa(beta: f64, chi: f64) -> f64 {
    2.0 * beta / (1.0 - chi)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::problem::{ScaledSquaredNorm, ZeroFunction};

    fn quad_1d(c: f64) -> CompositeProblem {
        CompositeProblem::new(Arc::new(ScaledSquaredNorm { dim: 1, curvature: c }), Arc::new(ZeroFunction))
            .with_known_l(c)
            .with_known_mu_f(c)
    }

    #[test]
    fn step_coefficient_with_empty_sum() {
        assert_eq!(step_coefficient(1.0, 0.0, 4.0), 0.25);
    }

    #[test]
    fn step_coefficient_satisfies_quadratic() {
        let (tau, a_sum, l) = (1.7, 3.2, 9.0);
        let a = step_coefficient(tau, a_sum, l);
        assert!((l * a * a - tau * (a_sum + a)).abs() < 1e-12 * l * a * a);
    }

    #[test]
    fn descent_test_on_quadratic_edge() {
        // f = c/2‖·‖² has gap c/2·d²; the test needs L ≥ 2c/(1−χ)
        let (c, chi, d2) = (3.0, 0.001, 0.5);
        let gap = 0.5 * c * d2;
        assert!(!descent_test(gap, c, chi, d2, gap_slack(false, 0.0)));
        assert!(descent_test(gap, 4.0 * c, chi, d2, gap_slack(true, 0.0)));
    }

    #[test]
    fn backtracking_multiplies_until_accepted() {
        let p = quad_1d(10.0);
        let cfg = SfistaConfig::default();
        let mut st = SfistaState::begin_cycle(1, &[1.0], 5.0, 10.0, 1.0, OracleCounters::default());
        let out = backtracking_step(&mut st, &p, &cfg).unwrap();
        // smallest 1.25-power multiple of 10 with L ≥ 20/0.999
        let mut expect = 10.0;
        while expect < 20.0 / 0.999 {
            expect *= 1.25;
        }
        assert_eq!(out.l, expect);
        assert_eq!(st.counters.prox_evals, u64::from(out.rejections) + 1);
        assert_eq!(out.a, step_coefficient(1.0, 0.0, out.l));
    }

    #[test]
    fn momentum_with_zero_mu_keeps_tau() {
        let mut st = SfistaState::begin_cycle(1, &[1.0], 0.5, 2.0, 0.0, OracleCounters::default());
        let step = LineSearchOutcome {
            a: 0.25,
            x_tilde: vec![1.0],
            y: vec![0.5],
            l: 2.0,
            f_y: 0.125,
            phi_y: 0.125,
            f_x_tilde: 0.5,
            grad_x_tilde: vec![1.0],
            grad_y: vec![0.5],
            gap: 0.0,
            rejections: 0,
        };
        momentum_update(&mut st, &step, &[0.5]);
        assert_eq!(st.tau, 1.0);
    }

    #[test]
    fn momentum_zero_step_gives_zero_residual() {
        let mut st = SfistaState::begin_cycle(1, &[0.3, -0.2], 1.0, 2.0, 1.0, OracleCounters::default());
        let step = LineSearchOutcome {
            a: 0.5,
            x_tilde: vec![0.3, -0.2],
            y: vec![0.3, -0.2],
            l: 2.0,
            f_y: 0.0,
            phi_y: 0.0,
            f_x_tilde: 0.0,
            grad_x_tilde: vec![0.7, 0.1],
            grad_y: vec![0.7, 0.1],
            gap: 0.0,
            rejections: 0,
        };
        momentum_update(&mut st, &step, &[0.7, 0.1]);
        assert_eq!(st.s, vec![0.0, 0.0]);
        assert_eq!(st.v, vec![0.0, 0.0]);
    }

    #[test]
    fn momentum_worked_step() {
        // x_{j−1}=1, y_j=0.5, x̃=1, L=2, a=0.25, μ=1, τ_{j−1}=1
        let mut st = SfistaState::begin_cycle(1, &[1.0], 0.5, 2.0, 1.0, OracleCounters::default());
        let step = LineSearchOutcome {
            a: 0.25,
            x_tilde: vec![1.0],
            y: vec![0.5],
            l: 2.0,
            f_y: 0.125,
            phi_y: 0.125,
            f_x_tilde: 0.5,
            grad_x_tilde: vec![1.0],
            grad_y: vec![0.5],
            gap: 0.125,
            rejections: 0,
        };
        momentum_update(&mut st, &step, &[0.5]);
        assert_eq!(st.tau, 1.125);
        assert_eq!(st.s, vec![1.0]);
        // x = (0.5·1·0.25·0.5 + 1·1 − 0.25·1)/1.125 = 0.8125/1.125
        assert!((st.x[0] - 0.8125 / 1.125).abs() < 1e-15);
        assert_eq!(st.v, vec![0.5 - 1.0 + 1.0]);
        assert_eq!(st.xi, vec![0.5]);
        assert_eq!(st.a_sum, 0.25);
    }

    #[test]
    fn restart_check_cases() {
        let mut st = SfistaState::begin_cycle(1, &[0.0, 0.0], 0.0, 1.0, 1.0, OracleCounters::default());
        st.a_sum = 1.0;
        st.l = 1.0;
        st.y = vec![1.0, 0.0];
        st.x_tilde = vec![0.0, 0.0];
        // ξ = x₀ with a nonzero step
        assert_eq!(restart_check(&st, 0.001), RestartDecision::Restart);
        st.y = st.x_tilde.clone();
        assert_eq!(restart_check(&st, 0.001), RestartDecision::Continue);
        st.y = vec![1.0, 0.0];
        st.xi = vec![1e-6, 0.0];
        assert_eq!(restart_check(&st, 1e-15), RestartDecision::Continue);
    }

    #[test]
    fn bootstrap_quadratic() {
        let chi = 0.001;
        let p = quad_1d(1.0);
        let mu = bootstrap_mu0(&[0.5], &[1.0], &p, chi).unwrap();
        assert!((mu - 2.0 / (1.0 - chi)).abs() < 1e-12);
        let p = quad_1d(7.0);
        let mu = bootstrap_mu0(&[0.5], &[1.0], &p, chi).unwrap();
        assert!((mu - 14.0 / (1.0 - chi)).abs() < 1e-10);
    }

    #[test]
    fn bootstrap_linear_falls_back() {
        let p = CompositeProblem::new(
            Arc::new(crate::problem::ClosureSmooth::new(2, |z: &[f64]| z[0] - 2.0 * z[1], |_z: &[f64]| vec![1.0, -2.0])),
            Arc::new(ZeroFunction),
        );
        assert_eq!(bootstrap_mu0(&[0.0, 1.0], &[1.0, 0.0], &p, 0.001), None);
        assert_eq!(bootstrap_mu0(&[1.0, 0.0], &[1.0, 0.0], &p, 0.001), None);
    }

    #[test]
    fn gamma_at_y_is_below_phi_y() {
        let p = quad_1d(2.0);
        let snap = GammaSnapshot { y: vec![0.5], x_tilde: vec![1.0], s: vec![1.0], mu: 1.0 };
        let g = eval_gamma(&snap, &p, &[0.5]).unwrap();
        assert!(g <= p.f(&[0.5]));
    }

    #[test]
    fn gamma_constant_when_mu_and_s_vanish() {
        let p = quad_1d(2.0);
        let snap = GammaSnapshot { y: vec![0.5], x_tilde: vec![1.0], s: vec![0.0], mu: 0.0 };
        let g1 = eval_gamma(&snap, &p, &[-3.0]).unwrap();
        let g2 = eval_gamma(&snap, &p, &[8.0]).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn solves_1d_quadratic_in_one_cycle() {
        let p = quad_1d(1.0);
        let cfg = SfistaConfig { eps_hat: 1e-10, mu0_mode: Mu0Mode::Fixed(1.0), ..SfistaConfig::default() };
        let out = solve_sfista(&p, &cfg, &[1.0]).unwrap();
        assert_eq!(out.status, SolveStatus::Converged);
        assert_eq!(out.cycles, 1);
        assert!(out.y[0].abs() <= 1e-10);
    }

    #[test]
    fn infinite_tolerance_stops_at_first_iteration() {
        let p = quad_1d(3.0);
        let cfg = SfistaConfig { eps_hat: f64::INFINITY, ..SfistaConfig::default() };
        let out = solve_sfista(&p, &cfg, &[1.0]).unwrap();
        assert_eq!(out.status, SolveStatus::Converged);
        assert_eq!((out.total_iters, out.cycles), (1, 1));
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let p = CompositeProblem::new(
            Arc::new(ScaledSquaredNorm { dim: 2, curvature: 1.0 }),
            Arc::new(crate::prox_ops::ProjectionSpec::Simplex),
        );
        assert!(matches!(
            solve_sfista(&p, &SfistaConfig::default(), &[2.0, 0.0]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_status() {
        let p = quad_1d(1.0);
        let cfg = SfistaConfig { eps_hat: 1e-300, max_total_iters: 3, ..SfistaConfig::default() };
        let out = solve_sfista(&p, &cfg, &[1.0]).unwrap();
        assert_eq!(out.status, SolveStatus::IterCap);
        assert_eq!(out.total_iters, 3);
    }

    #[test]
    fn nan_objective_overflows_line_search() {
        // the descent test can never pass, so L grows without bound
        let p = CompositeProblem::new(
            Arc::new(crate::problem::ClosureSmooth::new(1, |_: &[f64]| f64::NAN, |z: &[f64]| vec![z[0]])),
            Arc::new(ZeroFunction),
        );
        let cfg = SfistaConfig { eps_hat: 1e-12, ..SfistaConfig::default() };
        let err = solve_sfista(&p, &cfg, &[1e-3]);
        assert!(matches!(err, Err(Error::Internal(_))), "{err:?}");
    }

    #[test]
    fn lower_estimate_clamp() {
        assert_eq!(next_lower_estimate(0.4, 100.0, 10.0), 40.0);
        assert_eq!(next_lower_estimate(0.4, 20.0, 10.0), 10.0);
        assert_eq!(next_lower_estimate(0.1, 100.0, 1.0), 25.0);
        assert_eq!(next_lower_estimate(3.0, 100.0, 1.0), 100.0);
    }

    #[test]
    fn config_validation() {
        assert!(SfistaConfig { beta: 1.0, ..SfistaConfig::default() }.validate().is_err());
        assert!(SfistaConfig { chi: 1.0, ..SfistaConfig::default() }.validate().is_err());
        assert!(SfistaConfig { mu_shrink: 1.0, ..SfistaConfig::default() }.validate().is_err());
        assert!(SfistaConfig { mu0_mode: Mu0Mode::Fixed(0.0), ..SfistaConfig::default() }.validate().is_err());
        assert!(SfistaConfig::experimental().validate().is_ok());
    }
}
