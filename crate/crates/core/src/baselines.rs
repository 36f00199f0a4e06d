//! Comparison methods: FISTA with backtracking, function-value restarted
//! FISTA, and the restarted RADA- and Greedy-FISTA variants.
//!
//! All of them return the same [`SolveOutput`] as RPF-SFISTA, build the
//! residual vector `v = ∇f(y) − ∇f(p) + (p − y)/step ∈ ∇f(y) + ∂h(y)` at the
//! prox output `y` of the extrapolated point `p`, and count one prox
//! evaluation per line-search trial.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, dist_sq, dot, norm};
use crate::problem::{CompositeProblem, CountingOracle};
use crate::solver::{Budget, ResidualMode, ResidualRule, SolveOutput, SolveStatus, TraceRow};
use crate::sfista::{descent_test, gap_slack};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineMethod {
    FistaBT,
    FistaRestart,
    RadaFista,
    GreedyFista,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 4] =
        [BaselineMethod::FistaBT, BaselineMethod::FistaRestart, BaselineMethod::RadaFista, BaselineMethod::GreedyFista];

    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::FistaBT => "fista-bt",
            BaselineMethod::FistaRestart => "fista-r",
            BaselineMethod::RadaFista => "rada",
            BaselineMethod::GreedyFista => "greedy",
        }
    }
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fista-bt" => Ok(BaselineMethod::FistaBT),
            "fista-r" => Ok(BaselineMethod::FistaRestart),
            "rada" | "rada-fista" => Ok(BaselineMethod::RadaFista),
            "greedy" | "greedy-fista" => Ok(BaselineMethod::GreedyFista),
            other => Err(Error::InvalidArgument(format!("unknown baseline method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    /// Initial Lipschitz guess for the backtracking variants.
    pub l0: f64,
    /// Descent-test weight for the backtracking variants.
    pub chi: f64,
    /// Fixed step for RADA/Greedy. `None` uses `1/L̄` (RADA) or `1.3/L̄`
    /// (Greedy) with `L̄` taken from the problem.
    pub gamma: Option<f64>,
    pub rada_p: f64,
    pub rada_q: f64,
    pub rada_r: f64,
    /// Factor applied to `r` at every RADA restart; 1 keeps `r` fixed.
    pub rada_xi: f64,
    pub greedy_step_factor: f64,
    /// Halve the Greedy step after 10 consecutive growing steps.
    pub greedy_safeguard: bool,
    pub eps_hat: f64,
    pub residual_mode: ResidualMode,
    pub max_total_iters: u64,
    pub time_limit_s: f64,
    pub record_trace: bool,
}

impl BaselineConfig {
    pub fn new(method: BaselineMethod) -> Self {
        BaselineConfig {
            method,
            l0: 10.0,
            chi: 0.001,
            gamma: None,
            rada_p: 0.5,
            rada_q: 0.5,
            rada_r: 4.0,
            rada_xi: 1.0,
            greedy_step_factor: 1.3,
            greedy_safeguard: false,
            eps_hat: 1e-8,
            residual_mode: ResidualMode::RelativeToInitialGrad,
            max_total_iters: 1_000_000,
            time_limit_s: 7200.0,
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.l0 > 0.0) {
            return bad(format!("l0 must be positive, got {}", self.l0));
        }
        if !(self.chi >= 0.0 && self.chi < 1.0) {
            return bad(format!("chi must lie in [0,1), got {}", self.chi));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0) {
                return bad(format!("gamma must be positive, got {g}"));
            }
        }
        if !(self.rada_p > 0.0 && self.rada_p <= 1.0 && self.rada_q > 0.0 && self.rada_q <= 1.0) {
            return bad("rada p and q must lie in (0,1]".into());
        }
        if !(self.rada_r > 0.0 && self.rada_r <= 4.0) {
            return bad(format!("rada r must lie in (0,4], got {}", self.rada_r));
        }
        if !(self.rada_xi > 0.0 && self.rada_xi <= 1.0) {
            return bad(format!("rada xi must lie in (0,1], got {}", self.rada_xi));
        }
        if !(self.eps_hat > 0.0) || self.max_total_iters == 0 || !(self.time_limit_s > 0.0) {
            return bad("tolerance and caps must be positive".into());
        }
        Ok(())
    }
}

/// The gradient-scheme restart predicate `⟨y_{j−1} − y_j, y_j − x̃_{j−1}⟩ > 0`.
pub fn gradient_restart(y_prev: &[f64], y: &[f64], x_tilde: &[f64]) -> bool {
    let mut s = 0.0;
    for i in 0..y.len() {
        s += (y_prev[i] - y[i]) * (y[i] - x_tilde[i]);
    }
    s > 0.0
}

/// FISTA-Mod momentum update `t⁺ = (p + √(q + r t²)) / 2`.
pub fn fista_mod_next_t(t: f64, p: f64, q: f64, r: f64) -> f64 {
    (p + (q + r * t * t).sqrt()) / 2.0
}

pub fn solve_baseline(problem: &CompositeProblem, config: &BaselineConfig, z0: &[f64]) -> Result<SolveOutput> {
    match config.method {
        BaselineMethod::FistaBT => solve_fista_bt(problem, config, z0),
        BaselineMethod::FistaRestart => solve_fista_restart(problem, config, z0),
        BaselineMethod::RadaFista => solve_rada_fista(problem, config, z0),
        BaselineMethod::GreedyFista => solve_greedy_fista(problem, config, z0),
    }
}

pub fn solve_fista_bt(problem: &CompositeProblem, config: &BaselineConfig, z0: &[f64]) -> Result<SolveOutput> {
    backtracking_fista(problem, config, z0, false)
}

pub fn solve_fista_restart(problem: &CompositeProblem, config: &BaselineConfig, z0: &[f64]) -> Result<SolveOutput> {
    backtracking_fista(problem, config, z0, true)
}

pub fn solve_rada_fista(problem: &CompositeProblem, config: &BaselineConfig, z0: &[f64]) -> Result<SolveOutput> {
    let gamma = fixed_step(problem, config, 1.0)?;
    fixed_step_fista(problem, config, z0, gamma, FixedStepRule::Rada)
}

pub fn solve_greedy_fista(problem: &CompositeProblem, config: &BaselineConfig, z0: &[f64]) -> Result<SolveOutput> {
    let gamma = fixed_step(problem, config, config.greedy_step_factor)?;
    fixed_step_fista(problem, config, z0, gamma, FixedStepRule::Greedy)
}

fn fixed_step(problem: &CompositeProblem, config: &BaselineConfig, factor: f64) -> Result<f64> {
    if let Some(g) = config.gamma {
        return Ok(g);
    }
    match problem.known_l {
        Some(l) if l > 0.0 => Ok(factor / l),
        _ => Err(Error::InvalidArgument(format!(
            "{} needs the Lipschitz constant of the gradient",
            config.method
        ))),
    }
}

struct Setup<'a> {
    oracle: CountingOracle<'a>,
    rule: ResidualRule,
    budget: Budget,
    phi_z0: f64,
}

fn setup<'a>(problem: &'a CompositeProblem, config: &BaselineConfig, z0: &[f64]) -> Result<Setup<'a>> {
    config.validate()?;
    check_dim(problem.dim(), z0.len())?;
    let h0 = problem
        .h(z0)
        .finite()
        .ok_or_else(|| Error::InvalidArgument("initial point is outside dom h".into()))?;
    let budget = Budget::new(config.max_total_iters, config.time_limit_s);
    let mut oracle = CountingOracle::new(problem);
    let g0 = oracle.grad(z0);
    let phi_z0 = oracle.f(z0) + h0;
    let rule = ResidualRule { mode: config.residual_mode, eps_hat: config.eps_hat, grad_z0_norm: norm(&g0) };
    Ok(Setup { oracle, rule, budget, phi_z0 })
}

struct Best {
    xi: Vec<f64>,
    phi: f64,
}

impl Best {
    fn offer(&mut self, y: &[f64], phi: f64) {
        if phi <= self.phi {
            self.xi.clear();
            self.xi.extend_from_slice(y);
            self.phi = phi;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn output(
    y: Vec<f64>,
    v: Vec<f64>,
    best: Best,
    l_final: f64,
    restarts: u32,
    iters: u64,
    setup: &Setup<'_>,
    status: SolveStatus,
    trace: Option<Vec<TraceRow>>,
) -> SolveOutput {
    let v_norm = norm(&v);
    SolveOutput {
        y,
        v,
        xi: best.xi,
        phi_xi: best.phi,
        l_final,
        cycles: restarts + 1,
        total_iters: iters,
        counters: setup.oracle.counters,
        status,
        abs_residual: v_norm,
        rel_residual: v_norm / (1.0 + setup.rule.grad_z0_norm),
        grad_z0_norm: setup.rule.grad_z0_norm,
        mu_final: None,
        elapsed_s: setup.budget.elapsed_s(),
        trace,
    }
}

fn backtracking_fista(problem: &CompositeProblem, config: &BaselineConfig, z0: &[f64], restart_on_increase: bool) -> Result<SolveOutput> {
    let mut st = setup(problem, config, z0)?;
    let mut best = Best { xi: z0.to_vec(), phi: st.phi_z0 };
    let mut trace = config.record_trace.then(Vec::new);

    let mut l = config.l0;
    let mut t = 1.0f64;
    let mut y_prev = z0.to_vec();
    let mut phi_prev = st.phi_z0;
    let mut p = z0.to_vec();
    let mut restarts = 0u32;
    let mut iters = 0u64;

    loop {
        let f_p = st.oracle.f_for_gap(&p);
        let g_p = st.oracle.grad(&p);
        let (y, f_y, g_y) = loop {
            if !(l <= crate::sfista::L_OVERFLOW) {
                return Err(Error::Internal("Lipschitz estimate overflow".into()));
            }
            let point: Vec<f64> = p.iter().zip(&g_p).map(|(x, g)| x - g / l).collect();
            let y = st.oracle.prox(&point, 1.0 / l)?;
            let (f_y, g_y) = st.oracle.f_and_grad(&y);
            let gap = problem.smooth().linearization_gap(&y, f_y, &p, f_p, &g_p);
            let d2 = dist_sq(&y, &p);
            if descent_test(gap, l, config.chi, d2, gap_slack(problem.smooth().is_quadratic(), f_y)) {
                break (y, f_y, g_y);
            }
            l *= 2.0;
        };
        let phi_y = f_y + st.oracle.h_at_prox(&y)?;
        let v: Vec<f64> = (0..y.len()).map(|i| g_y[i] - g_p[i] + l * (p[i] - y[i])).collect();
        iters += 1;
        best.offer(&y, phi_y);
        let v_norm = norm(&v);

        let restarted = restart_on_increase && phi_y > phi_prev;
        if restarted {
            restarts += 1;
            t = 1.0;
            p.clone_from(&y);
        } else {
            let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
            let w = (t - 1.0) / t_next;
            p = (0..y.len()).map(|i| y[i] + w * (y[i] - y_prev[i])).collect();
            t = t_next;
        }
        if let Some(rows) = trace.as_mut() {
            rows.push(TraceRow {
                cycle: restarts + 1,
                j: iters,
                l,
                a_sum: t * t / l,
                tau: t,
                v_norm,
                phi_xi: best.phi,
                restarted,
            });
        }

        if st.rule.passes(v_norm) {
            return Ok(output(y, v, best, l, restarts, iters, &st, SolveStatus::Converged, trace));
        }
        if let Some(status) = st.budget.exhausted(iters) {
            return Ok(output(y, v, best, l, restarts, iters, &st, status, trace));
        }
        y_prev = y;
        phi_prev = phi_y;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FixedStepRule {
    Rada,
    Greedy,
}

const SAFEGUARD_RUN: u32 = 10;

fn fixed_step_fista(
    problem: &CompositeProblem,
    config: &BaselineConfig,
    z0: &[f64],
    gamma0: f64,
    rule: FixedStepRule,
) -> Result<SolveOutput> {
    let mut st = setup(problem, config, z0)?;
    let mut best = Best { xi: z0.to_vec(), phi: st.phi_z0 };
    let mut trace = config.record_trace.then(Vec::new);

    let mut gamma = gamma0;
    let mut r = config.rada_r;
    let mut t = 1.0f64;
    let mut y_prev = z0.to_vec();
    let mut p = z0.to_vec();
    let mut restarts = 0u32;
    let mut iters = 0u64;
    let mut last_step = f64::INFINITY;
    let mut growing = 0u32;

    loop {
        let g_p = st.oracle.grad(&p);
        let point: Vec<f64> = p.iter().zip(&g_p).map(|(x, g)| x - gamma * g).collect();
        let y = st.oracle.prox(&point, gamma)?;
        let (f_y, g_y) = st.oracle.f_and_grad(&y);
        let phi_y = f_y + st.oracle.h_at_prox(&y)?;
        let v: Vec<f64> = (0..y.len()).map(|i| g_y[i] - g_p[i] + (p[i] - y[i]) / gamma).collect();
        iters += 1;
        best.offer(&y, phi_y);
        let v_norm = norm(&v);

        if rule == FixedStepRule::Greedy && config.greedy_safeguard {
            let step = dist(&y, &y_prev);
            growing = if step > last_step { growing + 1 } else { 0 };
            last_step = step;
            if growing >= SAFEGUARD_RUN {
                gamma *= 0.5;
                growing = 0;
            }
        }

        let restarted = gradient_restart(&y_prev, &y, &p);
        let momentum = if restarted {
            restarts += 1;
            t = 1.0;
            if rule == FixedStepRule::Rada {
                r *= config.rada_xi;
            }
            0.0
        } else {
            match rule {
                FixedStepRule::Rada => {
                    let t_next = fista_mod_next_t(t, config.rada_p, config.rada_q, r);
                    let w = (t - 1.0) / t_next;
                    t = t_next;
                    w
                }
                FixedStepRule::Greedy => 1.0,
            }
        };
        p = (0..y.len()).map(|i| y[i] + momentum * (y[i] - y_prev[i])).collect();

        if let Some(rows) = trace.as_mut() {
            rows.push(TraceRow {
                cycle: restarts + 1,
                j: iters,
                l: 1.0 / gamma,
                a_sum: t * t * gamma,
                tau: t,
                v_norm,
                phi_xi: best.phi,
                restarted,
            });
        }

        if st.rule.passes(v_norm) {
            return Ok(output(y, v, best, 1.0 / gamma, restarts, iters, &st, SolveStatus::Converged, trace));
        }
        if let Some(status) = st.budget.exhausted(iters) {
            return Ok(output(y, v, best, 1.0 / gamma, restarts, iters, &st, status, trace));
        }
        if !v_norm.is_finite() || !dot(&y, &y).is_finite() {
            return Err(Error::Internal(format!("{} diverged at iteration {iters}", config.method)));
        }
        y_prev = y;
    }
}
