//! Aggressive regularization (A-REG) for merely convex composite problems.
//!
//! Each outer iteration adds `(δ/2)‖· − ϑ‖²` to the smooth part, solves the
//! resulting strongly convex problem with RPF-SFISTA started from an
//! aggressive estimate `μ₀ = B·δ`, and halves `δ` until the outer residual
//! `r = u + δ(ϑ_prev − w)` is small.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist_sq, norm};
use crate::problem::{CompositeProblem, OracleCounters, SmoothFunction};
use crate::sfista::{next_lower_estimate, solve_sfista, Mu0Mode, SfistaConfig};
use crate::solver::{ResidualMode, SolveStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ARegConfig {
    /// Aggressiveness multiplier `B ≥ 1` in `μ₀ = B·δ`.
    pub b_mult: f64,
    pub delta0: f64,
    /// `N̄₀`
    pub n0: f64,
    pub n_reuse_factor: f64,
    pub eps: f64,
    /// Template for the inner solves; `mu0_mode`, `m_lower_init`, `eps_hat`,
    /// `residual_mode` and the caps are overwritten per subproblem.
    pub inner: SfistaConfig,
    pub max_total_iters: u64,
    pub time_limit_s: f64,
}

impl Default for ARegConfig {
    fn default() -> Self {
        ARegConfig {
            b_mult: 10.0,
            delta0: 1.0,
            n0: 10.0,
            n_reuse_factor: 0.4,
            eps: 1e-8,
            inner: SfistaConfig::default(),
            max_total_iters: 1_000_000,
            time_limit_s: 7200.0,
        }
    }
}

impl ARegConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.b_mult >= 1.0) || !self.b_mult.is_finite() {
            return bad(format!("B must be at least 1, got {}", self.b_mult));
        }
        if !(self.delta0 > 0.0) || !self.delta0.is_finite() {
            return bad(format!("delta0 must be positive, got {}", self.delta0));
        }
        if !(self.n0 > 0.0) || !self.n0.is_finite() {
            return bad(format!("N0 must be positive, got {}", self.n0));
        }
        if !(self.n_reuse_factor > 0.0) {
            return bad(format!("n_reuse_factor must be positive, got {}", self.n_reuse_factor));
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if self.max_total_iters == 0 || !(self.time_limit_s > 0.0) {
            return bad("caps must be positive".into());
        }
        Ok(())
    }
}

/// `ψ_s + (δ/2)‖· − θ‖²`
pub struct RegularizedSmooth {
    base: Arc<dyn SmoothFunction>,
    delta: f64,
    center: Vec<f64>,
}

impl SmoothFunction for RegularizedSmooth {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, z: &[f64]) -> f64 {
        self.base.value(z) + 0.5 * self.delta * dist_sq(z, &self.center)
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut g = self.base.gradient(z);
        for ((gi, zi), ci) in g.iter_mut().zip(z).zip(&self.center) {
            *gi += self.delta * (zi - ci);
        }
        g
    }

    fn value_and_gradient(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let (f, mut g) = self.base.value_and_gradient(z);
        for ((gi, zi), ci) in g.iter_mut().zip(z).zip(&self.center) {
            *gi += self.delta * (zi - ci);
        }
        (f + 0.5 * self.delta * dist_sq(z, &self.center), g)
    }

    fn is_quadratic(&self) -> bool {
        self.base.is_quadratic()
    }

    fn linearization_gap(&self, y: &[f64], f_y: f64, x: &[f64], f_x: f64, grad_x: &[f64]) -> f64 {
        // the regularizer's gap is exactly (δ/2)‖y − x‖²
        let reg = |z: &[f64]| 0.5 * self.delta * dist_sq(z, &self.center);
        let g_base: Vec<f64> = grad_x
            .iter()
            .zip(x)
            .zip(&self.center)
            .map(|((g, xi), ci)| g - self.delta * (xi - ci))
            .collect();
        self.base.linearization_gap(y, f_y - reg(y), x, f_x - reg(x), &g_base) + 0.5 * self.delta * dist_sq(y, x)
    }
}

/// The regularized subproblem `(ψ_s + (δ/2)‖· − θ‖², ψ_n)`.
pub fn build_subproblem(problem: &CompositeProblem, delta: f64, theta: &[f64]) -> Result<CompositeProblem> {
    check_dim(problem.dim(), theta.len())?;
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let smooth = RegularizedSmooth { base: Arc::clone(problem.smooth()), delta, center: theta.to_vec() };
    let mut sub = CompositeProblem::new(Arc::new(smooth), Arc::clone(problem.nonsmooth()));
    sub.known_mu_f = Some(problem.known_mu_f.unwrap_or(0.0) + delta);
    sub.known_l = problem.known_l.map(|l| l + delta);
    Ok(sub)
}

/// `r = u + δ(θ_prev − w)`
pub fn outer_residual(u: &[f64], delta: f64, theta_prev: &[f64], w: &[f64]) -> Vec<f64> {
    u.iter().zip(theta_prev.iter().zip(w)).map(|(ui, (t, wi))| ui + delta * (t - wi)).collect()
}

/// One outer iteration, also the A-REG trace row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemSummary {
    pub k: u32,
    /// `δ_{k−1}` used by this subproblem.
    pub delta: f64,
    pub n_lower: f64,
    pub u_norm: f64,
    pub r_norm: f64,
    pub inner_cycles: u32,
    pub inner_iters: u64,
    pub inner_status: SolveStatus,
    /// `ψ(ϑ_k)`
    pub psi_theta: f64,
}

#[derive(Debug, Clone)]
pub struct ARegOutput {
    pub w: Vec<f64>,
    pub r: Vec<f64>,
    /// `ϑ` of the last completed subproblem.
    pub theta: Vec<f64>,
    pub outer_iters: u32,
    pub subproblems: Vec<SubproblemSummary>,
    pub counters: OracleCounters,
    pub status: SolveStatus,
    pub delta_final: f64,
}

pub fn solve_areg(problem: &CompositeProblem, config: &ARegConfig, theta0: &[f64]) -> Result<ARegOutput> {
    config.validate()?;
    check_dim(problem.dim(), theta0.len())?;
    let mut psi_theta = problem
        .eval_phi(theta0)?
        .finite()
        .ok_or_else(|| Error::InvalidArgument("initial point is outside dom h".into()))?;
    let start = std::time::Instant::now();

    let mut theta = theta0.to_vec();
    let mut delta = config.delta0;
    let mut n_bar_prev = config.n0;
    let mut counters = OracleCounters::default();
    let mut iters_used = 0u64;
    let mut subproblems = Vec::new();
    let mut last: Option<ARegOutput> = None;

    for k in 1u32.. {
        let n_lower = if k == 1 { config.n0 } else { next_lower_estimate(config.n_reuse_factor, n_bar_prev, config.n0) };
        let sub = build_subproblem(problem, delta, &theta)?;
        let remaining_s = config.time_limit_s - start.elapsed().as_secs_f64();
        let remaining_iters = config.max_total_iters.saturating_sub(iters_used);
        if remaining_s <= 0.0 || remaining_iters == 0 {
            if let Some(mut out) = last.take() {
                out.status = if remaining_iters == 0 { SolveStatus::IterCap } else { SolveStatus::TimeCap };
                return Ok(out);
            }
        }
        let inner = SfistaConfig {
            mu0_mode: Mu0Mode::Fixed(config.b_mult * delta),
            m_lower_init: n_lower,
            eps_hat: config.eps / 6.0,
            residual_mode: ResidualMode::Absolute,
            max_total_iters: remaining_iters,
            time_limit_s: remaining_s,
            ..config.inner.clone()
        };
        let out = solve_sfista(&sub, &inner, &theta)?;
        counters.merge(&out.counters);
        iters_used += out.total_iters;

        let r = outer_residual(&out.v, delta, &theta, &out.y);
        let r_norm = norm(&r);
        let theta_next = out.xi;
        psi_theta = problem.eval_phi(&theta_next)?.finite().unwrap_or(psi_theta);
        subproblems.push(SubproblemSummary {
            k,
            delta,
            n_lower,
            u_norm: out.abs_residual,
            r_norm,
            inner_cycles: out.cycles,
            inner_iters: out.total_iters,
            inner_status: out.status,
            psi_theta,
        });
        log::debug!("a-reg k = {k}: delta = {delta:e}, |u| = {:e}, |r| = {r_norm:e}", out.abs_residual);

        let done = |status| ARegOutput {
            w: out.y.clone(),
            r: r.clone(),
            theta: theta_next.clone(),
            outer_iters: k,
            subproblems: subproblems.clone(),
            counters,
            status,
            delta_final: delta,
        };
        if out.status != SolveStatus::Converged {
            return Ok(done(out.status));
        }
        if r_norm <= config.eps {
            return Ok(done(SolveStatus::Converged));
        }
        last = Some(done(SolveStatus::IterCap));
        delta *= 0.5;
        n_bar_prev = out.l_final;
        theta = theta_next;
    }
    unreachable!("outer loop only exits by returning")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{ScaledSquaredNorm, ZeroFunction};

    fn zero_smooth(n: usize) -> CompositeProblem {
        CompositeProblem::new(
            Arc::new(crate::problem::ClosureSmooth::new(n, |_z: &[f64]| 0.0, move |_z: &[f64]| vec![0.0; n])),
            Arc::new(ZeroFunction),
        )
    }

    #[test]
    fn pure_regularizer() {
        let sub = build_subproblem(&zero_smooth(2), 2.0, &[0.0, 0.0]).unwrap();
        assert_eq!(sub.f(&[1.0, 1.0]), 2.0);
        assert_eq!(sub.grad(&[1.0, 1.0]), vec![2.0, 2.0]);
        assert_eq!(sub.known_mu_f, Some(2.0));
    }

    #[test]
    fn regularizer_vanishes_at_center() {
        let p = CompositeProblem::new(Arc::new(ScaledSquaredNorm { dim: 2, curvature: 1.0 }), Arc::new(ZeroFunction));
        let c = [0.4, -1.0];
        let sub = build_subproblem(&p, 3.0, &c).unwrap();
        assert_eq!(sub.f(&c), p.f(&c));
        assert_eq!(sub.grad(&c), p.grad(&c));
    }

    #[test]
    fn gradient_sums_analytic_parts() {
        let p = CompositeProblem::new(Arc::new(ScaledSquaredNorm { dim: 3, curvature: 1.0 }), Arc::new(ZeroFunction))
            .with_known_l(1.0);
        let sub = build_subproblem(&p, 1.0, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(sub.grad(&[0.0; 3]), vec![-1.0, 0.0, 0.0]);
        assert_eq!(sub.known_l, Some(2.0));
        assert!(sub.grad_fd_check(&[0.3, -0.7, 1.1], 1e-5) < 1e-8);
    }

    #[test]
    fn regularized_gap_matches_default_formula() {
        let p = CompositeProblem::new(Arc::new(ScaledSquaredNorm { dim: 2, curvature: 2.0 }), Arc::new(ZeroFunction));
        let sub = build_subproblem(&p, 0.5, &[1.0, 2.0]).unwrap();
        let (x, y) = ([0.3, -0.1], [1.4, 0.6]);
        let s = sub.smooth();
        let gap = s.linearization_gap(&y, s.value(&y), &x, s.value(&x), &s.gradient(&x));
        let direct = s.value(&y) - s.value(&x) - crate::linalg::dot(&s.gradient(&x), &crate::linalg::sub(&y, &x));
        assert!((gap - direct).abs() < 1e-12);
    }

    #[test]
    fn outer_residual_examples() {
        assert_eq!(outer_residual(&[0.0, 0.0], 3.0, &[1.0, 2.0], &[1.0, 2.0]), vec![0.0, 0.0]);
        assert_eq!(outer_residual(&[1.0, 0.0], 2.0, &[0.0, 1.0], &[0.0, 0.0]), vec![1.0, 2.0]);
    }

    #[test]
    fn quadratic_converges_with_halving_deltas() {
        let p = CompositeProblem::new(Arc::new(ScaledSquaredNorm { dim: 3, curvature: 1.0 }), Arc::new(ZeroFunction));
        let cfg = ARegConfig { eps: 1e-8, ..ARegConfig::default() };
        let out = solve_areg(&p, &cfg, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(out.status, SolveStatus::Converged);
        assert!(norm(&out.r) <= 1e-8);
        assert_eq!(out.subproblems.len() as u32, out.outer_iters);
        for w in out.subproblems.windows(2) {
            assert_eq!(w[1].delta, w[0].delta / 2.0);
        }
    }

    #[test]
    fn infinite_tolerance_is_trivial() {
        let p = CompositeProblem::new(Arc::new(ScaledSquaredNorm { dim: 2, curvature: 1.0 }), Arc::new(ZeroFunction));
        let cfg = ARegConfig { eps: f64::INFINITY, ..ARegConfig::default() };
        let out = solve_areg(&p, &cfg, &[1.0, 1.0]).unwrap();
        assert_eq!((out.status, out.outer_iters), (SolveStatus::Converged, 1));
    }

    #[test]
    fn config_rejects_small_b() {
        assert!(ARegConfig { b_mult: 0.5, ..ARegConfig::default() }.validate().is_err());
    }
}
