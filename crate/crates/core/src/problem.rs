//! Composite problems `φ = f + h` with `f` smooth convex and `h` prox-friendly.
//!
//! A [`CompositeProblem`] is immutable once built and can be shared between
//! concurrent solves. Oracle counters live in the solve loop, not here.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::linalg::{dot, sub};

/// A value in `ℝ ∪ {+∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PosInfinity => None,
        }
    }

    /// `+∞` maps to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn add_finite(self, x: f64) -> ExtendedReal {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(v + x),
            ExtendedReal::PosInfinity => ExtendedReal::PosInfinity,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInfinity => write!(f, "+inf"),
        }
    }
}

/// Smooth convex part of a composite objective.
pub trait SmoothFunction: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, z: &[f64]) -> f64;

    fn gradient(&self, z: &[f64]) -> Vec<f64>;

    /// `(f(z), ∇f(z))`; override when the two share work.
    fn value_and_gradient(&self, z: &[f64]) -> (f64, Vec<f64>) {
        (self.value(z), self.gradient(z))
    }

    /// True when `f` is quadratic. Implementations must then override
    /// `linearization_gap` with a formula that ignores the supplied values, so
    /// solvers may skip evaluating `f` at the linearization point and compare
    /// function values through `quadratic_difference`.
    fn is_quadratic(&self) -> bool {
        false
    }

    /// `f(y) − ℓ_f(y; x)` where `ℓ_f(y; x) = f(x) + ⟨∇f(x), y − x⟩`.
    ///
    /// Quadratic implementations override this with a cancellation-free
    /// formula; the default subtracts the supplied values.
    fn linearization_gap(&self, y: &[f64], f_y: f64, x: &[f64], f_x: f64, grad_x: &[f64]) -> f64 {
        f_y - f_x - dot(grad_x, &sub(y, x))
    }
}

/// `f(y) − f(x) = ⟨y − x, (∇f(y) + ∇f(x))/2⟩`, exact for quadratic `f` and
/// free of the cancellation in `f(y) − f(x)` when the two are close.
pub fn quadratic_difference(y: &[f64], grad_y: &[f64], x: &[f64], grad_x: &[f64]) -> f64 {
    y.iter().zip(x).zip(grad_y.iter().zip(grad_x)).map(|((a, b), (g, h))| (a - b) * 0.5 * (g + h)).sum()
}

/// Closed convex part of a composite objective, accessed through its prox.
pub trait ProxOperator: Send + Sync {
    fn value(&self, z: &[f64]) -> ExtendedReal;

    /// `argmin_u { h(u) + ‖u − point‖² / (2·step) }`
    fn prox(&self, point: &[f64], step: f64) -> Result<Vec<f64>>;
}

/// Smooth function built from closures; handy for tests and one-off problems.
pub struct ClosureSmooth<F, G> {
    dim: usize,
    value: F,
    gradient: G,
}

impl<F, G> ClosureSmooth<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim: usize, value: F, gradient: G) -> Self {
        ClosureSmooth { dim, value, gradient }
    }
}

impl<F, G> SmoothFunction for ClosureSmooth<F, G>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, z: &[f64]) -> f64 {
        (self.value)(z)
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        (self.gradient)(z)
    }
}

/// `f(z) = ½‖z‖²·c`, the simplest strongly convex test function.
#[derive(Debug, Clone)]
pub struct ScaledSquaredNorm {
    pub dim: usize,
    pub curvature: f64,
}

impl SmoothFunction for ScaledSquaredNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, z: &[f64]) -> f64 {
        0.5 * self.curvature * dot(z, z)
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        z.iter().map(|v| self.curvature * v).collect()
    }

    fn linearization_gap(&self, y: &[f64], _f_y: f64, x: &[f64], _f_x: f64, _g: &[f64]) -> f64 {
        let d = sub(y, x);
        0.5 * self.curvature * dot(&d, &d)
    }

    fn is_quadratic(&self) -> bool {
        true
    }
}

/// `h ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroFunction;

impl ProxOperator for ZeroFunction {
    fn value(&self, _z: &[f64]) -> ExtendedReal {
        ExtendedReal::Finite(0.0)
    }

    fn prox(&self, point: &[f64], _step: f64) -> Result<Vec<f64>> {
        Ok(point.to_vec())
    }
}

#[derive(Clone)]
pub struct CompositeProblem {
    smooth: Arc<dyn SmoothFunction>,
    nonsmooth: Arc<dyn ProxOperator>,
    /// Global Lipschitz constant of `∇f`, when known.
    pub known_l: Option<f64>,
    /// Certified lower bound on the strong convexity of `f`, when known.
    pub known_mu_f: Option<f64>,
}

impl fmt::Debug for CompositeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompositeProblem")
            .field("dim", &self.dim())
            .field("known_l", &self.known_l)
            .field("known_mu_f", &self.known_mu_f)
            .finish()
    }
}

impl CompositeProblem {
    pub fn new(smooth: Arc<dyn SmoothFunction>, nonsmooth: Arc<dyn ProxOperator>) -> Self {
        CompositeProblem { smooth, nonsmooth, known_l: None, known_mu_f: None }
    }

    pub fn with_known_l(mut self, l: f64) -> Self {
        self.known_l = Some(l);
        self
    }

    pub fn with_known_mu_f(mut self, mu: f64) -> Self {
        self.known_mu_f = Some(mu);
        self
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    pub fn smooth(&self) -> &Arc<dyn SmoothFunction> {
        &self.smooth
    }

    pub fn nonsmooth(&self) -> &Arc<dyn ProxOperator> {
        &self.nonsmooth
    }

    pub fn f(&self, z: &[f64]) -> f64 {
        self.smooth.value(z)
    }

    pub fn grad(&self, z: &[f64]) -> Vec<f64> {
        self.smooth.gradient(z)
    }

    pub fn h(&self, z: &[f64]) -> ExtendedReal {
        self.nonsmooth.value(z)
    }

    pub fn prox(&self, point: &[f64], step: f64) -> Result<Vec<f64>> {
        self.nonsmooth.prox(point, step)
    }

    /// `φ(z) = f(z) + h(z)`; `+∞` exactly when `h(z) = +∞`.
    pub fn eval_phi(&self, z: &[f64]) -> Result<ExtendedReal> {
        check_dim(self.dim(), z.len())?;
        Ok(match self.h(z) {
            ExtendedReal::PosInfinity => ExtendedReal::PosInfinity,
            ExtendedReal::Finite(hv) => ExtendedReal::Finite(self.f(z) + hv),
        })
    }

    /// Largest coordinate discrepancy between a central finite difference of
    /// `f` and the analytic gradient.
    pub fn grad_fd_check(&self, z: &[f64], step: f64) -> f64 {
        let g = self.grad(z);
        let mut zp = z.to_vec();
        let mut worst = 0.0f64;
        for i in 0..z.len() {
            let orig = zp[i];
            zp[i] = orig + step;
            let fp = self.f(&zp);
            zp[i] = orig - step;
            let fm = self.f(&zp);
            zp[i] = orig;
            let fd = (fp - fm) / (2.0 * step);
            worst = worst.max((fd - g[i]).abs());
        }
        worst
    }
}

/// Oracle call tallies for one solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCounters {
    pub grad_evals: u64,
    pub f_evals: u64,
    /// Prox (resolvent) evaluations, including line-search repeats.
    pub prox_evals: u64,
}

impl OracleCounters {
    pub fn merge(&mut self, other: &OracleCounters) {
        self.grad_evals += other.grad_evals;
        self.f_evals += other.f_evals;
        self.prox_evals += other.prox_evals;
    }
}

/// Thin wrapper that counts every oracle call routed through it.
pub(crate) struct CountingOracle<'a> {
    pub problem: &'a CompositeProblem,
    pub counters: OracleCounters,
}

impl<'a> CountingOracle<'a> {
    pub fn new(problem: &'a CompositeProblem) -> Self {
        CountingOracle { problem, counters: OracleCounters::default() }
    }

    pub fn f(&mut self, z: &[f64]) -> f64 {
        self.counters.f_evals += 1;
        self.problem.f(z)
    }

    pub fn grad(&mut self, z: &[f64]) -> Vec<f64> {
        self.counters.grad_evals += 1;
        self.problem.grad(z)
    }

    pub fn f_and_grad(&mut self, z: &[f64]) -> (f64, Vec<f64>) {
        self.counters.f_evals += 1;
        self.counters.grad_evals += 1;
        self.problem.smooth().value_and_gradient(z)
    }

    /// `f(z)` only when the gap formula needs it, NaN otherwise.
    pub fn f_for_gap(&mut self, z: &[f64]) -> f64 {
        if self.problem.smooth().is_quadratic() {
            f64::NAN
        } else {
            self.f(z)
        }
    }

    pub fn prox(&mut self, point: &[f64], step: f64) -> Result<Vec<f64>> {
        self.counters.prox_evals += 1;
        self.problem.prox(point, step)
    }

    /// `h` at a prox output; a non-finite value means the prox oracle broke
    /// its contract.
    pub fn h_at_prox(&self, z: &[f64]) -> Result<f64> {
        self.problem.h(z).finite().ok_or_else(|| {
            crate::Error::Internal("prox output has h = +inf".to_string())
        })
    }
}
