//! Generators and loaders for the four benchmark families: sparse logistic
//! regression, lasso, and dense QPs over the simplex or a box ∩ hyperplane.

mod calibrate;
mod instances;
mod io;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm, norm1, norm_sq, sub, DenseMatrix, LinearOperator};
use crate::problem::{CompositeProblem, SmoothFunction};
use crate::prox_ops::ProjectionSpec;

pub use calibrate::{calibrate_curvature, symmetric_extreme_eigenvalues, Calibration};
pub use instances::{preset, preset_names, APattern, Family, Instance, InstanceSpec, LassoSource, FAMILIES};
pub use io::{load_csv_matrix, load_matrix_market, load_problem_matrix, parse_csv_matrix, parse_matrix_market, LoadedMatrix};

/// Regeneration attempts when curvature calibration fails for a draw.
pub const MAX_CALIBRATION_SEEDS: u64 = 8;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A generated problem together with its start point.
#[derive(Debug, Clone)]
pub struct Generated {
    pub problem: CompositeProblem,
    pub z0: Vec<f64>,
    /// Seed actually used; differs from the requested one when a QP draw had
    /// to be regenerated.
    pub effective_seed: u64,
}

/// Largest eigenvalue of `AᵀA` (so `‖A‖²`) by power iteration with a
/// Rayleigh-quotient stopping test.
pub fn power_method_opnorm_sq(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    apply_adjoint: impl Fn(&[f64]) -> Vec<f64>,
    dim: usize,
    iters: usize,
    tol: f64,
) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    // fixed, well-spread start vector keeps the result reproducible
    let mut rng = seeded_rng(0x5eed);
    let mut x: Vec<f64> = (0..dim).map(|_| 1.0 + 0.1 * rng.gen::<f64>()).collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut lambda = 0.0f64;
    for _ in 0..iters.max(1) {
        let ax = apply(&x);
        let rq = norm_sq(&ax);
        let y = apply_adjoint(&ax);
        let ny = norm(&y);
        if ny == 0.0 || !ny.is_finite() {
            return rq.max(0.0);
        }
        let done = (rq - lambda).abs() <= tol * rq;
        lambda = rq;
        if done {
            break;
        }
        x = y.into_iter().map(|v| v / ny).collect();
    }
    lambda
}

const POWER_ITERS: usize = 5000;
const POWER_TOL: f64 = 1e-12;

/// `½zᵀHz + cᵀz + k` with `H` symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct QuadraticSmooth {
    pub h: DenseMatrix,
    pub c: Vec<f64>,
    pub constant: f64,
}

impl SmoothFunction for QuadraticSmooth {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn value(&self, z: &[f64]) -> f64 {
        0.5 * dot(z, &self.h.matvec(z)) + dot(&self.c, z) + self.constant
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut g = self.h.matvec(z);
        g.iter_mut().zip(&self.c).for_each(|(g, c)| *g += c);
        g
    }

    fn value_and_gradient(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let hz = self.h.matvec(z);
        let f = 0.5 * dot(z, &hz) + dot(&self.c, z) + self.constant;
        let g = hz.iter().zip(&self.c).map(|(h, c)| h + c).collect();
        (f, g)
    }

    fn is_quadratic(&self) -> bool {
        true
    }

    // exact and free of cancellation: ½(y−x)ᵀH(y−x)
    fn linearization_gap(&self, y: &[f64], _f_y: f64, x: &[f64], _f_x: f64, _g: &[f64]) -> f64 {
        let d = sub(y, x);
        0.5 * dot(&d, &self.h.matvec(&d))
    }
}

/// `½‖Az − b‖²`
#[derive(Debug, Clone)]
pub struct LeastSquaresSmooth {
    pub a: LinearOperator,
    pub b: Vec<f64>,
}

impl SmoothFunction for LeastSquaresSmooth {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn value(&self, z: &[f64]) -> f64 {
        0.5 * norm_sq(&sub(&self.a.apply(z), &self.b))
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        self.a.apply_adjoint(&sub(&self.a.apply(z), &self.b))
    }

    fn value_and_gradient(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let r = sub(&self.a.apply(z), &self.b);
        (0.5 * norm_sq(&r), self.a.apply_adjoint(&r))
    }

    fn is_quadratic(&self) -> bool {
        true
    }

    fn linearization_gap(&self, y: &[f64], _f_y: f64, x: &[f64], _f_x: f64, _g: &[f64]) -> f64 {
        0.5 * norm_sq(&self.a.apply(&sub(y, x)))
    }
}

/// `Σᵢ log(1 + exp((Dz)ᵢ))` with `Dᵢⱼ = −bᵢ aᵢⱼ`.
#[derive(Debug, Clone)]
pub struct LogisticSmooth {
    pub d: LinearOperator,
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl SmoothFunction for LogisticSmooth {
    fn dim(&self) -> usize {
        self.d.cols()
    }

    fn value(&self, z: &[f64]) -> f64 {
        self.d.apply(z).into_iter().map(softplus).sum()
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let s: Vec<f64> = self.d.apply(z).into_iter().map(sigmoid).collect();
        self.d.apply_adjoint(&s)
    }

    fn value_and_gradient(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let dz = self.d.apply(z);
        let f = dz.iter().map(|&t| softplus(t)).sum();
        let s: Vec<f64> = dz.into_iter().map(sigmoid).collect();
        (f, self.d.apply_adjoint(&s))
    }
}

/// Random point with `‖z‖₁ ≤ c`.
pub fn random_in_l1_ball(n: usize, c: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mut z: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let target = c * rng.gen::<f64>();
    let s = norm1(&z);
    if s > 0.0 {
        z.iter_mut().for_each(|v| *v *= target / s);
    }
    z
}

fn l1_ball(c: f64) -> Result<Arc<ProjectionSpec>> {
    Ok(Arc::new(ProjectionSpec::l1_ball(c)?))
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {x}")))
    }
}

fn nonempty(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("dimensions must be positive, got {m}x{n}")));
    }
    Ok(())
}

/// Sparse logistic regression over the ℓ1-ball of radius `c`.
///
/// Features are `U[0,1]`; labels are the sign of a random hyperplane through
/// the centre of the unit cube.
pub fn gen_logistic(m: usize, n: usize, c: f64, seed: u64) -> Result<Generated> {
    nonempty(m, n)?;
    positive("C", c)?;
    let mut rng = seeded_rng(seed);
    let w: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut d = DenseMatrix::zeros(m, n);
    for i in 0..m {
        let a: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let margin: f64 = a.iter().zip(&w).map(|(a, w)| (a - 0.5) * w).sum();
        let b = if margin >= 0.0 { 1.0 } else { -1.0 };
        for (j, aj) in a.iter().enumerate() {
            d.set(i, j, -aj * b);
        }
    }
    let z0 = random_in_l1_ball(n, c, &mut rng);
    let d = LinearOperator::dense(d);
    let l = 0.25 * power_method_opnorm_sq(|x| d.apply(x), |y| d.apply_adjoint(y), n, POWER_ITERS, POWER_TOL);
    let problem = CompositeProblem::new(Arc::new(LogisticSmooth { d }), l1_ball(c)?).with_known_l(l);
    Ok(Generated { problem, z0, effective_seed: seed })
}

/// `min ½‖Az − b‖²` over the ℓ1-ball of radius `c`, start point drawn with
/// `seed`.
pub fn gen_lasso(a: LinearOperator, b: Vec<f64>, c: f64, seed: u64) -> Result<Generated> {
    check_dim(a.rows(), b.len())?;
    nonempty(a.rows(), a.cols())?;
    positive("C", c)?;
    let n = a.cols();
    let l = power_method_opnorm_sq(|x| a.apply(x), |y| a.apply_adjoint(y), n, POWER_ITERS, POWER_TOL);
    let mut rng = seeded_rng(seed);
    let z0 = random_in_l1_ball(n, c, &mut rng);
    let problem = CompositeProblem::new(Arc::new(LeastSquaresSmooth { a, b }), l1_ball(c)?).with_known_l(l);
    Ok(Generated { problem, z0, effective_seed: seed })
}

/// Synthetic lasso data: Gaussian `A` scaled by `1/√m`, a sparse signal with
/// `‖x‖₁ = 2c` (so the constraint is active) and small noise.
pub fn gen_lasso_random(m: usize, n: usize, c: f64, seed: u64) -> Result<Generated> {
    nonempty(m, n)?;
    positive("C", c)?;
    let mut rng = seeded_rng(seed);
    let s = 1.0 / (m as f64).sqrt();
    let a = DenseMatrix::from_fn(m, n, |_, _| s * rng.sample::<f64, _>(StandardNormal));
    let k = (n / 20).max(1);
    let mut x = vec![0.0; n];
    for _ in 0..k {
        let j = rng.gen_range(0..n);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        x[j] = sign * rng.gen_range(1.0..2.0);
    }
    let scale = 2.0 * c / norm1(&x);
    x.iter_mut().for_each(|v| *v *= scale);
    let mut b = a.matvec(&x);
    b.iter_mut().for_each(|v| *v += 0.01 * rng.sample::<f64, _>(StandardNormal));
    let g = gen_lasso(LinearOperator::dense(a), b, c, rng.gen())?;
    Ok(Generated { effective_seed: seed, ..g })
}

struct QpData {
    h1: DenseMatrix,
    h2: DenseMatrix,
    ctd: Vec<f64>,
    d_sq: f64,
}

// B n×n and C m×n with U[0,1] entries, D = diag(U[1,α]), d ~ U[0,1]^m
fn qp_data(m: usize, n: usize, alpha: f64, rng: &mut ChaCha8Rng) -> QpData {
    let mut b = DenseMatrix::from_fn(n, n, |_, _| rng.gen::<f64>());
    let diag: Vec<f64> = (0..n).map(|_| if alpha > 1.0 { rng.gen_range(1.0..alpha) } else { 1.0 }).collect();
    b.scale_rows(&diag);
    let c = DenseMatrix::from_fn(m, n, |_, _| rng.gen::<f64>());
    let d: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
    QpData { h1: b.gram(), h2: c.gram(), ctd: c.transpose().matvec(&d), d_sq: norm_sq(&d) }
}

/// The calibrated objective `τ₁/2‖DBz‖² + τ₂/2‖Cz − d‖²` as a quadratic.
fn calibrated_qp(
    m: usize,
    n: usize,
    alpha: f64,
    mu_target: f64,
    l_target: f64,
    seed: u64,
    mut z0: impl FnMut(&mut ChaCha8Rng) -> Vec<f64>,
) -> Result<(QuadraticSmooth, Calibration, Vec<f64>, u64)> {
    nonempty(m, n)?;
    positive("mu_bar", mu_target)?;
    positive("L_bar", l_target)?;
    if mu_target > l_target {
        return Err(Error::InvalidArgument(format!("mu_bar {mu_target} exceeds L_bar {l_target}")));
    }
    if !(alpha >= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be at least 1, got {alpha}")));
    }
    let mut last_err = None;
    for attempt in 0..MAX_CALIBRATION_SEEDS {
        let s = seed.wrapping_add(attempt);
        let mut rng = seeded_rng(s);
        let data = qp_data(m, n, alpha, &mut rng);
        match calibrate_curvature(&data.h1, &data.h2, mu_target, l_target) {
            Ok(cal) => {
                if attempt > 0 {
                    log::warn!("QP calibration succeeded after regenerating with seed {s} (requested {seed})");
                }
                let h = data.h1.lin_comb(cal.tau1, &data.h2, cal.tau2)?;
                let c: Vec<f64> = data.ctd.iter().map(|v| -cal.tau2 * v).collect();
                let quad = QuadraticSmooth { h, c, constant: 0.5 * cal.tau2 * data.d_sq };
                let z = z0(&mut rng);
                return Ok((quad, cal, z, s));
            }
            Err(e) => {
                log::warn!("QP calibration failed for seed {s}: {e}");
                last_err = Some(e);
            }
        }
    }
    Err(last_err.unwrap_or_else(|| Error::Infeasible("calibration failed".into())))
}

/// Dense QP over the unit simplex with `λ_max(∇²f) = L̄` and
/// `λ_min(∇²f) = μ̄` up to 1%.
pub fn gen_qp_simplex(m: usize, n: usize, alpha: f64, mu_bar: f64, l_bar: f64, seed: u64) -> Result<Generated> {
    let (quad, cal, z0, s) = calibrated_qp(m, n, alpha, mu_bar, l_bar, seed, |rng| {
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = x.iter().sum();
        x.into_iter().map(|v| v / total).collect()
    })?;
    let problem = CompositeProblem::new(Arc::new(quad), Arc::new(ProjectionSpec::Simplex))
        .with_known_l(cal.lambda_max)
        .with_known_mu_f(cal.lambda_min);
    Ok(Generated { problem, z0, effective_seed: s })
}

/// Dense QP over `{aᵀz = b, −r ≤ zᵢ ≤ r}`. `D` is drawn from `U[1, α]`; the
/// start point is a `U[−r, r]ⁿ` draw projected onto the feasible set.
#[allow(clippy::too_many_arguments)]
pub fn gen_qp_box(
    m: usize,
    n: usize,
    a_pattern: APattern,
    r: f64,
    b: f64,
    alpha: f64,
    mu_bar: f64,
    l_bar: f64,
    seed: u64,
) -> Result<Generated> {
    positive("r", r)?;
    let a = a_pattern.vector(n);
    let spec = ProjectionSpec::box_hyperplane(a, b, r)?;
    let (quad, cal, raw, s) =
        calibrated_qp(m, n, alpha, mu_bar, l_bar, seed, |rng| (0..n).map(|_| rng.gen_range(-r..=r)).collect())?;
    // a uniform draw from the box almost never satisfies aᵀz = b
    let z0 = spec.project(&raw)?;
    let problem = CompositeProblem::new(Arc::new(quad), Arc::new(spec))
        .with_known_l(cal.lambda_max)
        .with_known_mu_f(cal.lambda_min);
    Ok(Generated { problem, z0, effective_seed: s })
}
