//! Exact Euclidean projections used as prox operators of indicator functions.
//!
//! The prox of an indicator is the projection onto its set, so the step
//! argument is ignored for every constrained kind.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm, norm1};
use crate::problem::{ExtendedReal, ProxOperator};

/// Absolute slack used when deciding membership of a point in a set.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Default stopping tolerance of the multiplier bisection.
pub const DEFAULT_BISECTION_TOL: f64 = 1e-12;

const MAX_BRACKET_DOUBLINGS: usize = 1100;
const MAX_BISECTIONS: usize = 400;

/// The constraint set behind `h = δ_C`, or `Free` for `h ≡ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProjectionSpec {
    Free,
    Simplex,
    L1Ball { radius: f64 },
    /// `{z : aᵀz = b, −r ≤ z_i ≤ r}`
    BoxHyperplane { a: Vec<f64>, b: f64, r: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl ProjectionSpec {
    pub fn l1_ball(radius: f64) -> Result<Self> {
        let s = ProjectionSpec::L1Ball { radius };
        s.validate()?;
        Ok(s)
    }

    pub fn box_hyperplane(a: Vec<f64>, b: f64, r: f64) -> Result<Self> {
        let s = ProjectionSpec::BoxHyperplane { a, b, r };
        s.validate()?;
        Ok(s)
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let s = ProjectionSpec::Box { lo, hi };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProjectionSpec::Free | ProjectionSpec::Simplex => Ok(()),
            ProjectionSpec::L1Ball { radius } => {
                if radius.is_finite() && *radius > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!("l1-ball radius must be positive, got {radius}")))
                }
            }
            ProjectionSpec::BoxHyperplane { a, b, r } => {
                if !(r.is_finite() && *r > 0.0) {
                    return Err(Error::InvalidArgument(format!("box half-width must be positive, got {r}")));
                }
                if a.is_empty() || a.iter().all(|&ai| ai == 0.0) {
                    return Err(Error::InvalidArgument("hyperplane normal must be nonzero".into()));
                }
                // aᵀz ranges over [−r‖a‖₁, r‖a‖₁] on the box
                let reach = r * norm1(a);
                let slack = FEASIBILITY_TOL * (1.0 + b.abs());
                if b.abs() > reach + slack {
                    return Err(Error::Infeasible(format!(
                        "|b| = {} exceeds r·‖a‖₁ = {reach}",
                        b.abs()
                    )));
                }
                Ok(())
            }
            ProjectionSpec::Box { lo, hi } => {
                check_dim(lo.len(), hi.len())?;
                if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                    return Err(Error::Infeasible("box has lo > hi".into()));
                }
                Ok(())
            }
        }
    }

    /// Membership test with [`FEASIBILITY_TOL`] slack.
    pub fn contains(&self, z: &[f64]) -> bool {
        let tol = FEASIBILITY_TOL;
        match self {
            ProjectionSpec::Free => true,
            ProjectionSpec::Simplex => {
                let sum: f64 = z.iter().sum();
                z.iter().all(|&v| v >= -tol) && (sum - 1.0).abs() <= tol * (1.0 + z.len() as f64).sqrt()
            }
            ProjectionSpec::L1Ball { radius } => norm1(z) <= radius * (1.0 + tol),
            ProjectionSpec::BoxHyperplane { a, b, r } => {
                if a.len() != z.len() {
                    return false;
                }
                let in_box = z.iter().all(|v| v.abs() <= r * (1.0 + tol));
                let scale = 1.0 + b.abs() + norm(a) * r;
                in_box && (dot(a, z) - b).abs() <= 10.0 * tol * scale
            }
            ProjectionSpec::Box { lo, hi } => {
                lo.len() == z.len()
                    && z.iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(v, (l, h))| *v >= l - tol * (1.0 + l.abs()) && *v <= h + tol * (1.0 + h.abs()))
            }
        }
    }

    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            ProjectionSpec::Free => Ok(v.to_vec()),
            ProjectionSpec::Simplex => project_simplex(v),
            ProjectionSpec::L1Ball { radius } => project_l1_ball(v, *radius),
            ProjectionSpec::BoxHyperplane { a, b, r } => {
                project_box_hyperplane(v, a, *b, *r, DEFAULT_BISECTION_TOL)
            }
            ProjectionSpec::Box { lo, hi } => {
                check_dim(lo.len(), v.len())?;
                Ok(v.iter().zip(lo.iter().zip(hi)).map(|(x, (l, h))| x.clamp(*l, *h)).collect())
            }
        }
    }
}

impl ProxOperator for ProjectionSpec {
    fn value(&self, z: &[f64]) -> ExtendedReal {
        if self.contains(z) {
            ExtendedReal::Finite(0.0)
        } else {
            ExtendedReal::PosInfinity
        }
    }

    fn prox(&self, point: &[f64], step: f64) -> Result<Vec<f64>> {
        prox_of(self, point, step)
    }
}

/// Prox of the spec's `h` at `v` with step `λ`.
pub fn prox_of(spec: &ProjectionSpec, v: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("prox step must be positive, got {lambda}")));
    }
    spec.project(v)
}

/// Projection onto the probability simplex by sort-and-threshold.
pub fn project_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::InvalidArgument("cannot project an empty vector".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite entry in projection input".into()));
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    // largest prefix k whose threshold keeps u_k strictly positive
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - 1.0) / (k as f64 + 1.0);
        if uk - t > 0.0 {
            theta = t;
        }
    }
    Ok(v.iter().map(|x| (x - theta).max(0.0)).collect())
}

/// Projection onto `{z : ‖z‖₁ ≤ radius}` via the simplex on `|v|`.
pub fn project_l1_ball(v: &[f64], radius: f64) -> Result<Vec<f64>> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("l1-ball radius must be positive, got {radius}")));
    }
    if norm1(v) <= radius {
        return Ok(v.to_vec());
    }
    let scaled: Vec<f64> = v.iter().map(|x| x.abs() / radius).collect();
    let w = project_simplex(&scaled)?;
    Ok(v.iter().zip(w).map(|(x, wi)| (radius * wi).copysign(*x)).collect())
}

/// Projection onto `{z : aᵀz = b, −r ≤ z_i ≤ r}`.
///
/// The solution is `clip(v − λ*a, −r, r)` where `λ*` is a root of the
/// nonincreasing piecewise-linear `g(λ) = aᵀclip(v − λa) − b`. The root is
/// bracketed by doubling from `[−1, 1]`, bisected to `tol·(1+|λ|)`, then
/// polished by solving the linear piece that contains it.
pub fn project_box_hyperplane(v: &[f64], a: &[f64], b: f64, r: f64, tol: f64) -> Result<Vec<f64>> {
    check_dim(a.len(), v.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let clip = |x: f64| x.clamp(-r, r);
    let g = |lam: f64| -> f64 {
        let mut s = 0.0;
        for (vi, ai) in v.iter().zip(a) {
            s += ai * clip(vi - lam * ai);
        }
        s - b
    };

    let mut lo = -1.0f64;
    let mut hi = 1.0f64;
    let mut doublings = 0;
    while g(lo) < 0.0 {
        lo *= 2.0;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS || !lo.is_finite() {
            return Err(Error::Internal("multiplier bracket failed below".into()));
        }
    }
    while g(hi) > 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS || !hi.is_finite() {
            return Err(Error::Internal("multiplier bracket failed above".into()));
        }
    }

    let mut iters = 0;
    while hi - lo > tol * (1.0 + 0.5 * (lo + hi).abs()) && iters < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm > 0.0 {
            lo = mid;
        } else if gm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
        }
        iters += 1;
    }
    let mid = 0.5 * (lo + hi);

    let lam = polish_multiplier(v, a, b, r, mid, lo, hi).unwrap_or(mid);
    Ok(v.iter().zip(a).map(|(vi, ai)| clip(vi - lam * ai)).collect())
}

/// Solves `g(λ) = 0` exactly on the linear piece active at `at`, accepting
/// the result only if it stays in `[lo, hi]` and on the same piece.
fn polish_multiplier(v: &[f64], a: &[f64], b: f64, r: f64, at: f64, lo: f64, hi: f64) -> Option<f64> {
    let mut num = -b;
    let mut den = 0.0;
    let mut state = Vec::with_capacity(v.len());
    for (vi, ai) in v.iter().zip(a) {
        let t = vi - at * ai;
        if t >= r {
            num += ai * r;
            state.push(1i8);
        } else if t <= -r {
            num -= ai * r;
            state.push(-1);
        } else {
            num += ai * vi;
            den += ai * ai;
            state.push(0);
        }
    }
    if den <= 0.0 {
        return None;
    }
    let lam = num / den;
    if !(lam >= lo && lam <= hi) {
        return None;
    }
    let consistent = v.iter().zip(a).zip(&state).all(|((vi, ai), s)| {
        let t = vi - lam * ai;
        match s {
            1 => t >= r,
            -1 => t <= -r,
            _ => t > -r && t < r,
        }
    });
    consistent.then_some(lam)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn simplex_examples() {
        assert_eq!(project_simplex(&[0.3, 0.3, 0.4]).unwrap(), vec![0.3, 0.3, 0.4]);
        assert_eq!(project_simplex(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(project_simplex(&[2.0, 0.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn simplex_rejects_empty() {
        assert!(matches!(project_simplex(&[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn simplex_ties_split_evenly() {
        let p = project_simplex(&[5.0, 5.0, -1.0]).unwrap();
        assert!(close(&p, &[0.5, 0.5, 0.0], 1e-15));
    }

    #[test]
    fn l1_examples() {
        assert_eq!(project_l1_ball(&[0.2, -0.3], 1.0).unwrap(), vec![0.2, -0.3]);
        assert!(close(&project_l1_ball(&[3.0, 0.0], 1.0).unwrap(), &[1.0, 0.0], 1e-15));
        assert!(close(&project_l1_ball(&[2.0, 2.0], 2.0).unwrap(), &[1.0, 1.0], 1e-15));
        let p = project_l1_ball(&[-4.0, 1.0], 1.0).unwrap();
        assert!(close(&p, &[-1.0, 0.0], 1e-15));
    }

    #[test]
    fn l1_rejects_nonpositive_radius() {
        assert!(project_l1_ball(&[1.0], 0.0).is_err());
        assert!(project_l1_ball(&[1.0], -2.0).is_err());
        assert!(ProjectionSpec::l1_ball(0.0).is_err());
    }

    #[test]
    fn box_hyperplane_examples() {
        let a = [1.0, 1.0];
        assert_eq!(project_box_hyperplane(&[1.0, -1.0], &a, 0.0, 5.0, 1e-12).unwrap(), vec![1.0, -1.0]);
        let p = project_box_hyperplane(&[2.0, 0.0], &a, 0.0, 5.0, 1e-12).unwrap();
        assert!(close(&p, &[1.0, -1.0], 1e-14));
        let p = project_box_hyperplane(&[10.0, 10.0], &a, 0.0, 5.0, 1e-12).unwrap();
        assert!(close(&p, &[0.0, 0.0], 1e-14));
    }

    #[test]
    fn box_hyperplane_residual_and_bounds() {
        let a = [1.0, 1.0, 1.0, -1.0];
        let v = [7.0, -3.0, 0.25, 9.0];
        let z = project_box_hyperplane(&v, &a, 0.5, 5.0, 1e-12).unwrap();
        assert!(z.iter().all(|x| x.abs() <= 5.0));
        assert!((dot(&a, &z) - 0.5).abs() <= 1e-12 * (1.0 + 0.5 + norm(&a) * 5.0));
    }

    #[test]
    fn box_hyperplane_construction_checks() {
        assert!(matches!(
            ProjectionSpec::box_hyperplane(vec![1.0, 1.0], 11.0, 5.0),
            Err(Error::Infeasible(_))
        ));
        assert!(ProjectionSpec::box_hyperplane(vec![0.0, 0.0], 0.0, 5.0).is_err());
        assert!(ProjectionSpec::box_hyperplane(vec![1.0, 1.0, 1.0, -1.0], 0.0, 5.0).is_ok());
    }

    #[test]
    fn prox_of_examples() {
        assert_eq!(prox_of(&ProjectionSpec::Free, &[5.0, -5.0], 0.1).unwrap(), vec![5.0, -5.0]);
        assert_eq!(prox_of(&ProjectionSpec::Simplex, &[2.0, 0.0], 7.0).unwrap(), vec![1.0, 0.0]);
        let p = prox_of(&ProjectionSpec::L1Ball { radius: 1.0 }, &[3.0, 0.0], 0.5).unwrap();
        assert!(close(&p, &[1.0, 0.0], 1e-15));
        assert!(prox_of(&ProjectionSpec::Free, &[1.0], 0.0).is_err());
    }

    #[test]
    fn box_is_clipping() {
        let s = ProjectionSpec::boxed(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(s.project(&[3.0, -1.0]).unwrap(), vec![1.0, 0.0]);
        assert!(ProjectionSpec::boxed(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn membership() {
        assert!(ProjectionSpec::Simplex.contains(&[0.5, 0.5]));
        assert!(!ProjectionSpec::Simplex.contains(&[0.5, 0.6]));
        assert!(!ProjectionSpec::Simplex.contains(&[1.1, -0.1]));
        assert_eq!(ProjectionSpec::Simplex.value(&[2.0, 0.0]), ExtendedReal::PosInfinity);
    }
}
