//! Choosing `(τ₁, τ₂)` so that `τ₁H₁ + τ₂H₂` has prescribed extreme
//! eigenvalues.
//!
//! With `Ĥᵢ = Hᵢ/λ_max(Hᵢ)` and `H(t) = tĤ₁ + (1−t)Ĥ₂`, the inverse condition
//! number `ρ(t) = λ_min/λ_max` is zero (or small) at the ends and peaks in
//! between. We locate the peak on a grid, bisect for the target ratio on the
//! branch that brackets it, and finally scale so `λ_max = L̄`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const GRID: usize = 64;
const BISECTIONS: usize = 100;
const RATIO_RTOL: f64 = 1e-9;
/// Accepted relative error on both extreme eigenvalues.
pub const CALIBRATION_RTOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub tau1: f64,
    pub tau2: f64,
    /// Measured on the final matrix.
    pub lambda_max: f64,
    pub lambda_min: f64,
}

/// `(λ_min, λ_max)` of a symmetric matrix.
pub fn symmetric_extreme_eigenvalues(h: &DenseMatrix) -> (f64, f64) {
    let n = h.rows();
    let m = DMatrix::from_row_slice(n, n, h.as_slice());
    let ev = m.symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

struct Mix {
    h1: DMatrix<f64>,
    h2: DMatrix<f64>,
}

impl Mix {
    fn at(&self, t: f64) -> DMatrix<f64> {
        &self.h1 * t + &self.h2 * (1.0 - t)
    }

    fn extremes(&self, t: f64) -> (f64, f64) {
        let ev = self.at(t).symmetric_eigenvalues();
        let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    fn ratio(&self, t: f64) -> f64 {
        let (lo, hi) = self.extremes(t);
        lo.max(0.0) / hi
    }
}

fn normalized(h: &DenseMatrix) -> Result<(DMatrix<f64>, f64)> {
    let n = h.rows();
    let m = DMatrix::from_row_slice(n, n, h.as_slice());
    let top = m.clone().symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Err(Error::Infeasible("curvature term has no positive eigenvalue".into()));
    }
    Ok((m / top, top))
}

// ρ(lo) and ρ(hi) straddle the target; `rising` says which side is below
fn bisect(mix: &Mix, target: f64, mut lo: f64, mut hi: f64, rising: bool) -> f64 {
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let r = mix.ratio(mid);
        if ((r - target) / target).abs() <= RATIO_RTOL {
            return mid;
        }
        if (r < target) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Calibrate `τ₁H₁ + τ₂H₂` to `λ_min = mu_target` and `λ_max = l_target`.
/// Both `Hᵢ` must be symmetric positive semidefinite and nonzero.
pub fn calibrate_curvature(h1: &DenseMatrix, h2: &DenseMatrix, mu_target: f64, l_target: f64) -> Result<Calibration> {
    if h1.rows() != h1.cols() || h2.rows() != h2.cols() || h1.rows() != h2.rows() {
        return Err(Error::InvalidArgument("calibration needs two square matrices of equal size".into()));
    }
    if !(mu_target > 0.0 && mu_target <= l_target && l_target.is_finite()) {
        return Err(Error::InvalidArgument(format!("need 0 < mu ≤ L, got ({mu_target}, {l_target})")));
    }
    let (n1, s1) = normalized(h1)?;
    let (n2, s2) = normalized(h2)?;
    let mix = Mix { h1: n1, h2: n2 };
    let target = mu_target / l_target;

    let grid: Vec<f64> = (0..=GRID).map(|k| k as f64 / GRID as f64).collect();
    let rho: Vec<f64> = grid.iter().map(|&t| mix.ratio(t)).collect();
    let peak = (0..=GRID).max_by(|&a, &b| rho[a].total_cmp(&rho[b])).unwrap_or(0);
    if rho[peak] < target {
        return Err(Error::Infeasible(format!(
            "target ratio {target:e} exceeds the best achievable {:e}",
            rho[peak]
        )));
    }

    let t = if (rho[peak] - target).abs() <= RATIO_RTOL * target {
        grid[peak]
    } else if let Some(k) = (1..=peak).find(|&k| rho[k] >= target && rho[k - 1] < target) {
        bisect(&mix, target, grid[k - 1], grid[k], true)
    } else if let Some(k) = (peak..GRID).find(|&k| rho[k] >= target && rho[k + 1] < target) {
        bisect(&mix, target, grid[k], grid[k + 1], false)
    } else {
        return Err(Error::Infeasible(format!("target ratio {target:e} is not bracketed on [0,1]")));
    };

    let (_, top) = mix.extremes(t);
    let scale = l_target / top;
    let tau1 = scale * t / s1;
    let tau2 = scale * (1.0 - t) / s2;
    let h = h1.lin_comb(tau1, h2, tau2)?;
    let (lambda_min, lambda_max) = symmetric_extreme_eigenvalues(&h);
    let ok = |got: f64, want: f64| ((got - want) / want).abs() <= CALIBRATION_RTOL;
    if !ok(lambda_max, l_target) || !ok(lambda_min, mu_target) {
        return Err(Error::Infeasible(format!(
            "calibrated eigenvalues ({lambda_min:e}, {lambda_max:e}) miss targets ({mu_target:e}, {l_target:e})"
        )));
    }
    Ok(Calibration { tau1, tau2, lambda_max, lambda_min })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_pair_hits_targets() {
        // H(t) = diag(t + (1−t)·0.5, (1−t)) has ρ peaking in the interior
        let h1 = DenseMatrix::diag(&[1.0, 0.0]);
        let h2 = DenseMatrix::diag(&[0.5, 1.0]);
        let cal = calibrate_curvature(&h1, &h2, 0.1, 10.0).unwrap();
        assert!((cal.lambda_max - 10.0).abs() < 1e-6);
        assert!((cal.lambda_min - 0.1).abs() < 1e-6);
        assert!(cal.tau1 > 0.0 && cal.tau2 > 0.0);
    }

    #[test]
    fn unreachable_ratio_is_infeasible() {
        let h1 = DenseMatrix::diag(&[1.0, 0.0]);
        let h2 = DenseMatrix::diag(&[1.0, 0.0]);
        assert!(matches!(calibrate_curvature(&h1, &h2, 0.1, 1.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn extreme_eigenvalues_of_diagonal() {
        assert_eq!(symmetric_extreme_eigenvalues(&DenseMatrix::diag(&[3.0, -1.0, 2.0])), (-1.0, 3.0));
    }
}
