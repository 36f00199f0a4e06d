//! Brute-force oracles and builders shared by the integration suites.
#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rpfista::linalg::{dist_sq, DenseMatrix};
use rpfista::problems::{seeded_rng, QuadraticSmooth};
use rpfista::{CompositeProblem, ProjectionSpec};

/// Closest point among `candidates`, ignoring `None`s.
fn closest(v: &[f64], candidates: impl Iterator<Item = Option<Vec<f64>>>) -> Vec<f64> {
    candidates
        .flatten()
        .min_by(|a, b| dist_sq(a, v).total_cmp(&dist_sq(b, v)))
        .expect("a nonempty feasible set has at least one KKT candidate")
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << n).map(move |mask| (0..n).map(|i| mask >> i & 1 == 1).collect())
}

/// Projection onto the unit simplex by enumerating every zero pattern.
pub fn brute_simplex(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    closest(
        v,
        subsets(n).map(|free| {
            let k = free.iter().filter(|&&f| f).count();
            if k == 0 {
                return None;
            }
            let shift = (v.iter().zip(&free).filter(|(_, &f)| f).map(|(x, _)| x).sum::<f64>() - 1.0) / k as f64;
            let z: Vec<f64> = v.iter().zip(&free).map(|(x, &f)| if f { x - shift } else { 0.0 }).collect();
            z.iter().all(|&x| x >= -1e-12).then_some(z)
        }),
    )
}

/// Projection onto `{‖z‖₁ ≤ c}`: `v` itself when inside, otherwise the
/// closest boundary candidate over every support with the signs of `v`.
pub fn brute_l1_ball(v: &[f64], c: f64) -> Vec<f64> {
    if v.iter().map(|x| x.abs()).sum::<f64>() <= c {
        return v.to_vec();
    }
    let n = v.len();
    closest(
        v,
        subsets(n).map(|free| {
            let k = free.iter().filter(|&&f| f).count();
            if k == 0 {
                return None;
            }
            let sgn: Vec<f64> = v.iter().map(|x| if *x >= 0.0 { 1.0 } else { -1.0 }).collect();
            let excess = (0..n).filter(|&i| free[i]).map(|i| sgn[i] * v[i]).sum::<f64>() - c;
            let shift = excess / k as f64;
            let z: Vec<f64> = (0..n).map(|i| if free[i] { v[i] - sgn[i] * shift } else { 0.0 }).collect();
            (0..n).all(|i| sgn[i] * z[i] >= -1e-12).then_some(z)
        }),
    )
}

/// Projection onto `{aᵀz = b, −r ≤ zᵢ ≤ r}` by enumerating each coordinate
/// as free, at the lower bound or at the upper bound.
pub fn brute_box_hyperplane(v: &[f64], a: &[f64], b: f64, r: f64) -> Vec<f64> {
    let n = v.len();
    let total = 3usize.pow(n as u32);
    closest(
        v,
        (0..total).map(|code| {
            let mut state = Vec::with_capacity(n);
            let mut c = code;
            for _ in 0..n {
                state.push(c % 3);
                c /= 3;
            }
            let mut z = vec![0.0; n];
            let mut rest = b;
            let mut a_sq = 0.0;
            let mut a_v = 0.0;
            for i in 0..n {
                match state[i] {
                    0 => {
                        a_sq += a[i] * a[i];
                        a_v += a[i] * v[i];
                    }
                    1 => z[i] = -r,
                    _ => z[i] = r,
                }
                if state[i] != 0 {
                    rest -= a[i] * z[i];
                }
            }
            if a_sq == 0.0 {
                return (rest.abs() <= 1e-9).then_some(z);
            }
            let t = (a_v - rest) / a_sq;
            for i in 0..n {
                if state[i] == 0 {
                    z[i] = v[i] - t * a[i];
                }
            }
            z.iter().all(|x| x.abs() <= r + 1e-12).then_some(z)
        }),
    )
}

pub fn random_vec(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

/// Uniform point of the unit simplex.
pub fn random_simplex_point(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// A feasible box-hyperplane instance `(a, b, r)` of dimension `n`.
pub fn random_box_hyperplane(rng: &mut impl Rng, n: usize) -> (Vec<f64>, f64, f64) {
    let r = rng.gen_range(0.5..3.0);
    let a: Vec<f64> = (0..n)
        .map(|_| {
            let m = rng.gen_range(0.2..2.0);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect();
    let w = random_vec(rng, n, r);
    let b = a.iter().zip(&w).map(|(x, y)| x * y).sum();
    (a, b, r)
}

/// Feasible point of a box-hyperplane set: project a box draw.
pub fn random_box_hyperplane_point(rng: &mut impl Rng, spec: &ProjectionSpec, n: usize, r: f64) -> Vec<f64> {
    spec.project(&random_vec(rng, n, r)).unwrap()
}

/// Merely convex box-constrained QP: `H = BᵀB` with `B` of size `rank×n`.
pub fn rank_deficient_box_qp(n: usize, rank: usize, seed: u64) -> CompositeProblem {
    let mut rng = seeded_rng(seed);
    let b = DenseMatrix::from_fn(rank, n, |_, _| rng.gen_range(-1.0..1.0));
    let h = b.gram();
    let c = random_vec(&mut rng, n, 1.0);
    let spec = ProjectionSpec::boxed(vec![-1.0; n], vec![1.0; n]).unwrap();
    CompositeProblem::new(Arc::new(QuadraticSmooth { h, c, constant: 0.0 }), Arc::new(spec))
}
