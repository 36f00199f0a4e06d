//! Instance descriptions and named presets.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{gen_lasso, gen_lasso_random, gen_logistic, gen_qp_box, gen_qp_simplex, load_problem_matrix, Generated};
use crate::error::{Error, Result};

pub const FAMILIES: [&str; 4] = ["logistic", "lasso", "qp-simplex", "qp-box"];

/// Which entries of the hyperplane normal `a` are −1 (the rest are +1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum APattern {
    LastOneNegative,
    LastTenNegative,
}

impl APattern {
    pub fn vector(self, n: usize) -> Vec<f64> {
        let k = match self {
            APattern::LastOneNegative => 1,
            APattern::LastTenNegative => 10,
        };
        (0..n).map(|i| if i + k >= n { -1.0 } else { 1.0 }).collect()
    }

    fn tag(self) -> &'static str {
        match self {
            APattern::LastOneNegative => "last1",
            APattern::LastTenNegative => "last10",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LassoSource {
    Random { m: usize, n: usize },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Family {
    Logistic { m: usize, n: usize, c: f64 },
    Lasso { source: LassoSource, c: f64 },
    QpSimplex { m: usize, n: usize, alpha: f64, mu_bar: f64, l_bar: f64 },
    QpBox { m: usize, n: usize, a_pattern: APattern, r: f64, b: f64, alpha: f64, mu_bar: f64, l_bar: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Logistic { .. } => "logistic",
            Family::Lasso { .. } => "lasso",
            Family::QpSimplex { .. } => "qp-simplex",
            Family::QpBox { .. } => "qp-box",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub id: String,
    pub family: Family,
    pub seed: u64,
}

/// A built instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub generated: Generated,
}

impl InstanceSpec {
    /// `(m, n)`; `m = 0` for file-backed lasso before loading.
    pub fn dims(&self) -> (usize, usize) {
        match &self.family {
            Family::Logistic { m, n, .. } | Family::QpSimplex { m, n, .. } | Family::QpBox { m, n, .. } => (*m, *n),
            Family::Lasso { source: LassoSource::Random { m, n }, .. } => (*m, *n),
            Family::Lasso { source: LassoSource::File(_), .. } => (0, 0),
        }
    }

    /// Short, comma-free description of the family parameters.
    pub fn param_label(&self) -> String {
        match &self.family {
            Family::Logistic { c, .. } | Family::Lasso { c, .. } => format!("C={c}"),
            Family::QpSimplex { alpha, mu_bar, l_bar, .. } => format!("mu={mu_bar:e} L={l_bar:e} alpha={alpha}"),
            Family::QpBox { a_pattern, mu_bar, l_bar, .. } => {
                format!("mu={mu_bar:e} L={l_bar:e} a={}", a_pattern.tag())
            }
        }
    }

    pub fn build(&self) -> Result<Instance> {
        let generated = match &self.family {
            Family::Logistic { m, n, c } => gen_logistic(*m, *n, *c, self.seed)?,
            Family::Lasso { source: LassoSource::Random { m, n }, c } => gen_lasso_random(*m, *n, *c, self.seed)?,
            Family::Lasso { source: LassoSource::File(path), c } => {
                let loaded = load_problem_matrix(path)?;
                let rhs = loaded.rhs.unwrap_or_else(|| vec![1.0; loaded.matrix.rows()]);
                gen_lasso(loaded.matrix, rhs, *c, self.seed)?
            }
            Family::QpSimplex { m, n, alpha, mu_bar, l_bar } => {
                gen_qp_simplex(*m, *n, *alpha, *mu_bar, *l_bar, self.seed)?
            }
            Family::QpBox { m, n, a_pattern, r, b, alpha, mu_bar, l_bar } => {
                gen_qp_box(*m, *n, *a_pattern, *r, *b, *alpha, *mu_bar, *l_bar, self.seed)?
            }
        };
        Ok(Instance { spec: self.clone(), generated })
    }
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (m, n) = self.dims();
        write!(f, "{} {} ({m},{n}) {} seed={}", self.id, self.family.name(), self.param_label(), self.seed)
    }
}

const QP_BOX_DESK: [(f64, f64); 6] = [(1e-4, 1e2), (1e-2, 1e4), (1e-3, 1e3), (1e-2, 1e3), (1e-1, 1e4), (1e-1, 1e5)];
const QP_BOX_FULL_1: [(f64, f64); 3] = [(1e-4, 1e2), (1e-2, 1e4), (1e-3, 1e3)];
const QP_BOX_FULL_2: [(f64, f64); 3] = [(1e-2, 1e3), (1e-1, 1e4), (1e-1, 1e5)];
const QP_SIMPLEX_FULL_1: [(f64, f64); 6] = [(1e-8, 1e2), (1e-6, 1e2), (1e-4, 1e3), (1e-6, 1e3), (1e-7, 1e4), (1e-4, 1e6)];
const QP_SIMPLEX_FULL_2: [(f64, f64); 6] = [(1e-4, 1e4), (1e-4, 1e4), (1e-4, 1e4), (1e-4, 1e6), (1e-4, 1e3), (1e-4, 1e4)];
const QP_ALPHA: f64 = 1000.0;

pub fn preset_names(family: &str) -> &'static [&'static str] {
    match family {
        "logistic" => &["smoke", "desk", "full"],
        "lasso" => &["smoke", "desk", "large"],
        "qp-simplex" => &["smoke", "desk", "full-1", "full-2"],
        "qp-box" => &["smoke", "desk", "full-1", "full-2"],
        _ => &[],
    }
}

fn logistic(dims: &[(usize, usize, f64)]) -> Vec<Family> {
    dims.iter().map(|&(m, n, c)| Family::Logistic { m, n, c }).collect()
}

fn lasso(dims: &[(usize, usize, f64)]) -> Vec<Family> {
    dims.iter().map(|&(m, n, c)| Family::Lasso { source: LassoSource::Random { m, n }, c }).collect()
}

fn qp_simplex(m: usize, n: usize, pairs: &[(f64, f64)]) -> Vec<Family> {
    pairs.iter().map(|&(mu_bar, l_bar)| Family::QpSimplex { m, n, alpha: QP_ALPHA, mu_bar, l_bar }).collect()
}

// each curvature pair once with each hyperplane pattern
fn qp_box(m: usize, n: usize, pairs: &[(f64, f64)]) -> Vec<Family> {
    pairs
        .iter()
        .flat_map(|&(mu_bar, l_bar)| {
            [APattern::LastOneNegative, APattern::LastTenNegative].map(|a_pattern| Family::QpBox {
                m,
                n,
                a_pattern,
                r: 5.0,
                b: 0.0,
                alpha: QP_ALPHA,
                mu_bar,
                l_bar,
            })
        })
        .collect()
}

/// Named instance suite. Instance `i` uses seed `seed + i`.
pub fn preset(family: &str, name: &str, seed: u64) -> Result<Vec<InstanceSpec>> {
    let fams = match (family, name) {
        ("logistic", "smoke") => logistic(&[(50, 20, 0.5), (50, 20, 1.0), (50, 20, 2.0), (80, 30, 1.0)]),
        ("logistic", "desk") => logistic(&[(200, 50, 0.5), (200, 50, 1.0), (200, 50, 2.0), (400, 100, 1.0)]),
        ("logistic", "full") => {
            let dims = [(500, 50_000), (1000, 250_000), (300, 500_000), (100, 1_000_000)];
            let rows: Vec<_> = dims.iter().flat_map(|&(m, n)| [0.5, 1.0, 2.0].map(|c| (m, n, c))).collect();
            logistic(&rows)
        }
        ("lasso", "smoke") => lasso(&[(30, 60, 1.0), (30, 60, 5.0), (30, 60, 10.0), (40, 80, 5.0)]),
        ("lasso", "desk") => lasso(&[(100, 200, 1.0), (100, 200, 5.0), (100, 200, 10.0), (200, 400, 5.0)]),
        ("lasso", "large") => lasso(&[(500, 1000, 1.0), (500, 1000, 5.0), (500, 1000, 10.0)]),
        ("qp-simplex", "smoke") => qp_simplex(20, 40, &QP_SIMPLEX_FULL_1[..4]),
        ("qp-simplex", "desk") => qp_simplex(50, 100, &QP_SIMPLEX_FULL_1),
        ("qp-simplex", "full-1") => qp_simplex(1000, 5000, &QP_SIMPLEX_FULL_1),
        ("qp-simplex", "full-2") => qp_simplex(2000, 10_000, &QP_SIMPLEX_FULL_2),
        ("qp-box", "smoke") => qp_box(20, 40, &QP_BOX_DESK[..2]),
        ("qp-box", "desk") => qp_box(100, 200, &QP_BOX_DESK),
        ("qp-box", "full-1") => qp_box(500, 1000, &QP_BOX_FULL_1),
        ("qp-box", "full-2") => qp_box(1000, 2000, &QP_BOX_FULL_2),
        _ => {
            let known = preset_names(family);
            return Err(if known.is_empty() {
                Error::InvalidArgument(format!("unknown family `{family}`; expected one of {}", FAMILIES.join(", ")))
            } else {
                Error::InvalidArgument(format!("unknown preset `{name}` for {family}; expected one of {}", known.join(", ")))
            });
        }
    };
    Ok(fams
        .into_iter()
        .enumerate()
        .map(|(i, family)| InstanceSpec {
            id: format!("{}-{name}-{:02}", family.name(), i + 1),
            family,
            seed: seed.wrapping_add(i as u64),
        })
        .collect())
}

impl FromStr for APattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "last1" => Ok(APattern::LastOneNegative),
            "last10" => Ok(APattern::LastTenNegative),
            other => Err(Error::InvalidArgument(format!("unknown a-pattern `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_patterns() {
        assert_eq!(APattern::LastOneNegative.vector(4), vec![1.0, 1.0, 1.0, -1.0]);
        let a = APattern::LastTenNegative.vector(12);
        assert_eq!(a.iter().filter(|&&v| v < 0.0).count(), 10);
        assert_eq!(&a[..2], &[1.0, 1.0]);
    }

    #[test]
    fn presets_exist_for_every_family() {
        for fam in FAMILIES {
            for name in preset_names(fam) {
                let suite = preset(fam, name, 7).unwrap();
                assert!(!suite.is_empty());
                assert!(suite.iter().all(|s| s.family.name() == fam));
                assert_eq!(suite[1].seed, 8);
            }
        }
        assert_eq!(preset("qp-box", "desk", 0).unwrap().len(), 12);
        assert!(preset("qp-box", "nope", 0).is_err());
        assert!(preset("nope", "desk", 0).is_err());
    }
}
