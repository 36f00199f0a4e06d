//! TOML configuration. Every key is optional; a key set here replaces the
//! built-in default and is itself replaced by the matching command-line flag.
//!
//! ```toml
//! [run]
//! family = "qp-box"
//! preset = "desk"
//! methods = ["rpf-sfista", "fista-bt"]   # or "rpf-sfista,fista-bt"
//! eps = 1e-8
//! time_limit = 7200
//! seed = 42
//! out = "results.csv"
//! format = "csv"
//!
//! [atr]
//! baseline = "fista-bt"
//!
//! [solve]
//! problem = "A.mtx"
//! c = 5.0
//! method = "rpf-sfista"
//! eps = 1e-13
//! ```

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub atr: AtrSection,
    #[serde(default)]
    pub solve: SolveSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum MethodList {
    Joined(String),
    List(Vec<String>),
}

impl MethodList {
    pub fn joined(&self) -> String {
        match self {
            MethodList::Joined(s) => s.clone(),
            MethodList::List(v) => v.join(","),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub family: Option<String>,
    pub preset: Option<String>,
    pub methods: Option<MethodList>,
    pub eps: Option<f64>,
    pub time_limit: Option<f64>,
    pub max_iters: Option<u64>,
    pub seed: Option<u64>,
    pub residual: Option<String>,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtrSection {
    pub subject: Option<String>,
    pub baseline: Option<String>,
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    pub time_limit: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub problem: Option<PathBuf>,
    pub c: Option<f64>,
    pub method: Option<String>,
    pub eps: Option<f64>,
    pub time_limit: Option<f64>,
    pub max_iters: Option<u64>,
    pub residual: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// An absent path means an empty configuration.
    pub fn load_optional(path: Option<&Path>) -> anyhow::Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}
