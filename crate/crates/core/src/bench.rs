//! Benchmark harness: method × instance grids under a shared termination
//! rule, ATR, and csv/markdown tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{solve_baseline, BaselineConfig, BaselineMethod};
use crate::error::{Error, Result};
use crate::problem::CompositeProblem;
use crate::problems::{Instance, InstanceSpec};
use crate::sfista::{solve_sfista, SfistaConfig};
use crate::solver::{ResidualMode, SolveOutput, SolveStatus, TraceRow};

pub use crate::solver::relative_residual;

/// Smallest runtime used as an ATR denominator.
pub const MIN_TICK_S: f64 = 1e-6;

pub const CSV_HEADER: [&str; 13] = [
    "instance_id",
    "family",
    "m",
    "n",
    "param",
    "method",
    "status",
    "iters",
    "prox_evals",
    "grad_evals",
    "runtime_s",
    "rel_residual",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    RpfSfista,
    FistaBT,
    FistaRestart,
    RadaFista,
    GreedyFista,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::RpfSfista, Method::FistaBT, Method::FistaRestart, Method::RadaFista, Method::GreedyFista];

    pub fn name(self) -> &'static str {
        match self.baseline() {
            None => "rpf-sfista",
            Some(b) => b.name(),
        }
    }

    pub fn baseline(self) -> Option<BaselineMethod> {
        match self {
            Method::RpfSfista => None,
            Method::FistaBT => Some(BaselineMethod::FistaBT),
            Method::FistaRestart => Some(BaselineMethod::FistaRestart),
            Method::RadaFista => Some(BaselineMethod::RadaFista),
            Method::GreedyFista => Some(BaselineMethod::GreedyFista),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "rpf-sfista" || s == "rpf" {
            return Ok(Method::RpfSfista);
        }
        Ok(match s.parse::<BaselineMethod>()? {
            BaselineMethod::FistaBT => Method::FistaBT,
            BaselineMethod::FistaRestart => Method::FistaRestart,
            BaselineMethod::RadaFista => Method::RadaFista,
            BaselineMethod::GreedyFista => Method::GreedyFista,
        })
    }
}

/// Parse a comma-separated method list, rejecting duplicates.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut out: Vec<Method> = Vec::new();
    for tok in list.split(',').filter(|t| !t.trim().is_empty()) {
        let m: Method = tok.parse()?;
        if out.contains(&m) {
            return Err(Error::InvalidArgument(format!("method `{m}` listed twice")));
        }
        out.push(m);
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("no methods given".into()));
    }
    Ok(out)
}

/// Termination and budget shared by every method in a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub eps_hat: f64,
    pub residual_mode: ResidualMode,
    pub time_limit_s: f64,
    pub max_iters: u64,
    pub record_trace: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            eps_hat: 1e-8,
            residual_mode: ResidualMode::RelativeToInitialGrad,
            time_limit_s: 7200.0,
            max_iters: 100_000_000,
            record_trace: false,
        }
    }
}

/// Solve one problem with one method under `settings`.
pub fn solve_with(method: Method, problem: &CompositeProblem, z0: &[f64], settings: &RunSettings) -> Result<SolveOutput> {
    match method.baseline() {
        None => {
            let cfg = SfistaConfig {
                eps_hat: settings.eps_hat,
                residual_mode: settings.residual_mode,
                max_total_iters: settings.max_iters,
                time_limit_s: settings.time_limit_s,
                record_trace: settings.record_trace,
                ..SfistaConfig::experimental()
            };
            solve_sfista(problem, &cfg, z0)
        }
        Some(b) => {
            let cfg = BaselineConfig {
                eps_hat: settings.eps_hat,
                residual_mode: settings.residual_mode,
                max_total_iters: settings.max_iters,
                time_limit_s: settings.time_limit_s,
                record_trace: settings.record_trace,
                ..BaselineConfig::new(b)
            };
            solve_baseline(problem, &cfg, z0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    IterCap,
    TimeCap,
    Error,
}

impl From<SolveStatus> for RunStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Converged => RunStatus::Converged,
            SolveStatus::IterCap => RunStatus::IterCap,
            SolveStatus::TimeCap => RunStatus::TimeCap,
        }
    }
}

/// One benchmark row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub family: String,
    pub m: usize,
    pub n: usize,
    pub param: String,
    pub method: String,
    pub status: RunStatus,
    pub iters: u64,
    pub prox_evals: u64,
    pub grad_evals: u64,
    pub runtime_s: f64,
    pub rel_residual: f64,
    pub seed: u64,
}

impl RunRecord {
    fn skeleton(spec: &InstanceSpec, m: usize, n: usize, seed: u64, method: Method) -> Self {
        RunRecord {
            instance_id: spec.id.clone(),
            family: spec.family.name().to_string(),
            m,
            n,
            param: spec.param_label(),
            method: method.name().to_string(),
            status: RunStatus::Error,
            iters: 0,
            prox_evals: 0,
            grad_evals: 0,
            runtime_s: 0.0,
            rel_residual: f64::NAN,
            seed,
        }
    }

    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }
}

/// Harness options beyond the solver settings.
#[derive(Debug, Clone, Default)]
pub struct BenchOptions {
    pub settings: RunSettings,
    /// Per-run iteration traces are written here when set.
    pub trace_dir: Option<PathBuf>,
}

fn run_instance(spec: &InstanceSpec, methods: &[Method], opts: &BenchOptions) -> Vec<RunRecord> {
    let built: Result<Instance> = spec.build();
    let (m0, n0) = spec.dims();
    let inst = match built {
        Ok(i) => i,
        Err(e) => {
            log::error!("{}: instance generation failed: {e}", spec.id);
            return methods.iter().map(|&me| RunRecord::skeleton(spec, m0, n0, spec.seed, me)).collect();
        }
    };
    let g = &inst.generated;
    let n = g.problem.dim();
    let m = if m0 == 0 { n0 } else { m0 };
    let mut settings = opts.settings.clone();
    settings.record_trace = opts.trace_dir.is_some();
    methods
        .iter()
        .map(|&method| {
            let mut rec = RunRecord::skeleton(spec, m, n, g.effective_seed, method);
            match solve_with(method, &g.problem, &g.z0, &settings) {
                Ok(out) => {
                    rec.status = out.status.into();
                    rec.iters = out.total_iters;
                    rec.prox_evals = out.counters.prox_evals;
                    rec.grad_evals = out.counters.grad_evals;
                    rec.runtime_s = out.elapsed_s;
                    rec.rel_residual = out.rel_residual;
                    if let (Some(dir), Some(trace)) = (&opts.trace_dir, &out.trace) {
                        let path = dir.join(format!("{}_{}.csv", spec.id, method));
                        if let Err(e) = write_trace(&path, trace) {
                            log::error!("{}: {e}", path.display());
                        }
                    }
                }
                Err(e) => log::error!("{} / {method}: {e}", spec.id),
            }
            rec
        })
        .collect()
}

/// Run every method on every instance. Instances run concurrently; records
/// come back instance-major in input order. Solver failures become
/// `RunStatus::Error` rows.
pub fn run_benchmark(suite: &[InstanceSpec], methods: &[Method], opts: &BenchOptions) -> Result<Vec<RunRecord>> {
    if suite.is_empty() {
        return Err(Error::InvalidArgument("empty benchmark suite".into()));
    }
    if methods.is_empty() {
        return Err(Error::InvalidArgument("no methods to run".into()));
    }
    if let Some(dir) = &opts.trace_dir {
        fs::create_dir_all(dir)?;
    }
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<RunRecord>> = suite.par_iter().map(|s| run_instance(s, methods, opts)).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<RunRecord>> = suite.iter().map(|s| run_instance(s, methods, opts)).collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Mean of `bᵢ/rᵢ`; a `None` entry (no convergence) counts as the time
/// limit and `rᵢ` is floored at one timer tick.
pub fn compute_atr(best_other_times: &[Option<f64>], rpf_times: &[Option<f64>], time_limit: f64) -> Result<f64> {
    if best_other_times.is_empty() || best_other_times.len() != rpf_times.len() {
        return Err(Error::InvalidArgument(format!(
            "ATR needs two equal nonempty lists, got {} and {}",
            best_other_times.len(),
            rpf_times.len()
        )));
    }
    let eff = |t: Option<f64>| t.filter(|t| t.is_finite()).unwrap_or(time_limit);
    let sum: f64 = best_other_times
        .iter()
        .zip(rpf_times)
        .map(|(&b, &r)| eff(b) / eff(r).max(MIN_TICK_S))
        .sum();
    Ok(sum / best_other_times.len() as f64)
}

/// ATR of `subject` against one named method over the instances both ran.
pub fn atr_against(records: &[RunRecord], subject: &str, baseline: &str, time_limit: f64) -> Result<f64> {
    let time = |r: &RunRecord| r.converged().then_some(r.runtime_s);
    // per instance: (subject time, baseline time), each present once seen
    type Slot = (Option<Option<f64>>, Option<Option<f64>>);
    let mut pairs: BTreeMap<&str, Slot> = BTreeMap::new();
    for r in records {
        let slot = pairs.entry(r.instance_id.as_str()).or_default();
        if r.method == subject {
            slot.0 = Some(time(r));
        } else if r.method == baseline {
            slot.1 = Some(time(r));
        }
    }
    let (own, other): (Vec<_>, Vec<_>) = pairs.into_values().filter_map(|(a, b)| Some((a?, b?))).unzip();
    if own.is_empty() {
        return Err(Error::InvalidArgument(format!("no instance has both `{subject}` and `{baseline}` rows")));
    }
    compute_atr(&other, &own, time_limit)
}

/// Suite ATR of `subject` against its strongest competitor: the other method
/// giving the smallest ATR. Returns that method's name with the value.
pub fn suite_atr(records: &[RunRecord], subject: &str, time_limit: f64) -> Result<(String, f64)> {
    let others: BTreeSet<&str> = records.iter().map(|r| r.method.as_str()).filter(|m| *m != subject).collect();
    let mut best: Option<(String, f64)> = None;
    for m in others {
        let Ok(atr) = atr_against(records, subject, m, time_limit) else { continue };
        if best.as_ref().is_none_or(|(_, b)| atr < *b) {
            best = Some((m.to_string(), atr));
        }
    }
    best.ok_or_else(|| Error::InvalidArgument(format!("no method to compare `{subject}` against")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(Error::InvalidArgument(format!("unknown table format `{other}`"))),
        }
    }
}

pub fn emit_table(records: &[RunRecord], format: TableFormat) -> Result<String> {
    match format {
        TableFormat::Csv => emit_csv(records),
        TableFormat::Markdown => Ok(emit_markdown(records)),
    }
}

fn csv_err(e: impl fmt::Display) -> Error {
    Error::Internal(format!("csv: {e}"))
}

pub fn emit_csv(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        w.write_record(CSV_HEADER).map_err(csv_err)?;
    }
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(csv_err)?;
    String::from_utf8(bytes).map_err(csv_err)
}

pub fn parse_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse { line: 1, msg: format!("unexpected header {header:?}") });
    }
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::Parse { line: i + 2, msg: e.to_string() }))
        .collect()
}

/// `1.3e-07`: one decimal, signed two-digit exponent.
pub fn fmt_sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.1e}");
    match s.split_once('e') {
        Some((mant, exp)) => {
            let e: i32 = exp.parse().unwrap_or(0);
            let sign = if e < 0 { '-' } else { '+' };
            format!("{mant}e{sign}{:02}", e.abs())
        }
        None => s,
    }
}

fn bold_if(s: String, yes: bool) -> String {
    if yes {
        format!("**{s}**")
    } else {
        s
    }
}

/// One row per instance and one column per method. Converged cells read
/// `iters/runtime`; the smallest iteration count and the smallest runtime
/// are bolded (all tied entries). Other cells read `*/<residual>`.
pub fn emit_markdown(records: &[RunRecord]) -> String {
    let mut methods: Vec<&str> = Vec::new();
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
        if !groups.contains_key(r.instance_id.as_str()) {
            order.push(&r.instance_id);
        }
        groups.entry(&r.instance_id).or_default().push(r);
    }
    let mut out = String::new();
    out.push_str("| instance | (m,n) | parameters |");
    for m in &methods {
        out.push_str(&format!(" {m} |"));
    }
    out.push_str("\n|---|---|---|");
    out.push_str(&"---|".repeat(methods.len()));
    out.push('\n');
    for id in order {
        let rows = &groups[id];
        let conv: Vec<&&RunRecord> = rows.iter().filter(|r| r.converged()).collect();
        let best_iters = conv.iter().map(|r| r.iters).min();
        let best_time = conv.iter().map(|r| r.runtime_s).min_by(f64::total_cmp);
        let first = rows[0];
        out.push_str(&format!("| {id} | ({},{}) | {} |", first.m, first.n, first.param));
        for m in &methods {
            let cell = match rows.iter().find(|r| r.method == *m) {
                None => String::new(),
                Some(r) if r.converged() => format!(
                    "{}/{}",
                    bold_if(r.iters.to_string(), Some(r.iters) == best_iters),
                    bold_if(format!("{:.2}", r.runtime_s), Some(r.runtime_s) == best_time)
                ),
                Some(r) => format!("*/{}", fmt_sci(r.rel_residual)),
            };
            out.push_str(&format!(" {cell} |"));
        }
        out.push('\n');
    }
    out
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, method: &str, status: RunStatus, iters: u64, t: f64, res: f64) -> RunRecord {
        RunRecord {
            instance_id: id.into(),
            family: "qp-box".into(),
            m: 2,
            n: 4,
            param: "mu=1e-4 L=1e2 a=last1".into(),
            method: method.into(),
            status,
            iters,
            prox_evals: iters + 1,
            grad_evals: 2 * iters,
            runtime_s: t,
            rel_residual: res,
            seed: 1,
        }
    }

    #[test]
    fn atr_examples() {
        assert_eq!(compute_atr(&[Some(3600.0)], &[Some(1800.0)], 7200.0).unwrap(), 2.0);
        assert_eq!(compute_atr(&[None], &[Some(720.0)], 7200.0).unwrap(), 10.0);
        assert_eq!(compute_atr(&[Some(5.0)], &[Some(5.0)], 7200.0).unwrap(), 1.0);
        assert!(compute_atr(&[], &[], 7200.0).is_err());
        assert!(compute_atr(&[Some(1.0)], &[Some(0.0)], 7200.0).unwrap().is_finite());
    }

    #[test]
    fn csv_single_record_has_thirteen_fields() {
        let text = emit_csv(&[rec("a", "rpf-sfista", RunStatus::Converged, 10, 0.5, 1e-9)]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines[1].split(',').count(), 13);
    }

    #[test]
    fn markdown_marks_failures_and_ties() {
        let rows = vec![
            rec("a", "rpf-sfista", RunStatus::Converged, 10, 0.5, 1e-9),
            rec("a", "fista-bt", RunStatus::Converged, 10, 0.7, 1e-9),
            rec("a", "rada", RunStatus::TimeCap, 99, 9.0, 1.3e-7),
        ];
        let md = emit_markdown(&rows);
        assert!(md.contains("**10**/**0.50**"), "{md}");
        assert!(md.contains("**10**/0.70"), "{md}");
        assert!(md.contains("*/1.3e-07"), "{md}");
    }

    #[test]
    fn sci_format() {
        assert_eq!(fmt_sci(1.3e-7), "1.3e-07");
        assert_eq!(fmt_sci(2.0e12), "2.0e+12");
    }

    #[test]
    fn method_lists() {
        assert_eq!(parse_methods("rpf-sfista,fista-bt,fista-r,rada,greedy").unwrap(), Method::ALL.to_vec());
        assert!(parse_methods("rada,rada").is_err());
        assert!(parse_methods("").is_err());
    }

    #[test]
    fn atr_against_named_and_strongest() {
        let rows = vec![
            rec("a", "rpf-sfista", RunStatus::Converged, 10, 1.0, 1e-9),
            rec("a", "fista-bt", RunStatus::Converged, 30, 3.0, 1e-9),
            rec("a", "greedy", RunStatus::Converged, 20, 2.0, 1e-9),
            rec("b", "rpf-sfista", RunStatus::Converged, 10, 1.0, 1e-9),
            rec("b", "fista-bt", RunStatus::TimeCap, 30, 10.0, 1e-3),
            rec("b", "greedy", RunStatus::Converged, 20, 4.0, 1e-9),
        ];
        assert_eq!(atr_against(&rows, "rpf-sfista", "fista-bt", 10.0).unwrap(), (3.0 + 10.0) / 2.0);
        assert_eq!(suite_atr(&rows, "rpf-sfista", 10.0).unwrap(), ("greedy".to_string(), 3.0));
        assert!(atr_against(&rows, "rpf-sfista", "rada", 10.0).is_err());
    }
}
