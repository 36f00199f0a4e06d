//! Shared plumbing for the `bench` and `solve` binaries: argument types,
//! configuration merging (defaults < config file < flags) and the commands.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rpfista::bench::{
    atr_against, emit_table, parse_csv, parse_methods, run_benchmark, solve_with, suite_atr, BenchOptions, Method,
    RunRecord, RunSettings, TableFormat,
};
use rpfista::problems::{preset, Family, InstanceSpec, LassoSource};
use rpfista::ResidualMode;

pub use config::FileConfig;

pub const DEFAULT_METHODS: &str = "rpf-sfista,fista-bt,fista-r,rada,greedy";
pub const DEFAULT_EPS: f64 = 1e-8;
pub const DEFAULT_TIME_LIMIT: f64 = 7200.0;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_MAX_ITERS: u64 = 100_000_000;

pub fn parse_residual(s: &str) -> anyhow::Result<ResidualMode> {
    match s {
        "relative" => Ok(ResidualMode::RelativeToInitialGrad),
        "absolute" => Ok(ResidualMode::Absolute),
        other => bail!("unknown residual mode `{other}`; expected relative or absolute"),
    }
}

#[derive(Debug, Parser)]
#[command(name = "bench", about = "Run benchmark grids and compute average time ratios")]
pub struct BenchCli {
    /// TOML file with [run] and [atr] tables
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: BenchCommand,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Run every method on every instance of a preset
    Run(RunArgs),
    /// Average time ratio of one method against another from a results csv
    Atr(AtrArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// logistic, lasso, qp-simplex or qp-box
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub preset: Option<String>,
    /// Comma-separated method list
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Seconds per run
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// relative or absolute
    #[arg(long)]
    pub residual: Option<String>,
    /// Table destination; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for per-run iteration traces
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// csv or markdown
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct AtrArgs {
    /// Method whose speedup is measured
    #[arg(long)]
    pub subject: Option<String>,
    /// Method to compare against; the strongest competitor when absent
    #[arg(long)]
    pub baseline: Option<String>,
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Runtime charged to runs that did not converge
    #[arg(long)]
    pub time_limit: Option<f64>,
}

#[derive(Debug, Parser, Default)]
#[command(name = "solve", about = "Solve an l1-ball constrained least-squares problem from a matrix file")]
pub struct SolveArgs {
    /// TOML file with a [solve] table
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// MatrixMarket (.mtx) or csv matrix; the right-hand side is read from a
    /// `<stem>_b` sibling when present, otherwise all ones
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// l1-ball radius
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<u64>,
    /// relative or absolute
    #[arg(long)]
    pub residual: Option<String>,
    /// Seed of the random feasible start point
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the solution here, one coordinate per line
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A fully resolved `bench run`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub family: String,
    pub preset: String,
    pub methods: Vec<Method>,
    pub settings: RunSettings,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub format: TableFormat,
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

impl RunPlan {
    pub fn resolve(args: RunArgs, file: &FileConfig) -> anyhow::Result<Self> {
        let cfg = file.run.clone();
        let Some(family) = args.family.or(cfg.family) else { bail!("--family is required") };
        let preset = pick(args.preset, cfg.preset, "desk".to_string());
        let methods = pick(args.methods, cfg.methods.map(|m| m.joined()), DEFAULT_METHODS.to_string());
        let residual = pick(args.residual, cfg.residual, "relative".to_string());
        let format = pick(args.format, cfg.format, "csv".to_string());
        let settings = RunSettings {
            eps_hat: pick(args.eps, cfg.eps, DEFAULT_EPS),
            residual_mode: parse_residual(&residual)?,
            time_limit_s: pick(args.time_limit, cfg.time_limit, DEFAULT_TIME_LIMIT),
            max_iters: pick(args.max_iters, cfg.max_iters, DEFAULT_MAX_ITERS),
            record_trace: false,
        };
        Ok(RunPlan {
            family,
            preset,
            methods: parse_methods(&methods)?,
            settings,
            seed: pick(args.seed, cfg.seed, DEFAULT_SEED),
            out: args.out.or(cfg.out),
            trace: args.trace.or(cfg.trace),
            format: format.parse()?,
        })
    }
}

/// Records and the rendered table of a `bench run`. The table goes to
/// `plan.out` when set.
pub fn execute_run(plan: &RunPlan) -> anyhow::Result<(Vec<RunRecord>, String)> {
    let suite = preset(&plan.family, &plan.preset, plan.seed)?;
    let opts = BenchOptions { settings: plan.settings.clone(), trace_dir: plan.trace.clone() };
    let records = run_benchmark(&suite, &plan.methods, &opts)?;
    let table = emit_table(&records, plan.format)?;
    if let Some(path) = &plan.out {
        fs::write(path, &table).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok((records, table))
}

/// One line per method: converged count and, for rpf-sfista, ATR against
/// every other method in the run.
pub fn run_summary(records: &[RunRecord], time_limit: f64) -> String {
    let mut methods: Vec<&str> = Vec::new();
    for r in records {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let subject = Method::RpfSfista.name();
    let mut out = String::new();
    for m in &methods {
        let rows: Vec<&RunRecord> = records.iter().filter(|r| r.method == *m).collect();
        let conv = rows.iter().filter(|r| r.converged()).count();
        let iters: u64 = rows.iter().map(|r| r.iters).sum();
        let _ = write!(out, "{m}: {conv}/{} converged, {iters} iterations", rows.len());
        if *m != subject && methods.contains(&subject) {
            if let Ok(atr) = atr_against(records, subject, m, time_limit) {
                let _ = write!(out, ", ATR of {subject} {atr:.3}");
            }
        }
        out.push('\n');
    }
    out
}

/// Resolved `bench atr`: `(subject, baseline, atr)`.
pub fn execute_atr(args: AtrArgs, file: &FileConfig) -> anyhow::Result<(String, String, f64)> {
    let cfg = file.atr.clone();
    let Some(input) = args.input.or(cfg.input) else { bail!("--in is required") };
    let subject = pick(args.subject, cfg.subject, Method::RpfSfista.name().to_string());
    let time_limit = pick(args.time_limit, cfg.time_limit, DEFAULT_TIME_LIMIT);
    let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
    let records = parse_csv(&text)?;
    match args.baseline.or(cfg.baseline) {
        Some(b) => {
            let name = b.parse::<Method>()?.name().to_string();
            let atr = atr_against(&records, &subject, &name, time_limit)?;
            Ok((subject, name, atr))
        }
        None => {
            let (name, atr) = suite_atr(&records, &subject, time_limit)?;
            Ok((subject, name, atr))
        }
    }
}

/// A fully resolved `solve`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvePlan {
    pub problem: PathBuf,
    pub c: f64,
    pub method: Method,
    pub settings: RunSettings,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl SolvePlan {
    pub fn resolve(args: SolveArgs, file: &FileConfig) -> anyhow::Result<Self> {
        let cfg = file.solve.clone();
        let Some(problem) = args.problem.or(cfg.problem) else { bail!("--problem is required") };
        let Some(c) = args.c.or(cfg.c) else { bail!("--c is required") };
        let method = pick(args.method, cfg.method, Method::RpfSfista.name().to_string());
        let residual = pick(args.residual, cfg.residual, "relative".to_string());
        Ok(SolvePlan {
            problem,
            c,
            method: method.parse()?,
            settings: RunSettings {
                eps_hat: pick(args.eps, cfg.eps, DEFAULT_EPS),
                residual_mode: parse_residual(&residual)?,
                time_limit_s: pick(args.time_limit, cfg.time_limit, DEFAULT_TIME_LIMIT),
                max_iters: pick(args.max_iters, cfg.max_iters, DEFAULT_MAX_ITERS),
                record_trace: false,
            },
            seed: pick(args.seed, cfg.seed, DEFAULT_SEED),
            out: args.out.or(cfg.out),
        })
    }
}

/// Solve and return a `key value` report.
pub fn execute_solve(plan: &SolvePlan) -> anyhow::Result<String> {
    let spec = InstanceSpec {
        id: plan.problem.display().to_string(),
        family: Family::Lasso { source: LassoSource::File(plan.problem.clone()), c: plan.c },
        seed: plan.seed,
    };
    let inst = spec.build()?;
    let g = &inst.generated;
    let out = solve_with(plan.method, &g.problem, &g.z0, &plan.settings)?;
    if let Some(path) = &plan.out {
        write_vector(path, &out.y)?;
    }
    let phi = g.problem.eval_phi(&out.y)?.to_f64();
    let mut report = String::new();
    let _ = writeln!(report, "method {}", plan.method);
    let _ = writeln!(report, "dim {}", g.problem.dim());
    let _ = writeln!(report, "status {}", out.status.as_str());
    let _ = writeln!(report, "iters {}", out.total_iters);
    let _ = writeln!(report, "cycles {}", out.cycles);
    let _ = writeln!(report, "prox_evals {}", out.counters.prox_evals);
    let _ = writeln!(report, "grad_evals {}", out.counters.grad_evals);
    let _ = writeln!(report, "rel_residual {:e}", out.rel_residual);
    let _ = writeln!(report, "objective {phi:.17e}");
    let _ = writeln!(report, "runtime_s {:.6}", out.elapsed_s);
    Ok(report)
}

fn write_vector(path: &Path, v: &[f64]) -> anyhow::Result<()> {
    let mut s = String::with_capacity(v.len() * 24);
    for x in v {
        let _ = writeln!(s, "{x:e}");
    }
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}
