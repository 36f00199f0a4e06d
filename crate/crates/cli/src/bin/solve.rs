use std::process::ExitCode;

use clap::Parser;
use rpfista_cli::{execute_solve, FileConfig, SolveArgs, SolvePlan};

fn run(args: SolveArgs) -> anyhow::Result<()> {
    let file = FileConfig::load_optional(args.config.as_deref())?;
    let plan = SolvePlan::resolve(args, &file)?;
    print!("{}", execute_solve(&plan)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(SolveArgs::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
