use std::process::ExitCode;

use clap::Parser;
use rpfista_cli::{execute_atr, execute_run, run_summary, BenchCli, BenchCommand, FileConfig, RunPlan};

fn run(cli: BenchCli) -> anyhow::Result<()> {
    let file = FileConfig::load_optional(cli.config.as_deref())?;
    match cli.command {
        BenchCommand::Run(args) => {
            let plan = RunPlan::resolve(args, &file)?;
            let (records, table) = execute_run(&plan)?;
            if plan.out.is_none() {
                print!("{table}");
            }
            eprint!("{}", run_summary(&records, plan.settings.time_limit_s));
        }
        BenchCommand::Atr(args) => {
            let (subject, baseline, atr) = execute_atr(args, &file)?;
            println!("ATR {subject} vs {baseline}: {atr:.4}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(BenchCli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
