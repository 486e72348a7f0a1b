use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use collarlab_cli::{emit_report, run_all, workers_from_env, CliError, Format, RunConfig, SuiteId, SuiteReport};

#[derive(Debug, Parser)]
#[command(name = "collarlab", version, about = "Asymptotic checks for hyperbolic-collar models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run check suites and write reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Suite id; repeatable. Defaults to the suites listed in the config.
        #[arg(long = "suite")]
        suites: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated: csv, json, markdown, svg-lines.
        #[arg(long, value_delimiter = ',')]
        format: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn execute(cli: Cli) -> Result<Vec<SuiteReport>, CliError> {
    let Command::Run { config, suites, out, format, seed } = cli.command;
    let mut cfg = RunConfig::load(&config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(out) = out {
        cfg.output.directory = out;
    }
    if !format.is_empty() {
        cfg.output.formats = format.iter().map(|f| f.parse()).collect::<Result<Vec<Format>, _>>()?;
    }
    let selected: Vec<SuiteId> = if suites.is_empty() { cfg.suites.clone() } else { suites.iter().map(|s| s.parse()).collect::<Result<_, _>>()? };
    let reports = run_all(&cfg, &selected, workers_from_env()?)?;
    for format in &cfg.output.formats {
        emit_report(&reports, *format, &cfg.output.directory)?;
    }
    Ok(reports)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(reports) => {
            let mut failed = false;
            for r in &reports {
                for e in &r.errors {
                    eprintln!("{}: error: {e}", r.suite);
                }
                for c in r.failing() {
                    eprintln!("{}: FAIL {} (u = {:?}, rel_err = {:.3e})", r.suite, c.check_id, c.u, c.rel_err);
                }
                failed |= !r.pass;
            }
            if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("collarlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
