//! Command-line runner for the collar laboratory: configuration, the check
//! suites, and report emission.

pub mod config;
pub mod error;
pub mod report;
pub mod suites;

use std::time::Instant;

pub use config::{CollarEntry, Format, GridConfig, OutputConfig, RunConfig, SuiteId, SweepConfig};
pub use error::CliError;
pub use report::{emit_report, CheckRecord, Rule, SuiteReport, CSV_HEADER};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "COLLARLAB_WORKERS";

/// Runs one suite. Core failures are recorded in the report, not returned.
pub fn run_suite(cfg: &RunConfig, suite: SuiteId) -> SuiteReport {
    let start = Instant::now();
    let (records, errors) = match suites::run(cfg, suite) {
        Ok(records) => (records, Vec::new()),
        Err(e) => (Vec::new(), vec![e.to_string()]),
    };
    SuiteReport::new(suite.as_str(), records, errors, start.elapsed().as_secs_f64())
}

/// Worker count from the environment; `None` means rayon's default.
pub fn workers_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

/// Runs `suites` in order on a dedicated pool; sweep points inside a suite
/// run in parallel.
pub fn run_all(cfg: &RunConfig, suites: &[SuiteId], workers: Option<usize>) -> Result<Vec<SuiteReport>, CliError> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;
    Ok(pool.install(|| suites.iter().map(|&s| run_suite(cfg, s)).collect()))
}
