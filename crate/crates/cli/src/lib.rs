//! Configuration, path files, scenario pipelines and output for the
//! `tweezer-sta` command-line tool.

pub mod config;
pub mod error;
pub mod output;
pub mod pathfile;
pub mod scenarios;
pub mod units;
pub mod validate;

use std::path::Path;
use std::time::Instant;

use config::{Config, Scenario};
use error::CliError;
use output::OutputFile;

/// Runs `f` on a dedicated pool of `workers` threads, or the global pool
/// when `workers` is `None`.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::Usage(e.to_string())),
    }
}

/// Runs a scenario and writes its files plus `manifest.json` into `out`.
pub fn run_scenario(cfg: &Config, scenario: Scenario, out: &Path, workers: Option<usize>) -> Result<Vec<OutputFile>, CliError> {
    let start = Instant::now();
    let files = with_workers(workers, || scenarios::run_files(cfg, scenario))??;
    output::write_all(out, cfg, scenario.name(), &files, start.elapsed())?;
    Ok(files)
}
