use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use tweezer_sta_cli::config::{load_config, Config, Scenario};
use tweezer_sta_cli::error::CliError;
use tweezer_sta_cli::output::{default_dir, write_all};
use tweezer_sta_cli::pathfile::load_path;
use tweezer_sta_cli::validate::validate_path;
use tweezer_sta_cli::{run_scenario, scenarios, with_workers};

#[derive(Parser)]
#[command(name = "tweezer-sta", version, about = "Optical-tweezer transport scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one named scenario and write its CSV/JSON files and manifest.
    Run {
        scenario: Scenario,
        #[command(flatten)]
        common: Common,
    },
    /// Success-probability grid over (t_f, l) only, from the `[fig2]` axes.
    Sweep(Common),
    /// Check a path description file and print the report as JSON.
    Validate {
        file: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Distance limits and excitation for CV, CJ and STA transport.
    ScalingTable(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Atoms per ensemble.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory (default out/<scenario>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

fn config_from(path: Option<&Path>) -> Result<Config, CliError> {
    path.map_or_else(|| Ok(Config::default()), load_config)
}

impl Common {
    fn resolve(&self, scenario: Scenario) -> Result<(Config, PathBuf), CliError> {
        let mut cfg = config_from(self.config.as_deref())?;
        if let Some(s) = cfg.scenario {
            if s != scenario {
                return Err(CliError::config(
                    "scenario",
                    format!("config is for `{s}` but `{scenario}` was requested"),
                ));
            }
        }
        cfg.scenario = Some(scenario);
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(n) = self.samples {
            cfg.ensemble.samples = n;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        let out = cfg.out.clone().unwrap_or_else(|| default_dir(scenario));
        Ok((cfg, out))
    }
}

fn print(line: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").map_err(|e| CliError::Output(e.to_string()))
}

fn run_named(scenario: Scenario, common: &Common) -> Result<(), CliError> {
    let (cfg, out) = common.resolve(scenario)?;
    run_scenario(&cfg, scenario, &out, common.workers)?;
    print(&out.join("manifest.json").display().to_string())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario, common } => run_named(scenario, &common),
        Command::ScalingTable(common) => run_named(Scenario::ScalingTable, &common),
        Command::Sweep(common) => {
            let (cfg, out) = common.resolve(Scenario::Fig2)?;
            let out = if common.out.is_none() && cfg.out.is_none() {
                Path::new("out").join("sweep")
            } else {
                out
            };
            let start = Instant::now();
            let grid = with_workers(common.workers, || scenarios::fig2_grid(&cfg))??;
            let files = scenarios::sweep_files(&grid)?;
            write_all(&out, &cfg, "sweep", &files, start.elapsed())?;
            print(&out.join("manifest.json").display().to_string())
        }
        Command::Validate { file, config } => {
            let cfg = config_from(config.as_deref())?;
            let model = cfg.trap.model()?;
            let specs = load_path(&file)?;
            let report = validate_path(&specs, model.params(), model.omega())?;
            print(&serde_json::to_string_pretty(&report)?)?;
            if report.valid {
                Ok(())
            } else {
                // Surface the junction defect the same way a run would.
                let placed = tweezer_sta_cli::pathfile::build_path(&specs);
                Err(placed.err().unwrap_or_else(|| CliError::Output("path is invalid".into())))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut err = std::io::stderr().lock();
            let _ = writeln!(err, "{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
