//! Command-line entry point: run experiments from a config file, validate
//! configs, or reproduce the full set of result tables.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use aml5g::harness::{
    emit_report, parse_config, run_experiment, ExperimentConfig, HarnessError, MetricsReport,
    ReportFormat, Scenario,
};

/// Output directory override when --out is absent.
const OUT_DIR_ENV: &str = "AML5G_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "aml5g",
    about = "Adversarial machine learning attacks and defenses on a simulated 5G system",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Md => ReportFormat::Markdown,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's number of seeds.
        #[arg(long)]
        seeds: Option<u32>,
        /// Write the report into this directory instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Parse and validate a config file, echoing the materialized config.
    Validate { config: PathBuf },
    /// Reproduce all result tables with default configs.
    Tables {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        seeds: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

fn out_dir(flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
}

fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = fs::read_to_string(path)
        .map_err(|e| HarnessError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn write_or_print(
    report: &MetricsReport,
    format: ReportFormat,
    out: &Option<PathBuf>,
) -> anyhow::Result<()> {
    let document = emit_report(report, format);
    match out {
        None => print!("{document}"),
        Some(dir) => {
            fs::create_dir_all(dir)
                .with_context(|| format!("creating output directory {}", dir.display()))?;
            let ext = match format {
                ReportFormat::Csv => "csv",
                ReportFormat::Markdown => "md",
            };
            let path = dir.join(format!("{}.{ext}", report.scenario));
            fs::write(&path, document)
                .with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn apply_overrides(cfg: &mut ExperimentConfig, seed: Option<u64>, seeds: Option<u32>) {
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = seeds {
        cfg.n_seeds = n;
    }
}

fn run(cli: Cli) -> Result<ExitCode, anyhow::Error> {
    match cli.command {
        Command::Validate { config } => match load_config(&config) {
            Ok(cfg) => {
                print!("{}", cfg.echo());
                Ok(ExitCode::SUCCESS)
            }
            Err(e) => {
                eprintln!("{e}");
                Ok(ExitCode::from(1))
            }
        },
        Command::Run {
            config,
            seed,
            seeds,
            out,
            format,
        } => {
            let mut cfg = match load_config(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(ExitCode::from(1));
                }
            };
            apply_overrides(&mut cfg, seed, seeds);
            if let Err(e) = cfg.validate() {
                eprintln!("{e}");
                return Ok(ExitCode::from(1));
            }
            match run_experiment(&cfg) {
                Ok(report) => {
                    write_or_print(&report, format.into(), &out_dir(out))?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("{e}");
                    Ok(ExitCode::from(2))
                }
            }
        }
        Command::Tables {
            seed,
            seeds,
            out,
            format,
        } => {
            let out = out_dir(out);
            for scenario in [
                Scenario::Baseline1,
                Scenario::Attack1,
                Scenario::Auth2,
                Scenario::Spoof2,
                Scenario::Defense2,
            ] {
                let mut cfg = ExperimentConfig {
                    scenario,
                    n_seeds: 10,
                    ..ExperimentConfig::default()
                };
                apply_overrides(&mut cfg, seed, seeds);
                match run_experiment(&cfg) {
                    Ok(report) => write_or_print(&report, format.into(), &out)?,
                    Err(e) => {
                        eprintln!("{e}");
                        return Ok(ExitCode::from(2));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e:#}");
            ExitCode::from(2)
        }
    }
}
