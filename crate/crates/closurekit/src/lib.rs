//! Config-driven front end for the closure-relation toolkit: JSON configs,
//! JSON/CSV reports, and canned reproductions of the worked examples.

pub mod cases;
pub mod commands;
pub mod config;
pub mod error;
pub mod model;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use closurekit_core::stability::Scheme;

use crate::commands::Loaded;
use crate::config::{AnalysisConfig, OutputFormat};
use crate::error::{CliError, CliResult};
use crate::report::write_output;

#[derive(Debug, Parser)]
#[command(name = "closurekit", version, about = "Stability analysis of closure-relation operators")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format; defaults to the config's `output` field, else json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate hypotheses and classify stability.
    Check { config: PathBuf },
    /// Eigenvalue table of the generator.
    Spectrum { config: PathBuf },
    /// Integrate x' = A x and record W-norms.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        t_end: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long, default_value = "crank-nicolson", value_parser = parse_scheme)]
        scheme: Scheme,
    },
    /// Resolvent norms along the imaginary axis.
    Resolvent {
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        omega_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        omega_max: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Refinement study over grid sizes.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        grids: Vec<usize>,
    },
    /// Run canned example reproductions (`all` runs every case).
    Reproduce { case: String },
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    Scheme::parse(s).ok_or_else(|| format!("unknown scheme `{s}` (crank-nicolson, backward-euler, expm)"))
}

fn load(path: &Path) -> CliResult<Loaded> {
    let (config, sha) = AnalysisConfig::load(path)?;
    Ok(Loaded { config, sha256: Some(sha) })
}

fn format_for(cli: &Cli, loaded: Option<&Loaded>) -> OutputFormat {
    match cli.format {
        Some(Format::Json) => OutputFormat::Json,
        Some(Format::Csv) => OutputFormat::Csv,
        None => loaded.map_or(OutputFormat::Json, |l| l.config.output),
    }
}

/// Runs one invocation; the error carries the exit code.
pub fn run(cli: &Cli) -> CliResult<()> {
    let emit = |r: &report::Report, loaded: Option<&Loaded>| -> CliResult<()> {
        write_output(&r.render(format_for(cli, loaded))?, cli.out.as_deref())
    };
    match &cli.command {
        Command::Check { config } => {
            let loaded = load(config)?;
            let (r, ok) = commands::check(&loaded)?;
            emit(&r, Some(&loaded))?;
            if !ok {
                let violations = r.json["hypotheses"]["violations"]
                    .as_array()
                    .map(|v| v.iter().filter_map(|s| s.as_str()).collect::<Vec<_>>().join("; "))
                    .unwrap_or_default();
                return Err(CliError::Hypothesis(violations));
            }
        }
        Command::Spectrum { config } => {
            let loaded = load(config)?;
            emit(&commands::spectrum(&loaded)?, Some(&loaded))?;
        }
        Command::Simulate { config, t_end, dt, scheme } => {
            let loaded = load(config)?;
            emit(&commands::simulate(&loaded, *t_end, *dt, *scheme)?, Some(&loaded))?;
        }
        Command::Resolvent { config, omega_min, omega_max, samples } => {
            let loaded = load(config)?;
            emit(&commands::resolvent(&loaded, *omega_min, *omega_max, *samples)?, Some(&loaded))?;
        }
        Command::Sweep { config, grids } => {
            let loaded = load(config)?;
            emit(&commands::sweep(&loaded, grids)?, Some(&loaded))?;
        }
        Command::Reproduce { case } => {
            let names: Vec<&str> = if case == "all" { cases::CASES.to_vec() } else { vec![case.as_str()] };
            let (r, outcomes) = commands::reproduce(&names)?;
            for o in &outcomes {
                for c in &o.checks {
                    eprintln!("{} {}: {} ({})", if c.passed { "PASS" } else { "FAIL" }, o.case, c.name, c.detail);
                }
            }
            emit(&r, None)?;
            let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.case.as_str()).collect();
            if !failed.is_empty() {
                return Err(CliError::Mismatch(failed.join(", ")));
            }
        }
    }
    Ok(())
}
