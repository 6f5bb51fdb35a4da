mod commands;
mod config;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{ConfigError, RunConfig};

/// KdV inverse scattering through Hankel-operator Fredholm determinants.
#[derive(Parser)]
#[command(name = "kdvist", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set hankel.nodes=128`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (same as `--set output=...`).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Scattering data of the configured potential.
    Scatter(Common),
    /// Atoms and density of the measure rho.
    Rho(Common),
    /// Scattering data evolved to each grid time.
    Evolve(Common),
    /// q(x, t) on the grid.
    Solve(Common),
    /// Compare the trace, finite-difference and GLM routes.
    GlmCheck(Common),
    /// Pseudo-spectral reference solution on the grid.
    Oracle(Common),
    /// Run all consistency checks.
    Validate(Common),
    /// Singular values of the discretized Hankel operator and their power-law fit.
    SvdReport(Common),
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (common, f): (&Common, fn(&RunConfig) -> commands::Outcome) = match &cli.command {
        Command::Scatter(c) => (c, commands::scatter),
        Command::Rho(c) => (c, commands::rho),
        Command::Evolve(c) => (c, commands::evolve),
        Command::Solve(c) => (c, commands::solve),
        Command::GlmCheck(c) => (c, commands::glm_check),
        Command::Oracle(c) => (c, commands::oracle),
        Command::Validate(c) => (c, validate::validate),
        Command::SvdReport(c) => (c, commands::svd_report),
    };
    let mut overrides = common.overrides.clone();
    if let Some(o) = &common.output {
        overrides.push(format!("output={:?}", o.display().to_string()));
    }
    let cfg = RunConfig::load(common.config.as_deref(), &overrides)?;
    f(&cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
