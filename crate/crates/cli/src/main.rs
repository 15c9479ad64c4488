//! `cpt-sim`: sweeps and figure data for the two-mode Λ-atom cavity.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::commands::{Figure, FigureRun};
use crate::config::{CommonArgs, ConfigFile, Format, Grid, RunConfig, DEFAULT_SEED};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unstable operating point: {0}")]
    Unstable(String),
    #[error("solver failure: {0}")]
    Solver(cpt_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<cpt_core::Error> for CliError {
    fn from(e: cpt_core::Error) -> Self {
        use cpt_core::Error as E;
        match e {
            E::InvalidParameter { .. } | E::NonFinite(_) | E::DivisionByZero(_) => CliError::Config(e.to_string()),
            E::Unstable { .. } => CliError::Unstable(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Unstable(_) => 3,
            CliError::Solver(_) => 4,
        }
    }
}

/// Steady states, squeezing/entanglement spectra and spin squeezing of two
/// cavity modes coupled to Λ atoms near a dark resonance.
///
/// Rates are in units of γ. Grids are written `start:stop:count`
/// (inclusive, strictly increasing); prefix `log:` for log spacing, e.g.
/// `--omega-range log:1e-3:100:400`.
///
/// Exit codes: 0 success, 1 I/O error, 2 invalid configuration, 3 unstable
/// operating point, 4 solver failure.
#[derive(Debug, Parser)]
#[command(name = "cpt-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Semiclassical steady state and reflectivity versus two-photon detuning
    Steady {
        #[command(flatten)]
        common: CommonArgs,
        /// Two-photon detuning grid [default: -3:3:601]
        #[arg(long, allow_hyphen_values = true)]
        delta_range: Option<Grid>,
    },
    /// Minimal output noise spectra of the circular and linear modes
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Analysis frequencies [default: 400 points over 1e-3..100]
        #[arg(long)]
        omega_range: Option<Grid>,
        /// Also write the quadrature-basis drift/diffusion matrices here
        #[arg(long)]
        dump_matrices: Option<PathBuf>,
    },
    /// Optimal EPR-type entanglement of the output fields
    Entangle {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        omega_range: Option<Grid>,
    },
    /// Population-difference squeezing versus cavity detuning
    Spin {
        #[command(flatten)]
        common: CommonArgs,
        /// Cavity detuning grid [default: 1:5:41]
        #[arg(long, allow_hyphen_values = true)]
        phi_range: Option<Grid>,
        /// Fixed threshold ratio δ_s/|δ̄|; optimised per row when absent
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Regenerate a figure data set (1, 3, 4 or 5) with its preset parameters
    Fig(FigArgs),
}

#[derive(Debug, Args)]
struct FigArgs {
    /// Figure number: 1, 3, 4 or 5
    which: u8,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads [env: CPT_SIM_THREADS]
    #[arg(long)]
    threads: Option<usize>,
}

fn load_file(common: &CommonArgs) -> Result<ConfigFile, CliError> {
    match &common.config {
        Some(path) => ConfigFile::load(path),
        None => Ok(ConfigFile::default()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (cfg, table) = match cli.command {
        Command::Steady { common, delta_range } => {
            let file = load_file(&common)?;
            let mut cfg = RunConfig::resolve("steady", &common, &file)?;
            cfg.delta_range = Some(file.pick(delta_range, "delta-range")?.unwrap_or(Grid::linear(-3.0, 3.0, 601)));
            file.finish()?;
            let t = commands::steady(&cfg)?;
            (cfg, t)
        }
        Command::Spectrum {
            common,
            omega_range,
            dump_matrices,
        } => {
            let file = load_file(&common)?;
            let mut cfg = RunConfig::resolve("spectrum", &common, &file)?;
            cfg.omega_range = file.pick(omega_range, "omega-range")?;
            let dump = file.pick(dump_matrices, "dump-matrices")?;
            file.finish()?;
            let t = commands::spectrum(&cfg, dump.as_deref())?;
            (cfg, t)
        }
        Command::Entangle { common, omega_range } => {
            let file = load_file(&common)?;
            let mut cfg = RunConfig::resolve("entangle", &common, &file)?;
            cfg.omega_range = file.pick(omega_range, "omega-range")?;
            file.finish()?;
            let t = commands::entangle(&cfg)?;
            (cfg, t)
        }
        Command::Spin {
            common,
            phi_range,
            alpha,
        } => {
            let file = load_file(&common)?;
            let mut cfg = RunConfig::resolve("spin", &common, &file)?;
            cfg.phi_range = Some(file.pick(phi_range, "phi-range")?.unwrap_or(Grid::linear(1.0, 5.0, 41)));
            cfg.alpha = file.pick(alpha, "alpha")?;
            file.finish()?;
            let t = commands::spin(&cfg)?;
            (cfg, t)
        }
        Command::Fig(args) => {
            let which = Figure::from_number(args.which)
                .ok_or_else(|| CliError::Config(format!("no preset for figure {}", args.which)))?;
            let run = FigureRun {
                out_dir: args.out_dir,
                format: args.format,
                seed: args.seed.unwrap_or(DEFAULT_SEED),
                threads: config::threads_setting(args.threads)?,
            };
            let path = commands::figure(which, &run)?;
            eprintln!("wrote {}", path.display());
            return Ok(());
        }
    };
    output::emit(cfg.out.as_deref(), &table.render(cfg.format))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cpt-sim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
