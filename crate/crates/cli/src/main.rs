//! `hoecken`: straight-line stage traces, force surfaces, grasp simulation
//! and dimensional synthesis for the Hoecken-linkage finger.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 configuration or usage
//! error, 3 insufficient straight-line travel, 4 numerical failure,
//! 5 simulation failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these checks

mod commands;
mod config;
mod object;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail};
use clap::{Parser, Subcommand};

use commands::Format;
use config::RunConfig;
use output::Outputs;

#[derive(Parser, Debug)]
#[command(name = "hoecken", version, about = "Hoecken-linkage finger analysis")]
struct Cli {
    /// Configuration file (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace the coupler path and report the flattest window.
    Trace {
        /// Crank range in degrees.
        #[arg(long, value_name = "DEG:DEG")]
        range: Option<String>,
        #[arg(long, value_name = "N")]
        samples: Option<usize>,
    },
    /// Pinch force surface over (h2, θ1).
    Pinch {
        /// Grid size as ROWSxCOLS (h2 × θ1).
        #[arg(long, value_name = "RxC")]
        grid: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Spring angle and envelope force surfaces over (θ1, θ2).
    Envelope {
        /// Grid size as ROWSxCOLS (θ1 × θ2).
        #[arg(long, value_name = "RxC")]
        grid: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Close the hand on an object and report the grasp.
    Simulate {
        /// KIND:DIM[:X,Y] with KIND circle, box or plate; defaults to the
        /// configured objects.
        #[arg(long, value_name = "KIND:DIM[:X,Y]")]
        object: Option<String>,
    },
    /// Optimise the stage ratios for straightness.
    Synth,
    /// Print the JSON schema of the configuration file.
    Schema,
}

/// Marks errors in the configuration or command-line values.
#[derive(Debug)]
struct ConfigError(anyhow::Error);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(e: anyhow::Error) -> anyhow::Error {
    anyhow::Error::new(ConfigError(e))
}

fn parse_pair<T: std::str::FromStr>(s: &str, sep: char, what: &str) -> anyhow::Result<(T, T)> {
    let (a, b) = s.split_once(sep).ok_or_else(|| anyhow!("{what} `{s}` must look like A{sep}B"))?;
    match (a.trim().parse(), b.trim().parse()) {
        (Ok(a), Ok(b)) => Ok((a, b)),
        _ => bail!("{what} `{s}` must look like A{sep}B"),
    }
}

/// Configuration with the command-line overrides applied and re-validated.
fn resolve(cli: &Cli) -> anyhow::Result<RunConfig> {
    let source = config::locate(cli.config.as_deref())?;
    let mut cfg = config::load(&source)?;
    match &cli.command {
        Command::Trace { range, samples } => {
            if let Some(r) = range {
                let (a, b): (f64, f64) = parse_pair(r, ':', "--range")?;
                cfg.trace.range_deg = [a, b];
            }
            if let Some(n) = samples {
                cfg.trace.samples = *n;
            }
        }
        Command::Pinch { grid: Some(g), .. } => {
            let (r, c) = parse_pair(g, 'x', "--grid")?;
            cfg.pinch.grid = [r, c];
        }
        Command::Envelope { grid: Some(g), .. } => {
            let (r, c) = parse_pair(g, 'x', "--grid")?;
            cfg.envelope.grid = [r, c];
        }
        Command::Simulate { object: Some(o) } => cfg.objects = vec![o.clone()],
        _ => {}
    }
    if let Some(dir) = &cli.out {
        cfg.output_dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Command::Schema = cli.command {
        print!("{}", config::schema());
        return Ok(());
    }
    let cfg = resolve(&cli).map_err(config_err)?;
    let mut out = Outputs::default();
    let report = match cli.command {
        Command::Trace { .. } => commands::trace(&cfg, &mut out)?,
        Command::Pinch { format, .. } => commands::pinch(&cfg, format, &mut out)?,
        Command::Envelope { format, .. } => commands::envelope(&cfg, format, &mut out)?,
        Command::Simulate { .. } => commands::simulate(&cfg, &mut out)?,
        Command::Synth => commands::synth(&cfg, &mut out)?,
        Command::Schema => unreachable!(),
    };
    let written = out.write_all(&cfg.output_dir)?;
    print!("{report}");
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use hoecken_core::Error as E;
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::InsufficientTravel { .. } => 3,
                E::InvalidObject(_) | E::NotEnveloping => 5,
                E::InvalidInput(_) | E::UnknownVariable(_) | E::TargetMismatch { .. } => 2,
                _ => 4,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
