#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod units;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::config::{ConfigError, RunConfig};
use crate::units::{Gradient, Quantity, Time};

/// Microwave position and velocity selection of cold atoms in a field gradient.
#[derive(Parser)]
#[command(name = "velsel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stretched-state energies and transition frequency along z (CSV).
    Scan(Args),
    /// Position and velocity widths, validity diagnostic and stability budget (JSON).
    Select(Args),
    /// Wavepacket-averaged transfer probability of every pulse (JSON).
    Probability(Args),
    /// Band edges and the selected cell polygon in (z, v) (CSV).
    Bands(Args),
    /// Monte Carlo ensemble through both pulses (CSV, JSON summary).
    Simulate(Args),
    /// Coil-pair gradient, linearity and stability budget (JSON).
    Coils(Args),
}

#[derive(clap::Args)]
struct Args {
    /// TOML configuration file.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Gradient with unit, e.g. "25 G/cm".
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    /// Duration applied to every pulse, e.g. "5 us".
    #[arg(long)]
    duration: Option<String>,
    /// Delay between the pulses, e.g. "28 ms".
    #[arg(long)]
    delta_t: Option<String>,
    /// Number of atoms for `simulate`.
    #[arg(long)]
    n: Option<usize>,
    /// Primary output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary file for `simulate` (default: stderr).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Worker threads for the Monte Carlo.
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_flag<D: units::Dimension>(flag: &str, text: &str) -> Result<Quantity<D>> {
    text.parse()
        .map_err(|e| ConfigError(format!("flag `--{flag}`: {e}")).into())
}

impl Args {
    fn effective_config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(eta) = &self.eta {
            cfg.eta = parse_flag::<Gradient>("eta", eta)?;
        }
        if let Some(d) = &self.duration {
            let d = parse_flag::<Time>("duration", d)?;
            for p in &mut cfg.pulses {
                p.duration = d.clone();
            }
        }
        if let Some(dt) = &self.delta_t {
            cfg.delta_t = Some(parse_flag::<Time>("delta-t", dt)?);
        }
        if let Some(n) = self.n {
            match &mut cfg.ensemble {
                Some(e) => e.n = n,
                None => {
                    return Err(
                        ConfigError("flag `--n` needs an `[ensemble]` section".into()).into(),
                    )
                }
            }
        }
        if let Some(out) = &self.out {
            cfg.output.csv = Some(out.clone());
        }
        if let Some(s) = &self.summary {
            cfg.output.summary = Some(s.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(path: Option<&Path>, text: &str, fallback: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => fallback
            .write_all(text.as_bytes())
            .context("writing output"),
    }
}

fn run(cli: Cli) -> Result<()> {
    let (args, command): (&Args, fn(&RunConfig) -> Result<commands::Output>) = match &cli.command {
        Command::Scan(a) => (a, commands::scan),
        Command::Select(a) => (a, commands::select),
        Command::Probability(a) => (a, commands::probability),
        Command::Bands(a) => (a, commands::bands),
        Command::Simulate(a) => (a, commands::simulate),
        Command::Coils(a) => (a, commands::coils),
    };
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(ConfigError("flag `--threads`: must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring worker threads")?;
    }
    let cfg = args.effective_config()?;
    let out = command(&cfg)?;
    emit(
        cfg.output.csv.as_deref(),
        &out.primary,
        &mut std::io::stdout().lock(),
    )?;
    if let Some(summary) = out.summary {
        emit(
            cfg.output.summary.as_deref(),
            &summary,
            &mut std::io::stderr().lock(),
        )?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<ConfigError>()) {
        2
    } else if err.chain().any(|e| e.is::<velsel::Error>()) {
        3
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
