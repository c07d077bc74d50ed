//! `pdc`: rate curves, finite-length tables, protocol simulation, estimation,
//! leakage comparison and the entropy identity check, as CSV or JSON.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod output;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] pdc_core::Error),
    #[error("{0}")]
    Check(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use pdc_core::Error as E;
        match self {
            Self::Core(E::Infeasible(_)) => 3,
            Self::Core(E::SizeCap { .. }) => 4,
            Self::Io(_) | Self::Check(_) => 1,
            Self::Usage(_) | Self::Core(_) => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Args)]
pub struct Common {
    /// Write here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Output format; `simulate` defaults to json, everything else to csv.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Master seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Parser)]
#[command(
    name = "pdc",
    version,
    about = "Private dense coding rates, bounds and simulation"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Asymptotic rates over a depolarizing mix grid.
    Rates {
        #[arg(long, default_value_t = 2)]
        p: u32,
        /// `start:stop:step`, inclusive.
        #[arg(long, default_value = "0:0.25:0.0025")]
        mix_grid: String,
        /// Fixed Alice-to-Bob mix; by default both legs use the grid value.
        #[arg(long)]
        mix_tilde: Option<f64>,
    },
    /// Finite-length block sizes and rates.
    Finite {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 0.05)]
        mix: f64,
        #[arg(long)]
        mix_tilde: Option<f64>,
        /// Comma-separated channel-use counts.
        #[arg(long, default_value = "1000,10000,100000,1000000")]
        n_grid: String,
        #[arg(long, default_value_t = 0.2)]
        eps_c: f64,
        #[arg(long, default_value_t = 1e-9)]
        eps_e: f64,
        #[arg(long, default_value_t = 1e-9)]
        eps_b: f64,
    },
    /// Monte Carlo runs of the protocol.
    Simulate {
        /// Flat `key = value` file (p, n, n1, n2, n3, mix_bob_to_alice, mix_alice_to_bob, code, seed).
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = AdversaryArg::None)]
        adversary: AdversaryArg,
        /// Include the transcripts of the first N trials.
        #[arg(long, default_value_t = 0)]
        dump: u64,
    },
    /// Reconstructs a Pauli distribution from the p + 1 measurement settings.
    Estimate {
        #[arg(long, default_value_t = 2)]
        p: u32,
        /// Depolarizing mix of the true distribution.
        #[arg(long, default_value_t = 0.05, conflicts_with = "probs")]
        mix: f64,
        /// Explicit true distribution, p^2 comma-separated values indexed x * p + z.
        #[arg(long)]
        probs: Option<String>,
        /// Shots per setting; 0 uses exact marginals.
        #[arg(long, default_value_t = 0)]
        shots: u64,
    },
    /// Exact leakage against its bound on a tiny instance.
    Leakage {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// `identity`, `repetition:<r>` or `random:<n1>[:<seed>]`.
        #[arg(long, default_value = "identity")]
        code: String,
        #[arg(long, default_value_t = 1)]
        n2: usize,
        #[arg(long, default_value_t = 1)]
        n3: usize,
        /// Depolarizing mix of Eve's additive channel, or of the purified state with --quantum.
        #[arg(long, default_value_t = 0.2)]
        eve_mix: f64,
        /// Eve holds the purification instead of a classical copy.
        #[arg(long)]
        quantum: bool,
        /// Number of log-spaced t points on [1e-3, 1].
        #[arg(long)]
        t_points: Option<usize>,
    },
    /// Checks the closed-form entropy relations with the exact quantum oracle.
    VerifyIdentities {
        #[arg(long, default_value_t = 2)]
        p: u32,
        /// Random (P, P~) pairs.
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AdversaryArg {
    None,
    Intercept,
    Tamper,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let c = &cli.common;
    match cli.command {
        Command::Rates {
            p,
            mix_grid,
            mix_tilde,
        } => commands::rates(c, p, &mix_grid, mix_tilde),
        Command::Finite {
            p,
            mix,
            mix_tilde,
            n_grid,
            eps_c,
            eps_e,
            eps_b,
        } => commands::finite(c, p, mix, mix_tilde, &n_grid, [eps_c, eps_e, eps_b]),
        Command::Simulate {
            config,
            trials,
            adversary,
            dump,
        } => commands::simulate(c, &config, trials, adversary, dump),
        Command::Estimate {
            p,
            mix,
            probs,
            shots,
        } => commands::estimate(c, p, mix, probs.as_deref(), shots),
        Command::Leakage {
            p,
            n,
            code,
            n2,
            n3,
            eve_mix,
            quantum,
            t_points,
        } => commands::leakage(
            c,
            commands::LeakageArgs {
                p,
                n,
                code,
                n2,
                n3,
                eve_mix,
                quantum,
                t_points,
            },
        ),
        Command::VerifyIdentities { p, count, tol } => {
            commands::verify_identities(c, p, count, tol)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pdc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
