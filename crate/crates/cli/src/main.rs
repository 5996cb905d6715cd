//! `bb84-probe`: command-line front end.
//!
//! Every subcommand emits an [`output::OutputEnvelope`] as JSON, or a CSV
//! table with a JSON sidecar when `--format csv` writes to a file.

mod angle;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use angle::parse_angle;

#[derive(Debug, Parser)]
#[command(
    name = "bb84-probe",
    version,
    about = "Entangling-probe attacks on the four-state protocol"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format; defaults to csv for `capacity` and `sweep`, json otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Output file, or directory to place `<command>.<ext>` in. Defaults to
    /// `$OUTPUT_DIR/<command>.<ext>`, else standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    SetE,
    SetH,
    SetPhiNeg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Reference {
    Optimal,
    Csc,
    Sec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variable {
    ErrorRate,
    Alpha,
}

#[derive(Debug, Args)]
pub struct AlphaArg {
    /// Signal half-angle, radians or a multiple of pi (`pi/8`, `0.3pi`).
    #[arg(long, default_value = "pi/8", value_parser = parse_angle, allow_hyphen_values = true)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct AnglesArg {
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub alpha: AlphaArg,
    /// Raw transmitted bits.
    #[arg(long, default_value_t = 400_000)]
    pub n: u64,
    /// Optimum family to attack with; requires `--error-rate`.
    #[arg(long, value_enum, conflicts_with_all = ["lambda", "mu", "theta", "phi"])]
    pub family: Option<Family>,
    #[arg(long, conflicts_with_all = ["lambda", "mu", "theta", "phi"])]
    pub error_rate: Option<f64>,
    #[command(flatten)]
    pub angles: AnglesArg,
    /// Allowed probability of successful eavesdropping.
    #[arg(long, default_value_t = 0.01)]
    pub p_fail: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Leaked reconciliation bits per sifted bit as `f h(e_T/n)`; zero if absent.
    #[arg(long)]
    pub leak_fraction: Option<f64>,
    /// Sample transmitted states and per-state detection probabilities.
    #[arg(long)]
    pub four_state: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error rate, overlap and information at one probe parameter point.
    Evaluate {
        #[command(flatten)]
        alpha: AlphaArg,
        #[command(flatten)]
        angles: AnglesArg,
    },
    /// Optimum overlap, information and parameter families at an error rate.
    Optimal {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long)]
        error_rate: f64,
    },
    /// Brute-force check that no constrained point beats the optimum.
    /// Exits 1 if any violation is found.
    Verify {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long)]
        error_rate: f64,
        #[arg(long, default_value_t = 40)]
        resolution: usize,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        /// Curve the sampled overlaps are compared with.
        #[arg(long, value_enum, default_value = "optimal")]
        reference: Reference,
        /// Run the penalty formulation with this starting weight instead.
        #[arg(long)]
        penalty: Option<f64>,
    },
    /// Asymptotic secrecy capacity over a range of error rates.
    Capacity {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long, default_value_t = 0.0)]
        e_min: f64,
        /// Defaults to the largest admissible error rate.
        #[arg(long)]
        e_max: Option<f64>,
        #[arg(long, default_value_t = 51)]
        steps: usize,
    },
    /// Defense frontier and compression level for a finite key.
    Frontier {
        #[command(flatten)]
        alpha: AlphaArg,
        /// Sifted bits.
        #[arg(long)]
        n: u64,
        /// Observed errors.
        #[arg(long)]
        errors: u64,
        #[arg(long, default_value_t = 0.01)]
        p_fail: f64,
        #[arg(long)]
        leak_fraction: Option<f64>,
        /// Fail instead of clamping arguments beyond the largest error rate.
        #[arg(long)]
        no_clamp: bool,
    },
    /// Monte Carlo run of sifting, error estimation and distillation.
    Simulate {
        #[command(flatten)]
        attack: AttackArgs,
    },
    /// Classification of the twelve candidate stationary solutions.
    Possibilities {
        #[command(flatten)]
        alpha: AlphaArg,
        #[arg(long)]
        error_rate: f64,
    },
    /// Simulations over a list of error rates or half-angles.
    Sweep {
        #[command(flatten)]
        attack: AttackArgs,
        #[arg(long, value_enum, default_value = "error-rate")]
        variable: Variable,
        /// Comma-separated values; angles for `alpha`.
        #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
        /// Evenly spaced values from `--from` to `--to` when `--values` is absent.
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long, default_value_t = 12)]
        steps: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::dispatch(cli.command, cli.format, cli.out) {
        Ok(status) => status.into(),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
