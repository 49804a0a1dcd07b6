mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use yangkit::verifier::DEFAULT_SEED;

/// Exit status for malformed invocations.
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_GOLDEN: u8 = 2;
pub const EXIT_ERROR: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "yangkit", version, about = "Integrable four-state chains: R-matrix checks, charges and spectra")]
struct Cli {
    /// Seed for randomized grids and parameter draws.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output format; `csv` is only available for `spectrum`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regularity, Yang-Baxter, unitarity, extraction, symmetry and grading checks.
    Verify(VerifyArgs),
    /// Sector spectra of the periodic chain.
    Spectrum(SpectrumArgs),
    /// Norm of [Q2, Q3] on the periodic chain.
    Charges(ChargesArgs),
    /// Emit the integrability equations of an ansatz.
    Classify(ClassifyArgs),
    /// Two-excitation construction against exact diagonalization.
    Bethe2(Bethe2Args),
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Branch of models 1 and 2: generic, b=0 or a+c=0.
    #[arg(long)]
    pub branch: Option<String>,
    /// Parameter override, e.g. `--param rho=0.7` or `--param phi=0.1,0.2` for a complex value.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSel {
    All,
    One(u8),
}

fn parse_model_sel(s: &str) -> Result<ModelSel, String> {
    if s == "all" {
        return Ok(ModelSel::All);
    }
    parse_model(s).map(ModelSel::One)
}

fn parse_model(s: &str) -> Result<u8, String> {
    match s.parse::<u8>() {
        Ok(m) if (1..=18).contains(&m) => Ok(m),
        _ => Err(format!("`{s}` is not a model id (1-18)")),
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// `all` or a model id.
    #[arg(long, default_value = "all", value_parser = parse_model_sel)]
    pub model: ModelSel,
    /// One threshold for every residual check; the defaults are the acceptance thresholds.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub spec: ModelArgs,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: u8,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub length: u64,
    /// Excitation number p; all sectors when omitted.
    #[arg(long)]
    pub sector: Option<usize>,
    /// Compare with the stored table for this model and length; exit 2 on mismatch.
    #[arg(long)]
    pub golden: bool,
    /// Eigenvalue clustering radius.
    #[arg(long, default_value_t = yangkit::spectrum::CLUSTER_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub spec: ModelArgs,
}

#[derive(Args, Debug)]
pub struct ChargesArgs {
    #[arg(long, default_value = "all", value_parser = parse_model_sel)]
    pub model: ModelSel,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub length: u64,
    /// Seeded random parameter draws per entry, on top of the reference point.
    #[arg(long, default_value_t = 0)]
    pub draws: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub spec: ModelArgs,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// su2xsu2 or hubbard.
    #[arg(long)]
    pub ansatz: String,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub length: u64,
    /// Substitute every catalog density of the ansatz into the emitted system.
    #[arg(long = "check-table1")]
    pub check_table1: bool,
    /// Seeded random parameter draws per entry for `--check-table1`.
    #[arg(long, default_value_t = 2)]
    pub draws: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct Bethe2Args {
    #[arg(long, value_parser = parse_model)]
    pub model: u8,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub length: u64,
    /// Threshold on the multiset distance to the exact sector.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Threshold on the relative eigen-residual of reconstructed states.
    #[arg(long, default_value_t = 1e-9)]
    pub residual_tol: f64,
    #[command(flatten)]
    pub spec: ModelArgs,
}

/// Common settings passed to every command.
pub struct Ctx {
    pub seed: u64,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

/// What a command hands back to `main`.
pub enum Failure {
    Usage(String),
    Error(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let ctx = Ctx { seed: cli.seed, format: cli.format, out: cli.out };
    let result = match cli.command {
        Command::Verify(a) => commands::verify(&ctx, &a),
        Command::Spectrum(a) => commands::spectrum(&ctx, &a),
        Command::Charges(a) => commands::charges(&ctx, &a),
        Command::Classify(a) => commands::classify(&ctx, &a),
        Command::Bethe2(a) => commands::bethe2(&ctx, &a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Error(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
