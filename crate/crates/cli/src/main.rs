mod commands;
mod error;
mod report;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::Outcome;
use crate::error::CliError;
use crate::spec::{ManifoldSpec, Pipeline};

/// Exact Fedosov quantization of contact manifolds in adapted charts.
#[derive(Debug, Parser)]
#[command(name = "contactq", version)]
struct Cli {
    /// Manifold spec file (TOML).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Fedosov weight N; overrides `trunc.weight`.
    #[arg(long, global = true)]
    weight: Option<i64>,
    /// ν-order K; overrides `trunc.nu_order`.
    #[arg(long = "nu-order", global = true)]
    nu_order: Option<u32>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Contact data and the identities it satisfies.
    Validate,
    /// Christoffel symbols, curvature and R_ξ of the connection.
    Geometry,
    /// The Fedosov one-form r and its postcondition checks.
    Fedosov,
    /// The ∗-product of two classical observables.
    Star { a: String, b: String },
    /// Δ applied to a function.
    Delta { a: String },
    /// The character χ.
    Chi,
    /// τ- and χ-periods of the closed characteristics.
    Periods,
    /// Solves for quantum corrections of a classical observable.
    Quantize { a0: String },
    /// Runs every invariant on the manifold.
    Selftest,
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let path = cli.spec.as_ref().ok_or_else(|| CliError::Io("--spec <file> is required".into()))?;
    let spec = ManifoldSpec::load(path)?;
    let p = Pipeline::build(&spec, cli.weight, cli.nu_order)?;
    match &cli.command {
        Command::Validate => commands::validate(&p),
        Command::Geometry => commands::geometry(&p),
        Command::Fedosov => commands::fedosov(&p),
        Command::Star { a, b } => commands::star(&p, a, b),
        Command::Delta { a } => commands::delta(&p, a),
        Command::Chi => commands::chi(&p),
        Command::Periods => commands::periods(&p),
        Command::Quantize { a0 } => commands::quantize_cmd(&p, a0),
        Command::Selftest => commands::selftest(&p),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, code) = match run(&cli) {
        Ok(o) => {
            let body = match cli.format {
                Format::Text => o.report.text(),
                Format::Json => o.report.json(),
            };
            (body, o.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code as u8)
}
