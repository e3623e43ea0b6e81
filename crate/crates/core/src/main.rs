use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};
use monge_backlund::cli::doc::Document;
use monge_backlund::cli::run::{render_text, run, Command, Options};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Sub {
    /// Relative invariants S1, S2 and the Euler-Lagrange type of a [monge_ampere] document.
    Classify,
    /// phi0, the integrating factor, the Poincare-Cartan form and a Lagrangian.
    Lagrangian,
    /// d^2 = 0 on an abstract [frame], and invariance of [locus] invariant.
    VerifyFrame,
    /// Invariants of the [coframes] of an abstract frame.
    InvariantsAbstract,
    /// Restriction of a frame to [locus] substitute, with closedness of [locus.forms].
    Restrict,
    /// Euler-Lagrange obstructions of [backlund.lifting] values.
    BacklundObstruct,
    /// The pencil invariants mu and epsilon of a Backlund candidate.
    MuEpsilon,
    /// The rank-1 conditions of a Backlund candidate.
    CheckRank1,
    /// Derived flags: characteristic systems of a [monge_ampere] document or [derived] generators.
    Derived,
    /// One Backlund step of sine-Gordon from the vacuum.
    Soliton,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Symbolic toolkit for hyperbolic Monge-Ampere systems.
///
/// A PDE z_xy = F(x, y, z, p, q) is written as `rhs = "F"` in [monge_ampere];
/// it is encoded as C = 1/2, E = -F. Exit codes: 0 computed or passed,
/// 1 a check failed, 2 input error, 3 capability limit.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Sub,
    /// TOML input document.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Seed for all sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of sample points for numeric evidence.
    #[arg(long, default_value_t = 32)]
    samples: usize,
    /// Numeric tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Base point for potentials, as `x=0,y=1`.
    #[arg(long)]
    base: Option<String>,
    /// Add wall-clock time to the report.
    #[arg(long)]
    timings: bool,
    /// Write the soliton grid as CSV (x,y,v).
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn command(s: Sub) -> Command {
    match s {
        Sub::Classify => Command::Classify,
        Sub::Lagrangian => Command::Lagrangian,
        Sub::VerifyFrame => Command::VerifyFrame,
        Sub::InvariantsAbstract => Command::InvariantsAbstract,
        Sub::Restrict => Command::Restrict,
        Sub::BacklundObstruct => Command::BacklundObstruct,
        Sub::MuEpsilon => Command::MuEpsilon,
        Sub::CheckRank1 => Command::CheckRank1,
        Sub::Derived => Command::Derived,
        Sub::Soliton => Command::Soliton,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Options { seed: cli.seed, samples: cli.samples, tol: cli.tol, base: cli.base.clone(), timings: cli.timings, csv: cli.csv.clone() };
    let result = Document::load(&cli.input).and_then(|doc| run(command(cli.command), &doc, &opts));
    match result {
        Ok(out) => match emit(&out.report, cli.format) {
            Ok(()) => ExitCode::from(out.exit_code() as u8),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
        Err(e) => {
            let err = anyhow::Error::new(e.clone()).context(format!("{} failed", command(cli.command).name()));
            eprintln!("error: {err:#}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit(report: &serde_json::Value, format: Format) -> anyhow::Result<()> {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(report).context("serializing the report")?,
        Format::Text => render_text(report),
    };
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r.context("writing the report"),
    }
}
