//! `cxbox` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 unsupported regime.

mod commands;
mod spec;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cxbox", version, about = "Complex-degree B-splines and box splines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Problem spec JSON.
    #[arg(long)]
    pub spec: PathBuf,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the spec's truncation tolerance.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Seed for randomized sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FieldFormat {
    Binary,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Convolution,
    Pou,
    Twoscale,
    Derivative,
    Fractional,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluates at the points listed in a file (one point per line).
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        points: PathBuf,
    },
    /// Samples the time-domain spline on the grid's dual lattice.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Defaults to csv for `.csv` outputs, binary otherwise.
        #[arg(long, value_enum)]
        format: Option<FieldFormat>,
    },
    /// Fourier symbol on the frequency grid, as CSV.
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Refinement mask as JSON.
    Mask {
        #[command(flatten)]
        common: Common,
    },
    /// Runs identity checks and writes a JSON report.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Mask JSON (from `cxbox mask`) checked by the two-scale suite instead of a fresh one.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Frequency samples per symbol-level check.
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Fourier decay estimate as JSON (diagonal direction matrices).
    Decay {
        #[command(flatten)]
        common: Common,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use cxbox::Error as E;
    for cause in err.chain() {
        if cause.downcast_ref::<spec::SpecError>().is_some() || cause.downcast_ref::<serde_json::Error>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::GammaPole(_)
                | E::DivergentSeries(_)
                | E::ZeroColumn(_)
                | E::RankDeficient { .. }
                | E::SignConvention(_)
                | E::DimensionMismatch { .. }
                | E::InvalidArgument(_) => 2,
                _ => 3,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval { common, points } => commands::eval(&common, &points),
        Command::Sample { common, format } => commands::sample(&common, format),
        Command::Spectrum { common } => commands::spectrum(&common),
        Command::Mask { common } => commands::mask(&common),
        Command::Verify { common, suite, mask, points } => verify::run(&common, suite, mask.as_deref(), points),
        Command::Decay { common } => commands::decay(&common),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(std::io::stderr(), "error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
