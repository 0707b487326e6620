//! `hgsoliton`: command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 not coercive, 4 no convergence
//! or quadrature tolerance not met.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "hgsoliton", version, about = "H^g invariants of toric log Fano polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = NormalizationArg::Probability)]
    pub normalization: NormalizationArg,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationArg {
    Probability,
    Lebesgue,
}

#[derive(Subcommand)]
pub enum Command {
    /// Minimize H^g and certify the soliton candidate.
    Soliton {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        weight: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// H^g with gradient and Hessian at a coweight.
    Eval {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        weight: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        #[command(flatten)]
        common: Common,
    },
    /// Weighted Ding invariant D^{g',ξ}(η).
    Ding {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        weight: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        #[arg(long, allow_hyphen_values = true)]
        eta: String,
        #[command(flatten)]
        common: Common,
    },
    /// Exact DH measure of a twist, or its level-m discretization.
    Dh {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        #[arg(long)]
        m: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact d1 distance between two twists.
    D1 {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        #[arg(long, allow_hyphen_values = true)]
        eta: String,
        #[command(flatten)]
        common: Common,
    },
    /// Toric-restricted weighted δ at a coweight.
    Delta {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        weight: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        #[command(flatten)]
        common: Common,
    },
    /// Convexity of H^g along the segment from ξ to η.
    Geodesic {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        weight: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        #[arg(long, allow_hyphen_values = true)]
        eta: String,
        #[arg(long, default_value_t = 9)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// β̃ of a rank-one profile, at one rescaling or minimized.
    Rankone {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        weight: PathBuf,
        #[arg(long, conflicts_with = "minimize")]
        eval: Option<f64>,
        #[arg(long)]
        minimize: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Solve for every weight file in a directory.
    Sweep {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        weights_dir: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Validate a polytope and, optionally, a weight.
    Check {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        weight: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hgsoliton: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
