//! `forge`: build, extract, link and audit polyhedral surrogate losses.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use forge_core::geometry::Norm;
use forge_core::Rational;

use crate::config::UBox;

#[derive(Parser, Debug)]
#[command(name = "forge", version, about = "Exact polyhedral surrogate losses, embeddings and calibrated links")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct Options {
    /// Denominator of the probability-simplex grid.
    #[arg(long, global = true, default_value_t = 8)]
    pub grid_m: u32,
    /// Norm used for thickening and distances.
    #[arg(long, global = true, default_value = "linf")]
    pub norm: Norm,
    /// Candidate epsilons, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_value = "1,1/2,1/4,1/8,1/16,1/32,1/64")]
    pub eps_ladder: Vec<Rational>,
    /// Report box: `R` for [-R, R]^d or `lo:hi`.
    #[arg(long, global = true)]
    pub u_box: Option<UBox>,
    /// Spacing of the report grid.
    #[arg(long, global = true, default_value = "1/8")]
    pub u_res: Rational,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (`zoo` prints to stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the conjugate surrogate of a discrete loss and verify the embedding.
    Embed { loss: PathBuf },
    /// Recover the discrete loss embedded by a polyhedral surrogate.
    Extract { surrogate: PathBuf },
    /// Validate epsilon on the ladder and build the thickened link.
    Link {
        surrogate: PathBuf,
        /// Reports preferred when the envelope has several elements.
        #[arg(long = "tie-break")]
        tie_break: Vec<String>,
        /// Number of random reports checked for a nonempty envelope.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Audit calibration of a link over the simplex grid.
    Calibrate { surrogate: PathBuf, link: PathBuf, loss: PathBuf },
    /// Draw SVG figures.
    Plot {
        #[command(subcommand)]
        kind: PlotKind,
    },
    /// Emit a built-in loss, surrogate or link.
    Zoo(ZooArgs),
}

#[derive(Subcommand, Debug)]
enum PlotKind {
    /// Level sets of a discrete loss over three outcomes.
    Simplex { loss: PathBuf },
    /// Link envelope (thickened links) or link regions (closed forms) in the plane.
    Envelope { surrogate: PathBuf, link: PathBuf },
}

#[derive(Args, Debug)]
pub struct ZooArgs {
    pub name: ZooName,
    /// Artifact to emit; each name has its own default.
    #[arg(long)]
    pub emit: Option<Artifact>,
    /// Number of labels (or outcomes for top-k).
    #[arg(long)]
    pub n: Option<usize>,
    /// Set size for top-k, ground-set size for lovasz-hinge.
    #[arg(long)]
    pub k: Option<usize>,
    /// Abstain cost.
    #[arg(long, default_value = "1/2")]
    pub alpha: Rational,
    /// Set-function file for `lovasz-hinge` (default: f(S) = 1 for nonempty S).
    #[arg(long)]
    pub set_function: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ZooName {
    ZeroOne,
    Hinge,
    Abstain,
    AbstainSurrogate,
    LovaszHinge,
    TopK,
    EmbeddedTop2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Artifact {
    Loss,
    Surrogate,
    Link,
}

/// Exit status of a completed command.
pub enum Status {
    Pass,
    Violation,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Embed { loss } => commands::embed(&cli.opts, &loss),
        Command::Extract { surrogate } => commands::extract(&cli.opts, &surrogate),
        Command::Link { surrogate, tie_break, samples } => commands::link(&cli.opts, &surrogate, &tie_break, samples),
        Command::Calibrate { surrogate, link, loss } => commands::calibrate(&cli.opts, &surrogate, &link, &loss),
        Command::Plot { kind: PlotKind::Simplex { loss } } => commands::plot_simplex(&cli.opts, &loss),
        Command::Plot { kind: PlotKind::Envelope { surrogate, link } } => {
            commands::plot_envelope(&cli.opts, &surrogate, &link)
        }
        Command::Zoo(args) => commands::zoo(&cli.opts, &args),
    };
    match result {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Violation) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
