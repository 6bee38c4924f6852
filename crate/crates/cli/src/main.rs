//! `pmalab` command-line front end.
//!
//! Exit codes: 0 when every checked outcome passes, 1 when some outcome
//! fails, 2 on configuration or runtime errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "pmalab", version, about = "Numerical lab for the parabolic Monge-Ampère equation u_t = b (det D²u)^p")]
pub struct Cli {
    /// Run configuration file (flat dotted keys).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "pmalab-out")]
    pub out: PathBuf,
    /// Worker threads for the solver and probes.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Seed for randomized probes (never affects the solver).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the run described by --config and write snapshot CSVs.
    Solve,
    /// Build the self-similar profile, check it, and export it.
    Selfsimilar(SelfSimilarArgs),
    /// Convex-geometry operations on a saved grid function.
    #[command(subcommand)]
    Geometry(GeometryCommand),
    /// Diagnostics on saved snapshots.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Registered experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Debug, Args)]
pub struct SelfSimilarArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Extinction time `T`.
    #[arg(long, default_value_t = 1.0)]
    pub extinction: f64,
    /// Tabulation samples of the one-dimensional profile.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Cells across the reduced window used for the residual check.
    #[arg(long, default_value_t = 400)]
    pub cells: usize,
}

/// A saved grid function and a point on it.
#[derive(Debug, Args)]
pub struct PointArgs {
    /// Grid CSV file.
    #[arg(long)]
    pub input: PathBuf,
    /// Coordinates of the base point (nearest node is used).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub at: Vec<f64>,
}

/// A saved grid function and an affine function `a·x + c`.
#[derive(Debug, Args)]
pub struct AffineArgs {
    /// Slope vector `a`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub slope: Vec<f64>,
    /// Offset `c`.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub offset: f64,
    /// Contact tolerance; defaults to the squared grid spacing.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum GeometryCommand {
    /// Centered section of height `h` at a point.
    Section {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        height: f64,
    },
    /// John ellipsoid of the centered section at a point.
    John {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        height: f64,
    },
    /// Contact set with an affine function.
    Flat {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        affine: AffineArgs,
    },
    /// Discrete Legendre transform on the box of slopes.
    Legendre {
        #[arg(long)]
        input: PathBuf,
        /// Spacing of the dual lattice.
        #[arg(long)]
        spacing: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Opening of the angle set along a lattice direction and its decay exponent.
    Angle {
        #[command(flatten)]
        point: PointArgs,
        /// Integer lattice direction.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        dir: Vec<i32>,
        #[arg(long, default_value_t = 0.1)]
        h_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        h_min: f64,
        #[arg(long, default_value_t = 8)]
        count: usize,
    },
    /// Log-log fit of `u(x, t) − u(x, t₀)` against `t − t₀`.
    Holder {
        /// Snapshot CSV files in time order, the initial state first.
        #[arg(long, num_args = 1.., required = true)]
        snapshots: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        at: Vec<f64>,
    },
    /// First time each node in a ball exceeds a threshold.
    Separation {
        #[arg(long, num_args = 1.., required = true)]
        snapshots: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        at: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        radius: f64,
        /// Threshold; defaults to `10 h² Λ` with `Λ = 1`.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Growth exponent of `u − l` away from its contact set.
    Interface {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        affine: AffineArgs,
        /// Largest distance from the contact set used in the fit.
        #[arg(long, default_value_t = 0.5)]
        d_max: f64,
    },
    /// Classify the contact set of the last snapshot.
    Dichotomy {
        #[arg(long, num_args = 1.., required = true)]
        snapshots: Vec<PathBuf>,
        #[command(flatten)]
        affine: AffineArgs,
        /// Allowed change of `u` on the contact set.
        #[arg(long)]
        eps_flat: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCommand {
    /// Run one experiment and write its artifacts under <out>/<name>.
    Run { name: String },
    /// List experiments, optionally only those whose name or topic matches.
    List {
        #[arg(long)]
        filter: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
