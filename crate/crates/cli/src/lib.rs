//! Command-line front end for `sensorplace`.
//!
//! Every command reads a TOML run configuration, validates it together with
//! all input files, computes, and only then writes its outputs. A failure at
//! any stage leaves the output directory untouched.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use config::{MethodName, RunConfig};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "sensorplace",
    version,
    about = "Sparse sensor placement and field reconstruction"
)]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output` in the config; default `.`).
    #[arg(long, global = true, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Seed (overrides `seed` in the config).
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Suppress warnings and notices.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Image grid shape: x = column, y = row, origin at the top-left pixel
    /// (overrides [grid]).
    #[arg(long, global = true, num_args = 2, value_names = ["H", "W"])]
    pub image_shape: Option<Vec<usize>>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Place sensors; writes sensors.csv and pivots.csv.
    Fit,
    /// Reconstruct full states; writes reconstruction.csv (and rmse.txt for a test matrix).
    Reconstruct {
        /// Full-state snapshots; readings are taken at the sensors.
        #[arg(long, value_name = "PATH", conflicts_with = "measurements")]
        test: Option<PathBuf>,
        /// Sensor readings, one row per measurement in sensor rank order.
        #[arg(long, value_name = "PATH")]
        measurements: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Option<MethodName>,
    },
    /// Noise-induced reconstruction uncertainty; writes sigma.csv (and sigma.pgm on image grids).
    Heatmap {
        #[arg(long, value_enum)]
        method: Option<MethodName>,
    },
    /// Sensor energy landscape; writes landscape.csv (and landscape.pgm on image grids).
    Landscape {
        #[arg(long, value_enum)]
        kind: LandscapeKind,
        /// Reference sensors for `two`: comma-separated state indices or `selected`.
        #[arg(long = "ref", value_name = "LIST")]
        reference: Option<String>,
    },
    /// Test RMSE against the number of sensors; writes rmse_curve.csv.
    RmseCurve {
        /// Comma-separated sensor counts.
        #[arg(long, value_name = "LIST", conflicts_with = "p_range")]
        p: Option<String>,
        /// Inclusive range `a:b` or `a:b:step`.
        #[arg(long, value_name = "A:B[:STEP]")]
        p_range: Option<String>,
    },
    /// Seeded smooth random fields; writes train.csv and test.csv.
    GenerateSynthetic {
        #[arg(long)]
        height: usize,
        #[arg(long)]
        width: usize,
        /// Number of training snapshots.
        #[arg(long)]
        train: usize,
        /// Number of test snapshots.
        #[arg(long)]
        test: usize,
        /// Number of plane waves.
        #[arg(long, default_value_t = 80)]
        waves: usize,
        /// Ratio between successive wave amplitudes.
        #[arg(long, default_value_t = 0.95)]
        decay: f64,
        /// Per-pixel Gaussian noise standard deviation.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LandscapeKind {
    One,
    Two,
}

/// Runs a parsed command line; returns the files written.
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    commands::run(cli)
}
