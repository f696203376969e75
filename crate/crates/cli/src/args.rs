use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::table::Format;

/// Distances, optimal radii and Holevo bounds for the coherent-state
/// private quantum channel.
///
/// Numeric arguments marked GRID take comma lists and inclusive
/// `start:stop:step` ranges. Exit codes: 0 ok, 1 verification failure,
/// 2 invalid input, 3 internal consistency failure. `CVPQC_EPS` overrides
/// the default relative series tolerance (1e-15).
#[derive(Debug, Parser)]
#[command(name = "cvpqc", version)]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Write run provenance (versions, tolerances, dimensions) as JSON.
    #[arg(long, global = true)]
    pub json_log: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact squared HS distance between the disk state and Phi_N.
    Distance {
        /// Disk radius (GRID).
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Number of circles (GRID).
        #[arg(long = "N", allow_hyphen_values = true)]
        n: String,
        /// Also build both states as dense matrices and compare.
        #[arg(long)]
        with_oracle: bool,
        #[arg(long, default_value_t = 1e-12)]
        tail_budget: f64,
    },
    /// Key length in bits: from N, or from a target HS distance.
    Keybits {
        /// Number of circles (GRID).
        #[arg(long = "N", allow_hyphen_values = true, conflicts_with = "d", required_unless_present = "d")]
        n: Option<String>,
        /// Disk radius; adds the key length implied by the exact distance.
        #[arg(long, allow_hyphen_values = true, requires = "n")]
        b: Option<f64>,
        /// Target HS distance (GRID).
        #[arg(long, allow_hyphen_values = true)]
        d: Option<String>,
    },
    /// Squared HS distance of the single-circle phase-shift protocol.
    Simplified {
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        /// Number of phase shifts (GRID).
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        /// Displacement radius (GRID).
        #[arg(long, allow_hyphen_values = true)]
        r: String,
        #[arg(long)]
        with_oracle: bool,
        #[arg(long, default_value_t = 1e-12)]
        tail_budget: f64,
    },
    /// Optimal displacement radius of the simplified protocol.
    Rmin {
        /// Disk radius, in (0, 7] (GRID).
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Minimum distance per phase-shift count and the saturation point.
    Saturation {
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, default_value_t = 20)]
        p_max: usize,
        #[arg(long, default_value_t = 1e-4)]
        saturation_tol: f64,
    },
    /// Holevo bound of the encrypted channel, in bits.
    Holevo {
        /// Disk radius (GRID).
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Monte Carlo check that the doubly mixed channel state is diagonal.
    Diagonality {
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = crate::verify::DEFAULT_SEED)]
        seed: u64,
    },
    /// Data behind the published figures, as CSV/JSON.
    Figures {
        #[arg(value_enum)]
        which: Figure,
        /// Radius grid for fig1b and fig2 (GRID).
        #[arg(long, allow_hyphen_values = true)]
        b_grid: Option<String>,
        /// Disk radius for fig1a.
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, default_value_t = 20)]
        p_max: usize,
        /// Radii per phase-shift count in fig1a.
        #[arg(long, default_value_t = 200)]
        r_points: usize,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Run the built-in cross-checks; exits 1 if any fails.
    Verify {
        #[arg(value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Smaller grids and sample counts.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = crate::verify::DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, clap::Args)]
pub struct QuadArgs {
    #[arg(long, default_value_t = 64)]
    pub legendre_order: usize,
    #[arg(long, default_value_t = 256)]
    pub phi_points: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tail_budget: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Distance surface over (p, r) at fixed b.
    Fig1a,
    /// Optimal radius against b.
    Fig1b,
    /// Holevo bound against b.
    Fig2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Oracles,
    Limits,
    All,
}
