use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use noma_fbc::ReliabilityAccounting;

#[derive(Debug, Parser)]
#[command(
    name = "noma-fbc",
    version,
    about = "Energy-optimal two-user NOMA/TDMA allocation under finite-blocklength constraints"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a single channel realization.
    Solve(SolveArgs),
    /// Sweep the user-1 deadline for fixed channels and write a CSV.
    Sweep(SweepArgs),
    /// Monte-Carlo experiment over Rayleigh channels.
    Montecarlo(MonteCarloArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeChoice {
    Noma,
    Tdma,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reliability {
    PerStage,
    EndToEnd,
}

impl From<Reliability> for ReliabilityAccounting {
    fn from(r: Reliability) -> Self {
        match r {
            Reliability::PerStage => ReliabilityAccounting::PerStage,
            Reliability::EndToEnd => ReliabilityAccounting::EndToEnd,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChannelArgs {
    /// Squared channel gain |h1|^2 of user 1.
    #[arg(long, required_unless_present = "h1", conflicts_with = "h1")]
    pub g1: Option<f64>,
    /// Squared channel gain |h2|^2 of user 2.
    #[arg(long, required_unless_present = "h2", conflicts_with = "h2")]
    pub g2: Option<f64>,
    /// Channel magnitude |h1| (alternative to --g1).
    #[arg(long)]
    pub h1: Option<f64>,
    /// Channel magnitude |h2| (alternative to --g2).
    #[arg(long)]
    pub h2: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LinkArgs {
    #[arg(long, default_value_t = 160)]
    pub n1_bits: u32,
    #[arg(long, default_value_t = 160)]
    pub n2_bits: u32,
    #[arg(long, default_value_t = 1e-7)]
    pub eps1: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub eps2: f64,
    /// Deadline of user 2 in channel uses.
    #[arg(long)]
    pub d2: u32,
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    pub pmax_dbm: f64,
    #[arg(long, default_value_t = 100)]
    pub min_blocklength: u32,
    /// How a SIC receiver's error target is split between its two decoding stages.
    #[arg(long, value_enum, default_value_t = Reliability::PerStage)]
    pub reliability: Reliability,
    /// Bisection bracket width for the SINR search.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Deadline of user 1 in channel uses.
    #[arg(long)]
    pub d1: u32,
    #[command(flatten)]
    pub link: LinkArgs,
    #[arg(long, value_enum, default_value_t = SchemeChoice::All)]
    pub scheme: SchemeChoice,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    #[serde(skip)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// User-1 deadlines as start:stop:step (stop inclusive).
    #[arg(long)]
    pub d1_grid: Grid,
    #[command(flatten)]
    pub link: LinkArgs,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct MonteCarloArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "100:290:10")]
    pub d1_grid: Grid,
    #[arg(long, default_value_t = 300)]
    pub d2: u32,
    /// Budget for the energy-vs-D1 table.
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    pub pmax_dbm: f64,
    /// Budgets for the feasibility table, comma separated.
    #[arg(
        long,
        default_value = "20,25,30",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub pmax_dbm_grid: Vec<f64>,
    /// Rayleigh scale of the channel magnitudes.
    #[arg(long, default_value_t = 100.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 160)]
    pub n_bits: u32,
    #[arg(long, default_value_t = 1e-7)]
    pub eps: f64,
    #[arg(long, default_value_t = 100)]
    pub min_blocklength: u32,
    #[arg(long, value_enum, default_value_t = Reliability::PerStage)]
    pub reliability: Reliability,
    /// Re-run the configuration recorded in an earlier manifest; other
    /// experiment flags are ignored.
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
    /// Record the wall-clock time in the manifest (makes it non-reproducible byte for byte).
    #[arg(long)]
    pub timestamp: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Inclusive integer range `start:stop:step`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Grid {
    pub start: u32,
    pub stop: u32,
    pub step: u32,
}

impl Grid {
    pub fn values(&self) -> Vec<u32> {
        (self.start..=self.stop)
            .step_by(self.step as usize)
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(format!("expected start:stop:step, got '{s}'"));
        };
        let num = |p: &str| p.trim().parse::<u32>().map_err(|e| format!("'{p}': {e}"));
        let g = Grid {
            start: num(start)?,
            stop: num(stop)?,
            step: num(step)?,
        };
        if g.step == 0 {
            return Err("grid step must be positive".into());
        }
        if g.start > g.stop {
            return Err(format!("grid start {} exceeds stop {}", g.start, g.stop));
        }
        Ok(g)
    }
}
