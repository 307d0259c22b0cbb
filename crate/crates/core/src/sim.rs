//! Seeded Monte-Carlo experiments over Rayleigh channels.
//!
//! Trial `i` draws its channels from a ChaCha8 stream keyed by `(seed, i)`, so
//! the same trial sees the same channels in every grid cell (common random
//! numbers) and results do not depend on how trials are spread over threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbc_rate::{UserSpec, DEFAULT_MIN_BLOCKLENGTH};
use crate::noma::{label_users, solve_noma, ChannelPair, PowerBudget, SolveOptions, SolveOutcome};
use crate::tdma::TdmaProfile;

/// Name of the generator behind [`trial_rng`], recorded in run manifests.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng(seed_from_u64(seed), stream = trial index)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_trials: u32,
    pub seed: u64,
    /// Rayleigh `sigma` of `|h|`.
    pub rayleigh_scale: f64,
    pub d1_grid: Vec<u32>,
    pub d2: u32,
    /// Budget used by the energy sweep.
    pub energy_p_max_dbm: f64,
    /// Budgets scanned by the feasibility sweep.
    pub p_max_dbm_grid: Vec<f64>,
    pub payload_bits: u32,
    pub error_target: f64,
    pub min_blocklength: u32,
    pub solver: SolveOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_trials: 1000,
            seed: 1,
            rayleigh_scale: 100.0,
            d1_grid: (100..=290).step_by(10).collect(),
            d2: 300,
            energy_p_max_dbm: 30.0,
            p_max_dbm_grid: vec![20.0, 25.0, 30.0],
            payload_bits: 160,
            error_target: 1e-7,
            min_blocklength: DEFAULT_MIN_BLOCKLENGTH,
            solver: SolveOptions::default(),
        }
    }
}

impl ExperimentConfig {
    /// Deadlines equal to `d2` are allowed and resolved by the tie rule of
    /// [`label_users`].
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_trials == 0 {
            return bad("n_trials must be at least 1".into());
        }
        if self.d1_grid.is_empty() {
            return bad("d1 grid is empty".into());
        }
        if self.p_max_dbm_grid.is_empty() {
            return bad("pmax grid is empty".into());
        }
        if !(self.rayleigh_scale > 0.0 && self.rayleigh_scale.is_finite()) {
            return bad(format!(
                "rayleigh scale must be positive, got {}",
                self.rayleigh_scale
            ));
        }
        if let Some(d1) = self.d1_grid.iter().find(|&&d1| d1 > self.d2) {
            return bad(format!("d1 = {d1} exceeds d2 = {}", self.d2));
        }
        for &dbm in self.p_max_dbm_grid.iter().chain([&self.energy_p_max_dbm]) {
            PowerBudget::from_dbm(dbm)?;
        }
        for &d1 in &self.d1_grid {
            self.user(d1)?;
        }
        self.user(self.d2)?;
        Ok(())
    }

    fn user(&self, deadline: u32) -> Result<UserSpec> {
        UserSpec::new(
            self.payload_bits,
            self.error_target,
            deadline,
            self.min_blocklength,
        )
    }
}

/// Independent generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws `|h1|`, `|h2|` i.i.d. Rayleigh(`scale`) and returns their squares.
pub fn draw_channels<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> ChannelPair {
    let mut gain = || {
        let u: f64 = rng.gen();
        // |h|^2 = -2 sigma^2 ln(1 - U); guard the (never observed) zero draw
        (-2.0 * scale * scale * (-u).ln_1p()).max(f64::MIN_POSITIVE)
    };
    let g1 = gain();
    let g2 = gain();
    ChannelPair { g1, g2 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u32,
    pub channels: ChannelPair,
    pub noma: SolveOutcome,
    pub tdma: SolveOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n_trials: u32,
    pub noma_feasible: f64,
    pub tdma_feasible: f64,
    /// Fraction of trials where at least one scheme is feasible.
    pub any_feasible: f64,
    pub both_feasible: u32,
    /// Means over trials where both schemes are feasible.
    pub mean_energy_noma: Option<f64>,
    pub mean_energy_tdma: Option<f64>,
    /// Means over each scheme's own feasible trials.
    pub mean_energy_noma_all: Option<f64>,
    pub mean_energy_tdma_all: Option<f64>,
}

impl CellSummary {
    /// Recomputes the aggregates from trial records, in trial order.
    pub fn from_records(records: &[TrialRecord]) -> Self {
        fn mean(it: impl Iterator<Item = f64>) -> Option<f64> {
            let (sum, n) = it.fold((0.0, 0u32), |(s, n), x| (s + x, n + 1));
            (n > 0).then(|| sum / n as f64)
        }
        let n = records.len() as u32;
        let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        let both = || {
            records
                .iter()
                .filter(|r| r.noma.is_feasible() && r.tdma.is_feasible())
        };
        Self {
            n_trials: n,
            noma_feasible: frac(records.iter().filter(|r| r.noma.is_feasible()).count()),
            tdma_feasible: frac(records.iter().filter(|r| r.tdma.is_feasible()).count()),
            any_feasible: frac(
                records
                    .iter()
                    .filter(|r| r.noma.is_feasible() || r.tdma.is_feasible())
                    .count(),
            ),
            both_feasible: both().count() as u32,
            mean_energy_noma: mean(both().filter_map(|r| r.noma.energy())),
            mean_energy_tdma: mean(both().filter_map(|r| r.tdma.energy())),
            mean_energy_noma_all: mean(records.iter().filter_map(|r| r.noma.energy())),
            mean_energy_tdma_all: mean(records.iter().filter_map(|r| r.tdma.energy())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub d1: u32,
    pub p_max_dbm: f64,
    pub summary: CellSummary,
    pub records: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialBatch {
    pub cells: Vec<Cell>,
}

impl TrialBatch {
    pub fn cell(&self, d1: u32, p_max_dbm: f64) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.d1 == d1 && c.p_max_dbm == p_max_dbm)
    }
}

/// Channel draws for every trial, in trial order.
pub fn draw_all(cfg: &ExperimentConfig) -> Vec<ChannelPair> {
    (0..cfg.n_trials)
        .map(|i| draw_channels(&mut trial_rng(cfg.seed, i as u64), cfg.rayleigh_scale))
        .collect()
}

/// One trial evaluated at every `d1` for a single budget.
fn run_trial(
    cfg: &ExperimentConfig,
    trial: u32,
    ch: ChannelPair,
    budget: PowerBudget,
) -> Result<Vec<TrialRecord>> {
    let s2 = cfg.user(cfg.d2)?;
    // the TDMA profile only depends on D1 through its window, build it once
    // per labeling (labels flip only on a deadline tie)
    let mut profiles: [Option<TdmaProfile>; 2] = [None, None];
    let mut out = Vec::with_capacity(cfg.d1_grid.len());
    for &d1 in &cfg.d1_grid {
        let s1 = cfg.user(d1)?;
        let noma = solve_noma(&ch, &s1, &s2, budget, &cfg.solver)?.outcome;
        let l = label_users(&ch, &s1, &s2);
        let slot = &mut profiles[l.swapped as usize];
        if slot.is_none() {
            let widest = l.s1.with_deadline(l.s2.deadline)?;
            *slot = Some(TdmaProfile::build(
                &l.ch,
                &widest,
                &l.s2,
                budget,
                &cfg.solver,
            )?);
        }
        let tdma = slot.as_ref().map(|p| p.best_within(l.s1.deadline)).unwrap();
        out.push(TrialRecord {
            trial,
            channels: ch,
            noma,
            tdma,
        });
    }
    Ok(out)
}

fn run_budgets(cfg: &ExperimentConfig, budgets_dbm: &[f64]) -> Result<TrialBatch> {
    cfg.validate()?;
    let channels = draw_all(cfg);
    let mut cells = Vec::with_capacity(budgets_dbm.len() * cfg.d1_grid.len());
    for &dbm in budgets_dbm {
        let budget = PowerBudget::from_dbm(dbm)?;
        // per-trial rows, each holding one record per d1
        let rows: Vec<Vec<TrialRecord>> = channels
            .par_iter()
            .enumerate()
            .map(|(i, &ch)| run_trial(cfg, i as u32, ch, budget))
            .collect::<Result<_>>()?;
        for (k, &d1) in cfg.d1_grid.iter().enumerate() {
            let records: Vec<TrialRecord> = rows.iter().map(|r| r[k].clone()).collect();
            cells.push(Cell {
                d1,
                p_max_dbm: dbm,
                summary: CellSummary::from_records(&records),
                records,
            });
        }
    }
    Ok(TrialBatch { cells })
}

/// Mean NOMA and TDMA energy against `D1` at the budget `cfg.energy_p_max_dbm`.
pub fn run_energy_sweep(cfg: &ExperimentConfig) -> Result<TrialBatch> {
    run_budgets(cfg, &[cfg.energy_p_max_dbm])
}

/// Feasibility fractions for every `(D1, Pmax)` pair of the grids.
pub fn run_feasibility_sweep(cfg: &ExperimentConfig) -> Result<TrialBatch> {
    run_budgets(cfg, &cfg.p_max_dbm_grid)
}
