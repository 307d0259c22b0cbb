//! CSV tables and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use noma_fbc::sim::{Cell, TrialBatch};
use noma_fbc::{Allocation, SolveOutcome};

pub const SWEEP_SCHEMA: &str = "noma-fbc.sweep.v1";
pub const SOLVE_SCHEMA: &str = "noma-fbc.solve.v1";
pub const ENERGY_SCHEMA: &str = "noma-fbc.energy-vs-d1.v1";
pub const FEASIBILITY_SCHEMA: &str = "noma-fbc.feasibility-vs-d1-pmax.v1";

pub const ALLOCATION_COLUMNS: &str = "m1,m2,p1,p2,gamma1,gamma2,energy";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `# schema=...` comment followed by the column header.
pub fn table_header(schema: &str, columns: &str) -> String {
    format!("# schema={schema}\n{columns}\n")
}

/// `feasible,m1,...,energy` cells for one outcome; allocation fields are blank when infeasible.
pub fn allocation_cells(outcome: &SolveOutcome) -> String {
    match outcome.allocation() {
        Some(Allocation {
            m1,
            m2,
            p1,
            p2,
            gamma1,
            gamma2,
            energy,
            ..
        }) => format!("true,{m1},{m2},{p1},{p2},{gamma1},{gamma2},{energy}"),
        None => "false,,,,,,,".to_string(),
    }
}

pub fn verdict_cell(outcome: &SolveOutcome) -> String {
    outcome
        .rejections()
        .iter()
        .map(|r| format!("{}:{}", r.scheme, verdict_name(r.verdict)))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn verdict_name(v: noma_fbc::Verdict) -> &'static str {
    use noma_fbc::Verdict::*;
    match v {
        PowerBudgetExceeded => "POWER_BUDGET_EXCEEDED",
        SicProductGeOne => "SIC_PRODUCT_GE_ONE",
        BlocklengthWindowEmpty => "BLOCKLENGTH_WINDOW_EMPTY",
        RateUnreachable => "RATE_UNREACHABLE",
    }
}

pub fn energy_table(batch: &TrialBatch) -> String {
    let mut s = table_header(
        ENERGY_SCHEMA,
        "d1,pmax_dbm,n_trials,noma_feasible,tdma_feasible,both_feasible,mean_energy_noma,mean_energy_tdma,mean_energy_noma_all,mean_energy_tdma_all",
    );
    for Cell {
        d1,
        p_max_dbm,
        summary: c,
        ..
    } in &batch.cells
    {
        writeln!(
            s,
            "{d1},{p_max_dbm},{},{},{},{},{},{},{},{}",
            c.n_trials,
            c.noma_feasible,
            c.tdma_feasible,
            c.both_feasible,
            opt(c.mean_energy_noma),
            opt(c.mean_energy_tdma),
            opt(c.mean_energy_noma_all),
            opt(c.mean_energy_tdma_all),
        )
        .unwrap();
    }
    s
}

pub fn feasibility_table(batch: &TrialBatch) -> String {
    let mut s = table_header(
        FEASIBILITY_SCHEMA,
        "d1,pmax_dbm,n_trials,noma_feasible,tdma_feasible,any_feasible",
    );
    for Cell {
        d1,
        p_max_dbm,
        summary: c,
        ..
    } in &batch.cells
    {
        writeln!(
            s,
            "{d1},{p_max_dbm},{},{},{},{}",
            c.n_trials, c.noma_feasible, c.tdma_feasible, c.any_feasible
        )
        .unwrap();
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    pub config: serde_json::Value,
    pub outputs: Vec<OutputEntry>,
    /// Seconds since the Unix epoch; only present when explicitly requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `contents` to `path` and returns its manifest entry, keyed by `name`.
pub fn write_output(path: &Path, name: &str, contents: &str) -> Result<OutputEntry> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(OutputEntry {
        path: name.to_string(),
        sha256: sha256_hex(contents.as_bytes()),
    })
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let mut json = serde_json::to_string_pretty(manifest)?;
    json.push('\n');
    fs::write(path, json).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not a run manifest", path.display()))
}

/// `<out>.manifest.json` next to a single-file output.
pub fn sibling_manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}
