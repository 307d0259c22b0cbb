use std::fmt::Write as _;
use std::fs;
use std::io::Write;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use noma_fbc::sim::{self, ExperimentConfig};
use noma_fbc::{
    label_users, solve_noma, solve_tdma, ChannelPair, NomaDecision, PowerBudget, SolveOptions,
    SolveOutcome, UserSpec,
};

use crate::args::{
    ChannelArgs, Format, LinkArgs, MonteCarloArgs, SchemeChoice, SolveArgs, SweepArgs,
};
use crate::output::{self, RunManifest};

pub const EXIT_FEASIBLE: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

const TOOL_VERSION: &str = concat!("noma-fbc ", env!("CARGO_PKG_VERSION"));

fn channels(args: &ChannelArgs) -> Result<ChannelPair> {
    let g = |g: Option<f64>, h: Option<f64>, which: &str| match (g, h) {
        (Some(g), _) => Ok(g),
        (None, Some(h)) => Ok(h * h),
        (None, None) => bail!("missing --g{which} (or --h{which})"),
    };
    let ch = ChannelPair::new(g(args.g1, args.h1, "1")?, g(args.g2, args.h2, "2")?)?;
    Ok(ch)
}

struct Instance {
    ch: ChannelPair,
    budget: PowerBudget,
    opts: SolveOptions,
    s2: UserSpec,
}

impl Instance {
    fn new(channel: &ChannelArgs, link: &LinkArgs) -> Result<Self> {
        Ok(Self {
            ch: channels(channel)?,
            budget: PowerBudget::from_dbm(link.pmax_dbm).context("--pmax-dbm")?,
            opts: SolveOptions {
                tol: link.tol,
                reliability: link.reliability.into(),
            },
            s2: UserSpec::new(link.n2_bits, link.eps2, link.d2, link.min_blocklength)
                .context("user 2")?,
        })
    }

    fn user1(&self, link: &LinkArgs, d1: u32) -> Result<UserSpec> {
        UserSpec::new(link.n1_bits, link.eps1, d1, link.min_blocklength).context("user 1")
    }

    fn noma(&self, s1: &UserSpec) -> Result<NomaDecision> {
        Ok(solve_noma(&self.ch, s1, &self.s2, self.budget, &self.opts)?)
    }

    fn tdma(&self, s1: &UserSpec) -> Result<SolveOutcome> {
        let l = label_users(&self.ch, s1, &self.s2);
        Ok(solve_tdma(&l.ch, &l.s1, &l.s2, self.budget, &self.opts)?)
    }
}

#[derive(Debug, Serialize)]
struct SolveReport<'a> {
    inputs: &'a SolveArgs,
    g1: f64,
    g2: f64,
    p_max: f64,
    /// Input user 2 was relabelled as user 1 (allocations use the internal labels).
    swapped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    relabel: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noma: Option<NomaDecision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tdma: Option<SolveOutcome>,
}

pub fn solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let inst = Instance::new(&args.channel, &args.link)?;
    let s1 = inst.user1(&args.link, args.d1)?;
    let l = label_users(&inst.ch, &s1, &inst.s2);
    let relabel = if s1.deadline == inst.s2.deadline {
        Some("deadline tie: the user with the weaker channel is labelled user 1")
    } else if l.swapped {
        Some("user 2 has the shorter deadline and is labelled user 1")
    } else {
        None
    };
    let want_noma = matches!(args.scheme, SchemeChoice::Noma | SchemeChoice::All);
    let want_tdma = matches!(args.scheme, SchemeChoice::Tdma | SchemeChoice::All);
    let report = SolveReport {
        inputs: args,
        g1: inst.ch.g1,
        g2: inst.ch.g2,
        p_max: inst.budget.watts(),
        swapped: l.swapped,
        relabel,
        noma: want_noma.then(|| inst.noma(&s1)).transpose()?,
        tdma: want_tdma.then(|| inst.tdma(&s1)).transpose()?,
    };

    match args.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
        Format::Csv => out.write_all(solve_csv(&report).as_bytes())?,
        Format::Text => out.write_all(solve_text(&report).as_bytes())?,
    }

    let any_feasible = report
        .noma
        .as_ref()
        .is_some_and(|d| d.outcome.is_feasible())
        || report.tdma.as_ref().is_some_and(SolveOutcome::is_feasible);
    Ok(if any_feasible {
        EXIT_FEASIBLE
    } else {
        EXIT_INFEASIBLE
    })
}

fn solve_rows(report: &SolveReport) -> Vec<(&'static str, SolveOutcome)> {
    let mut rows = Vec::new();
    if let Some(d) = &report.noma {
        rows.push(("noma", d.outcome.clone()));
    }
    if let Some(t) = &report.tdma {
        rows.push(("tdma", t.clone()));
    }
    rows
}

fn solve_csv(report: &SolveReport) -> String {
    let mut s = output::table_header(
        output::SOLVE_SCHEMA,
        &format!(
            "family,scheme,feasible,{},verdict",
            output::ALLOCATION_COLUMNS
        ),
    );
    for (family, outcome) in solve_rows(report) {
        let scheme = outcome
            .allocation()
            .map(|a| a.scheme.as_str())
            .unwrap_or("");
        writeln!(
            s,
            "{family},{scheme},{},{}",
            output::allocation_cells(&outcome),
            output::verdict_cell(&outcome)
        )
        .unwrap();
    }
    s
}

fn solve_text(report: &SolveReport) -> String {
    let mut s = format!(
        "g1 = {}  g2 = {}  Pmax = {} W\n",
        report.g1, report.g2, report.p_max
    );
    if let Some(r) = report.relabel {
        writeln!(s, "relabel: {r}").unwrap();
    }
    for (family, outcome) in solve_rows(report) {
        match outcome.allocation() {
            Some(a) => writeln!(
                s,
                "{family:>4}: {}  m = ({}, {})  p = ({:.6e}, {:.6e})  gamma = ({:.6}, {:.6})  energy = {:.6e}",
                a.scheme, a.m1, a.m2, a.p1, a.p2, a.gamma1, a.gamma2, a.energy
            ),
            None => writeln!(s, "{family:>4}: infeasible ({})", output::verdict_cell(&outcome)),
        }
        .unwrap();
    }
    s
}

pub fn sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let inst = Instance::new(&args.channel, &args.link)?;
    let grid = args.d1_grid.values();
    if let Some(d1) = grid.iter().find(|&&d1| d1 > args.link.d2) {
        bail!("--d1-grid value {d1} exceeds --d2 {}", args.link.d2);
    }
    let mut csv = output::table_header(
        output::SWEEP_SCHEMA,
        &format!("d1,scheme,feasible,{}", output::ALLOCATION_COLUMNS),
    );
    for d1 in grid {
        let s1 = inst.user1(&args.link, d1)?;
        for (family, outcome) in [("noma", inst.noma(&s1)?.outcome), ("tdma", inst.tdma(&s1)?)] {
            writeln!(csv, "{d1},{family},{}", output::allocation_cells(&outcome)).unwrap();
        }
    }
    let name = args
        .out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let entry = output::write_output(&args.out, &name, &csv)?;
    let manifest = RunManifest {
        version: TOOL_VERSION.into(),
        command: "sweep".into(),
        seed: None,
        rng: None,
        config: serde_json::to_value(args)?,
        outputs: vec![entry],
        timestamp: None,
    };
    let manifest_path = output::sibling_manifest_path(&args.out);
    output::write_manifest(&manifest_path, &manifest)?;
    writeln!(
        out,
        "wrote {} and {}",
        args.out.display(),
        manifest_path.display()
    )?;
    Ok(EXIT_FEASIBLE)
}

pub const ENERGY_FILE: &str = "energy_vs_d1.csv";
pub const FEASIBILITY_FILE: &str = "feasibility_vs_d1_pmax.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

fn experiment_config(args: &MonteCarloArgs) -> Result<ExperimentConfig> {
    if let Some(path) = &args.from_manifest {
        let m = output::read_manifest(path)?;
        return serde_json::from_value(m.config)
            .with_context(|| format!("{} does not hold an experiment config", path.display()));
    }
    Ok(ExperimentConfig {
        n_trials: args.trials,
        seed: args.seed,
        rayleigh_scale: args.scale,
        d1_grid: args.d1_grid.values(),
        d2: args.d2,
        energy_p_max_dbm: args.pmax_dbm,
        p_max_dbm_grid: args.pmax_dbm_grid.clone(),
        payload_bits: args.n_bits,
        error_target: args.eps,
        min_blocklength: args.min_blocklength,
        solver: SolveOptions {
            reliability: args.reliability.into(),
            ..SolveOptions::default()
        },
    })
}

pub fn montecarlo(args: &MonteCarloArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = experiment_config(args)?;
    cfg.validate()?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;

    let energy = sim::run_energy_sweep(&cfg)?;
    let feasibility = sim::run_feasibility_sweep(&cfg)?;
    let outputs = vec![
        output::write_output(
            &args.out_dir.join(ENERGY_FILE),
            ENERGY_FILE,
            &output::energy_table(&energy),
        )?,
        output::write_output(
            &args.out_dir.join(FEASIBILITY_FILE),
            FEASIBILITY_FILE,
            &output::feasibility_table(&feasibility),
        )?,
    ];
    let timestamp = args.timestamp.then(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    let manifest = RunManifest {
        version: TOOL_VERSION.into(),
        command: "montecarlo".into(),
        seed: Some(cfg.seed),
        rng: Some(sim::RNG_ALGORITHM.into()),
        config: serde_json::to_value(&cfg)?,
        outputs,
        timestamp,
    };
    output::write_manifest(&args.out_dir.join(MANIFEST_FILE), &manifest)?;
    writeln!(
        out,
        "wrote {ENERGY_FILE}, {FEASIBILITY_FILE} and {MANIFEST_FILE} to {}",
        args.out_dir.display()
    )?;
    Ok(EXIT_FEASIBLE)
}
