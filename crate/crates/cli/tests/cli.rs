use std::fs;
use std::path::Path;

use noma_fbc_cli::output::{read_manifest, sha256_hex};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("noma-fbc").chain(args.iter().copied());
    let code = noma_fbc_cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

const BASE: &[&str] = &[
    "solve", "--g1", "1", "--g2", "4", "--d1", "200", "--d2", "300",
];

fn solve(extra: &[&str]) -> (i32, String, String) {
    let args: Vec<&str> = BASE.iter().chain(extra).copied().collect();
    run(&args)
}

#[test]
fn solve_feasible_at_40_dbm() {
    let (code, out, _) = solve(&["--pmax-dbm", "40"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["noma"]["outcome"]["status"], "feasible");
    assert_eq!(v["noma"]["outcome"]["scheme"], "P1_SIC_AT_RX2");
    assert_eq!(v["tdma"]["status"], "feasible");
}

#[test]
fn solve_infeasible_at_30_dbm() {
    let (code, out, _) = solve(&["--format", "csv"]);
    assert_eq!(code, 2);
    assert!(out.contains("RATE_UNREACHABLE"), "{out}");
}

#[test]
fn missing_deadline_names_the_flag() {
    let (code, _, err) = run(&["solve", "--g1", "1", "--g2", "4", "--d1", "200"]);
    assert_eq!(code, 1);
    assert!(err.contains("--d2"), "{err}");
}

#[test]
fn bad_numbers_are_usage_errors() {
    assert_eq!(solve(&["--eps1", "0"]).0, 1);
    assert_eq!(solve(&["--eps1", "1.5"]).0, 1);
    assert_eq!(
        run(&["solve", "--g1", "-1", "--g2", "4", "--d1", "200", "--d2", "300"]).0,
        1
    );
}

#[test]
fn deadline_tie_is_reported() {
    let (code, out, _) = run(&[
        "solve",
        "--g1",
        "4",
        "--g2",
        "1",
        "--d1",
        "300",
        "--d2",
        "300",
        "--pmax-dbm",
        "40",
        "--format",
        "text",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("deadline tie"), "{out}");
}

#[test]
fn magnitudes_are_squared() {
    let (_, a, _) = solve(&["--pmax-dbm", "40", "--format", "csv"]);
    let (_, b, _) = run(&[
        "solve",
        "--h1",
        "1",
        "--h2",
        "2",
        "--d1",
        "200",
        "--d2",
        "300",
        "--pmax-dbm",
        "40",
        "--format",
        "csv",
    ]);
    assert_eq!(a, b);
}

fn sweep(out: &Path) -> (i32, String) {
    let out = out.to_str().unwrap();
    let (code, _, err) = run(&[
        "sweep",
        "--g1",
        "1",
        "--g2",
        "4",
        "--d2",
        "300",
        "--pmax-dbm",
        "40",
        "--d1-grid",
        "100:290:10",
        "--out",
        out,
    ]);
    (code, err)
}

#[test]
fn sweep_writes_one_row_per_scheme_and_deadline() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    assert_eq!(sweep(&path).0, 0);
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# schema="));
    assert_eq!(
        lines.next().unwrap(),
        "d1,scheme,feasible,m1,m2,p1,p2,gamma1,gamma2,energy"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 40);
    let noma: Vec<f64> = rows
        .iter()
        .filter(|r| r[1] == "noma" && r[2] == "true")
        .map(|r| r[9].parse().unwrap())
        .collect();
    assert!(noma.len() >= 2);
    assert!(noma.windows(2).all(|w| w[1] < w[0]), "{noma:?}");

    let manifest = read_manifest(&dir.path().join("sweep.csv.manifest.json")).unwrap();
    assert_eq!(manifest.outputs[0].sha256, sha256_hex(text.as_bytes()));
}

#[test]
fn sweep_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    sweep(&a);
    sweep(&b);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn sweep_to_unwritable_path_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = sweep(&dir.path().join("missing").join("x.csv"));
    assert_eq!(code, 1);
    assert!(err.contains("cannot write"), "{err}");
}

#[test]
fn sweep_rejects_deadline_past_d2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let (code, _, err) = run(&[
        "sweep",
        "--g1",
        "1",
        "--g2",
        "4",
        "--d2",
        "300",
        "--d1-grid",
        "100:400:100",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("exceeds"), "{err}");
}

fn montecarlo(dir: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![
        "montecarlo",
        "--trials",
        "200",
        "--seed",
        "7",
        "--out-dir",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args).0
}

const FILES: [&str; 3] = [
    "energy_vs_d1.csv",
    "feasibility_vs_d1_pmax.csv",
    "manifest.json",
];

#[test]
fn montecarlo_manifest_matches_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(montecarlo(dir.path(), &[]), 0);
    for f in FILES {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let m = read_manifest(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(m.seed, Some(7));
    assert!(m.rng.unwrap().contains("ChaCha8"));
    assert!(m.timestamp.is_none());
    assert_eq!(m.outputs.len(), 2);
    for o in &m.outputs {
        let bytes = fs::read(dir.path().join(&o.path)).unwrap();
        assert_eq!(o.sha256, sha256_hex(&bytes));
    }
}

#[test]
fn montecarlo_reruns_from_its_manifest() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(
        montecarlo(
            a.path(),
            &["--d1-grid", "150:290:70", "--pmax-dbm-grid", "0,10"]
        ),
        0
    );
    let manifest = a.path().join("manifest.json");
    let code = run(&[
        "montecarlo",
        "--from-manifest",
        manifest.to_str().unwrap(),
        "--out-dir",
        b.path().to_str().unwrap(),
    ])
    .0;
    assert_eq!(code, 0);
    for f in FILES {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn montecarlo_feasibility_grows_with_budget() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        montecarlo(
            dir.path(),
            &["--d1-grid", "100:300:100", "--pmax-dbm-grid", "-10,0,10"]
        ),
        0
    );
    let text = fs::read_to_string(dir.path().join("feasibility_vs_d1_pmax.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    for d1 in [100.0, 200.0, 300.0] {
        let any: Vec<f64> = rows.iter().filter(|r| r[0] == d1).map(|r| r[5]).collect();
        assert!(any.windows(2).all(|w| w[1] >= w[0]), "d1 {d1}: {any:?}");
    }
}

#[test]
fn timestamp_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        montecarlo(dir.path(), &["--d1-grid", "200:200:1", "--timestamp"]),
        0
    );
    let m = read_manifest(&dir.path().join("manifest.json")).unwrap();
    assert!(m.timestamp.is_some());
}
