use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_soliton-lab"))
}

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn solve(config: &Path, out: &Path) -> Output {
    run(&["solve", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

#[test]
fn steady_config_is_complete() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = solve(&repo("configs/two_summands_steady.json"), &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("report.json"));
    assert_eq!(report["verdict"]["verdict"], "numerically_complete");
    let manifest = json(&out.join("manifest.json"));
    for a in manifest["artifacts"].as_array().unwrap() {
        assert!(out.join(a.as_str().unwrap()).exists());
    }
    assert_eq!(manifest["run_id"], report["run_id"]);
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,kind,f_0,f_1,df_0,df_1,u,du,udd,conservation_residual"));
}

#[test]
fn nonpositive_size_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(
        &cfg,
        r#"{"system":"two_summands","ansatz":{"d1":3,"d2":4,"A1":6,"A2":12,"A3":0.75},
            "epsilon":0,"C":-1,"initial":[0.0]}"#,
    )
    .unwrap();
    let o = solve(&cfg, &dir.path().join("out"));
    assert_eq!(code(&o), 64);
    assert!(String::from_utf8_lossy(&o.stderr).contains("initial[0]"));
    assert!(!dir.path().join("out/manifest.json").exists());
}

#[test]
fn malformed_json_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{ not json").unwrap();
    assert_eq!(code(&solve(&cfg, &dir.path().join("out"))), 64);
    assert_eq!(code(&run(&["solve", "--config"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn matched_expectation_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo("configs/two_summands_exit.json");
    let o = solve(&cfg, &dir.path().join("a"));
    assert_eq!(code(&o), 0);
    let report = json(&dir.path().join("a/report.json"));
    assert_eq!(report["verdict"]["verdict"], "invariant_set_exit");

    // without the expectation the same run reports an invariant exit
    let mut raw = json(&cfg);
    raw.as_object_mut().unwrap().remove("expect");
    let plain = dir.path().join("plain.json");
    fs::write(&plain, raw.to_string()).unwrap();
    assert_eq!(code(&solve(&plain, &dir.path().join("b"))), 2);
}

#[test]
fn reruns_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo("configs/dancer_wang_m2_charts.json");
    for name in ["a", "b"] {
        assert_eq!(code(&solve(&cfg, &dir.path().join(name))), 0);
    }
    for file in ["trajectory.csv", "rescaled.csv", "report.json"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert!(a == b, "{file} differs between reruns");
    }
}

#[test]
fn directory_holding_another_run_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(code(&solve(&repo("configs/lpp_complete.json"), &out)), 0);
    assert_eq!(code(&solve(&repo("configs/lpp_complete.json"), &out)), 0);
    let o = solve(&repo("configs/two_summands_steady.json"), &out);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("fresh output directory"));
}

fn summary(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn dancer_wang_sweep_has_a_boundary_in_c() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = run(&[
        "sweep",
        "--config",
        repo("configs/dancer_wang_m2_sweep.json").to_str().unwrap(),
        "--grid",
        "C=0:-2:6",
        "--grid",
        "initial[0]=0.8:0.2:3",
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = summary(&out.join("sweep_summary.csv"));
    assert_eq!(rows[0][..4], ["cell", "C", "initial[0]", "verdict"]);
    assert_eq!(rows.len(), 1 + 18);
    for (i, r) in rows[1..].iter().enumerate() {
        assert_eq!(r[0], format!("{i:04}"));
        assert!(out.join(format!("cell_{i:04}/manifest.json")).exists());
    }
    // fixed ḡ1 = 1: exits near C = 0, complete for strongly negative C
    let column: Vec<&str> = rows[1..]
        .iter()
        .filter(|r| r[2].parse::<f64>().unwrap() == 1.0)
        .map(|r| r[3].as_str())
        .collect();
    assert_eq!(column.first(), Some(&"invariant_set_exit"));
    assert_eq!(column.last(), Some(&"numerically_complete"));
    let flips = column.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(flips, 1, "{column:?}");
}

#[test]
fn single_cell_sweep_matches_solve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo("configs/lpp_complete.json");
    assert_eq!(code(&solve(&cfg, &dir.path().join("solo"))), 0);
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--grid",
        "C=-1:1:1",
        "--out",
        dir.path().join("sweep").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let a = fs::read(dir.path().join("solo/trajectory.csv")).unwrap();
    let b = fs::read(dir.path().join("sweep/cell_0000/trajectory.csv")).unwrap();
    assert!(a == b);
}

#[test]
fn expanding_sweep_respects_upper_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = run(&[
        "sweep",
        "--config",
        repo("configs/dancer_wang_expanding_sweep.json").to_str().unwrap(),
        "--grid",
        "C=-1:-3:5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let rows = summary(&out.join("sweep_summary.csv"));
    let upper = rows[0].iter().position(|c| c == "expanding_upper_violations").unwrap();
    let complete: Vec<_> = rows[1..].iter().filter(|r| r[2] == "numerically_complete").collect();
    assert!(!complete.is_empty());
    assert!(complete.iter().all(|r| r[upper] == "0"));
}

#[test]
fn sweep_keeps_going_past_bad_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = run(&[
        "sweep",
        "--config",
        repo("configs/lpp_complete.json").to_str().unwrap(),
        "--grid",
        "C=1:-1:3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let rows = summary(&out.join("sweep_summary.csv"));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1][2], "error");
    assert_eq!(rows[3][2], "numerically_complete");
    assert_eq!(code(&run(&["sweep", "--config", "x.json", "--grid", "C=1", "--out", "y"])), 64);
}

fn probe(c: &str, out: &Path) -> Output {
    run(&[
        "probe-c0",
        "--config",
        repo("configs/two_summands_circle_probe.json").to_str().unwrap(),
        "--c",
        c,
        "--tau",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn growth_probe_brackets_c0() {
    let dir = tempfile::tempdir().unwrap();
    let o = probe("5", &dir.path().join("p"));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("p/probe_report.json"));
    let c0 = r["empirical_c0"].as_f64().unwrap();
    assert!(c0.is_finite() && c0 < 0.0);
    assert!(r["c_star"].as_f64().unwrap().is_finite());
    let csv = fs::read_to_string(dir.path().join("p/probe.csv")).unwrap();
    assert!(csv.starts_with("C,minus_du_tau"));

    assert_eq!(code(&probe("1e-6", &dir.path().join("tiny"))), 0);
    let tiny = json(&dir.path().join("tiny/probe_report.json"));
    assert!(tiny["empirical_c0"].as_f64().unwrap() > -1e-3);

    assert_eq!(code(&probe("0", &dir.path().join("zero"))), 64);
    assert_eq!(code(&probe("1e9", &dir.path().join("huge"))), 3);
}

fn curvature(file: &str, x: &str) -> Output {
    run(&["curvature", "--decomposition", repo(file).to_str().unwrap(), "--x", x])
}

#[test]
fn curvature_queries() {
    let o = curvature("decompositions/abelian.json", "1,3");
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["scalar_curvature"], 0.0);

    // each su(2) factor with b = -B: [111] = 3, scalar (3/4)(1/x)
    let o = curvature("decompositions/su2_su2.json", "1,2");
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["scalar_curvature"].as_f64().unwrap() - 1.125).abs() < 1e-15);

    let o = curvature("decompositions/asymmetric.json", "1,1");
    assert_eq!(code(&o), 65);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Asymmetric"));

    assert_eq!(code(&curvature("decompositions/missing.json", "1")), 64);
    assert_eq!(code(&curvature("decompositions/abelian.json", "1")), 64);
    assert_eq!(code(&curvature("decompositions/abelian.json", "1,-1")), 64);
}
