use std::path::Path;
use std::process::{Command, Output};

fn entcont(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entcont")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut all = args.to_vec();
    all.extend(["--out", out]);
    entcont(&all)
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn manifest(dir: &Path, experiment: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir.join(format!("{experiment}.manifest.json")))).unwrap()
}

#[test]
fn repeated_runs_write_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--experiment", "fig-divergence-cloud", "--samples", "40", "--seed", "11"];
    assert_eq!(run_in(a.path(), &args).status.code(), Some(0));
    assert_eq!(run_in(b.path(), &args).status.code(), Some(0));
    let csv = "fig-divergence-cloud.csv";
    assert_eq!(std::fs::read(a.path().join(csv)).unwrap(), std::fs::read(b.path().join(csv)).unwrap());
    assert_eq!(manifest(a.path(), "fig-divergence-cloud")["digest"], manifest(b.path(), "fig-divergence-cloud")["digest"]);
}

#[test]
fn different_seeds_differ() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_in(a.path(), &["--experiment", "fig-divergence-cloud", "--samples", "5", "--seed", "1"]);
    run_in(b.path(), &["--experiment", "fig-divergence-cloud", "--samples", "5", "--seed", "2"]);
    assert_ne!(read(a.path().join("fig-divergence-cloud.csv")), read(b.path().join("fig-divergence-cloud.csv")));
}

#[test]
fn zero_samples_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--experiment", "fig-divergence-cloud", "--samples", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = read(dir.path().join("fig-divergence-cloud.csv"));
    let lines: Vec<&str> = text.split("\r\n").filter(|l| !l.is_empty()).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("# fig-divergence-cloud"));
    assert_eq!(lines[1], "seed_index,D,ours,AE,vershynina,BR,m_sigma,eps");
}

#[test]
fn cloud_rows_respect_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--experiment", "fig-divergence-cloud", "--samples", "100", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = read(dir.path().join("fig-divergence-cloud.csv"));
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let d: f64 = rec[1].parse().unwrap();
        let ours: f64 = rec[2].parse().unwrap();
        let m: f64 = rec[6].parse().unwrap();
        assert!(ours >= d - 1e-8);
        assert!((1e-8 * (1.0 - 1e-12)..=1e-4 * (1.0 + 1e-12)).contains(&m));
        rows += 1;
    }
    assert_eq!(rows, 100);
}

#[test]
fn single_cell_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--experiment", "fig-divergence-heatmap", "--grid", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = read(dir.path().join("fig-divergence-heatmap.csv"));
    assert_eq!(text.split("\r\n").filter(|l| !l.is_empty()).count(), 3);
}

#[test]
fn variational_run_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--experiment", "fig-variational-violation", "--samples", "10", "--seed", "5"];
    let ra = run_in(a.path(), &args);
    let rb = run_in(b.path(), &args);
    assert_eq!(ra.status.code(), rb.status.code());
    assert!(matches!(ra.status.code(), Some(0) | Some(3)));
    let csv = "fig-variational-violation.csv";
    assert_eq!(read(a.path().join(csv)), read(b.path().join(csv)));
}

#[test]
fn verify_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--experiment", "verify-suite", "--samples", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let m = manifest(dir.path(), "verify-suite");
    assert_eq!(m["vacuous"], false);
    assert!(m["checks"].as_array().unwrap().iter().all(|c| c["failed"] == 0));
}

#[test]
fn mutated_entropy_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--experiment", "verify-suite", "--samples", "20", "--mutation", "flip-h-sign"]);
    assert_eq!(out.status.code(), Some(2));
    let m = manifest(dir.path(), "verify-suite");
    let failed: Vec<&str> = m["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["failed"].as_u64().unwrap() > 0)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"binary_entropy_range"));
    assert!(failed.contains(&"conditional_entropy_almost_convexity"));
}

#[test]
fn empty_check_list_is_vacuous() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--experiment", "verify-suite", "--checks", ""]);
    assert_eq!(out.status.code(), Some(0));
    let m = manifest(dir.path(), "verify-suite");
    assert_eq!(m["vacuous"], true);
    assert_eq!(m["checks"].as_array().unwrap().len(), 0);
}

#[test]
fn selected_checks_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--experiment", "verify-suite", "--checks", "beta0_normalization,g_d_monotonicity"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(manifest(dir.path(), "verify-suite")["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn bad_configuration_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["--experiment", "no-such-thing"][..],
        &["--experiment", "verify-suite", "--checks", "no_such_check"],
        &["--experiment", "fig-divergence-cloud", "--min-eig-hi", "0.9"],
        &["--experiment", "fig-divergence-cloud", "--mutation", "flip-h-sign"],
        &["--experiment", "fig-divergence-cloud", "--tol-nonsense", "1e-3"],
        &["--experiment", "fig-divergence-cloud", "--samples", "many"],
        &["--no-such-flag"],
    ] {
        assert_eq!(run_in(dir.path(), args).status.code(), Some(4), "{args:?}");
    }
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "experiment = fig-divergence-cloud\nsamples = 3\nseed = 8\n").unwrap();
    let out = run_in(dir.path(), &["--config", cfg.to_str().unwrap(), "--samples", "4", "--tol-invariant=1e-7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path(), "fig-divergence-cloud");
    assert_eq!(m["config"]["samples"], "4");
    assert_eq!(m["config"]["seed"], "8");
}

#[test]
fn state_json_round_trip_through_binary() {
    let dir = tempfile::tempdir().unwrap();
    let rho = dir.path().join("rho.json");
    let sigma = dir.path().join("sigma.json");
    let s = |p: &Path, seed: &str| {
        entcont(&["sample-state", "--dims", "2,2", "--min-eig", "1e-3", "--seed", seed, "--out", p.to_str().unwrap()])
    };
    assert_eq!(s(&rho, "1").status.code(), Some(0));
    assert_eq!(s(&sigma, "2").status.code(), Some(0));
    let stdout = entcont(&["sample-state", "--dims", "2,2", "--min-eig", "1e-3", "--seed", "1"]).stdout;
    assert_eq!(String::from_utf8(stdout).unwrap().trim(), read(&rho).trim());

    let state = entcont_cli::stateio::read_state(&rho).unwrap();
    assert_eq!(entcont_cli::stateio::to_json(&state), read(&rho).trim());

    let report = |a: &Path, b: &Path, kind: &str| -> serde_json::Value {
        let out = entcont(&["divergence", "--rho", a.to_str().unwrap(), "--sigma", b.to_str().unwrap(), "--kind", kind]);
        assert_eq!(out.status.code(), Some(0));
        serde_json::from_slice(&out.stdout).unwrap()
    };
    assert!(report(&rho, &rho, "umegaki")["value"].as_f64().unwrap().abs() < 1e-10);
    let d = report(&rho, &sigma, "umegaki")["value"].as_f64().unwrap();
    let dh = report(&rho, &sigma, "bs")["value"].as_f64().unwrap();
    assert!(d > 0.0 && dh >= d - 1e-9);
}
