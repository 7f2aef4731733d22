use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mrbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrbf"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn metadata(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("metadata.json")).unwrap()).unwrap()
}

/// The last stderr line parsed as the JSON error record.
fn error_line(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(stderr.lines().last().unwrap()).unwrap()
}

#[test]
fn nodes_writes_set_and_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("n");
    let out = mrbf(&[
        "nodes",
        "--problem",
        "diffusion",
        "--count",
        "300",
        "--seed",
        "4",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rows = fs::read_to_string(dir.join("nodes.txt"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count();
    assert_eq!(rows, 300);
    let meta = metadata(&dir);
    assert_eq!(meta["result"]["node_count"], 300);
    assert_eq!(meta["seeds"]["nodes"], 4);
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(meta["resolved"]["surface"], "torus");
}

#[test]
fn spectrum_has_one_row_per_node() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("s");
    let out = mrbf(&[
        "spectrum",
        "--level",
        "2",
        "--degree",
        "3",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().count(), 162 + 1);
    assert!(dir.join("spectrum.gp").exists());
    let meta = metadata(&dir);
    assert_eq!(meta["result"]["stable"], true);
}

#[test]
fn single_node_input_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("one.txt");
    fs::write(&file, "0 0 1 0 0 1\n").unwrap();
    let out = mrbf(&[
        "spectrum",
        "--surface",
        "external",
        "--nodes-file",
        file.to_str().unwrap(),
        "-o",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = error_line(&out);
    assert_eq!(err["status"], "error");
    assert_eq!(err["command"], "spectrum");
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(
        &cfg,
        "# torus nodes\nproblem = diffusion\ncount = 300\nseed = 9\n",
    )
    .unwrap();
    let dir = tmp.path().join("n");
    let out = mrbf(&[
        "nodes",
        "--config",
        cfg.to_str().unwrap(),
        "--count",
        "400",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let meta = metadata(&dir);
    assert_eq!(meta["result"]["node_count"], 400);
    assert_eq!(meta["seeds"]["nodes"], 9);
    assert_eq!(meta["settings"]["count"], "400");
}

#[test]
fn bad_config_line_is_a_parse_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "count = 300\nwhat\n").unwrap();
    let out = mrbf(&["nodes", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert_eq!(error_line(&out)["kind"], "parse");
}

#[test]
fn cahn_hilliard_rerun_is_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let dir = tmp.path().join(name);
        let out = mrbf(&[
            "solve",
            "--problem",
            "cahn_hilliard",
            "--count",
            "300",
            "--final-time",
            "0.002",
            "--snapshot-every",
            "10",
            "-o",
            dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        dir
    };
    let (a, b) = (run("a"), run("b"));
    for name in ["step_0000010.csv", "step_0000020.csv", "final.csv"] {
        let fa = fs::read(a.join("snapshots").join(name)).unwrap();
        let fb = fs::read(b.join("snapshots").join(name)).unwrap();
        assert_eq!(fa, fb, "{name} differs");
    }
    let meta = metadata(&a);
    assert_eq!(meta["result"]["model"], "cahn_hilliard");
    assert_eq!(meta["result"]["steps"], 20);
    assert!(meta["result"]["splitting"]
        .as_str()
        .unwrap()
        .contains("implicit"));
}

#[test]
fn diffusion_reports_final_error() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d");
    let out = mrbf(&[
        "solve",
        "--problem",
        "diffusion",
        "--count",
        "1000",
        "--final-time",
        "0.01",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("final relative error"));
    let e = metadata(&dir)["final_error"].as_f64().unwrap();
    assert!(e > 0.0 && e < 0.5);
}

#[test]
fn advection_metadata_records_hyperviscosity() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("a");
    let out = mrbf(&[
        "solve",
        "--level",
        "2",
        "--final-time",
        "0.0625",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let meta = metadata(&dir);
    let r = &meta["result"];
    assert_eq!(r["steps"], 30);
    assert_eq!(r["hyperviscosity"]["k"], 3);
    assert!(r["hyperviscosity"]["gamma"].as_f64().unwrap() > 0.0);
    assert!(r["lambda_max"].as_f64().unwrap() > 0.0);
    assert!(meta["u_max_at_t0"].as_f64().unwrap() > 0.0);
    // not a whole flow period, so no error against the initial field
    assert!(meta["final_error"].is_null());
}

#[test]
fn unhyperviscous_advection_needs_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("x");
    let args = [
        "solve",
        "--level",
        "2",
        "--final-time",
        "0.0625",
        "--hyperviscosity-gamma",
        "0",
        "-o",
        dir.to_str().unwrap(),
    ];
    let out = mrbf(&args);
    assert!(!out.status.success());
    assert_eq!(error_line(&out)["kind"], "config");
    let mut with_flag = args.to_vec();
    with_flag.push("--allow-unstable");
    assert!(mrbf(&with_flag).status.success());
    assert!(metadata(&dir)["result"]["hyperviscosity"].is_null());
}

#[test]
fn divergence_keeps_last_valid_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("blowup");
    // anti-diffusive hyperviscosity sign makes the run blow up
    let out = mrbf(&[
        "solve",
        "--level",
        "2",
        "--hyperviscosity-gamma",
        "-1",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert_eq!(error_line(&out)["kind"], "divergence");
    assert!(dir.join("snapshots").join("last_valid.csv").exists());
    assert!(metadata(&dir)["failure"]["last_valid_step"]
        .as_u64()
        .is_some());
}

#[test]
fn convergence_table_and_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("c");
    let out = mrbf(&[
        "convergence",
        "--problem",
        "diffusion",
        "--counts",
        "500,1000,2000",
        "--final-time",
        "0.01",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.join("convergence.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "N,sqrtN,error,t_assembly,t_factor,t_solve");
    assert_eq!(lines.len(), 4);
    assert!(dir.join("convergence.gp").exists());
    assert!(metadata(&dir)["slope"].as_f64().unwrap() > 2.0);
}

#[test]
fn convergence_needs_three_levels() {
    let out = mrbf(&["convergence", "--levels", "2,3"]);
    assert!(!out.status.success());
    assert_eq!(error_line(&out)["kind"], "config");
}
