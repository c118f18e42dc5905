use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tailcs_bench::experiments::load_records;
use tailcs_bench::ExperimentConfig;

fn tailcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tailcs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: serde_json::Value) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, json.to_string()).unwrap();
    path
}

fn run_ok(args: &[&str]) -> String {
    let out = tailcs(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn small_sweep() -> serde_json::Value {
    serde_json::json!({
        "kind": "sweep_k", "n": 48, "m": 24, "k_grid": [2, 5], "trials": 6, "seed": 3,
        "solvers": [{ "name": "phpp" }, { "name": "sp" }, { "name": "tail_l1_oracle" }]
    })
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        ExperimentConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        count += 1;
    }
    assert!(count >= 6);
}

#[test]
fn sweep_output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), small_sweep());
    let mut files = Vec::new();
    for jobs in ["1", "4"] {
        let out = dir.path().join(format!("jobs{jobs}"));
        run_ok(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--jobs",
            jobs,
        ]);
        files.push((
            fs::read(out.join("records.csv")).unwrap(),
            fs::read(out.join("summary.json")).unwrap(),
        ));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn seed_override_changes_instances() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), small_sweep());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        a.to_str().unwrap(),
    ]);
    run_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
        "--seed",
        "4",
    ]);
    let (ra, rb) = (load_records(&a).unwrap(), load_records(&b).unwrap());
    assert!(ra.iter().zip(&rb).all(|(x, y)| x.seed != y.seed));
}

#[test]
fn summary_matches_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), small_sweep());
    let out = dir.path().join("out");
    run_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let records = load_records(&out).unwrap();
    assert_eq!(records.len(), 2 * 6 * 3);
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    for point in summary["points"].as_array().unwrap() {
        let grid_id = point["grid_id"].as_u64().unwrap() as usize;
        for (solver, s) in point["solvers"].as_object().unwrap() {
            let rows: Vec<_> = records
                .iter()
                .filter(|r| r.grid_id == grid_id && &r.solver == solver)
                .collect();
            let rate = rows.iter().filter(|r| r.success).count() as f64 / rows.len() as f64;
            let mean_err = rows.iter().map(|r| r.error).sum::<f64>() / rows.len() as f64;
            assert_eq!(s["trials"].as_u64().unwrap() as usize, rows.len());
            assert!((s["success_rate"].as_f64().unwrap() - rate).abs() < 1e-12);
            assert!(
                (s["mean_error"].as_f64().unwrap() - mean_err).abs() <= 1e-12 * mean_err.max(1.0)
            );
        }
    }
    assert!(records.iter().all(|r| r.wall_time_s == 0.0));
}

#[test]
fn dumped_solutions_agree_with_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), small_sweep());
    let out = dir.path().join("out");
    run_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--dump-solutions",
    ]);
    let records = load_records(&out).unwrap();
    let lines: Vec<serde_json::Value> = fs::read_to_string(out.join("solutions.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), records.len());
    for (rec, dump) in records.iter().zip(&lines) {
        assert_eq!(dump["solver"], rec.solver.as_str());
        assert_eq!(dump["seed"].as_u64().unwrap(), rec.seed);
        assert_eq!(dump["z"].as_array().unwrap().len(), rec.n);
    }
    let plain = dir.path().join("plain");
    run_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        plain.to_str().unwrap(),
    ]);
    assert!(!plain.join("solutions.jsonl").exists());
    assert_eq!(
        fs::read(plain.join("records.csv")).unwrap(),
        fs::read(out.join("records.csv")).unwrap()
    );
}

#[test]
fn degenerate_sweep_with_square_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        serde_json::json!({
            "kind": "sweep_m", "n": 8, "m": 8, "k": 1, "seed": 1,
            "solvers": [
                { "name": "phpp" }, { "name": "omp" }, { "name": "cosamp" }, { "name": "sp" },
                { "name": "htp" }, { "name": "l1" }, { "name": "hpp" }, { "name": "tail_hpp" }
            ]
        }),
    );
    let out = dir.path().join("out");
    run_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let records = load_records(&out).unwrap();
    assert_eq!(records.len(), 8);
    assert!(records.iter().all(|r| r.error.is_finite()));
}

#[test]
fn timing_records_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        serde_json::json!({
            "kind": "timing", "n_grid": [200, 400], "m_ratio": 0.25, "k_ratio": 0.01, "trials": 2,
            "solvers": [{ "name": "phpp", "params": { "tau": 0.01 } }, { "name": "omp" }]
        }),
    );
    let out = dir.path().join("out");
    let stdout = run_ok(&[
        "timing",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("n=400"));
    let records = load_records(&out).unwrap();
    assert_eq!(records.len(), 8);
    assert!(records.iter().all(|r| r.wall_time_s > 0.0));
    assert_eq!((records[4].m, records[4].k), (100, 4));
}

#[test]
fn rip_curve_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        serde_json::json!({ "kind": "rip_curve", "n": 12, "m": 8, "k_grid": [1, 2, 3, 4], "mc_trials": 300 }),
    );
    let out = dir.path().join("out");
    run_ok(&[
        "rip",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let mut reader = csv::Reader::from_path(out.join("rip_curve.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let exact: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| &r[col("method")] == "exact")
        .map(|r| {
            (
                r[col("lower")].parse().unwrap(),
                r[col("upper")].parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(exact.len(), 4);
    assert!(exact
        .windows(2)
        .all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
}

#[test]
fn trace_reports_linear_rate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        serde_json::json!({
            "kind": "convergence_trace", "n": 64, "m": 32, "k": 8, "seed": 10,
            "noise": { "kind": "gaussian", "sigma": 0.01 }
        }),
    );
    let out = dir.path().join("out");
    run_ok(&[
        "trace",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("rate.json")).unwrap()).unwrap();
    assert_eq!(report["linear"], true);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(
        trace.lines().count(),
        report["iterations"].as_u64().unwrap() as usize + 1
    );
}

#[test]
fn bad_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        serde_json::json!({ "kind": "sweep_k", "n": 10, "m": 5, "k": 2, "bogus": 1 }),
    );
    let out = tailcs(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    let cfg = write_config(
        dir.path(),
        serde_json::json!({ "kind": "rip_curve", "n": 10, "m": 5, "k": 2 }),
    );
    let out = tailcs(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
}
