//! Exit codes, CSV round-trips, and config-error reporting of the binary.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_glyco"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("glyco_io_{}_{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_cfg(dir: &std::path::Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn bad_config_key_exits_2_and_names_key() {
    let dir = scratch("badkey");
    let cfg = write_cfg(&dir, "exp.cfg", "model.bogus = 1\n");
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("model.bogus"), "stderr: {stderr}");
}

#[test]
fn missing_map_total_exits_2_and_names_j1() {
    let dir = scratch("mapj1");
    let cfg = write_cfg(&dir, "exp.cfg", "map.j2 = 5\n");
    let out = bin()
        .args(["map-params", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("map.j1"), "stderr: {stderr}");
}

#[test]
fn nonpositive_rate_in_map_params_exits_2() {
    let dir = scratch("mapneg");
    let cfg = write_cfg(
        &dir,
        "exp.cfg",
        "map.j1 = 5\nmap.j2 = 5\nmodel.kappa.k5 = 0\n",
    );
    let out = bin()
        .args(["map-params", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_outputs_parse_back_losslessly() {
    let dir = scratch("roundtrip");
    let cfg = write_cfg(
        &dir,
        "exp.cfg",
        "model.n = 40\nmodel.t = 2\nsim.replicates = 1\nsim.recording = full\n",
    );
    let out_dir = dir.join("out");
    let status = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--seed", "9", "--out"])
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());

    let csv = std::fs::read_to_string(out_dir.join("traj_r000.csv")).unwrap();
    let sidecar_text = std::fs::read_to_string(out_dir.join("traj_r000.json")).unwrap();
    let sidecar: glyco_core::export::TrajectorySidecar =
        glyco_core::export::from_json(&sidecar_text).unwrap();
    let traj = glyco_core::export::trajectory_from_csv(&csv, &sidecar).unwrap();

    // Writing the parsed trajectory again reproduces the file byte for byte.
    assert_eq!(glyco_core::export::trajectory_to_csv(&traj), csv);
    assert_eq!(traj.n, 40);
    assert!(glyco_core::ssa::conservation_constant(&traj));
}

#[test]
fn estimate_accepts_simulated_file_as_data() {
    let dir = scratch("estfile");
    let cfg = write_cfg(
        &dir,
        "sim.cfg",
        "model.n = 60\nmodel.t = 4\nsim.replicates = 1\n",
    );
    let out_dir = dir.join("out");
    assert!(bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--seed", "3", "--out"])
        .arg(&out_dir)
        .status()
        .unwrap()
        .success());

    let est_cfg = write_cfg(
        &dir,
        "est.cfg",
        &format!(
            "model.t = 4\nestimate.data = file\nestimate.data_path = {}\nestimate.m = 2\nestimate.nm.max_iters = 40\nestimate.restarts = 0\nestimate.grid = 100\n",
            out_dir.join("traj_r000").display()
        ),
    );
    let out = bin()
        .args(["estimate", "--config"])
        .arg(&est_cfg)
        .args(["--seed", "3", "--out"])
        .arg(dir.join("est"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = std::fs::read_to_string(dir.join("est").join("estimate.csv")).unwrap();
    assert!(report.starts_with("stat,kappa0,K1,"));
}

#[test]
fn compare_csv_parses_back() {
    let dir = scratch("comparecsv");
    let cfg = write_cfg(
        &dir,
        "exp.cfg",
        "model.n = 30\nmodel.t = 2\ncompare.grid = 50\n",
    );
    let out_dir = dir.join("out");
    assert!(bin()
        .args(["compare", "--config"])
        .arg(&cfg)
        .args(["--seed", "5", "--out"])
        .arg(&out_dir)
        .status()
        .unwrap()
        .success());
    let csv = std::fs::read_to_string(out_dir.join("compare.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,ssa_z_A1,ssa_z_A2,ode_Z_A1,ode_Z_A2"));
    let mut rows = 0;
    for line in lines {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 5);
        rows += 1;
    }
    assert_eq!(rows, 51);
    // Summary JSON parses and repeats the run's metadata.
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("compare_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["n"], 30);
    assert_eq!(summary["grid"], 50);
}

#[test]
fn unwritable_output_exits_3() {
    let dir = scratch("unwritable");
    let cfg = write_cfg(&dir, "exp.cfg", "map.j1 = 5\nmap.j2 = 5\n");
    // A path below a regular file cannot be created.
    std::fs::write(dir.join("blocker"), b"x").unwrap();
    let out = bin()
        .args(["map-params", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("blocker").join("sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn format_flag_restricts_outputs() {
    let dir = scratch("formats");
    let cfg = write_cfg(
        &dir,
        "exp.cfg",
        "model.n = 30\nmodel.t = 1\ncompare.grid = 10\n",
    );
    let out_dir = dir.join("csv_only");
    assert!(bin()
        .args(["compare", "--config"])
        .arg(&cfg)
        .args(["--seed", "5", "--format", "csv", "--out"])
        .arg(&out_dir)
        .status()
        .unwrap()
        .success());
    assert!(out_dir.join("compare.csv").exists());
    assert!(!out_dir.join("compare_summary.json").exists());
}

#[test]
fn inflow_dominated_compare_converges_with_n() {
    // All rates except the inflow switched to negligible values: the scaled
    // A1 column grows linearly and the SSA-vs-reduced sup distance shrinks
    // with n (law of large numbers for the Poisson input).
    let dir = scratch("poisson_compare");
    let rates: String = [
        "k1", "km1", "k2", "k3", "km3", "k4", "k5", "km5", "k6", "k7", "km7", "k8", "km8",
    ]
    .iter()
    .map(|k| format!("model.kappa.{k} = 1e-12\n"))
    .collect();
    let sup_at = |n: u64, seed: u64| -> f64 {
        let cfg = write_cfg(
            &dir,
            &format!("cmp_{n}_{seed}.cfg"),
            &format!("model.n = {n}\nmodel.t = 20\ncompare.grid = 400\n{rates}"),
        );
        let out_dir = dir.join(format!("out_{n}_{seed}"));
        assert!(bin()
            .args(["compare", "--config"])
            .arg(&cfg)
            .args(["--seed", &seed.to_string(), "--out"])
            .arg(&out_dir)
            .status()
            .unwrap()
            .success());
        let summary: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(out_dir.join("compare_summary.json")).unwrap(),
        )
        .unwrap();
        summary["sup_z_a1"].as_f64().unwrap()
    };
    let median = |mut v: Vec<f64>| -> f64 {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    let small = median((0..3).map(|s| sup_at(100, s)).collect());
    let large = median((0..3).map(|s| sup_at(1000, s)).collect());
    assert!(
        large < small,
        "sup distance did not shrink: {large} at n=1e3 vs {small} at n=1e2"
    );
}
