//! End-to-end runs of the `torus-vrep` binary.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torus-vrep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_csv(path: &Path) -> Vec<(f64, f64)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap().trim(), "x,rho");
    lines
        .map(|l| {
            let (x, r) = l.split_once(',').unwrap();
            (x.trim().parse().unwrap(), r.trim().parse().unwrap())
        })
        .collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn forward_free_density_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["forward", "--cutoff", "2", "--particles", "2", "--beta", "1.5", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("density.csv"));
    assert_eq!(rows.len(), 16);
    for (_, rho) in rows {
        assert!((rho - 2.0).abs() < 1e-12);
    }
    let summary = json(&dir.path().join("summary.json"));
    let omega = summary["records"][0]["omega"].as_f64().unwrap();
    let oracle = -common::log_sum_exp(&common::free_spectrum(2, 2), 1.5) / 1.5;
    assert!((omega - oracle).abs() <= 1e-12 * oracle.abs());
}

#[test]
fn forward_cosine_from_config_matches_grid_reference() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    // v̂_1 = 1.5, i.e. v(x) = 3 cos(2πx), in the single-particle sector
    fs::write(
        &cfg,
        "cutoff = 12\nparticles = 1\nbeta = 0.5\ngrid_points = 128\n[potential]\nf = [[1, 1.5, 0.0]]\n",
    )
    .unwrap();
    let o = run(&["forward", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("density.csv"));
    let coarse = common::cosine_thermal_density(1.5, 0.5, 1024, 12);
    let fine = common::cosine_thermal_density(1.5, 0.5, 2048, 12);
    let reference = common::richardson(&coarse, &fine);
    for (x, rho) in rows {
        let m = (x * 1024.0).round() as usize;
        assert!((rho - reference[m]).abs() < 1e-6, "x = {x}: {rho} vs {}", reference[m]);
    }
}

#[test]
fn forward_beta_list_writes_one_density_per_beta() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "forward", "--cutoff", "1", "--particles", "1", "--beta", "0.1,1,10", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    for i in 0..3 {
        assert!(dir.path().join(format!("density_{i}.csv")).exists());
        assert!(dir.path().join(format!("density_fourier_{i}.json")).exists());
    }
    let summary = json(&dir.path().join("summary.json"));
    let records = summary["records"].as_array().unwrap();
    assert_eq!(records.len(), 3);
    for r in records {
        let beta = r["beta"].as_f64().unwrap();
        let log_z = r["log_z"].as_f64().unwrap();
        assert!((log_z - common::single_particle_k1_partition(beta).ln()).abs() < 1e-12);
    }
}

#[test]
fn invert_reproduces_forward_output() {
    let dir = tempfile::tempdir().unwrap();
    let fwd = dir.path().join("fwd");
    let cfg = dir.path().join("fwd.toml");
    fs::write(&cfg, "cutoff = 2\nparticles = 2\nbeta = 1.0\n[potential]\nf = [[1, 0.3, -0.2], [2, 0.1, 0.05]]\n").unwrap();
    let o = run(&["forward", "--config", cfg.to_str().unwrap(), "--out", fwd.to_str().unwrap()]);
    assert_eq!(code(&o), 0);

    let inv = dir.path().join("inv");
    let icfg = dir.path().join("inv.toml");
    fs::write(&icfg, "cutoff = 2\nparticles = 2\nbeta = 1.0\n[inversion]\npotential_cutoff = 2\n").unwrap();
    let o = run(&[
        "invert",
        "--config",
        icfg.to_str().unwrap(),
        "--target",
        fwd.join("density_fourier.json").to_str().unwrap(),
        "--out",
        inv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let record = json(&inv.join("inversion.json"));
    assert_eq!(record["converged"], true);
    let expected = [(1, 0.3, -0.2), (2, 0.1, 0.05)];
    for (row, (k, re, im)) in record["potential"].as_array().unwrap().iter().zip(expected) {
        assert_eq!(row[0].as_u64().unwrap(), k);
        assert!((row[1].as_f64().unwrap() - re).abs() < 1e-6);
        assert!((row[2].as_f64().unwrap() - im).abs() < 1e-6);
    }
    assert!(inv.join("potential.toml").exists());

    // the written potential feeds straight back into forward
    let back = dir.path().join("back");
    let bcfg = dir.path().join("back.toml");
    fs::write(
        &bcfg,
        format!("cutoff = 2\nparticles = 2\nbeta = 1.0\n[potential]\nfile = {:?}\n", inv.join("potential.toml")),
    )
    .unwrap();
    let o = run(&["forward", "--config", bcfg.to_str().unwrap(), "--out", back.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for ((_, a), (_, b)) in read_csv(&fwd.join("density.csv")).into_iter().zip(read_csv(&back.join("density.csv"))) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn invert_uniform_target_gives_zero_potential() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("uniform.csv");
    let body: String = (0..16).map(|m| format!("{},1.0\n", m as f64 / 16.0)).collect();
    fs::write(&target, format!("x,rho\n{body}")).unwrap();
    let o = run(&[
        "invert", "--cutoff", "2", "--particles", "1", "--beta", "1", "--target", target.to_str().unwrap(), "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let record = json(&dir.path().join("inversion.json"));
    for row in record["potential"].as_array().unwrap() {
        assert!(row[1].as_f64().unwrap().abs() < 1e-9 && row[2].as_f64().unwrap().abs() < 1e-9);
    }
}

#[test]
fn invert_rejects_density_with_a_zero() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("zero.csv");
    // 1 + cos(2πx) vanishes at x = 1/2
    let body: String = (0..16)
        .map(|m| {
            let x = m as f64 / 16.0;
            format!("{x},{}\n", 1.0 + (2.0 * std::f64::consts::PI * x).cos())
        })
        .collect();
    fs::write(&target, format!("x,rho\n{body}")).unwrap();
    let o = run(&[
        "invert", "--cutoff", "2", "--particles", "1", "--beta", "1", "--target", target.to_str().unwrap(), "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("strictly positive"));
    assert!(!dir.path().join("inversion.json").exists());
}

#[test]
fn invalid_inputs_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&run(&["forward", "--cutoff", "1", "--particles", "1", "--beta", "-1", "--out", out])), 2);
    assert_eq!(code(&run(&["forward", "--cutoff", "0", "--particles", "1", "--out", out])), 2);
    assert_eq!(code(&run(&["forward", "--particles", "1", "--out", out])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "cutoff = 1\nparticles = 1\nunknown_key = 3\n").unwrap();
    assert_eq!(code(&run(&["forward", "--config", cfg.to_str().unwrap(), "--out", out])), 2);
}

#[test]
fn sweep_reports_cutoff_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    fs::write(
        &cfg,
        "particles = 1\nbeta = [0.5, 2.0]\n[potential]\nf = [[1, 0.5, 0.0]]\n[sweep]\ncutoffs = [1, 2, 3]\n",
    )
    .unwrap();
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&dir.path().join("sweep.json"));
    assert_eq!(report["rows"].as_array().unwrap().len(), 6);
    let conv = report["k_convergence"].as_array().unwrap();
    assert_eq!(conv.len(), 6);
    // adding modes can only lower Ω
    for row in conv {
        if let Some(d) = row["delta_omega"].as_f64() {
            assert!(d <= 1e-12, "{row}");
        }
    }
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn verify_small_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.toml");
    fs::write(&cfg, "[suite]\ncutoffs = [1, 2]\nparticles = [1, 2]\nbetas = [0.5, 5.0]\nminimality_trials = 100\n").unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["all_passed"], true);
    assert!(report["reports"].as_array().unwrap().len() > 50);
    assert!(!report["manifest"].as_array().unwrap().is_empty());
}

#[test]
fn verify_negative_control_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.toml");
    fs::write(
        &cfg,
        "[suite]\ncutoffs = [2]\nparticles = [3]\nbetas = [1.0]\ninclude_inversion = false\nnegative_control = true\n",
    )
    .unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("eigenvalue_sandwich_negative_control"));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["all_passed"], false);
    assert_eq!(report["failed"], serde_json::json!(["eigenvalue_sandwich_negative_control"]));
}

#[test]
fn verify_empty_suite_passes_vacuously() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.toml");
    fs::write(&cfg, "[suite]\ncutoffs = []\n").unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&dir.path().join("report.json"))["reports"], serde_json::json!([]));
}
