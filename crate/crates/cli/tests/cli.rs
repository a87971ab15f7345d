use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn p2a(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_p2a")).args(args).output().expect("run p2a")
}

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn data_rows(path: &Path) -> Vec<(f64, f64)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[1], f[2])
        })
        .collect()
}

#[test]
fn gen_profile_is_byte_identical_for_one_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = p2a(&["gen-profile", "--seed", "1", "--horizon", "72", "--out", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let read = |d: &Path| std::fs::read(d.join("profile.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(std::fs::read(a.join("profile.toml")).unwrap(), std::fs::read(b.join("profile.toml")).unwrap());
}

#[test]
fn gen_profile_row_count_and_lull() {
    let dir = tempfile::tempdir().unwrap();
    let out = p2a(&[
        "gen-profile", "--seed", "4", "--horizon", "360", "--lull", "82:110", "--out",
        dir.path().to_str().unwrap(), "--self-check",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&dir.path().join("profile.csv"));
    assert_eq!(rows.len(), 360);
    for (t, (w, p)) in rows.iter().enumerate() {
        if (82..110).contains(&t) {
            assert_eq!(w + p, 0.0, "step {t}");
        }
    }
    assert!(rows[..82].iter().any(|(w, _)| *w > 0.0));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "gen-profile");
    assert_eq!(manifest["seed"], 4);
}

#[test]
fn unknown_flag_exits_2_with_usage() {
    let out = p2a(&["solve", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn bad_values_exit_2_with_one_line() {
    let out = p2a(&["solve", "--scenario", "/nonexistent/s.csv", "--tiny", "--out", "/tmp/p2a-unused"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(err.starts_with("error kind=usage"));

    let out = p2a(&["gen-profile", "--lull", "9-39", "--out", "/tmp/p2a-unused"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn estimate_params_on_shipped_geometry() {
    let out = p2a(&["estimate-params", "--geometry", repo("geometry/plant.toml").to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let value = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("{key} missing"));
        line.split('=').nth(1).unwrap().trim().parse().unwrap()
    };
    assert_eq!(value("asr_capacitance_J_per_K"), 1.918e8);
    assert!((value("asr_loss_resistance_K_per_W") / 0.0052 - 1.0).abs() < 0.02);
    assert!((value("ms_loss_resistance_K_per_W") / 0.0535 - 1.0).abs() < 0.02);
}

#[test]
fn solve_then_verify_with_bundled_solver() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let scenario = repo("scenarios/synthetic_48h.csv");
    let out = p2a(&[
        "solve", "--scenario", scenario.to_str().unwrap(), "--horizon", "1", "--no-cyclic", "--tiny", "--out", d,
        "--self-check",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["schedule.csv", "breakdown.json", "verify.json", "metrics.csv", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "optimal");
    assert_eq!(manifest["solver_deterministic"], true);
    assert_eq!(manifest["inputs_sha256"].as_str().unwrap().len(), 64);

    let vdir = dir.path().join("v");
    let out = p2a(&[
        "verify", "--schedule", dir.path().join("schedule.csv").to_str().unwrap(), "--scenario",
        scenario.to_str().unwrap(), "--out", vdir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn oversized_model_for_bundled_solver_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = repo("scenarios/synthetic_48h.csv");
    let out = p2a(&["solve", "--scenario", scenario.to_str().unwrap(), "--tiny", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error kind=solve"));
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn shipped_scenarios_regenerate_from_seed_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = p2a(&["gen-profile", "--seed", "1", "--horizon", "48", "--lull", "9:39", "--name", "lull_48h", "--out", d]);
    assert!(out.status.success());
    let out = p2a(&["gen-profile", "--seed", "1", "--horizon", "48", "--name", "synthetic_48h", "--out", d]);
    assert!(out.status.success());
    for f in ["lull_48h.csv", "lull_48h.toml", "synthetic_48h.csv", "synthetic_48h.toml"] {
        assert_eq!(std::fs::read(dir.path().join(f)).unwrap(), std::fs::read(repo(&format!("scenarios/{f}"))).unwrap(), "{f}");
    }
}
