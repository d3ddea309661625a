use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pinning-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("exp.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn pinning(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinning")).args(args).output().unwrap()
}

const COUPLING: &str = "name = \"c\"\nkind = \"coupling\"\nl = [6, 8]\nsamples = 12\nseed = 3\nhorizon = 0.3\n";

#[test]
fn same_config_same_bytes() {
    let dir = scratch("determinism");
    let cfg = write_config(&dir, COUPLING);
    let (a, b) = (dir.join("a"), dir.join("b"));
    for out in [&a, &b] {
        let o = pinning(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS c/order_preserved"));
    }
    for file in ["c.csv", "c.summary.txt"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap());
    }
    let csv = std::fs::read_to_string(a.join("c.csv")).unwrap();
    assert!(csv.starts_with("# config_hash="));
    assert!(csv.contains("# seeds=3..=3\n"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn seed_flag_changes_the_output() {
    let dir = scratch("seed");
    let cfg = write_config(&dir, COUPLING);
    let out = dir.join("o");
    let run = |seed: &str| {
        let o = pinning(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--seed", seed, "--threads", "1"]);
        assert!(o.status.success());
        std::fs::read_to_string(out.join("c.csv")).unwrap()
    };
    assert_ne!(run("5"), run("6"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn failing_criterion_gives_nonzero_exit() {
    let dir = scratch("fail");
    // the equality witness cannot meet a zero tolerance
    let cfg = write_config(&dir, "name = \"a\"\nkind = \"agmon\"\nsamples = 5\ntolerance = 0.0\nprofile_cells = 1000\n");
    let o = pinning(&["heat", "--config", cfg.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("PASS a/agmon_sweep") && stdout.contains("FAIL a/equality_witness"), "{stdout}");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn kind_must_match_the_subcommand() {
    let dir = scratch("kind");
    let cfg = write_config(&dir, COUPLING);
    let o = pinning(&["stefan", "--config", cfg.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not belong"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn sweep_runs_a_directory() {
    let dir = scratch("sweep");
    let cfgs = dir.join("configs");
    std::fs::create_dir_all(&cfgs).unwrap();
    std::fs::write(cfgs.join("1.toml"), "name = \"eq\"\nkind = \"equilibrium\"\nl = [8, 16]\nlambda = 1.5\n").unwrap();
    std::fs::write(cfgs.join("2.toml"), "name = \"or\"\nkind = \"oracle\"\nl = [3]\n").unwrap();
    let out = dir.join("out");
    let o = pinning(&["sweep", "--config", cfgs.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("eq.csv").exists() && out.join("or.summary.txt").exists());
    assert!(out.join("eq.contacts_L16.csv").exists());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bad_configs_are_reported() {
    let dir = scratch("bad");
    let cfg = write_config(&dir, "name = \"x\"\nkind = \"coupling\"\nsampels = 3\n");
    let o = pinning(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("sampels"));
    std::fs::remove_dir_all(dir).unwrap();
}
