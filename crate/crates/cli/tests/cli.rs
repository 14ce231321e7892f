use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn qcompress(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcompress")).args(args).output().unwrap()
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_prints_only_manifest_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "stretch.toml",
        "experiment = \"stretch\"\nseed = 1\n[params]\nspectra = [{ kind = \"tfi\", n_spin = 10 }]\n",
    );
    let out = dir.path().join("out");
    let result = qcompress(&["run", "--threads", "1", "--config", path_arg(&config), "--output", path_arg(&out)]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let stdout = String::from_utf8(result.stdout).unwrap();
    let manifest = out.join("manifest.json");
    assert_eq!(stdout, format!("{}\n", manifest.display()));

    let csv = std::fs::read_to_string(out.join("stretch.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",1029"), "{csv}");

    let check = qcompress(&["validate", "--manifest", path_arg(&manifest)]);
    assert!(check.status.success());
    std::fs::write(out.join("stretch.csv"), "tampered\n").unwrap();
    let check = qcompress(&["validate", "--manifest", path_arg(&manifest)]);
    assert_eq!(check.status.code(), Some(1));
}

#[test]
fn missing_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(&dir, "bad.toml", "experiment = \"tfi_errors\"\nseed = 1\n[params]\nn_spin = 6\nt = 2.0\n");
    let result = qcompress(&["validate", "--config", path_arg(&config)]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("params.h"));
    assert!(result.stdout.is_empty());
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(&dir, "bad.toml", "experiment = \"ltv\"\nseed = 1\n[params]\ntrails = 5\n");
    let result = qcompress(&["run", "--config", path_arg(&config)]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("trails"));
}

#[test]
fn oversized_run_exits_with_resource_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "big.toml",
        "experiment = \"tfi_errors\"\nseed = 1\nmax_memory_gb = 4.0\n[params]\nn_spin = 14\nh = 2.0\nt = 2.0\n",
    );
    let out = dir.path().join("out");
    let result = qcompress(&["run", "--config", path_arg(&config), "--output", path_arg(&out)]);
    assert_eq!(result.status.code(), Some(3));
    assert!(!out.join("manifest.json").exists());

    let est = qcompress(&["estimate", "--config", path_arg(&config)]);
    assert!(est.status.success());
    let json: serde_json::Value = serde_json::from_slice(&est.stdout).unwrap();
    assert_eq!(json["max_dim"], 16384);
    assert!(String::from_utf8_lossy(&est.stderr).contains("warning"));
}

#[test]
fn divergent_training_exits_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "ae.toml",
        "experiment = \"ae_table\"\nseed = 1\n[params]\nn_spin = 4\nk = 30\nm_values = [2]\ntrain_m = [2]\n\
         hidden_widths = [4]\nepochs = 50\nlearning_rate = 1e200\n",
    );
    let out = dir.path().join("out");
    let result = qcompress(&["run", "--config", path_arg(&config), "--output", path_arg(&out)]);
    assert_eq!(result.status.code(), Some(4), "{}", String::from_utf8_lossy(&result.stderr));
}

#[test]
fn estimate_counts_time_varying_work() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(&dir, "ltv.toml", "experiment = \"ltv\"\nseed = 1\n[params]\ntrials = 10\n");
    let est = qcompress(&["estimate", "--config", path_arg(&config)]);
    assert!(est.status.success());
    let json: serde_json::Value = serde_json::from_slice(&est.stdout).unwrap();
    assert_eq!(json["max_dim"], 128);
    assert_eq!(json["expm_calls"], 3 * 10 * 200);
}

#[test]
fn lists_every_experiment() {
    let result = qcompress(&["list-experiments"]);
    assert!(result.status.success());
    let text = String::from_utf8(result.stdout).unwrap();
    for name in ["tfi_errors", "snapshot_sv", "sweep_spectra", "random_h", "ae_table", "ltv", "nldi_table", "unitary"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "missing {name}");
    }
}

#[test]
fn usage_errors_exit_with_config_code() {
    assert_eq!(qcompress(&["run"]).status.code(), Some(2));
    assert_eq!(qcompress(&["frobnicate"]).status.code(), Some(2));
}
