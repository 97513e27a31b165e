use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_lugre-pinn");

const FAST: &str = r#"
[generate]
amplitudes_deg = [40.0, 60.0]
swing_duration = 1.0
translation_duration = 2.0

[train]
epochs = 3
width = 8
hidden_layers = 2

[identify]
nm_max_iters = 5
ga_population = 10
ga_generations = 1
lm_max_iters = 1
"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("fast.toml"), FAST).unwrap();
    dir
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn generate_writes_pair_with_manifests() {
    let dir = setup();
    let o = run(dir.path(), &["generate", "--config", "fast.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["train_clean.csv", "train_noisy.csv", "train_clean.csv.manifest", "train_noisy.csv.manifest"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
    let manifest = std::fs::read_to_string(dir.path().join("out/train_noisy.csv.manifest")).unwrap();
    assert!(manifest.contains("command = generate"));
    assert!(manifest.contains("seed = 7"));
    assert!(manifest.contains("version = v"));
}

#[test]
fn zero_noise_writes_clean_only() {
    let dir = setup();
    let o = run(dir.path(), &["generate", "--config", "fast.toml", "--noise", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("out/train_clean.csv").exists());
    assert!(!dir.path().join("out/train_noisy.csv").exists());
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = setup();
    for out in ["a", "b"] {
        let o = run(dir.path(), &["generate", "--config", "fast.toml", "--seed", "3", "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = std::fs::read(dir.path().join("a/train_noisy.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/train_noisy.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn unknown_config_field_is_usage_error() {
    let dir = setup();
    std::fs::write(dir.path().join("bad.toml"), "[train]\nepoch = 3\n").unwrap();
    let o = run(dir.path(), &["generate", "--config", "bad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("epoch"), "{}", stderr(&o));
}

#[test]
fn bad_flag_values_are_usage_errors() {
    let dir = setup();
    assert!(run(dir.path(), &["generate", "--config", "fast.toml"]).status.success());

    let o = run(dir.path(), &["identify", "--method", "simplex"]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    for name in ["nelder-mead", "ga", "nls", "all"] {
        assert!(msg.contains(name), "{msg}");
    }

    let o = run(dir.path(), &["train", "--variant", "bb3"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(dir.path(), &["evaluate", "--mode", "offline"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(dir.path(), &["evaluate", "--mode", "steady-map", "--traj", "3"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_dataset_is_runtime_error() {
    let dir = setup();
    let o = run(dir.path(), &["train", "--variant", "bb1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("dataset"), "{}", stderr(&o));
}

#[test]
fn zero_epochs_writes_initialized_model() {
    let dir = setup();
    assert!(run(dir.path(), &["generate", "--config", "fast.toml"]).status.success());
    let o = run(dir.path(), &["train", "--config", "fast.toml", "--variant", "pe2", "--epochs", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("mu_s"), "{stdout}");
    assert!(dir.path().join("out/pe2.model").exists());
    let hist = std::fs::read_to_string(dir.path().join("out/pe2_history.csv")).unwrap();
    assert_eq!(hist.lines().count(), 1);
}

#[test]
fn identify_one_method_one_row() {
    let dir = setup();
    assert!(run(dir.path(), &["generate", "--config", "fast.toml"]).status.success());
    let o = run(dir.path(), &["identify", "--config", "fast.toml", "--method", "nelder-mead"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/identify.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("nelder-mead,"));
}

#[test]
fn identify_all_adds_model_rows() {
    let dir = setup();
    assert!(run(dir.path(), &["generate", "--config", "fast.toml"]).status.success());
    assert!(run(dir.path(), &["train", "--config", "fast.toml", "--variant", "pe2"]).status.success());
    let o = run(dir.path(), &["identify", "--config", "fast.toml", "--method", "all", "--model", "out/pe2.model"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/identify.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 + 1);
    assert!(csv.contains("\npinn-pe2,"));
}

#[test]
fn evaluate_steady_map_and_online() {
    let dir = setup();
    assert!(run(dir.path(), &["generate", "--config", "fast.toml"]).status.success());
    assert!(run(dir.path(), &["train", "--config", "fast.toml", "--variant", "bb2"]).status.success());

    let o = run(dir.path(), &["evaluate", "--mode", "steady-map"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let map = std::fs::read_to_string(dir.path().join("out/steady_map_reference.csv")).unwrap();
    assert_eq!(map.lines().count(), 1 + 40 * 14);
    assert!(dir.path().join("out/steady_map_bb2.csv").exists());

    let o = run(dir.path(), &["evaluate", "--mode", "online", "--traj", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("bb2"));
    let csv = std::fs::read_to_string(dir.path().join("out/eval_online_traj2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let o = run(dir.path(), &["report"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("out/report.txt").exists());
}
