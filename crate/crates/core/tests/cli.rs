//! End-to-end tests of the `bcmnet` binary: config parsing, file outputs,
//! exit codes, and byte-level reproducibility.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bcmnet::data::synth::{generate, write_raw_csv, PlantedSpec};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bcmnet"))
}

/// Writes a small planted dataset, schema, and run config into `dir`.
fn setup(dir: &Path) -> PathBuf {
    let spec = PlantedSpec::ten_feature(120, 3);
    let (schema, data) = generate(&spec).unwrap();
    write_raw_csv(dir.join("synth.csv"), &schema, &data).unwrap();

    let mut schema_toml = String::from(
        "label = \"target\"\nlabel_values = [\"neg\", \"pos\"]\n",
    );
    for i in 1..=10 {
        let categories = if i <= 8 {
            "[\"A\", \"B\", \"C\", \"D\"]"
        } else {
            "[\"Yes\", \"No\"]"
        };
        write!(
            schema_toml,
            "\n[[features]]\nid = {i}\nname = \"f{i}\"\ncategories = {categories}\n"
        )
        .unwrap();
    }
    std::fs::write(dir.join("synth_schema.toml"), schema_toml).unwrap();

    let config = String::from(
        r#"
dataset = "synth.csv"
schema = "synth_schema.toml"
out_dir = "out"
seed = 11
k = 2
hidden_layers = [6, 6]
b_max = 2400
d = 400
p_min = 0.0
n_trials = 2

[train]
epochs = 10
batch_size = 32
learning_rate = 0.05

[costs]
lo = 100
hi = 300
seed = 3
"#,
    );
    let config_path = dir.join("run.toml");
    std::fs::write(&config_path, config).unwrap();
    config_path
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn bcmnet");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

#[test]
fn schedule_writes_outputs_and_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path());
    let out1 = dir.path().join("out1");
    let out2 = dir.path().join("out2");

    let run1 = run_ok(bin().args(["schedule", "--config"]).arg(&config).arg("--out").arg(&out1));
    run_ok(bin().args(["schedule", "--config"]).arg(&config).arg("--out").arg(&out2));

    let stdout = String::from_utf8_lossy(&run1.stdout);
    assert!(stdout.contains("budget"), "summary table printed:\n{stdout}");

    let files1 = dir_bytes(&out1);
    let names: Vec<&str> = files1.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["cost_profile.csv", "schedule.csv", "schedule_models.txt"]);
    assert_eq!(files1, dir_bytes(&out2), "reruns must be byte-identical");

    let schedule = std::fs::read_to_string(out1.join("schedule.csv")).unwrap();
    assert!(schedule.starts_with("model_index,budget,accuracy,model_cost,feature_ids,feature_names\n"));
    let first = schedule.lines().nth(1).unwrap();
    assert!(first.starts_with("1,2400,"), "top budget from config: {first}");
}

#[test]
fn flag_overrides_beat_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path());
    let out = dir.path().join("out-flags");
    run_ok(
        bin()
            .args(["schedule", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--b-max", "2800", "--d", "2800"]),
    );
    let schedule = std::fs::read_to_string(out.join("schedule.csv")).unwrap();
    let first = schedule.lines().nth(1).unwrap();
    assert!(first.starts_with("1,2800,"), "overridden budget: {first}");
    assert_eq!(schedule.lines().count(), 2, "single level when d == b_max");
}

#[test]
fn missing_schema_fails_with_no_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path());
    std::fs::remove_file(dir.path().join("synth_schema.toml")).unwrap();
    let out_dir = dir.path().join("out");

    let out = bin().args(["schedule", "--config"]).arg(&config).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error"), "diagnostic on stderr: {stderr}");
    assert!(!out_dir.exists(), "no partial outputs");
}

#[test]
fn ablate_writes_one_curve_per_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path());
    let out = dir.path().join("out-ablate");
    run_ok(
        bin()
            .args(["ablate", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .arg("--explain"),
    );

    let mut lengths = Vec::new();
    for strategy in ["weak_neuron", "cost_based", "random"] {
        let text = std::fs::read_to_string(out.join(format!("ablation_{strategy}.csv"))).unwrap();
        assert!(text.starts_with("strategy,n_removed,remaining_feature_ids,model_cost,accuracy\n"));
        lengths.push(text.lines().count());
    }
    assert_eq!(lengths, vec![11, 11, 11], "10 features -> 10 curve points + header");
    let explain =
        std::fs::read_to_string(out.join("ablation_weak_neuron_explain.txt")).unwrap();
    assert!(explain.contains("escalation round"));
}

#[test]
fn compare_writes_trials_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path());
    let out = dir.path().join("out-compare");
    run_ok(bin().args(["compare", "--config"]).arg(&config).arg("--out").arg(&out));

    let trials = std::fs::read_to_string(out.join("comparison_trials.csv")).unwrap();
    assert!(trials.starts_with("strategy,budget,trial,accuracy,model_cost,feature_ids\n"));
    let summary = std::fs::read_to_string(out.join("comparison_summary.csv")).unwrap();
    assert!(summary.starts_with("strategy,budget,best_accuracy\n"));
    for strategy in ["weak_neuron", "cost_based", "random"] {
        assert!(summary.contains(strategy));
    }
}

#[test]
fn gradcheck_exits_zero_on_healthy_gradients() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path());
    let out = run_ok(bin().args(["gradcheck", "--config"]).arg(&config));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("max relative error"), "{stdout}");
    assert!(stdout.contains("ok"), "{stdout}");
}

#[test]
fn unknown_strategy_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path());
    let out = bin()
        .args(["ablate", "--config"])
        .arg(&config)
        .args(["--strategy", "gradient"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
