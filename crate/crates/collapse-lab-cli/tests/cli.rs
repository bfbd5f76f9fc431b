//! End-to-end tests of the `collapse-lab` binary: exit codes, artifact
//! bytes, and the stability contracts (rerun determinism, thread-count
//! invariance, format-agnostic configs).

use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const TRAJECTORY_HEADER: &str = "run_id,t,theta_0,theta_1,param_error,tv,kl,dataset_size";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_collapse-lab"))
}

/// Fresh per-test scratch directory under the cargo-managed tmpdir.
fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    if dir.exists() {
        fs::remove_dir_all(&dir).expect("clear scratch dir");
    }
    fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

fn write_config(dir: &Path, file_name: &str, body: &str) -> PathBuf {
    let path = dir.join(file_name);
    fs::write(&path, body).expect("write config");
    path
}

fn gaussian_toml(extra: &str) -> String {
    format!(
        "family = \"gaussian\"\n\
         theta_star = [0.0, 1.0]\n\
         n = 20\n\
         T = 5\n\
         seed = 11\n\
         replications = 3\n\
         mle_mode = \"exact\"\n\
         {extra}"
    )
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn run_simulate(config: &Path, work_dir: &Path, envs: &[(&str, &str)]) -> Output {
    let mut cmd = bin();
    cmd.arg("simulate").arg(config).current_dir(work_dir);
    for (key, value) in envs {
        cmd.env(key, value);
    }
    let output = cmd.output().expect("run simulate");
    assert!(
        output.status.success(),
        "simulate failed: {}",
        stderr_of(&output)
    );
    output
}

fn artifact_bytes(dir: &Path, names: &[&str]) -> Vec<Vec<u8>> {
    names
        .iter()
        .map(|name| fs::read(dir.join(name)).unwrap_or_else(|_| panic!("missing {name}")))
        .collect()
}

#[test]
fn rerun_is_byte_identical() {
    let dir = scratch("rerun");
    let config = write_config(&dir, "run.toml", &gaussian_toml("svg = true\n"));
    let names = ["trajectories.csv", "summary.json", "mean_error.svg"];

    run_simulate(&config, &dir, &[]);
    let first = artifact_bytes(&dir, &names);
    run_simulate(&config, &dir, &[]);
    let second = artifact_bytes(&dir, &names);

    assert_eq!(first, second, "rerun changed artifact bytes");
    let csv = String::from_utf8(first[0].clone()).expect("utf-8 csv");
    assert_eq!(csv.lines().next(), Some(TRAJECTORY_HEADER));
}

#[test]
fn thread_count_is_invisible_in_outputs() {
    let dir = scratch("threads");
    let body = gaussian_toml("svg = true\n").replace("replications = 3", "replications = 6");
    let config = write_config(&dir, "run.toml", &body);
    let names = ["trajectories.csv", "summary.json", "mean_error.svg"];

    run_simulate(&config, &dir, &[("COLLAPSE_LAB_THREADS", "1")]);
    let serial = artifact_bytes(&dir, &names);
    run_simulate(&config, &dir, &[("COLLAPSE_LAB_THREADS", "8")]);
    let parallel = artifact_bytes(&dir, &names);

    assert_eq!(serial, parallel, "thread count leaked into artifacts");
}

#[test]
fn toml_and_json_configs_agree() {
    let toml_dir = scratch("fmt_toml");
    let json_dir = scratch("fmt_json");
    let toml_config = write_config(&toml_dir, "run.toml", &gaussian_toml(""));
    let json_body = r#"{
  "family": "gaussian",
  "theta_star": [0.0, 1.0],
  "n": 20,
  "T": 5,
  "seed": 11,
  "replications": 3,
  "mle_mode": "exact"
}
"#;
    let json_config = write_config(&json_dir, "run.json", json_body);

    run_simulate(&toml_config, &toml_dir, &[]);
    run_simulate(&json_config, &json_dir, &[]);

    let from_toml = artifact_bytes(&toml_dir, &["trajectories.csv", "summary.json"]);
    let from_json = artifact_bytes(&json_dir, &["trajectories.csv", "summary.json"]);
    assert_eq!(from_toml, from_json, "config format changed the outputs");
}

#[test]
fn multi_n_runs_prefix_run_ids_and_split_summaries() {
    let dir = scratch("multi_n");
    let body = "family = \"exponential\"\n\
                theta_star = [1.0]\n\
                n = [10, 20]\n\
                T = 4\n\
                seed = 3\n\
                replications = 2\n\
                mle_mode = \"exact\"\n";
    let config = write_config(&dir, "run.toml", body);
    run_simulate(&config, &dir, &[]);

    let csv = fs::read_to_string(dir.join("trajectories.csv")).expect("read csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(TRAJECTORY_HEADER));
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 8, "bad row {line:?}");
        assert!(
            cells[0].starts_with("n10-r") || cells[0].starts_with("n20-r"),
            "run_id {:?} lacks an n prefix",
            cells[0]
        );
        assert_eq!(cells[3], "", "one-parameter family must leave theta_1 empty");
    }
    for name in ["summary_n10.json", "summary_n20.json"] {
        let summary: Value =
            serde_json::from_str(&fs::read_to_string(dir.join(name)).expect("read summary"))
                .expect("parse summary");
        assert!(summary.get("config_echo").is_some());
        assert!(summary.get("ratio_T_over_1").is_some());
        assert!(summary.get("per_iteration").is_some());
        assert!(summary.get("failures").is_some());
    }
}

#[test]
fn seed_flag_overrides_the_config_seed() {
    let base = scratch("seed_override");
    let config = write_config(&base, "run.toml", &gaussian_toml(""));
    let dir_a = scratch("seed_override_a");
    let dir_b = scratch("seed_override_b");
    let dir_c = scratch("seed_override_c");

    let mut run = |dir: &Path, seed: &str| {
        let output = bin()
            .arg("--seed")
            .arg(seed)
            .arg("simulate")
            .arg(&config)
            .current_dir(dir)
            .output()
            .expect("run simulate");
        assert!(output.status.success(), "{}", stderr_of(&output));
    };
    run(&dir_a, "7");
    run(&dir_b, "7");
    run(&dir_c, "8");

    let csv_a = fs::read(dir_a.join("trajectories.csv")).expect("csv a");
    let csv_b = fs::read(dir_b.join("trajectories.csv")).expect("csv b");
    let csv_c = fs::read(dir_c.join("trajectories.csv")).expect("csv c");
    assert_eq!(csv_a, csv_b, "same override must reproduce the run");
    assert_ne!(csv_a, csv_c, "different seeds must change the draws");

    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir_a.join("summary.json")).expect("read"))
            .expect("parse");
    assert_eq!(summary["config_echo"]["seed"], 7, "echo must show the effective seed");
}

#[test]
fn unknown_family_is_a_config_error() {
    let dir = scratch("bad_family");
    let body = gaussian_toml("").replace("\"gaussian\"", "\"zeta\"");
    let config = write_config(&dir, "run.toml", &body);
    let output = bin().arg("simulate").arg(&config).output().expect("run");
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("zeta"), "error must name the family");
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = scratch("bad_key");
    let config = write_config(&dir, "run.toml", &gaussian_toml("bogus_knob = 3\n"));
    let output = bin().arg("simulate").arg(&config).output().expect("run");
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("bogus_knob"), "error must name the key");
}

#[test]
fn missing_required_key_is_a_config_error() {
    let dir = scratch("missing_key");
    let body = gaussian_toml("").replace("seed = 11\n", "");
    let config = write_config(&dir, "run.toml", &body);
    let output = bin().arg("simulate").arg(&config).output().expect("run");
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("seed"), "error must name the missing key");
}

#[test]
fn spike_demo_reports_the_two_round_frequencies() {
    let dir = scratch("spike_demo");
    let output = bin()
        .args(["collapse-demo", "spike"])
        .args(["--scale", "30", "--n", "30", "--replications", "150"])
        .arg("--output-dir")
        .arg(&dir)
        .output()
        .expect("run spike demo");
    assert!(output.status.success(), "{}", stderr_of(&output));

    let stdout = stdout_of(&output);
    assert!(stdout.contains("iteration 1: frequency of tv <="));
    assert!(stdout.contains("iteration 2: frequency of tv >="));

    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.join("spike_report.json")).expect("read"))
            .expect("parse spike report");
    assert_eq!(report["replications"], 150);
    let close = report["close_frequency"].as_f64().expect("close_frequency");
    let collapse = report["collapse_frequency"].as_f64().expect("collapse_frequency");
    assert!((0.0..=1.0).contains(&close));
    assert!((0.0..=1.0).contains(&collapse));
    assert_eq!(report["collapse_threshold"].as_f64(), Some(1.0 / 16.0));
}

#[test]
fn tail_demo_with_no_iterations_reports_no_collapse() {
    let dir = scratch("tail_zero");
    let output = bin()
        .args(["collapse-demo", "tail"])
        .args(["--t-max", "0", "--replications", "5"])
        .arg("--output-dir")
        .arg(&dir)
        .output()
        .expect("run tail demo");
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert!(stdout_of(&output).contains("no collapse possible"));

    let replications = fs::read_to_string(dir.join("tail_replications.csv")).expect("read");
    let rows: Vec<&str> = replications.lines().collect();
    assert_eq!(rows[0], "replication,collapse_t,tv_at_collapse,g_selection_t");
    assert_eq!(rows.len(), 6);
    for (rep, row) in rows[1..].iter().enumerate() {
        assert_eq!(*row, format!("{rep},,,"));
    }

    let survival = fs::read_to_string(dir.join("tail_survival.csv")).expect("read");
    assert_eq!(survival, "t,surviving_fraction\n0,1\n");
}

#[test]
fn tail_demo_survival_curve_is_monotone() {
    let dir = scratch("tail_small");
    let output = bin()
        .args(["collapse-demo", "tail"])
        .args(["--n", "10", "--replications", "12", "--t-max", "40"])
        .arg("--output-dir")
        .arg(&dir)
        .output()
        .expect("run tail demo");
    assert!(output.status.success(), "{}", stderr_of(&output));

    let survival = fs::read_to_string(dir.join("tail_survival.csv")).expect("read");
    let fractions: Vec<f64> = survival
        .lines()
        .skip(1)
        .map(|line| line.split(',').nth(1).expect("fraction").parse().expect("f64"))
        .collect();
    assert_eq!(fractions.len(), 41);
    assert_eq!(fractions[0], 1.0);
    assert!(
        fractions.windows(2).all(|w| w[1] <= w[0]),
        "survival fraction rose: {fractions:?}"
    );

    let replications = fs::read_to_string(dir.join("tail_replications.csv")).expect("read");
    for row in replications.lines().skip(1) {
        let cells: Vec<&str> = row.split(',').collect();
        if !cells[1].is_empty() {
            let tv: f64 = cells[2].parse().expect("tv at collapse");
            assert!(tv >= 0.375, "collapse recorded below threshold: {row}");
        }
    }
}

#[test]
fn sweep_single_point_emits_one_row() {
    let dir = scratch("sweep_single");
    let body = "family = \"power_beta\"\n\
                theta_star = [1.0]\n\
                n = 40\n\
                T = 6\n\
                seed = 5\n\
                replications = 8\n\
                mle_mode = \"exact\"\n";
    let config = write_config(&dir, "run.toml", body);
    let output = bin()
        .arg("sweep")
        .arg(&config)
        .args(["--theta0", "0.5"])
        .current_dir(&dir)
        .output()
        .expect("run sweep");
    assert!(output.status.success(), "{}", stderr_of(&output));

    let csv = fs::read_to_string(dir.join("sweep.csv")).expect("read sweep");
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "theta0,ratio,ci_low,ci_high");
    assert_eq!(rows.len(), 2, "single theta0 must produce exactly one row");
    let cells: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(cells[0], "0.5");
    let ratio: f64 = cells[1].parse().expect("ratio");
    let lo: f64 = cells[2].parse().expect("ci_low");
    let hi: f64 = cells[3].parse().expect("ci_high");
    assert!(lo <= ratio && ratio <= hi, "interval must bracket the ratio");
}

#[test]
fn verify_names_the_injected_failure() {
    let output = bin()
        .arg("verify")
        .args(["--samples", "1000", "--pairs", "4", "--inject-fisher-error"])
        .output()
        .expect("run verify");
    assert_eq!(output.status.code(), Some(1));
    assert!(stdout_of(&output).contains("FAIL audit_fisher_hessian gaussian"));
    assert!(stderr_of(&output).contains("audit_fisher_hessian"));
}

#[test]
fn verify_json_is_machine_readable() {
    let output = bin()
        .arg("verify")
        .args(["--samples", "1000", "--pairs", "4", "--json"])
        .output()
        .expect("run verify");
    assert!(output.status.success(), "{}", stderr_of(&output));

    let report: Value = serde_json::from_str(&stdout_of(&output)).expect("parse report");
    assert_eq!(report["all_pass"], true);
    let checks = report["checks"].as_array().expect("checks array");
    assert!(!checks.is_empty());
    for check in checks {
        assert!(check["name"].is_string());
        assert!(check["pass"].is_boolean());
        assert!(check["detail"].is_string());
    }
}
