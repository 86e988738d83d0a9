use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn budgex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_budgex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

/// Data rows of a CSV file written by the tool, without the comment line.
fn rows(path: &Path) -> Vec<csv::StringRecord> {
    let text = fs::read_to_string(path).unwrap();
    let (comment, body) = text.split_once('\n').unwrap();
    assert!(comment.starts_with("# config_hash="), "{comment}");
    assert!(comment.contains(" seed="));
    csv::Reader::from_reader(body.as_bytes())
        .records()
        .map(Result::unwrap)
        .collect()
}

const SINGLE_EXPERT: &str = r#"
seed = 4
replications = 3

[instance]
family = "gap"
target_mean = 0.5
risks = [0.3]

[learner]
kind = "two_point"
horizon = 200
"#;

#[test]
fn single_expert_run_has_zero_excess() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SINGLE_EXPERT);
    let out = dir.path().join("out");
    let status = budgex(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let results = rows(&out.join("results.csv"));
    assert_eq!(results.len(), 3);
    for r in &results {
        assert_eq!(&r[2], "0");
        assert_eq!(&r[3], "1");
    }
    assert_eq!(rows(&out.join("summary.csv")).len(), 1);
}

#[test]
fn unknown_key_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &SINGLE_EXPERT.replace("horizon = 200", "horizon = 200\nhorizn = 5"));
    let out = budgex(&["run", "--config", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("horizn"), "{stderr}");
    assert!(stderr.contains("line "), "{stderr}");
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let out = budgex(&["analyze", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn zero_threads_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SINGLE_EXPERT);
    let out = budgex(&["run", "--config", &config, "--threads", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_values_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SINGLE_EXPERT);
    let out = dir.path().join("out");
    let status = budgex(&[
        "sweep",
        "--config",
        &config,
        "--variable",
        "horizon",
        "--values",
        "10,20,40",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let rates = rows(&out.join("rates.csv"));
    let values: Vec<&str> = rates.iter().map(|r| r.get(0).unwrap()).collect();
    assert_eq!(values, ["10", "20", "40"]);
    // Every median is zero, so no slope can be fitted.
    assert!(!out.join("fit.csv").exists());
    assert_eq!(rows(&out.join("results.csv")).len(), 9);
}

#[test]
fn audit_and_analyze_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
seed = 1
replications = 20

[instance]
family = "gap"
id = "pair"
target_mean = 0.5
noise = 0.1
risks = [0.26, 0.4]

[learner]
kind = "budgeted"
budget = 4000

[analysis]
eps = [0.0, 0.01]
"#,
    );
    let out = dir.path().join("out");
    let audit = budgex(&["audit", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(audit.status.code(), Some(0), "{}", String::from_utf8_lossy(&audit.stderr));
    let checks: Vec<String> = rows(&out.join("audit.csv")).iter().map(|r| r[0].to_string()).collect();
    assert!(checks.contains(&"budget_exactness".to_string()));
    assert!(!checks.contains(&"pair_spread".to_string()));

    let analyze = budgex(&["analyze", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(analyze.status.success());
    let experts = rows(&out.join("analysis_experts.csv"));
    assert_eq!(experts.len(), 2);
    assert_eq!(&experts[0][3], "inf");
    let complexity = rows(&out.join("analysis_complexity.csv"));
    assert_eq!(complexity.len(), 2);
    assert_eq!(&complexity[0][0], "pair");
}
