use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adiabatic_tomo::cli::output::{csv_body, parse_config_echo};
use adiabatic_tomo::cli::{validate_config, validate_config_with, Overrides, Scenario, OUT_DIR_ENV};
use tempfile::TempDir;

const SMALL: &str = r#"
scenario = "fig3a"
[schedule]
t_ad = [2.0]
[simulation]
n_samples = 40
n_grid = 201
initial_states = ["01"]
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_adiatomo"));
    c.env_remove(OUT_DIR_ENV);
    c
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(cfg: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(cfg).args(extra).output().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(name).display()))
}

#[test]
fn list_scenarios_names_every_scenario() {
    let out = bin().arg("list-scenarios").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for s in Scenario::ALL {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(s.name())), "{}", s.name());
    }
}

#[test]
fn validate_prints_the_defaulted_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", "scenario = \"table1\"\n");
    let out = bin().arg("validate").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let printed = String::from_utf8(out.stdout).unwrap();
    assert_eq!(validate_config(&printed).unwrap(), validate_config("scenario = \"table1\"\n").unwrap());
}

#[test]
fn config_errors_exit_with_2() {
    let tmp = TempDir::new().unwrap();
    let bad = write(tmp.path(), "bad.toml", "scenario = \"fig3a\"\n[simulation]\ndt_us = 1.0\n");
    let out = run(&bad, &["--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("simulation.dt_us"));

    let out = bin().arg("validate").arg(tmp.path().join("missing.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let cfg = write(tmp.path(), "ok.toml", SMALL);
    let out = run(&cfg, &["--scenario", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let blocker = write(tmp.path(), "file", "");
    let out = run(&cfg, &["--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_with_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "scenario = \"chevron\"\n[calibration]\namplitudes = [0.5, 0.5, 0.5]\nn_time = 100\n",
    );
    let out = run(&cfg, &["--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn runs_are_deterministic_for_a_seed() {
    let tmp = TempDir::new().unwrap();
    let text = format!("{SMALL}shots = 300\nseed = 11\n");
    let cfg = write(tmp.path(), "c.toml", &text);
    let (a, c) = (tmp.path().join("a"), tmp.path().join("c"));
    let name = "fig3a_trace_tad2.csv";
    assert!(run(&cfg, &["--out", a.to_str().unwrap()]).status.success());
    let first = read(&a, name);
    assert!(run(&cfg, &["--out", a.to_str().unwrap()]).status.success());
    assert_eq!(first, read(&a, name));
    assert!(run(&cfg, &["--out", c.to_str().unwrap(), "--seed", "12"]).status.success());
    assert_ne!(csv_body(&read(&a, name)), csv_body(&read(&c, name)));
}

#[test]
fn exact_mode_output_does_not_depend_on_the_seed() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&cfg, &["--out", a.to_str().unwrap(), "--seed", "1"]).status.success());
    assert!(run(&cfg, &["--out", b.to_str().unwrap(), "--seed", "999"]).status.success());
    for name in ["fig3a_trace_tad2.csv", "fig3a_crossing.csv"] {
        let (x, y) = (read(&a, name), read(&b, name));
        assert_eq!(csv_body(&x), csv_body(&y), "{name}");
    }
}

#[test]
fn header_echo_reproduces_the_effective_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let out_dir = tmp.path().join("o");
    let out = run(&cfg, &["--out", out_dir.to_str().unwrap(), "--seed", "5"]);
    assert!(out.status.success());
    let csv = read(&out_dir, "fig3a_trace_tad2.csv");
    let echoed = parse_config_echo(&csv).unwrap();
    let expected = validate_config_with(
        SMALL,
        &Overrides { seed: Some(5), out_dir: Some(out_dir.to_string_lossy().into_owned()), ..Overrides::default() },
    )
    .unwrap();
    assert_eq!(echoed, expected);

    // Re-running the echoed config reproduces the data.
    let again = tmp.path().join("again");
    let echo_cfg = write(tmp.path(), "echo.toml", &echoed.to_toml());
    assert!(run(&echo_cfg, &["--out", again.to_str().unwrap()]).status.success());
    assert_eq!(csv_body(&csv), csv_body(&read(&again, "fig3a_trace_tad2.csv")));
}

#[test]
fn environment_variable_sets_the_output_dir() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let env_dir = tmp.path().join("from_env");
    let out = bin().arg("run").arg(&cfg).env(OUT_DIR_ENV, &env_dir).output().unwrap();
    assert!(out.status.success());
    assert!(env_dir.join("fig3a_crossing.csv").exists());

    let flag_dir = tmp.path().join("from_flag");
    let out = bin()
        .arg("run")
        .arg(&cfg)
        .args(["--out", flag_dir.to_str().unwrap()])
        .env(OUT_DIR_ENV, tmp.path().join("unused"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(flag_dir.join("fig3a_crossing.csv").exists());
    assert!(!tmp.path().join("unused").exists());
}

#[test]
fn json_output_carries_config_and_rows() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.toml", &SMALL.replace("[simulation]", "[output]\nformat = \"json\"\n[simulation]"));
    let out_dir = tmp.path().join("o");
    assert!(run(&cfg, &["--out", out_dir.to_str().unwrap()]).status.success());
    let doc: serde_json::Value = serde_json::from_str(&read(&out_dir, "fig3a_trace_tad2.json")).unwrap();
    assert_eq!(doc["scenario"], "fig3a");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 41);
    assert_eq!(doc["columns"][0], "t_us");
}
