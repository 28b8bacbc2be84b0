use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const QUICK: &str = "\
hours=2
exp1_records=40
tamper_trials=3
amortized_records=64
exp4_sizes=3,5
exp4_reps=3
exp5_requests=3
daily_capacity=300
";

fn gridledger(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridledger")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("run.conf");
    fs::write(&path, format!("{QUICK}{extra}")).unwrap();
    path.display().to_string()
}

#[test]
fn single_experiment_writes_its_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), "");
    let o = gridledger(&["exp3", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("exp3/metrics.csv").exists());
    assert!(out.join("exp3/series_ops.csv").exists());
    assert!(String::from_utf8_lossy(&o.stdout).contains("[PASS] violations_rejected"));
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), "");
    let o = gridledger(&["exp1", "--config", &config, "--seed", "4242", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let metrics = fs::read_to_string(out.join("exp1/metrics.csv")).unwrap();
    assert!(metrics.starts_with("# seed=4242\n"));
}

#[test]
fn all_with_plots_writes_summary_and_figures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), "");
    let o = gridledger(&["all", "--config", &config, "--out", out.to_str().unwrap(), "--emit-plots"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().filter(|l| l.ends_with(",PASS")).count(), 5);
    for svg in ["amortized_gas.svg", "hourly_gas.svg", "gas_per_tx.svg"] {
        let body = fs::read_to_string(out.join("exp2").join(svg)).unwrap();
        assert!(body.contains("<svg"), "{svg}");
    }
}

#[test]
fn failed_gate_gives_exit_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), "reduction_min_pct=90\nreduction_max_pct=95\n");
    let o = gridledger(&["exp2", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("[FAIL] reduction_in_band"));
    assert!(out.join("exp2/metrics.csv").exists());
}

#[test]
fn bad_config_gives_exit_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "no_such_key=1\n");
    let o = gridledger(&["exp1", "--config", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no_such_key"));
}
