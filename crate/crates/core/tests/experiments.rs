use gridledger::experiments::{run_all, run_exp1, run_exp3, run_experiment, write_all, RunConfig, EXPERIMENT_IDS};

fn quick() -> RunConfig {
    let mut c = RunConfig::default();
    c.workload.hours = 2;
    c.exp1_records = 50;
    c.tamper_trials = 5;
    c.amortized_records = 64;
    c.exp4_sizes = vec![3, 7];
    c.exp4_reps = 4;
    c.exp5_requests = 4;
    c
}

#[test]
fn verdicts_survive_a_seed_change() {
    for seed in [1u64, 99, 123_456_789] {
        let mut c = quick();
        c.workload.seed = seed;
        for id in ["exp1", "exp3", "exp4", "exp5"] {
            let r = run_experiment(id, &c).unwrap();
            assert!(r.passed(), "seed {seed} {id}: {:?}", r.gates);
        }
    }
}

#[test]
fn zero_tamper_trials_still_reproduce() {
    let c = RunConfig { tamper_trials: 0, ..quick() };
    let r = run_exp1(&c).unwrap();
    assert!(r.passed());
    assert_eq!(r.metric_value("replay_matched"), Some("50"));
    assert_eq!(r.metric_value("tamper_trials"), Some("0"));
}

#[test]
fn same_seed_gives_identical_exp3_tables() {
    let a = run_exp3(&quick()).unwrap();
    let b = run_exp3(&quick()).unwrap();
    assert_eq!(a.tables, b.tables);
}

#[test]
fn written_outputs_carry_provenance() {
    let c = quick();
    let summary = run_all(&c).unwrap();
    assert_eq!(summary.rows.len(), 5);
    let dir = tempfile::tempdir().unwrap();
    write_all(&summary, &c, dir.path()).unwrap();

    let text = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(text.contains(&format!("# seed={}", c.seed())));
    assert!(text.contains(&format!("# config_digest={}", c.digest())));
    assert!(text.contains("tx_base=21000"));
    assert!(text.contains("exp2,Gas Reduction,"));

    for id in EXPERIMENT_IDS {
        let exp_dir = dir.path().join(id);
        assert!(exp_dir.join("metrics.csv").exists(), "{id}");
        for entry in std::fs::read_dir(&exp_dir).unwrap() {
            let path = entry.unwrap().path();
            let body = std::fs::read_to_string(&path).unwrap();
            let stamped = body.starts_with("# seed=") || body.starts_with("seed=");
            assert!(stamped, "{} lacks provenance", path.display());
            assert!(body.contains(&c.digest().to_hex()), "{} lacks the config digest", path.display());
        }
    }

    let reloaded = RunConfig::parse(&std::fs::read_to_string(dir.path().join("config.txt")).unwrap()).unwrap();
    assert_eq!(reloaded, c);
}

#[test]
fn unknown_experiment_is_an_error() {
    assert!(run_experiment("exp9", &quick()).is_err());
}
