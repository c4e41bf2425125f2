use diamond_experiments::{run_experiment, ExperimentError, RunConfig, EXPERIMENTS};

fn quick() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.triples = 50;
    cfg.seed = 3;
    cfg
}

#[test]
fn reruns_are_identical() {
    let cfg = quick();
    for name in ["metric-axioms", "gate-frequency"] {
        let a = run_experiment(name, &cfg).unwrap();
        let b = run_experiment(name, &cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json(), "{name}");
    }
}

#[test]
fn seeds_change_samples() {
    let mut cfg = quick();
    let a = run_experiment("gate-frequency", &cfg).unwrap();
    cfg.seed = 4;
    let b = run_experiment("gate-frequency", &cfg).unwrap();
    assert_ne!(a.rows, b.rows);
    assert_eq!(b.seed, 4);
}

#[test]
fn usage_errors() {
    let mut cfg = quick();
    assert!(matches!(run_experiment("no-such-experiment", &cfg), Err(ExperimentError::Usage(_))));
    cfg.trials = 0;
    assert!(matches!(run_experiment("doubling", &cfg), Err(ExperimentError::Usage(_))));
    let mut cfg = quick();
    cfg.collapse_budget = 0;
    assert!(matches!(run_experiment("collapse", &cfg), Err(ExperimentError::Usage(_))));
    let mut cfg = quick();
    cfg.tangent_samples = 2;
    assert!(matches!(run_experiment("tangent", &cfg), Err(ExperimentError::Usage(_))));
}

#[test]
fn unresolvable_levels_hit_the_resource_guard() {
    let mut cfg = quick();
    cfg.levels = 40;
    assert!(matches!(run_experiment("metric-axioms", &cfg), Err(ExperimentError::Resource(_))));
}

#[test]
fn names_are_unique() {
    let mut v = EXPERIMENTS.to_vec();
    v.sort_unstable();
    v.dedup();
    assert_eq!(v.len(), EXPERIMENTS.len());
}

#[test]
fn tangent_groups_are_far_apart_and_wide() {
    let mut cfg = quick();
    cfg.tangent_samples = 200;
    let rep = run_experiment("tangent", &cfg).unwrap();
    assert!(rep.value("cross_color_ratio").unwrap() >= 0.95);
    // points of one color come arbitrarily close to each other
    assert!(rep.value("same_color_nearest_ratio").unwrap() < 0.5);
}
