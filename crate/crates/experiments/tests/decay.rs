use diamond_core::measure::sample_point;
use diamond_core::rng::stream;
use diamond_experiments::decay::{quantile, remainder};
use diamond_experiments::{build, run_experiment, RunConfig};
use diamond_harmonic::{FunctionKind, LipschitzFunctionSpec};

#[test]
fn quantile_uses_nearest_rank() {
    let v = [5.0, 1.0, 4.0, 2.0, 3.0];
    assert_eq!(quantile(&v, 0.5), 3.0);
    assert_eq!(quantile(&v, 0.9), 5.0);
    assert_eq!(quantile(&v, 0.0), 1.0);
    assert_eq!(quantile(&[7.0], 0.9), 7.0);
}

#[test]
fn linear_functions_have_zero_remainder() {
    let cx = build(2, 3, true, None).unwrap();
    let specs = [
        LipschitzFunctionSpec::scalar(FunctionKind::Coordinate { axis: 0 }),
        LipschitzFunctionSpec::scalar(FunctionKind::Coordinate { axis: 2 }),
        LipschitzFunctionSpec { kind: FunctionKind::Affine { a: [1.5, -0.25, 0.75], b: -3.0 }, dim: 3 },
    ];
    let mut rng = stream(9, 0);
    for spec in &specs {
        let f = spec.instantiate(&cx).unwrap();
        for _ in 0..10 {
            let p = sample_point(&cx, 3, &mut rng);
            for r in [1.0 / 3.0, 1.0 / 27.0] {
                let rem = remainder(&cx, &f, &p, r, 0.5, 1e-6).unwrap();
                assert!(rem < 1e-9, "{} at r={r}: {rem}", spec.label());
            }
        }
    }
}

#[test]
fn distance_to_a_point_has_remainder_below_its_lipschitz_bound() {
    let cx = build(2, 3, true, None).unwrap();
    let mut rng = stream(10, 0);
    let target = sample_point(&cx, 3, &mut rng);
    let f = LipschitzFunctionSpec::scalar(FunctionKind::DistanceToPoint { point: target }).instantiate(&cx).unwrap();
    for _ in 0..10 {
        let p = sample_point(&cx, 3, &mut rng);
        let rem = remainder(&cx, &f, &p, 1.0 / 9.0, 0.5, 1e-6).unwrap();
        // |f(q) - f(p)| <= d and |∇f · Δx| <= |Δx|, both at most a few r
        assert!(rem.is_finite() && rem >= 0.0 && rem < 20.0, "remainder {rem}");
    }
}

#[test]
fn small_decay_run_reports_zero_linear_remainder() {
    let mut cfg = RunConfig::default();
    cfg.decay_points = 24;
    cfg.decay_level = 3;
    cfg.radii_exponents = vec![1, 2];
    let rep = run_experiment("diff-decay", &cfg).unwrap();
    assert!(rep.value("linear_max_remainder").unwrap() <= 1e-9);
    assert_eq!(rep.rows.rows.len(), 4 * 24 * 2);
}

#[test]
fn decay_rejects_empty_ladders() {
    let mut cfg = RunConfig::default();
    cfg.radii_exponents = vec![];
    assert!(run_experiment("diff-decay", &cfg).is_err());
    cfg.radii_exponents = vec![0, 1];
    assert!(run_experiment("diff-decay", &cfg).is_err());
}
