use diamond_core::color::Color;
use diamond_core::verify::{verify_ball_shape, verify_doubling, verify_metric_axioms, AxiomConfig, DoublingConfig};
use diamond_core::{build_complex, build_schedule, ComplexDescription, ScheduleParams};

fn toy(l: u32) -> ComplexDescription {
    let s = build_schedule(ScheduleParams::toy(2, l)).unwrap();
    build_complex(&s, l).unwrap()
}

#[test]
fn axioms_hold_on_sampled_triples() {
    let cx = toy(3);
    let rep = verify_metric_axioms(&cx, 3, &AxiomConfig { triples: 300, ..AxiomConfig::default() }, 11).unwrap();
    assert!(rep.pass, "{}", rep.to_json());
    assert_eq!(rep.value("triangle_violations"), Some(0.0));
}

#[test]
fn axioms_reject_empty_runs() {
    let cx = toy(1);
    assert!(verify_metric_axioms(&cx, 1, &AxiomConfig { triples: 0, ..AxiomConfig::default() }, 0).is_err());
}

#[test]
fn level_zero_interior_balls_double_by_eight() {
    let cx = toy(1);
    let cfg = DoublingConfig { trials: 40, samples: 20_000, r_min: 0.05, r_max: 0.2, interior: true, ..DoublingConfig::default() };
    let rep = verify_doubling(&cx, 0, &cfg, 5).unwrap();
    let mean = rep.value("mean_ratio").unwrap();
    let se = rep.value("mean_ratio_stderr").unwrap();
    assert!((mean - 8.0).abs() <= 4.0 * se, "mean {mean} ± {se}");
}

#[test]
fn doubling_is_deterministic() {
    let cx = toy(2);
    let cfg = DoublingConfig { trials: 10, samples: 2000, ..DoublingConfig::default() };
    let a = verify_doubling(&cx, 2, &cfg, 9).unwrap().to_json();
    let b = verify_doubling(&cx, 2, &cfg, 9).unwrap().to_json();
    assert_eq!(a, b);
}

#[test]
fn zero_trials_is_an_error() {
    let cx = toy(1);
    assert!(verify_doubling(&cx, 1, &DoublingConfig { trials: 0, ..DoublingConfig::default() }, 0).is_err());
}

#[test]
fn ball_preimages_are_sandwiched() {
    let cx = toy(2);
    for base in [[0.5, 0.5, 0.5], [0.2, 0.45, 0.6]] {
        let p = cx.resolve_word(base, 2, Color::Red);
        let rep = verify_ball_shape(&cx, &p, 1, 0.15, 4000, 2).unwrap();
        assert!(rep.pass, "{}", rep.to_json());
    }
}
