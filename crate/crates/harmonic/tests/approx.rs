use diamond_core::{build_complex, build_schedule, ComplexDescription, ScheduleParams};
use diamond_harmonic::approx::{decreasing_or_floored, lifts_of, piecewise_harmonic, sample_cell_lifts, ApproxConfig, LadderConfig};
use diamond_harmonic::{check_orthogonality, check_telescoping, FunctionKind, LipschitzFunctionSpec};

fn toy(l: u32) -> ComplexDescription {
    let s = build_schedule(ScheduleParams::toy(2, l).with_subdivision(9)).unwrap();
    build_complex(&s, l).unwrap()
}

fn macshane(seed: u64) -> LipschitzFunctionSpec {
    LipschitzFunctionSpec::scalar(FunctionKind::MacShane { anchors: 6, lipschitz: 1.0, seed })
}

#[test]
fn affine_functions_have_no_cross_terms() {
    let cx = toy(1);
    let f = LipschitzFunctionSpec::scalar(FunctionKind::Affine { a: [0.4, -0.2, 1.0], b: 0.3 }).instantiate(&cx).unwrap();
    let lift = &sample_cell_lifts(&cx, 1, 1, 3).unwrap()[0];
    let a = piecewise_harmonic(&cx, &f, lift, &ApproxConfig { per_cell: 2, ..Default::default() }).unwrap();
    let l = &a.ledger;
    assert!(l.max_residual() < 1e-6, "{l:?}");
    let grad_sq = 0.16 + 0.04 + 1.0;
    for e in [l.energy_g_prev, l.energy_h, l.energy_g] {
        assert!((e - grad_sq).abs() < 1e-6, "{e}");
    }
}

#[test]
fn fields_agree_with_their_data() {
    let cx = toy(1);
    let f = macshane(1).instantiate(&cx).unwrap();
    let lift = &sample_cell_lifts(&cx, 1, 1, 0).unwrap()[0];
    let a = piecewise_harmonic(&cx, &f, lift, &ApproxConfig { per_cell: 2, ..Default::default() }).unwrap();
    // h and g share the outer boundary values, g_prev equals them there too
    for i in 0..a.domain.nodes.len() {
        if a.domain.on_outer_boundary(i as u32) {
            assert!((a.h.values[0][i] - a.g.values[0][i]).abs() < 1e-12);
            assert!((a.h.values[0][i] - a.g_prev.values[0][i]).abs() < 1e-12);
        }
    }
}

#[test]
fn orthogonality_residuals_shrink_at_the_first_stage() {
    let cx = toy(1);
    let lifts = sample_cell_lifts(&cx, 1, 1, 0).unwrap();
    for seed in 0..2 {
        let f = macshane(seed).instantiate(&cx).unwrap();
        let rep = check_orthogonality(&cx, &f, &lifts, &LadderConfig::default()).unwrap();
        assert!(rep.pass, "{}", rep.to_json());
    }
}

#[test]
fn energy_chain_at_the_first_stage() {
    let cx = toy(1);
    let lifts = sample_cell_lifts(&cx, 1, 1, 0).unwrap();
    let f = macshane(7).instantiate(&cx).unwrap();
    let rep = check_telescoping(&cx, &f, &lifts, &LadderConfig { ladder: vec![2, 4], ..Default::default() }).unwrap();
    assert!(rep.pass, "{}", rep.to_json());
}

#[test]
fn second_stage_cells_carry_earlier_colors() {
    let cx = toy(2);
    let lifts = sample_cell_lifts(&cx, 2, 4, 5).unwrap();
    assert_eq!(lifts.len(), 4);
    for l in &lifts {
        assert_eq!(l.record.stage, 2);
        assert_eq!(l.prefix.len(), 1);
        let all = lifts_of(&cx, &l.record);
        assert!(all.iter().any(|x| x.prefix == l.prefix));
        let total: f64 = all.iter().map(|x| x.measure()).sum();
        assert!((total - l.record.base_side_f64().powi(3)).abs() < 1e-15);
    }
}

#[test]
fn residual_sequences() {
    assert!(decreasing_or_floored(&[0.3, 0.1, 0.02]));
    assert!(!decreasing_or_floored(&[0.3, 0.4]));
    assert!(decreasing_or_floored(&[1e-9, 2e-9]));
}

#[test]
fn rejects_zero_resolution() {
    let cx = toy(1);
    let f = macshane(0).instantiate(&cx).unwrap();
    let lift = &sample_cell_lifts(&cx, 1, 1, 0).unwrap()[0];
    assert!(piecewise_harmonic(&cx, &f, lift, &ApproxConfig { per_cell: 0, ..Default::default() }).is_err());
}
