mod common;

use common::{boundary_mesh, brute_chain, explicit_registry, record_keys, to_f, ExplicitRegistry};
use diamond_core::color::{euclid, Color, ColorWord, LabeledPoint};
use diamond_core::metric::{discrete_log, discrete_log_exact, distance_value, jump_record, HopKind};
use diamond_core::rng::stream;
use diamond_core::{build_complex, build_schedule, distance, ComplexDescription, Rational, ScheduleParams};
use proptest::prelude::*;
use rand::Rng;

fn toy(l: u32, m: u64) -> ComplexDescription {
    let s = build_schedule(ScheduleParams::toy(2, l).with_subdivision(m)).unwrap();
    build_complex(&s, l).unwrap()
}

#[test]
fn jump_pair_distance_is_exact_for_n_26() {
    let s = build_schedule(ScheduleParams::full(25, 1)).unwrap();
    let cx = build_complex(&s, 1).unwrap();
    let g = LabeledPoint::new([0.5; 3], "g".parse().unwrap());
    let r = LabeledPoint::new([0.5; 3], "r".parse().unwrap());
    let d = distance(&cx, &g, &r, 0.02).unwrap();
    assert_eq!(d.upper, 1.0 / 104.0);
    assert_eq!(d.lower, d.upper);
    assert!(d.certified);
    assert_eq!(d.witness.len(), 2);
    assert_eq!(d.witness[1].hop, HopKind::Jump);
}

#[test]
fn toy_jump_pair_beats_boundary_route() {
    let cx = toy(1, 3);
    let g = LabeledPoint::new([0.5; 3], "g".parse().unwrap());
    let r = LabeledPoint::new([0.5; 3], "r".parse().unwrap());
    let d = distance(&cx, &g, &r, 0.0).unwrap();
    assert_eq!(d.upper, 0.125);
    let (lo, hi) = cx.record_for_cell(1, [0, 0, 0]).unwrap().k_bounds();
    let (b, _) = diamond_core::metric::boundary_route(&g.base, &r.base, &lo, &hi);
    assert!(b >= 1.0 / 3.0 - 1e-12);
}

#[test]
fn identical_points_are_at_distance_zero() {
    let cx = toy(2, 3);
    let p = LabeledPoint::new([0.41, 0.52, 0.6], "r*".parse().unwrap());
    let d = distance(&cx, &p, &p, 0.02).unwrap();
    assert_eq!((d.lower, d.upper), (0.0, 0.0));
}

#[test]
fn level_mismatch_is_an_error() {
    let cx = toy(2, 3);
    let p = LabeledPoint::new([0.1; 3], "**".parse().unwrap());
    let q = LabeledPoint::new([0.1; 3], "*".parse().unwrap());
    assert!(distance(&cx, &p, &q, 0.02).is_err());
}

/// All fully specified words of a base point consistent with the explicit registry,
/// with stages at or beyond `wild_from` forced to wildcard.
fn all_words(reg: &ExplicitRegistry, base: [f64; 3], l: u32, wild_from: u32) -> Vec<LabeledPoint> {
    let keys = record_keys(reg, &LabeledPoint::new(base, ColorWord::wildcard(l as usize)));
    let mut words = vec![ColorWord::wildcard(l as usize)];
    for j in 1..=l {
        if keys[j as usize - 1].is_some() && j < wild_from {
            words = words
                .into_iter()
                .flat_map(|w| {
                    [Color::Green, Color::Red].map(|c| {
                        let mut w = w.clone();
                        w.set(j, Some(c));
                        w
                    })
                })
                .collect();
        }
    }
    words.into_iter().map(|w| LabeledPoint::new(base, w)).collect()
}

/// Brute-force chain distance: meshes on the K boundaries of the records
/// holding `p` or `q`, and every colored copy of their jump pairs.
fn oracle(reg: &ExplicitRegistry, l: u32, p: &LabeledPoint, q: &LabeledPoint, per_edge: usize) -> (f64, f64) {
    let mut nodes = vec![p.clone(), q.clone()];
    let mut jumps = Vec::new();
    let mut h = 0.0f64;
    for j in 1..=l {
        let mut seen = Vec::new();
        for x in [p, q] {
            let Some(r) = reg.record_with_k(j, &x.base) else { continue };
            if seen.contains(&r.origin) {
                continue;
            }
            seen.push(r.origin);
            let k = r.middle_third();
            let lo = k.origin.each_ref().map(to_f);
            h = h.max(to_f(&k.side) / per_edge as f64);
            for z in boundary_mesh(lo, to_f(&k.side), per_edge) {
                nodes.extend(all_words(reg, z, l, j));
            }
            let c = r.origin.map(|v| to_f(&(v + r.side / Rational::from_integer(2))));
            let variants = all_words(reg, c, l, l + 1);
            let first = nodes.len();
            nodes.extend(variants.iter().cloned());
            let cost = 1.0 / (4.0 * 2.0) * to_f(&r.side);
            for a in 0..variants.len() {
                for b in a + 1..variants.len() {
                    let diff: Vec<u32> = (1..=l).filter(|&i| variants[a].word.at(i) != variants[b].word.at(i)).collect();
                    if diff == vec![j] {
                        jumps.push((first + a, first + b, cost));
                    }
                }
            }
        }
    }
    (brute_chain(reg, &nodes, &jumps, 0, 1), h)
}

fn random_conflicting_pair(cx: &ComplexDescription, l: u32, rng: &mut diamond_core::rng::Rng) -> (LabeledPoint, LabeledPoint) {
    let j = rng.gen_range(1..=l);
    let recs = cx.records_at_stage(j, 1 << 20).unwrap();
    let (rec, _) = &recs[rng.gen_range(0..recs.len())];
    let (lo, hi) = rec.k_bounds();
    let pick = |rng: &mut diamond_core::rng::Rng| {
        let base = [0, 1, 2].map(|a| lo[a] + (hi[a] - lo[a]) * rng.gen_range(0.02..0.98));
        let w = cx.resolve_word_with(&base, l, |_| if rng.gen() { Color::Red } else { Color::Green });
        LabeledPoint::new(base, w)
    };
    let p = pick(rng);
    let mut q = pick(rng);
    q.word.set(j, p.word.at(j).map(|c| c.other()));
    (p, q)
}

fn check_against_oracle(l: u32, m: u64, pairs: usize, seed: u64) {
    let cx = toy(l, m);
    let reg = explicit_registry(&cx.schedule, l);
    let mut rng = stream(seed, 0);
    for _ in 0..pairs {
        let (p, q) = random_conflicting_pair(&cx, l, &mut rng);
        let exact = distance(&cx, &p, &q, 0.0).unwrap();
        let (brute, h) = oracle(&reg, l, &p, &q, 16);
        assert!(exact.upper <= brute + 1e-12, "exact {} above brute {} for {p:?} {q:?}", exact.upper, brute);
        assert!(brute <= exact.upper + 2.0 * h, "brute {} too far above exact {} (h={h})", brute, exact.upper);
    }
}

#[test]
fn matches_brute_force_chains_level_one() {
    check_against_oracle(1, 3, 40, 1);
}

#[test]
fn matches_brute_force_chains_level_two() {
    check_against_oracle(2, 3, 40, 2);
}

#[test]
fn matches_brute_force_chains_level_two_fine_grid() {
    check_against_oracle(2, 9, 25, 3);
}

#[test]
fn witness_chain_is_valid_and_costs_upper() {
    let cx = toy(2, 9);
    let mut rng = stream(5, 0);
    for _ in 0..200 {
        let (p, q) = random_conflicting_pair(&cx, 2, &mut rng);
        let d = distance(&cx, &p, &q, 0.02).unwrap();
        assert_eq!(d.witness[0].point, p);
        assert_eq!(d.witness.last().unwrap().point, q);
        assert!((d.witness_cost(&cx) - d.upper).abs() <= 1e-12);
        for w in d.witness.windows(2) {
            if w[1].hop == HopKind::Jump {
                assert!(jump_record(&cx, &w[0].point, &w[1].point).is_some());
            }
        }
        assert!(d.witness.iter().filter(|s| s.hop == HopKind::Jump).count() <= 1);
    }
}

#[test]
fn discrete_log_examples() {
    let s = build_schedule(ScheduleParams::toy(2, 6)).unwrap();
    assert_eq!(discrete_log(0.2, &s).unwrap(), 1);
    for j in 1..=5u32 {
        let side = Rational::new(1, 3i128.pow(j));
        assert_eq!(discrete_log_exact(side, &s).unwrap(), j - 1);
        let below = side - Rational::new(1, 10i128.pow(9));
        assert_eq!(discrete_log_exact(below, &s).unwrap(), j);
        let f = 1.0 / 3f64.powi(j as i32);
        assert_eq!(discrete_log(f * (1.0 - 1e-9), &s).unwrap(), j);
    }
    assert!(discrete_log(1e-9, &s).is_err());
}

fn arb_point(cx: &ComplexDescription, l: u32, x: [f64; 3], bits: u64) -> LabeledPoint {
    let w = cx.resolve_word_with(&x, l, |j| if (bits >> j) & 1 == 1 { Color::Red } else { Color::Green });
    LabeledPoint::new(x, w)
}

fn near(c: [f64; 3], d: [f64; 3], r: f64) -> [f64; 3] {
    [0, 1, 2].map(|a| (c[a] + r * (d[a] - 0.5)).clamp(0.0, 1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn symmetric_and_triangle(a in prop::array::uniform3(0.0f64..1.0), d1 in prop::array::uniform3(0.0f64..1.0),
                              d2 in prop::array::uniform3(0.0f64..1.0), b1 in any::<u64>(), b2 in any::<u64>(), b3 in any::<u64>(),
                              scale in 0.01f64..0.4) {
        let cx = toy(3, 3);
        let p = arb_point(&cx, 3, a, b1);
        let q = arb_point(&cx, 3, near(a, d1, scale), b2);
        let r = arb_point(&cx, 3, near(a, d2, scale), b3);
        let pq = distance(&cx, &p, &q, 0.02).unwrap().upper;
        let qp = distance(&cx, &q, &p, 0.02).unwrap().upper;
        let pr = distance_value(&cx, &p, &r);
        let qr = distance_value(&cx, &q, &r);
        prop_assert!((pq - qp).abs() <= 1e-12);
        prop_assert!(pr <= pq + qr + 1e-12);
        prop_assert!(pq >= euclid(&p.base, &q.base) - 1e-15);
    }

    #[test]
    fn projection_is_one_lipschitz(a in prop::array::uniform3(0.0f64..1.0), d in prop::array::uniform3(0.0f64..1.0),
                                   b1 in any::<u64>(), b2 in any::<u64>(), scale in 0.01f64..0.5, l2 in 0u32..3) {
        let cx = toy(3, 3);
        let p = arb_point(&cx, 3, a, b1);
        let q = arb_point(&cx, 3, near(a, d, scale), b2);
        let full = distance_value(&cx, &p, &q);
        let proj = distance_value(&cx, &p.project(l2), &q.project(l2));
        prop_assert!(proj <= full + 1e-12);
    }

    #[test]
    fn same_sheet_is_euclidean(a in prop::array::uniform3(0.0f64..1.0), b in prop::array::uniform3(0.0f64..1.0), bits in any::<u64>()) {
        let cx = toy(3, 3);
        let p = arb_point(&cx, 3, a, bits);
        let q = arb_point(&cx, 3, b, bits);
        // the same color choice at every stage puts both on one chromatic sheet
        let d = distance(&cx, &p, &q, 0.02).unwrap();
        prop_assert_eq!(d.upper, euclid(&a, &b));
        prop_assert_eq!(d.lower, d.upper);
    }

    #[test]
    fn value_and_graph_agree(a in prop::array::uniform3(0.0f64..1.0), d in prop::array::uniform3(0.0f64..1.0),
                             b1 in any::<u64>(), b2 in any::<u64>(), scale in 0.01f64..0.5) {
        let cx = toy(2, 9);
        let p = arb_point(&cx, 2, a, b1);
        let q = arb_point(&cx, 2, near(a, d, scale), b2);
        let g = distance(&cx, &p, &q, 0.02).unwrap().upper;
        prop_assert!((g - distance_value(&cx, &p, &q)).abs() <= 1e-12);
    }
}

#[test]
fn nested_conflict_at_the_jump_center_is_paid_for() {
    // stage 9 opens block 2 and doubles the stage-1 gate again, so the unit
    // cube center carries a stage-9 color
    let s = build_schedule(ScheduleParams::toy(2, 9)).unwrap();
    let cx = build_complex(&s, 9).unwrap();
    let c = [0.5; 3];
    let k9 = cx.record_containing(9, &c).expect("center is colored at stage 9");
    let (lo, hi) = k9.k_bounds();
    let half = (hi[0] - lo[0]) / 2.0;
    let x = [0.5 + 0.3 * half, 0.5 - 0.2 * half, 0.5];
    let y = [0.5 - 0.25 * half, 0.5, 0.5 + 0.35 * half];
    let mk = |b: [f64; 3], col: Color| cx.resolve_word(b, 9, col);
    let p = mk(x, Color::Green);
    let q = mk(y, Color::Red);
    assert_eq!(p.word.to_string(), "g*******g");
    let j1 = 1.0 / 8.0;
    let j9 = k9.jump_cost_f64();
    let b9 = |u: &[f64; 3], v: &[f64; 3]| diamond_core::metric::boundary_route(u, v, &lo, &hi).0;
    let want = [
        euclid(&x, &c) + j1 + (j9 + euclid(&c, &y)).min(b9(&c, &y)),
        (j9 + euclid(&x, &c)).min(b9(&x, &c)) + j1 + euclid(&c, &y),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    let got = distance(&cx, &p, &q, 0.0).unwrap();
    assert!((got.upper - want).abs() < 1e-15, "{} vs {want}", got.upper);
    assert!(got.upper > euclid(&x, &c) + j1 + euclid(&c, &y));
    assert!((got.witness_cost(&cx) - got.upper).abs() < 1e-15);
    assert_eq!(got.witness.iter().filter(|s| s.hop == HopKind::Jump).count(), 2);
}
