use diamond_experiments::gates::{exact_frequency, sample_events};
use diamond_experiments::{build, run_experiment, RunConfig};
use proptest::prelude::*;

#[test]
fn exact_frequency_of_first_toy_block() {
    let expect = 1.0 - (26.0f64 / 27.0).powi(8);
    assert!((exact_frequency(2, 3) - expect).abs() < 1e-15);
}

#[test]
fn gate_volume_of_the_complex_matches_the_product_rule() {
    // within one block, the union of gates up to stage j has measure 1 - (1 - 1/m³)^j
    let cx = build(2, 3, true, None).unwrap();
    for j in 1..=3u32 {
        let vol = cx.gate_counts[j as usize - 1] as f64 * cx.side(j).powi(3);
        let expect = 1.0 - (26.0f64 / 27.0).powi(j as i32);
        assert!((vol - expect).abs() < 1e-12, "stage {j}: {vol} vs {expect}");
    }
}

#[test]
fn sampled_frequency_is_within_four_standard_errors() {
    let trials = 20_000;
    let events = sample_events(&[(2, 3), (3, 3)], trials, 4);
    for (k, &(n, m)) in [(2u64, 3u64), (3, 3)].iter().enumerate() {
        let p = exact_frequency(n, m);
        let f = events.iter().filter(|e| e[k]).count() as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((f - p).abs() <= 4.0 * se, "block {}: {f} vs {p}", k + 1);
    }
}

#[test]
fn gate_frequency_report_passes_with_defaults() {
    let rep = run_experiment("gate-frequency", &RunConfig::default()).unwrap();
    assert!(rep.pass);
    assert_eq!(rep.rows.rows.len(), 3);
}

proptest! {
    #[test]
    fn exact_frequency_is_a_probability_increasing_in_n(n in 1u64..30, k in 1u64..40) {
        let m = 6 * k + 3;
        let p = exact_frequency(n, m);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(exact_frequency(n + 1, m) >= p);
    }
}
