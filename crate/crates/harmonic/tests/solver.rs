use std::sync::Arc;

use diamond_harmonic::benchmarks::{cubical_annulus_energy, radial_energy, radial_profile, spherical_annulus};
use diamond_harmonic::domain::{DomainDescriptor, DomainShape, NodeKey, GREEN, RED, SHARED};
use diamond_harmonic::solver::{solve_components, Network};
use diamond_harmonic::{dirichlet_energy, solve_dirichlet, GridField, HarmonicError, VoxelDomain};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn boundary_mask(d: &VoxelDomain) -> Vec<bool> {
    (0..d.nodes.len() as u32).map(|i| d.on_outer_boundary(i)).collect()
}

fn doubled(n: u32) -> Arc<VoxelDomain> {
    Arc::new(VoxelDomain::new(DomainDescriptor {
        shape: DomainShape::Doubled { lo: [n / 3; 3], hi: [2 * n / 3; 3] },
        origin: [0.0; 3],
        side: 1.0,
        n,
    }))
}

#[test]
fn constants_are_reproduced() {
    let d = Arc::new(VoxelDomain::cube([0.0; 3], 1.0, 6));
    let u = solve_dirichlet(d.clone(), boundary_mask(&d), 1, |_| vec![2.5], TOL, 10_000).unwrap();
    assert!(u.values[0].iter().all(|v| (v - 2.5).abs() < 1e-9));
    assert!(dirichlet_energy(&u) < 1e-15);
}

#[test]
fn affine_data_is_reproduced_with_exact_energy() {
    for dom in [Arc::new(VoxelDomain::cube([0.0; 3], 1.0, 8)), doubled(9)] {
        let a = [0.3, -1.2, 0.7];
        let lin = |x: [f64; 3]| a[0] * x[0] + a[1] * x[1] + a[2] * x[2] + 0.1;
        let dd = dom.clone();
        let u = solve_dirichlet(dom.clone(), boundary_mask(&dom), 1, |i| vec![lin(dd.position(i))], TOL, 10_000).unwrap();
        for i in 0..dom.nodes.len() {
            assert!((u.values[0][i] - lin(dom.position(i as u32))).abs() < 1e-8);
        }
        // total measure of the doubled domain is still the cube volume
        let e = dirichlet_energy(&u);
        let exact = a.iter().map(|v| v * v).sum::<f64>() * dom.volume();
        assert!((e - exact).abs() < 1e-8, "{e} vs {exact}");
        assert!((dom.volume() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn doubled_domain_has_two_copies_of_the_core() {
    let d = doubled(9);
    let inner = [4, 4, 4];
    assert!(d.node(NodeKey { at: inner, copy: GREEN }).is_some());
    assert!(d.node(NodeKey { at: inner, copy: RED }).is_some());
    assert!(d.node(NodeKey { at: inner, copy: SHARED }).is_none());
    // the core boundary is shared between the copies
    assert!(d.node(NodeKey { at: [3, 4, 4], copy: SHARED }).is_some());
    assert!(d.node(NodeKey { at: [3, 4, 4], copy: GREEN }).is_none());
}

#[test]
fn copies_decouple_when_the_core_boundary_is_free() {
    // green copy interior pinned to 1 on an inner box, red copy to 0: both
    // copies must see their own data while sharing the outer values
    let d = doubled(9);
    let fixed: Vec<bool> = (0..d.nodes.len() as u32)
        .map(|i| d.on_outer_boundary(i) || (d.nodes[i as usize].copy != SHARED && d.on_box_surface(i, [4; 3], [5; 3])))
        .collect();
    let dd = d.clone();
    let u = solve_dirichlet(d.clone(), fixed, 1, |i| vec![if dd.nodes[i as usize].copy == GREEN { 1.0 } else { 0.0 }], TOL, 10_000).unwrap();
    let g = d.node(NodeKey { at: [4, 4, 4], copy: GREEN }).unwrap();
    let r = d.node(NodeKey { at: [4, 4, 4], copy: RED }).unwrap();
    assert_eq!(u.values[0][g as usize], 1.0);
    assert_eq!(u.values[0][r as usize], 0.0);
    let s = d.node(NodeKey { at: [3, 4, 4], copy: SHARED }).unwrap();
    let v = u.values[0][s as usize];
    assert!(v > 0.0 && v < 1.0);
}

#[test]
fn dimension_mismatch_is_reported() {
    let d = Arc::new(VoxelDomain::cube([0.0; 3], 1.0, 3));
    let err = solve_dirichlet(d.clone(), boundary_mask(&d), 2, |_| vec![1.0], TOL, 100).unwrap_err();
    assert_eq!(err, HarmonicError::Dimension { expected: 2, got: 1 });
}

#[test]
fn floating_component_is_singular() {
    let mut net = Network::new(3);
    net.connect(0, 1, 1.0);
    let vals = vec![vec![0.0; 3]];
    let err = solve_components(&net, &[true, false, false], &vals, TOL, 100).unwrap_err();
    assert!(matches!(err, HarmonicError::Singular(_)));
}

#[test]
fn iteration_cap_is_reported() {
    let d = Arc::new(VoxelDomain::cube([0.0; 3], 1.0, 16));
    let dd = d.clone();
    let err = solve_dirichlet(d.clone(), boundary_mask(&d), 1, |i| vec![dd.position(i)[0].sin()], 1e-14, 1).unwrap_err();
    assert!(matches!(err, HarmonicError::NoConvergence { .. }));
}

#[test]
fn harmonic_extension_minimizes_energy() {
    let d = Arc::new(VoxelDomain::cube([0.0; 3], 1.0, 8));
    let dd = d.clone();
    let data = move |x: [f64; 3]| (3.0 * x[0]).sin() * x[1] + x[2] * x[2];
    let u = solve_dirichlet(d.clone(), boundary_mask(&d), 1, |i| vec![data(dd.position(i))], TOL, 10_000).unwrap();
    let net = d.network();
    let e = net.energy(&u.values[0]);
    // any competitor with the same boundary values has more network energy
    let mut v = u.values[0].clone();
    for (i, x) in v.iter_mut().enumerate() {
        if !u.fixed[i] {
            *x += 0.01 * ((i * 7919) % 13) as f64;
        }
    }
    assert!(net.energy(&v) > e);
    let interp = GridField::from_fn(d.clone(), 1, |i| vec![data(d.position(i))]);
    assert!(net.energy(&interp.values[0]) >= e - 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn maximum_principle(seed in 0u64..1000) {
        let d = doubled(9);
        let dd = d.clone();
        let val = move |i: u32| {
            let x = dd.position(i);
            (((x[0] * 13.0 + x[1] * 7.0 + x[2] * 3.0) * (seed as f64 + 1.0)).sin()).abs()
        };
        let u = solve_dirichlet(d.clone(), boundary_mask(&d), 1, |i| vec![val(i)], TOL, 10_000).unwrap();
        let (all, bnd) = u.max_norms();
        prop_assert!(all <= bnd + 1e-9);
        let lo = (0..d.nodes.len()).filter(|&i| u.fixed[i]).map(|i| u.values[0][i]).fold(f64::INFINITY, f64::min);
        prop_assert!(u.values[0].iter().all(|&v| v >= lo - 1e-9));
    }

    #[test]
    fn energy_is_quadratic_in_the_data(eta in 0.1f64..2.0) {
        let e1 = cubical_annulus_energy(1.0, 1.0 / 6.0, 12, 1, |_| vec![eta], TOL, 10_000).unwrap();
        let e2 = cubical_annulus_energy(1.0, 1.0 / 6.0, 12, 1, |_| vec![2.0 * eta], TOL, 10_000).unwrap();
        prop_assert!((e2 - 4.0 * e1).abs() <= 1e-7 * e2);
    }
}

#[test]
fn zero_data_has_zero_energy() {
    let e = cubical_annulus_energy(1.0, 1.0 / 6.0, 12, 3, |_| vec![0.0; 3], TOL, 10_000).unwrap();
    assert_eq!(e, 0.0);
}

#[test]
fn annulus_rejects_unresolved_inner_cube() {
    assert!(cubical_annulus_energy(1.0, 1.0 / 6.0, 10, 1, |_| vec![1.0], TOL, 100).is_err());
}

/// Radial projection of cubical shells onto spheres.
fn psi(x: [f64; 3]) -> [f64; 3] {
    let inf = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let two = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if two == 0.0 {
        return x;
    }
    x.map(|v| v * inf / two)
}

#[test]
fn shell_map_is_bi_lipschitz() {
    // sampled oracle on the annulus between cube half-sides 1/12 and 1/2
    let mut worst_lo = f64::INFINITY;
    let mut worst_hi: f64 = 0.0;
    let pt = |k: u64| {
        let h = |s: u64| ((s.wrapping_mul(0x9E3779B97F4A7C15) >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
        [h(3 * k + 1), h(3 * k + 2), h(3 * k + 3)]
    };
    let inside = |x: [f64; 3]| x.iter().fold(0.0f64, |m, v| m.max(v.abs())) >= 1.0 / 12.0;
    let d = |a: [f64; 3], b: [f64; 3]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    for k in 0..4000u64 {
        let (a, b) = (pt(2 * k), pt(2 * k + 1));
        if !inside(a) || !inside(b) {
            continue;
        }
        let r = d(psi(a), psi(b)) / d(a, b);
        worst_lo = worst_lo.min(r);
        worst_hi = worst_hi.max(r);
    }
    assert!(worst_lo >= 1.0 / 16.0 && worst_hi <= 16.0, "{worst_lo} {worst_hi}");
}

#[test]
fn spherical_annulus_matches_the_radial_solution() {
    let (a, s, l) = (1.0, 1.0 / 3.0, 1.0);
    let coarse = spherical_annulus(a, s, l, 24, TOL, 20_000).unwrap();
    let fine = spherical_annulus(a, s, l, 48, TOL, 20_000).unwrap();
    let exact = radial_energy(a, s, l);
    let err = |e: f64| (e - exact).abs() / exact;
    assert!(err(fine.energy) < err(coarse.energy));
    assert!(err(fine.energy) < 0.1, "{} vs {exact}", fine.energy);
    assert!(fine.profile_error < coarse.profile_error);
    let (ca, cb) = radial_profile(a, s, l);
    // profile takes the value a on the inner sphere and 0 on the outer one
    assert!((ca / (s / 2.0) + cb - a).abs() < 1e-12);
    assert!((ca / (l / 2.0) + cb).abs() < 1e-12);
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let d = doubled(27);
            let dd = d.clone();
            let u = solve_dirichlet(d.clone(), boundary_mask(&d), 1, |i| vec![dd.position(i)[0].sin()], TOL, 10_000).unwrap();
            (dirichlet_energy(&u).to_bits(), u.values[0].iter().map(|v| v.to_bits()).collect::<Vec<_>>())
        })
    };
    assert_eq!(run(1), run(4));
}
