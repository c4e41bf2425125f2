//! Annulus benchmarks: the radial closed form and the energy lower bounds
//! for cubical annuli with real and vector-valued inner data.

use std::f64::consts::PI;
use std::sync::Arc;

use diamond_core::report::{fmt_f64, ExperimentReport, Table};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{dirichlet_energy, solve_dirichlet, DomainDescriptor, DomainShape, VoxelDomain};
use crate::solver::{solve_components, Network};
use crate::HarmonicError;

/// Smallest fraction of an edge kept between a node and the boundary it
/// crosses; closer crossings are clamped to keep the system conditioned.
const MIN_CUT: f64 = 1e-3;

/// Closed-form energy stated for the radial solution on the annulus between
/// radii `s/2` and `L/2` with boundary values `a` inside and `0` outside.
pub fn stated_radial_energy(a: f64, s: f64, l: f64) -> f64 {
    PI * a * a * s * l / (l - s)
}

/// `∫ |∇(A/r + B)|²` over the same annulus, computed from the profile.
pub fn radial_energy(a: f64, s: f64, l: f64) -> f64 {
    let (r1, r2) = (s / 2.0, l / 2.0);
    4.0 * PI * a * a / (1.0 / r1 - 1.0 / r2)
}

/// Coefficients `(A, B)` of the radial harmonic profile `A/r + B`.
pub fn radial_profile(a: f64, s: f64, l: f64) -> (f64, f64) {
    let aa = a * s * l / (2.0 * (l - s));
    (aa, -2.0 * aa / l)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalRun {
    pub n: usize,
    pub h: f64,
    pub unknowns: usize,
    pub energy: f64,
    /// Largest `|u - (A/r + B)| / a` over free nodes.
    pub profile_error: f64,
}

/// Solve the spherical annulus on an `n³` embedding grid of the cube of side
/// `l`, with cut edges ending on the spheres (Shortley-Weller distances).
pub fn spherical_annulus(a: f64, s: f64, l: f64, n: usize, tol: f64, max_iter: usize) -> Result<SphericalRun, HarmonicError> {
    if !(s > 0.0 && s < l) || n < 4 {
        return Err(HarmonicError::Invalid(format!("need 0 < s < L and n >= 4, got s={s}, L={l}, n={n}")));
    }
    let (r1, r2) = (s / 2.0, l / 2.0);
    let h = l / n as f64;
    let pos = |i: usize| -l / 2.0 + h * i as f64;
    let np = n + 1;
    let id = |i: usize, j: usize, k: usize| (k * np + j) * np + i;
    let radius = |i: usize, j: usize, k: usize| (pos(i).powi(2) + pos(j).powi(2) + pos(k).powi(2)).sqrt();
    let free = |i: usize, j: usize, k: usize| {
        let r = radius(i, j, k);
        r > r1 && r < r2
    };
    let mut net = Network::new(np * np * np);
    let mut fixed = vec![true; net.nodes];
    let mut value = vec![0.0; net.nodes];
    for k in 0..np {
        for j in 0..np {
            for i in 0..np {
                if free(i, j, k) {
                    fixed[id(i, j, k)] = false;
                }
            }
        }
    }
    for k in 0..np {
        for j in 0..np {
            for i in 0..np {
                if !free(i, j, k) {
                    continue;
                }
                let x = [pos(i), pos(j), pos(k)];
                let me = id(i, j, k) as u32;
                for axis in 0..3 {
                    for dir in [-1i64, 1] {
                        let mut c = [i as i64, j as i64, k as i64];
                        c[axis] += dir;
                        if c[axis] < 0 || c[axis] > n as i64 {
                            continue;
                        }
                        let (ni, nj, nk) = (c[0] as usize, c[1] as usize, c[2] as usize);
                        if free(ni, nj, nk) {
                            if dir == 1 {
                                net.connect(me, id(ni, nj, nk) as u32, h);
                            }
                            continue;
                        }
                        // crossing of the segment x -> x + dir h e_axis with the sphere it leaves through
                        let inner = radius(ni, nj, nk) <= r1;
                        let r = if inner { r1 } else { r2 };
                        let others: f64 = (0..3).filter(|&b| b != axis).map(|b| x[b] * x[b]).sum();
                        let target = (r * r - others).max(0.0).sqrt();
                        let xa = x[axis];
                        let cands = [target - xa, -target - xa];
                        let t = cands
                            .iter()
                            .map(|d| d * dir as f64 / h)
                            .filter(|t| *t >= 0.0 && *t <= 1.0 + 1e-12)
                            .fold(f64::INFINITY, f64::min);
                        let t = if t.is_finite() { t.clamp(MIN_CUT, 1.0) } else { 1.0 };
                        let b = net.add_node();
                        fixed.push(true);
                        value.push(if inner { a } else { 0.0 });
                        net.connect(me, b, h / t);
                    }
                }
            }
        }
    }
    let (vals, stats) = solve_components(&net, &fixed, &[value], tol, max_iter)?;
    let u = &vals[0];
    let energy = net.energy(u);
    let (ca, cb) = radial_profile(a, s, l);
    let mut profile_error: f64 = 0.0;
    for k in 0..np {
        for j in 0..np {
            for i in 0..np {
                if free(i, j, k) {
                    let e = (u[id(i, j, k)] - (ca / radius(i, j, k) + cb)).abs();
                    profile_error = profile_error.max(e / a.abs().max(f64::MIN_POSITIVE));
                }
            }
        }
    }
    Ok(SphericalRun { n, h, unknowns: stats.unknowns, energy, profile_error })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialConfig {
    pub a: f64,
    pub s: f64,
    pub l: f64,
    pub ladder: Vec<usize>,
    /// Relative tolerance at the finest grid.
    pub tolerance: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RadialConfig {
    fn default() -> Self {
        RadialConfig { a: 1.0, s: 1.0 / 3.0, l: 1.0, ladder: vec![24, 48, 96], tolerance: 0.05, tol: 1e-8, max_iter: 20_000 }
    }
}

/// Refinement study of the spherical annulus against both closed forms.
pub fn radial_benchmark(cfg: &RadialConfig) -> Result<ExperimentReport, HarmonicError> {
    if cfg.ladder.is_empty() {
        return Err(HarmonicError::Invalid("empty grid ladder".into()));
    }
    let stated = stated_radial_energy(cfg.a, cfg.s, cfg.l);
    let profile = radial_energy(cfg.a, cfg.s, cfg.l);
    let mut rep = ExperimentReport::new("radial-energy", 0, 0);
    rep.param("a", cfg.a).param("s", cfg.s).param("L", cfg.l).param("ladder", format!("{:?}", cfg.ladder));
    let mut table = Table::new(&["n", "h", "unknowns", "energy", "stated_closed_form", "profile_closed_form", "error_vs_stated", "error_vs_profile", "profile_error"]);
    let mut errs_stated = Vec::new();
    let mut errs_profile = Vec::new();
    for &n in &cfg.ladder {
        let run = spherical_annulus(cfg.a, cfg.s, cfg.l, n, cfg.tol, cfg.max_iter)?;
        let es = (run.energy - stated).abs() / stated;
        let ep = (run.energy - profile).abs() / profile;
        errs_stated.push(es);
        errs_profile.push(ep);
        table.push(vec![
            n.to_string(),
            fmt_f64(run.h),
            run.unknowns.to_string(),
            fmt_f64(run.energy),
            fmt_f64(stated),
            fmt_f64(profile),
            fmt_f64(es),
            fmt_f64(ep),
            fmt_f64(run.profile_error),
        ]);
    }
    let dec = |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]);
    let fine_s = *errs_stated.last().unwrap();
    let fine_p = *errs_profile.last().unwrap();
    rep.stat("error_vs_stated_closed_form", fine_s, Some(cfg.tolerance), fine_s <= cfg.tolerance && dec(&errs_stated))
        .info("error_vs_stated_decreasing", dec(&errs_stated) as u8 as f64)
        .info("error_vs_profile_closed_form", fine_p)
        .info("error_vs_profile_decreasing", dec(&errs_profile) as u8 as f64)
        .info("stated_closed_form", stated)
        .info("profile_closed_form", profile);
    rep.note("stated closed form is π a² s L/(L-s); integrating |∇(A/r+B)|² gives 2π a² s L/(L-s)");
    rep.rows = table;
    Ok(rep)
}

fn annulus_domain(side: f64, s: f64, n: u32) -> Result<Arc<VoxelDomain>, HarmonicError> {
    let inner = s / side * n as f64;
    let k = inner.round() as u32;
    if (inner - k as f64).abs() > 1e-9 || (n - k) % 2 != 0 || k == 0 {
        return Err(HarmonicError::Invalid(format!("grid n={n} does not resolve an inner cube of side {s} centered in {side}")));
    }
    let lo = (n - k) / 2;
    Ok(Arc::new(VoxelDomain::new(DomainDescriptor {
        shape: DomainShape::Annulus { lo: [lo; 3], hi: [lo + k; 3] },
        origin: [-side / 2.0; 3],
        side,
        n,
    })))
}

/// Energy of the harmonic function on `Q \ sQ` that vanishes on `∂Q` and
/// equals `data(x)` on `∂(sQ)`.
pub fn cubical_annulus_energy(
    side: f64,
    s: f64,
    n: u32,
    m: usize,
    data: impl Fn([f64; 3]) -> Vec<f64> + Sync,
    tol: f64,
    max_iter: usize,
) -> Result<f64, HarmonicError> {
    let dom = annulus_domain(side, s, n)?;
    let DomainShape::Annulus { lo, hi } = dom.descriptor.shape.clone() else { unreachable!() };
    let fixed: Vec<bool> = (0..dom.nodes.len() as u32).map(|i| dom.on_outer_boundary(i) || dom.on_box_surface(i, lo, hi)).collect();
    let d2 = dom.clone();
    let field = solve_dirichlet(
        dom,
        fixed,
        m,
        move |i| if d2.on_outer_boundary(i) { vec![0.0; m] } else { data(d2.position(i)) },
        tol,
        max_iter,
    )?;
    Ok(dirichlet_energy(&field))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundConfig {
    pub side: f64,
    /// Inner sides as fractions of `side`.
    pub s_fractions: Vec<f64>,
    pub etas: Vec<f64>,
    pub ladder: Vec<u32>,
    /// Largest relative change of the ratio between the two finest grids.
    pub stabilization: f64,
    /// Components of the truncated l² target.
    pub m: usize,
    /// Angular radius of the cap is `cap * η`; the datum has slope `2 / cap` on the inner sphere.
    pub cap: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LowerBoundConfig {
    fn default() -> Self {
        LowerBoundConfig {
            side: 1.0,
            s_fractions: vec![1.0 / 6.0, 1.0 / 12.0],
            etas: vec![0.25, 0.5, 1.0],
            ladder: vec![24, 48, 96],
            stabilization: 0.1,
            m: 8,
            cap: 4.0,
            tol: 1e-8,
            max_iter: 20_000,
        }
    }
}

fn lower_bound_sweep(
    name: &str,
    cfg: &LowerBoundConfig,
    m: usize,
    scale: impl Fn(f64, f64) -> f64,
    data: impl Fn(f64, f64, [f64; 3]) -> Vec<f64> + Sync,
) -> Result<ExperimentReport, HarmonicError> {
    if cfg.ladder.len() < 2 || cfg.etas.is_empty() || cfg.s_fractions.is_empty() {
        return Err(HarmonicError::Invalid("need at least two grids, one η and one s".into()));
    }
    if cfg.s_fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0 / 6.0 + 1e-12)) {
        return Err(HarmonicError::Invalid("inner side must lie in (0, side/6]".into()));
    }
    let mut rep = ExperimentReport::new(name, 0, 0);
    rep.param("side", cfg.side)
        .param("s_fractions", format!("{:?}", cfg.s_fractions))
        .param("etas", format!("{:?}", cfg.etas))
        .param("ladder", format!("{:?}", cfg.ladder))
        .param("components", m);
    let mut table = Table::new(&["s", "eta", "n", "energy", "ratio"]);
    let mut c_fit = f64::INFINITY;
    let mut worst_change: f64 = 0.0;
    let cases: Vec<(f64, f64, u32)> = cfg
        .s_fractions
        .iter()
        .flat_map(|&frac| cfg.etas.iter().flat_map(move |&eta| cfg.ladder.iter().map(move |&n| (frac * cfg.side, eta, n))))
        .collect();
    let energies: Vec<f64> = cases
        .par_iter()
        .map(|&(s, eta, n)| cubical_annulus_energy(cfg.side, s, n, m, |x| data(eta, s, x), cfg.tol, cfg.max_iter))
        .collect::<Result<_, _>>()?;
    for (case, ladder) in cases.chunks(cfg.ladder.len()).zip(energies.chunks(cfg.ladder.len())) {
        let mut ratios = Vec::new();
        for (&(s, eta, n), &e) in case.iter().zip(ladder) {
            let ratio = e / scale(eta, s);
            ratios.push(ratio);
            table.push(vec![fmt_f64(s), fmt_f64(eta), n.to_string(), fmt_f64(e), fmt_f64(ratio)]);
        }
        let k = ratios.len();
        worst_change = worst_change.max((ratios[k - 1] - ratios[k - 2]).abs() / ratios[k - 1].abs().max(f64::MIN_POSITIVE));
        c_fit = c_fit.min(ratios[k - 1]);
    }
    rep.stat("fitted_constant", c_fit, Some(0.0), c_fit > 0.0 && c_fit.is_finite())
        .stat("ratio_change_between_finest_grids", worst_change, Some(cfg.stabilization), worst_change <= cfg.stabilization);
    rep.rows = table;
    Ok(rep)
}

/// `E / (η² s)` for constant inner data `η`, across inner sides, η and grids.
pub fn check_energy_lower_bound(cfg: &LowerBoundConfig) -> Result<ExperimentReport, HarmonicError> {
    let mut rep = lower_bound_sweep("energy-bound", cfg, 1, |eta, s| eta * eta * s, |eta, _, _| vec![eta])?;
    rep.note("inner data is the constant η, whose boundary mean is η");
    Ok(rep)
}

/// Unit cap directions used for the vector-valued inner data; the first is
/// the face center `+e_x`, a grid node at every admissible resolution.
fn cap_axis(k: usize) -> [f64; 3] {
    let axes = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
    axes[k % axes.len()]
}

/// Inner datum for the vector bound: component 0 is `η s` at the `+e_x` face
/// center and decays linearly to 0 at angular distance `cap·η`; further
/// components carry half-height caps around other face centers.
pub fn cap_datum(eta: f64, s: f64, cap: f64, m: usize, x: [f64; 3]) -> Vec<f64> {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    (0..m)
        .map(|k| {
            let w = cap_axis(k);
            let cos = ((x[0] * w[0] + x[1] * w[1] + x[2] * w[2]) / r).clamp(-1.0, 1.0);
            let bump = (1.0 - cos.acos() / (cap * eta)).max(0.0);
            let amp = if k == 0 { 1.0 } else { 0.5 };
            amp * eta * s * bump
        })
        .collect()
}

/// `E / (η⁴ s³)` for the vector cap datum.
pub fn check_l2_energy_lower_bound(cfg: &LowerBoundConfig) -> Result<ExperimentReport, HarmonicError> {
    if cfg.m == 0 || !(cfg.cap > 0.0) {
        return Err(HarmonicError::Invalid("need m >= 1 components and a positive cap".into()));
    }
    let (m, cap) = (cfg.m, cfg.cap);
    let mut rep = lower_bound_sweep("energy-bound-l2", cfg, m, |eta, s| eta.powi(4) * s.powi(3), move |eta, s, x| cap_datum(eta, s, cap, m, x))?;
    rep.param("cap", cfg.cap).note(format!("l² truncated to {m} components"));
    Ok(rep)
}
