//! Sampled checks of the metric-measure structure: metric axioms, sheet
//! isometry, projection, ball shape and doubling.

use std::collections::BTreeSet;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::{euclid, Color, LabeledPoint};
use crate::complex::ComplexDescription;
use crate::measure::{ball_box, nested_ball_counts, sample_in_box, sample_point};
use crate::metric::{discrete_log, distance, distance_value};
use crate::report::{fmt_f64, ExperimentReport, Table};
use crate::rng::{derive, stream};
use crate::Error;

/// Slack for floating-point comparisons of distances built from the same inputs.
const FP_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomConfig {
    pub triples: usize,
    pub delta: f64,
    /// Triples are drawn inside a box of this half-width around the first point.
    pub max_spread: f64,
}

impl Default for AxiomConfig {
    fn default() -> Self {
        AxiomConfig { triples: 1000, delta: 0.02, max_spread: 0.4 }
    }
}

fn near_box(c: &[f64; 3], h: f64) -> ([f64; 3], [f64; 3]) {
    let (lo, hi, _) = ball_box(c, h);
    (lo, hi)
}

/// Symmetry, triangle inequality, identity, sheet isometry and 1-Lipschitz
/// projection over seeded random triples.
pub fn verify_metric_axioms(cx: &ComplexDescription, l: u32, cfg: &AxiomConfig, seed: u64) -> Result<ExperimentReport, Error> {
    if cfg.triples == 0 {
        return Err(Error::InvalidParameter("need at least one triple".into()));
    }
    if l > cx.level {
        return Err(Error::InvalidParameter(format!("level {l} above built level {}", cx.level)));
    }
    let delta = cfg.delta;
    let rows: Vec<[f64; 8]> = (0..cfg.triples)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t as u64);
            let p = sample_point(cx, l, &mut rng);
            let spread = cfg.max_spread * rng.gen::<f64>().powi(2).max(1e-4);
            let (lo, hi) = near_box(&p.base, spread);
            let q = sample_in_box(cx, l, &lo, &hi, &mut rng);
            let r = sample_in_box(cx, l, &lo, &hi, &mut rng);
            let pq = distance(cx, &p, &q, delta).expect("same level").upper;
            let qp = distance(cx, &q, &p, delta).expect("same level").upper;
            let pr = distance_value(cx, &p, &r);
            let qr = distance_value(cx, &q, &r);
            let pp = distance_value(cx, &p, &p);
            // same-sheet partner: q's base with p's colors wherever possible
            let bits: u64 = rng.gen();
            let pick = |j: u32| if (bits >> (j % 64)) & 1 == 1 { Color::Red } else { Color::Green };
            let a = LabeledPoint::new(p.base, cx.resolve_word_with(&p.base, l, pick));
            let b = LabeledPoint::new(q.base, cx.resolve_word_with(&q.base, l, pick));
            let sheet_err = (distance_value(cx, &a, &b) - euclid(&a.base, &b.base)).abs();
            let mut proj_excess = f64::NEG_INFINITY;
            for l2 in 0..l {
                let dp = distance_value(cx, &p.project(l2), &q.project(l2));
                proj_excess = proj_excess.max(dp - pq);
            }
            let sym = (pq - qp).abs();
            let tri = pr - (pq + qr);
            let scale = pq.max(qr).max(pr).max(f64::MIN_POSITIVE);
            [sym, tri, pp, sheet_err, proj_excess, scale, pq, (pq - euclid(&p.base, &q.base))]
        })
        .collect();
    let mut rep = ExperimentReport::new("metric-axioms", l, seed);
    rep.param("triples", cfg.triples).param("delta", delta).param("max_spread", cfg.max_spread);
    let mut table = Table::new(&["triple", "symmetry_gap", "triangle_excess", "self_distance", "sheet_error", "projection_excess", "d_pq"]);
    let (mut sym_bad, mut tri_bad, mut id_bad, mut sheet_bad, mut proj_bad) = (0, 0, 0, 0, 0);
    let (mut sym_max, mut tri_max, mut proj_max, mut conflicts) = (0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY, 0usize);
    for (t, r) in rows.iter().enumerate() {
        let [sym, tri, pp, sheet, proj, scale, pq, excess] = *r;
        sym_bad += (sym > delta * pq + FP_SLACK) as usize;
        tri_bad += (tri > 2.0 * delta * scale + FP_SLACK) as usize;
        id_bad += (pp != 0.0) as usize;
        sheet_bad += (sheet != 0.0) as usize;
        proj_bad += (proj > FP_SLACK) as usize;
        conflicts += (excess > FP_SLACK) as usize;
        sym_max = sym_max.max(sym / pq.max(f64::MIN_POSITIVE));
        tri_max = tri_max.max(tri / scale);
        proj_max = proj_max.max(proj);
        table.push(vec![
            t.to_string(),
            fmt_f64(sym),
            fmt_f64(tri),
            fmt_f64(pp),
            fmt_f64(sheet),
            fmt_f64(if proj.is_finite() { proj } else { 0.0 }),
            fmt_f64(pq),
        ]);
    }
    rep.stat("symmetry_violations", sym_bad as f64, Some(0.0), sym_bad == 0)
        .stat("triangle_violations", tri_bad as f64, Some(0.0), tri_bad == 0)
        .stat("identity_violations", id_bad as f64, Some(0.0), id_bad == 0)
        .stat("sheet_isometry_violations", sheet_bad as f64, Some(0.0), sheet_bad == 0)
        .stat("projection_violations", proj_bad as f64, Some(0.0), proj_bad == 0)
        .info("max_relative_symmetry_gap", sym_max)
        .info("max_relative_triangle_excess", tri_max)
        .info("max_projection_excess", if proj_max.is_finite() { proj_max } else { 0.0 })
        .info("pairs_off_sheet", conflicts as f64);
    rep.rows = table;
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingConfig {
    pub trials: usize,
    pub samples: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// Upper bound the maximal ratio is compared against (fitted in toy mode).
    pub bound: f64,
    /// Keep balls away from the cube boundary.
    pub interior: bool,
    /// Trials whose half ball collects fewer hits are flagged inconclusive.
    pub min_half_hits: usize,
}

impl Default for DoublingConfig {
    fn default() -> Self {
        DoublingConfig { trials: 200, samples: 8192, r_min: 0.02, r_max: 0.5, bound: 64.0, interior: false, min_half_hits: 50 }
    }
}

/// Empirical ratios `μ(B(p,r)) / μ(B(p,r/2))` over seeded `(p, r)`.
pub fn verify_doubling(cx: &ComplexDescription, l: u32, cfg: &DoublingConfig, seed: u64) -> Result<ExperimentReport, Error> {
    if cfg.trials == 0 || cfg.samples == 0 {
        return Err(Error::InvalidParameter("doubling needs positive trials and samples".into()));
    }
    if !(cfg.r_min > 0.0 && cfg.r_min <= cfg.r_max) {
        return Err(Error::InvalidParameter("radius range must satisfy 0 < r_min <= r_max".into()));
    }
    let trials: Vec<(LabeledPoint, f64, usize, usize)> = (0..cfg.trials)
        .map(|t| {
            let mut rng = stream(derive(seed, 0xd0b1), t as u64);
            let u: f64 = rng.gen();
            let r = (cfg.r_min.ln() + u * (cfg.r_max.ln() - cfg.r_min.ln())).exp();
            let p = if cfg.interior {
                let lo = [r.min(0.5); 3];
                let hi = [(1.0 - r).max(0.5); 3];
                sample_in_box(cx, l, &lo, &hi, &mut rng)
            } else {
                sample_point(cx, l, &mut rng)
            };
            let (c, _) = nested_ball_counts(cx, &p, &[r, r / 2.0], cfg.samples, derive(seed, t as u64 + 1));
            (p, r, c[0], c[1])
        })
        .collect();
    let mut rep = ExperimentReport::new("doubling", l, seed);
    rep.param("trials", cfg.trials)
        .param("samples", cfg.samples)
        .param("r_min", cfg.r_min)
        .param("r_max", cfg.r_max)
        .param("bound", cfg.bound)
        .param("interior", cfg.interior);
    let mut table = Table::new(&["trial", "x", "y", "z", "word", "r", "hits_r", "hits_half", "ratio", "ratio_stderr", "conclusive"]);
    let (mut max_ratio, mut min_ratio, mut sum, mut sum_var, mut n_ok, mut inconclusive) =
        (0.0f64, f64::INFINITY, 0.0, 0.0, 0usize, 0usize);
    for (t, (p, r, full, half)) in trials.iter().enumerate() {
        let ok = *half >= cfg.min_half_hits;
        let ratio = if *half > 0 { *full as f64 / *half as f64 } else { f64::INFINITY };
        // delta method for the ratio of nested binomial counts
        let q = *half as f64 / (*full).max(1) as f64;
        let se = if *half > 0 { ratio * ((1.0 - q) / *half as f64).sqrt() } else { f64::INFINITY };
        if ok {
            max_ratio = max_ratio.max(ratio);
            min_ratio = min_ratio.min(ratio);
            sum += ratio;
            sum_var += se * se;
            n_ok += 1;
        } else {
            inconclusive += 1;
        }
        table.push(vec![
            t.to_string(),
            fmt_f64(p.base[0]),
            fmt_f64(p.base[1]),
            fmt_f64(p.base[2]),
            p.word.to_string(),
            fmt_f64(*r),
            full.to_string(),
            half.to_string(),
            fmt_f64(ratio),
            fmt_f64(se),
            ok.to_string(),
        ]);
    }
    let mean = if n_ok > 0 { sum / n_ok as f64 } else { f64::NAN };
    let mean_se = if n_ok > 0 { sum_var.sqrt() / n_ok as f64 } else { f64::NAN };
    let frac_bad = inconclusive as f64 / cfg.trials as f64;
    rep.stat("max_ratio", max_ratio, Some(cfg.bound), n_ok > 0 && max_ratio <= cfg.bound)
        .stat("min_ratio", if n_ok > 0 { min_ratio } else { 0.0 }, Some(1.0), n_ok > 0 && min_ratio >= 1.0)
        .stat("inconclusive_fraction", frac_bad, Some(0.1), frac_bad <= 0.1)
        .info("mean_ratio", if mean.is_finite() { mean } else { 0.0 })
        .info("mean_ratio_stderr", if mean_se.is_finite() { mean_se } else { 0.0 });
    rep.rows = table;
    Ok(rep)
}

/// Checks `π^{-1}(B(p_l, r)) ⊂ B(p, r + 4 slen(X_l))` and `B(p, r) ⊂ π^{-1}(B(p_l, r))`
/// by sampling the box around `p`.
pub fn verify_ball_shape(
    cx: &ComplexDescription,
    p: &LabeledPoint,
    l: u32,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<ExperimentReport, Error> {
    let j = p.level();
    if l > j {
        return Err(Error::InvalidParameter(format!("projection level {l} above point level {j}")));
    }
    if samples == 0 || r.is_nan() || r <= 0.0 {
        return Err(Error::InvalidParameter("ball shape needs r > 0 and samples > 0".into()));
    }
    let window = r + 4.0 * cx.side(l);
    let (lo, hi) = near_box(&p.base, window);
    let pl = p.project(l);
    let results: Vec<(f64, f64, String)> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream(seed, s as u64);
            let q = sample_in_box(cx, j, &lo, &hi, &mut rng);
            let dj = distance_value(cx, p, &q);
            let dl = distance_value(cx, &pl, &q.project(l));
            (dj, dl, q.word.to_string())
        })
        .collect();
    let mut v_outer = 0usize;
    let mut v_inner = 0usize;
    let mut in_pre = 0usize;
    let mut worst = f64::NEG_INFINITY;
    let mut patterns = BTreeSet::new();
    for (dj, dl, w) in &results {
        if *dl <= r {
            in_pre += 1;
            worst = worst.max(dj - r);
            if *dj > window + FP_SLACK {
                v_outer += 1;
            }
        }
        if *dj <= r {
            patterns.insert(w.clone());
            if *dl > r + FP_SLACK {
                v_inner += 1;
            }
        }
    }
    let lg = discrete_log(r.min(0.999), &cx.schedule).unwrap_or(cx.schedule.levels());
    let sheet_norm = patterns.len() as f64 / 2f64.powi(j as i32 - lg as i32);
    let mut rep = ExperimentReport::new("ball-shape", j, seed);
    rep.param("projection_level", l).param("r", r).param("samples", samples).param("center", format!("{:?}/{}", p.base, p.word));
    rep.stat("violations", (v_outer + v_inner) as f64, Some(0.0), v_outer + v_inner == 0)
        .info("outer_violations", v_outer as f64)
        .info("inner_violations", v_inner as f64)
        .info("preimage_samples", in_pre as f64)
        .info("max_excess_over_r", if worst.is_finite() { worst } else { 0.0 })
        .info("window_slack", 4.0 * cx.side(l))
        .info("distinct_words_in_ball", patterns.len() as f64)
        .info("words_per_2_pow_k_minus_lg", sheet_norm);
    Ok(rep)
}
