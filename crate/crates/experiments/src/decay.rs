//! Differentiability remainder across shrinking fundamental configurations.

use diamond_core::color::{Color, LabeledPoint};
use diamond_core::complex::ComplexDescription;
use diamond_core::measure::sample_point;
use diamond_core::paths::build_configuration;
use diamond_core::report::{fmt_f64, Table};
use diamond_core::rng::{derive, stream};
use diamond_core::ExperimentReport;
use diamond_harmonic::{horizontal_gradient, FunctionKind, LipschitzFunction, LipschitzFunctionSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{build, ExperimentError, RunConfig};

/// Remainders at most `DECAY_C · ε` count as small.
pub const DECAY_C: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderSample {
    pub point: LabeledPoint,
    pub r: f64,
    /// `sup_q ‖f(q) - f(p) - ∇f(p)·(x(q) - x(p))‖ / r` over the configuration.
    pub remainder: f64,
}

/// Normalized remainder of `f` at `p` over its `(ε, r)`-configuration.
pub fn remainder(cx: &ComplexDescription, f: &LipschitzFunction, p: &LabeledPoint, r: f64, eps: f64, step: f64) -> Result<f64, ExperimentError> {
    let conf = build_configuration(cx, p, r, eps)?;
    let grad = horizontal_gradient(cx, f, p, step).grad;
    let fp = f.eval(cx, p);
    let mut worst: f64 = 0.0;
    for q in &conf.points {
        let fq = f.eval(cx, q);
        let dx = [0, 1, 2].map(|a| q.base[a] - p.base[a]);
        let norm = fq
            .iter()
            .zip(&fp)
            .zip(&grad)
            .map(|((a, b), g)| (a - b - (g[0] * dx[0] + g[1] * dx[1] + g[2] * dx[2])).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(norm / r);
    }
    Ok(worst)
}

/// Empirical quantile by the nearest-rank rule.
pub fn quantile(v: &[f64], p: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = ((p * s.len() as f64).ceil() as usize).clamp(1, s.len());
    s[k - 1]
}

/// Test functions: exactly linear ones first, then distance-type ones.
pub fn decay_functions(cx: &ComplexDescription, cfg: &RunConfig) -> Vec<(LipschitzFunctionSpec, bool)> {
    let mut rng = stream(derive(cfg.seed, 0xdec), 0);
    let target = sample_point(cx, cx.level, &mut rng);
    vec![
        (LipschitzFunctionSpec::scalar(FunctionKind::Coordinate { axis: 0 }), true),
        (LipschitzFunctionSpec::scalar(FunctionKind::Affine { a: [0.3, -0.5, 0.8], b: 0.2 }), true),
        (LipschitzFunctionSpec::scalar(FunctionKind::DistanceToGateSet { stage: cfg.decay_gate_stage.clamp(1, cx.level) }), false),
        (LipschitzFunctionSpec::scalar(FunctionKind::DistanceToPoint { point: target }), false),
    ]
}

pub fn diff_decay(cfg: &RunConfig) -> Result<ExperimentReport, ExperimentError> {
    if cfg.decay_points == 0 || cfg.radii_exponents.is_empty() {
        return Err(ExperimentError::Usage("diff-decay needs points and radii".into()));
    }
    if cfg.radii_exponents.iter().any(|&k| k == 0) {
        return Err(ExperimentError::Usage("radii exponents must be positive".into()));
    }
    let cx = build(cfg.n0, cfg.decay_level, true, cfg.subdivision)?;
    let radii: Vec<f64> = cfg.radii_exponents.iter().map(|&k| 3f64.powi(-(k as i32))).collect();
    let eps = cfg.decay_eps;
    let points: Vec<LabeledPoint> = (0..cfg.decay_points)
        .map(|i| sample_point(&cx, cx.level, &mut stream(derive(cfg.seed, 0xd1ff), i as u64)))
        .collect();
    let mut rep = ExperimentReport::new("diff-decay", cx.level, cfg.seed);
    rep.param("points", cfg.decay_points)
        .param("eps", eps)
        .param("radii", radii.iter().map(|r| fmt_f64(*r)).collect::<Vec<_>>().join(","))
        .param("step", cfg.decay_step)
        .param("small_remainder", DECAY_C * eps);
    let mut rows = Table::new(&["function", "point", "x", "y", "z", "word", "r", "remainder"]);
    let mut linear_max: f64 = 0.0;
    let (mut median_up, mut p90_up, mut frac_down) = (0usize, 0usize, 0usize);
    for (spec, linear) in decay_functions(&cx, cfg) {
        let f = spec.instantiate(&cx)?;
        let label = spec.label();
        let per_r: Vec<Vec<f64>> = radii
            .iter()
            .map(|&r| points.par_iter().map(|p| remainder(&cx, &f, p, r, eps, cfg.decay_step)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        for (ri, vals) in per_r.iter().enumerate() {
            for (i, v) in vals.iter().enumerate() {
                let p = &points[i];
                rows.push(vec![
                    label.clone(),
                    i.to_string(),
                    fmt_f64(p.base[0]),
                    fmt_f64(p.base[1]),
                    fmt_f64(p.base[2]),
                    p.word.to_string(),
                    fmt_f64(radii[ri]),
                    fmt_f64(*v),
                ]);
            }
        }
        let medians: Vec<f64> = per_r.iter().map(|v| quantile(v, 0.5)).collect();
        let p90: Vec<f64> = per_r.iter().map(|v| quantile(v, 0.9)).collect();
        let small: Vec<f64> = per_r.iter().map(|v| v.iter().filter(|&&x| x <= DECAY_C * eps).count() as f64 / v.len() as f64).collect();
        if linear {
            linear_max = linear_max.max(per_r.iter().flatten().fold(0.0, |m, &x| m.max(x)));
        } else {
            median_up += medians.windows(2).filter(|w| w[1] > w[0]).count();
            p90_up += p90.windows(2).filter(|w| w[1] > w[0]).count();
            frac_down += small.windows(2).filter(|w| w[1] < w[0]).count();
        }
        for (ri, r) in radii.iter().enumerate() {
            rep.note(format!("{label} r={}: median {} p90 {} small fraction {}", fmt_f64(*r), fmt_f64(medians[ri]), fmt_f64(p90[ri]), fmt_f64(small[ri])));
        }
        rep.info(&format!("{label}_median_finest"), *medians.last().unwrap());
    }
    rep.stat("linear_max_remainder", linear_max, Some(cfg.zero_remainder_tolerance), linear_max <= cfg.zero_remainder_tolerance)
        .stat("median_increases", median_up as f64, Some(0.0), median_up == 0)
        .stat("p90_increases", p90_up as f64, Some(0.0), p90_up == 0)
        .stat("small_fraction_decreases", frac_down as f64, Some(0.0), frac_down == 0);
    rep.rows = rows;
    Ok(rep)
}

/// A labeled point on the green sheet, for callers that need a fixed center.
pub fn green_point(cx: &ComplexDescription, x: [f64; 3]) -> LabeledPoint {
    cx.resolve_word(x, cx.level, Color::Green)
}
