//! Gate collapse sweep: compare a function across the green and red gate
//! boundaries of every doubled cell and weigh the bad cells.

use diamond_core::color::Color;
use diamond_core::complex::ComplexDescription;
use diamond_core::report::{fmt_f64, Table};
use diamond_core::rng::derive;
use diamond_core::ExperimentReport;
use diamond_harmonic::approx::{lift_point, lifts_of, sample_cell_lifts, CellLift};
use diamond_harmonic::{FunctionKind, LipschitzFunction, LipschitzFunctionSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{build, ExperimentError, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Difference of the gate-boundary averages, weight ε².
    Real,
    /// Largest paired difference in the l² norm, weight ε⁴.
    L2,
}

impl Mode {
    pub fn weight_power(self) -> i32 {
        match self {
            Mode::Real => 2,
            Mode::L2 => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BadCubeRecord {
    pub block: u32,
    pub stage: u32,
    pub cell: [u128; 3],
    pub prefix: String,
    /// Block parameter `n` of the stage.
    pub n: u64,
    pub statistic: f64,
    pub threshold: f64,
    pub is_bad: bool,
    /// `μ` of the lifted cell (scaled up when the stage is sampled).
    pub measure: f64,
}

/// Centers of an `q × q` grid of squares on each face of the box `[lo, hi]`.
pub fn face_points(lo: [f64; 3], hi: [f64; 3], q: u32) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(6 * (q * q) as usize);
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        for side in [lo[a], hi[a]] {
            for i in 0..q {
                for k in 0..q {
                    let mut x = [0.0; 3];
                    x[a] = side;
                    x[b] = lo[b] + (hi[b] - lo[b]) * (i as f64 + 0.5) / q as f64;
                    x[c] = lo[c] + (hi[c] - lo[c]) * (k as f64 + 0.5) / q as f64;
                    out.push(x);
                }
            }
        }
    }
    out
}

/// `ε · diam(Q) / (256 n)` with `diam(Q) = √3 slen(Q)`.
pub fn threshold(eps: f64, side: f64, n: u64) -> f64 {
    eps * 3f64.sqrt() * side / (256.0 * n as f64)
}

/// Gate statistic of `f` on one lifted cell. Paired points share their base.
pub fn gate_statistic(cx: &ComplexDescription, f: &LipschitzFunction, lift: &CellLift, q: u32, mode: Mode) -> f64 {
    let (lo, hi) = lift.record.gate_bounds();
    let pts = face_points(lo, hi, q);
    let vals = |c: Color| -> Vec<Vec<f64>> { pts.iter().map(|x| f.eval(cx, &lift_point(cx, lift, f.level, *x, Some(c)))).collect() };
    let (g, r) = (vals(Color::Green), vals(Color::Red));
    match mode {
        Mode::Real => {
            let avg = |v: &[Vec<f64>]| v.iter().map(|x| x[0]).sum::<f64>() / v.len() as f64;
            (avg(&g) - avg(&r)).abs()
        }
        Mode::L2 => g
            .iter()
            .zip(&r)
            .map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max),
    }
}

/// Lifts of the doubled cells of stage `l`: all of them if they fit in the
/// budget, else a seeded sample. The second value rescales sampled measures.
pub fn stage_lifts(cx: &ComplexDescription, l: u32, budget: usize, seed: u64) -> Result<(Vec<CellLift>, f64), ExperimentError> {
    let count = cx.record_counts[l as usize - 1];
    // each record has at most 2^(l-1) lifts
    if count.saturating_mul(1u128 << (l - 1).min(64)) <= budget as u128 {
        let recs = cx.records_at_stage(l, budget as u128)?;
        let lifts: Vec<CellLift> = recs.iter().flat_map(|(r, _)| lifts_of(cx, r)).collect();
        if lifts.len() <= budget {
            return Ok((lifts, 1.0));
        }
    }
    let lifts = sample_cell_lifts(cx, l, budget, seed)?;
    let side = cx.side(l - 1);
    let total = count as f64 * side.powi(3);
    // each sample stands for an equal share of the doubled region's measure
    let scale = total / budget as f64;
    Ok((lifts, scale))
}

/// Bad-cube records of `f` on stage `l` at resolution `eps`.
pub fn stage_records(
    cx: &ComplexDescription,
    f: &LipschitzFunction,
    l: u32,
    eps: f64,
    mode: Mode,
    q: u32,
    budget: usize,
    seed: u64,
) -> Result<Vec<BadCubeRecord>, ExperimentError> {
    let (lifts, scale) = stage_lifts(cx, l, budget, seed)?;
    let sampled = scale != 1.0;
    Ok(lifts
        .par_iter()
        .map(|lift| {
            let rec = &lift.record;
            let s = gate_statistic(cx, f, lift, q, mode);
            let t = threshold(eps, rec.base_side_f64(), rec.n);
            BadCubeRecord {
                block: rec.block,
                stage: rec.stage,
                cell: rec.cell,
                prefix: lift.prefix.to_string(),
                n: rec.n,
                statistic: s,
                threshold: t,
                is_bad: s >= t,
                measure: if sampled { scale } else { lift.measure() },
            }
        })
        .collect())
}

/// `Σ (ε^w / n³) μ(Q)` over the bad records.
pub fn weighted_sum(records: &[BadCubeRecord], eps: f64, mode: Mode) -> f64 {
    records.iter().filter(|r| r.is_bad).map(|r| eps.powi(mode.weight_power()) / (r.n as f64).powi(3) * r.measure).sum()
}

fn sweep_functions(cfg: &RunConfig, mode: Mode) -> Vec<LipschitzFunctionSpec> {
    let dim = if mode == Mode::L2 { cfg.components } else { 1 };
    let mut v = vec![LipschitzFunctionSpec { kind: FunctionKind::Affine { a: [0.7, -0.4, 0.2], b: 0.1 }, dim }];
    for i in 0..cfg.functions as u64 {
        v.push(LipschitzFunctionSpec { kind: FunctionKind::MacShane { anchors: cfg.anchors, lipschitz: 1.0, seed: derive(cfg.seed, 0xc0 + i) }, dim });
    }
    v
}

pub fn collapse(cfg: &RunConfig, mode: Mode) -> Result<ExperimentReport, ExperimentError> {
    let top = cfg.collapse_levels;
    if top == 0 || cfg.collapse_budget == 0 || cfg.face_resolution == 0 {
        return Err(ExperimentError::Usage("collapse needs levels, a budget and a face resolution".into()));
    }
    if !(cfg.collapse_eps > 0.0) {
        return Err(ExperimentError::Usage("collapse_eps must be positive".into()));
    }
    let cx = build(cfg.n0, top, true, Some(cfg.gate_subdivision))?;
    let name = if mode == Mode::Real { "collapse" } else { "collapse-l2" };
    let mut rep = ExperimentReport::new(name, top, cfg.seed);
    rep.param("eps", cfg.collapse_eps)
        .param("levels", top)
        .param("budget", cfg.collapse_budget)
        .param("face_resolution", cfg.face_resolution)
        .param("subdivision", cfg.gate_subdivision)
        .param("bound", cfg.collapse_bound)
        .param("functions", cfg.functions);
    let mut rows = Table::new(&["function", "stage", "block", "n", "cell", "prefix", "statistic", "threshold", "bad", "measure"]);
    let mut partial = Table::new(&["function", "level", "bad", "evaluated", "partial_sum", "partial_sum_over_glip_sq"]);
    let mut affine_bad = 0usize;
    let mut worst_ratio: f64 = 0.0;
    let mut decreasing = 0usize;
    for (fi, spec) in sweep_functions(cfg, mode).iter().enumerate() {
        let f = spec.instantiate(&cx)?;
        let label = spec.label();
        let mut sum = 0.0;
        let mut prev = 0.0;
        for l in 1..=top {
            let recs = stage_records(&cx, &f, l, cfg.collapse_eps, mode, cfg.face_resolution, cfg.collapse_budget, derive(cfg.seed, (fi as u64) << 8 | l as u64))?;
            let bad = recs.iter().filter(|r| r.is_bad).count();
            if fi == 0 {
                affine_bad += bad;
            }
            sum += weighted_sum(&recs, cfg.collapse_eps, mode);
            if sum < prev {
                decreasing += 1;
            }
            prev = sum;
            let ratio = sum / (f.lip * f.lip);
            if fi > 0 {
                worst_ratio = worst_ratio.max(ratio);
            }
            partial.push(vec![label.clone(), l.to_string(), bad.to_string(), recs.len().to_string(), fmt_f64(sum), fmt_f64(ratio)]);
            for r in &recs {
                rows.push(vec![
                    label.clone(),
                    r.stage.to_string(),
                    r.block.to_string(),
                    r.n.to_string(),
                    format!("{}:{}:{}", r.cell[0], r.cell[1], r.cell[2]),
                    if r.prefix.is_empty() { "-".into() } else { r.prefix.clone() },
                    fmt_f64(r.statistic),
                    fmt_f64(r.threshold),
                    r.is_bad.to_string(),
                    fmt_f64(r.measure),
                ]);
            }
        }
    }
    rep.stat("affine_bad_cubes", affine_bad as f64, Some(0.0), affine_bad == 0)
        .stat("max_partial_sum_over_glip_sq", worst_ratio, Some(cfg.collapse_bound), worst_ratio <= cfg.collapse_bound)
        .stat("partial_sum_decreases", decreasing as f64, Some(0.0), decreasing == 0);
    for row in &partial.rows {
        rep.note(format!("{} level {}: bad {} of {}, partial sum {} ({} of glip²)", row[0], row[1], row[2], row[3], row[4], row[5]));
    }
    rep.rows = rows;
    Ok(rep)
}
