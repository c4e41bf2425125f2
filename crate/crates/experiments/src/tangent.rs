//! Blow-up at a gate point: the rescaled ball splits by the color of the gate stage.

use diamond_core::color::{Color, LabeledPoint};
use diamond_core::measure::sample_in_box;
use diamond_core::metric::distance_value;
use diamond_core::report::{fmt_f64, Table};
use diamond_core::rng::{derive, stream};
use diamond_core::ExperimentReport;
use rayon::prelude::*;

use crate::{build, ExperimentError, RunConfig};

/// Candidate draws allowed per accepted sample before giving up.
const MAX_TRIES_PER_SAMPLE: usize = 5000;

pub fn tangent(cfg: &RunConfig) -> Result<ExperimentReport, ExperimentError> {
    if cfg.tangent_samples < 4 {
        return Err(ExperimentError::Usage("tangent needs at least 4 samples".into()));
    }
    let cx = build(cfg.tangent_n0, 1, cfg.tangent_toy, cfg.tangent_subdivision)?;
    let rec = cx.record_for_cell(1, [0, 0, 0]).ok_or_else(|| ExperimentError::Numerical("unit cube is not doubled".into()))?;
    let s = cx.side(1);
    let radius = (rec.n as f64).sqrt() * s;
    let c = rec.center_f64();
    let p = LabeledPoint::new(c, cx.resolve_word(c, 1, Color::Green).word);
    let (lo, hi, _) = diamond_core::measure::ball_box(&c, radius);
    let per = cfg.tangent_samples / 2;
    let mut groups: Vec<Vec<LabeledPoint>> = Vec::new();
    for (ci, color) in [Color::Green, Color::Red].into_iter().enumerate() {
        let mut rng = stream(derive(cfg.seed, 0x7a9), ci as u64);
        let mut got = Vec::with_capacity(per);
        let mut tries = 0usize;
        while got.len() < per {
            tries += 1;
            if tries > MAX_TRIES_PER_SAMPLE * per {
                return Err(ExperimentError::Numerical(format!("no {color:?} points found in the rescaled ball")));
            }
            let mut q = sample_in_box(&cx, 1, &lo, &hi, &mut rng);
            // only points carrying a color at the gate stage take part
            if q.word.at(1).is_none() {
                continue;
            }
            q.word.set(1, Some(color));
            if distance_value(&cx, &p, &q) <= radius {
                got.push(q);
            }
        }
        groups.push(got);
    }
    let (g, r) = (&groups[0], &groups[1]);
    let cross = g
        .par_iter()
        .map(|a| r.iter().map(|b| distance_value(&cx, a, b)).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min)
        / s;
    let spread = |v: &[LabeledPoint]| -> (f64, f64) {
        v.par_iter()
            .enumerate()
            .map(|(i, a)| {
                v[i + 1..].iter().fold((0.0f64, f64::INFINITY), |(mx, mn), b| {
                    let d = distance_value(&cx, a, b);
                    (mx.max(d), mn.min(d))
                })
            })
            .reduce(|| (0.0, f64::INFINITY), |x, y| (x.0.max(y.0), x.1.min(y.1)))
    };
    let (dg, ng) = spread(g);
    let (dr, nr) = spread(r);
    let min_diam = dg.min(dr) / s;
    let tol = cfg.tangent_tolerance;
    let mut rep = ExperimentReport::new("tangent", 1, cfg.seed);
    rep.param("n0", cfg.tangent_n0)
        .param("toy", cfg.tangent_toy)
        .param("n", rec.n)
        .param("subdivision", rec.subdivision)
        .param("samples", 2 * per)
        .param("rescaled_radius", fmt_f64(radius / s));
    rep.stat("cross_color_ratio", cross, Some(1.0 - tol), cross >= 1.0 - tol)
        .stat("min_component_diameter", min_diam, Some(cfg.tangent_min_diameter), min_diam >= cfg.tangent_min_diameter)
        .info("green_diameter", dg / s)
        .info("red_diameter", dr / s)
        .info("same_color_nearest_ratio", ng.min(nr) / s)
        .info("jump_over_side", rec.jump_cost_f64() / s);
    let mut table = Table::new(&["component", "samples", "diameter", "nearest_pair"]);
    table.push(vec!["green".into(), g.len().to_string(), fmt_f64(dg / s), fmt_f64(ng / s)]);
    table.push(vec!["red".into(), r.len().to_string(), fmt_f64(dr / s), fmt_f64(nr / s)]);
    rep.rows = table;
    Ok(rep)
}
