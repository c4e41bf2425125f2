//! Drivers for the metric-measure checks and for good paths.

use diamond_core::color::{euclid, LabeledPoint};
use diamond_core::measure::{ball_box, sample_in_box, sample_point};
use diamond_core::metric::distance_value;
use diamond_core::paths::{audit_path, build_configuration, good_path, PathAudit};
use diamond_core::report::{fmt_f64, Table};
use diamond_core::rng::{derive, stream};
use diamond_core::verify::{verify_ball_shape, verify_doubling, verify_metric_axioms, AxiomConfig, DoublingConfig};
use diamond_core::ExperimentReport;
use rand::Rng as _;
use rayon::prelude::*;

use crate::{build, main_complex, ExperimentError, RunConfig};

/// Doubling ratios at the configured level, plus the level-0 interior
/// anchor where every ratio is exactly 8.
pub fn doubling(cfg: &RunConfig) -> Result<ExperimentReport, ExperimentError> {
    let cx = main_complex(cfg)?;
    let dc = DoublingConfig { trials: cfg.trials, samples: cfg.samples, bound: cfg.doubling_bound, ..Default::default() };
    let mut rep = verify_doubling(&cx, cfg.levels, &dc, cfg.seed)?;
    let flat = DoublingConfig {
        trials: cfg.level0_trials,
        samples: cfg.level0_samples,
        r_min: 0.05,
        r_max: 0.25,
        interior: true,
        ..Default::default()
    };
    let base = verify_doubling(&cx, 0, &flat, derive(cfg.seed, 0))?;
    let mean = base.value("mean_ratio").unwrap_or(f64::NAN);
    let se = base.value("mean_ratio_stderr").unwrap_or(f64::NAN);
    // four standard errors: the mean of binomial ratios is close to normal
    let tol = 4.0 * se;
    rep.stat("level0_mean_ratio_minus_8", (mean - 8.0).abs(), Some(tol), (mean - 8.0).abs() <= tol)
        .info("level0_mean_ratio", mean)
        .info("level0_mean_ratio_stderr", se)
        .param("level0_trials", cfg.level0_trials)
        .param("level0_samples", cfg.level0_samples);
    Ok(rep)
}

/// Ball shape at several seeded centers of the top level, projected one level down.
pub fn ball_shape(cfg: &RunConfig) -> Result<ExperimentReport, ExperimentError> {
    let cx = main_complex(cfg)?;
    if cfg.ball_centers == 0 {
        return Err(ExperimentError::Usage("ball-shape needs at least one center".into()));
    }
    let l = cfg.levels;
    let proj = l.saturating_sub(1);
    let mut rep = ExperimentReport::new("ball-shape", l, cfg.seed);
    rep.param("centers", cfg.ball_centers).param("r", cfg.ball_radius).param("samples", cfg.samples).param("projection_level", proj);
    let mut table = Table::new(&["center", "x", "y", "z", "word", "violations", "preimage_samples", "distinct_words"]);
    let mut total = 0.0;
    for c in 0..cfg.ball_centers {
        let mut rng = stream(derive(cfg.seed, 0xba11), c as u64);
        let p = sample_in_box(&cx, l, &[0.25; 3], &[0.75; 3], &mut rng);
        let r = verify_ball_shape(&cx, &p, proj, cfg.ball_radius, cfg.samples, derive(cfg.seed, c as u64))?;
        let v = r.value("violations").unwrap_or(f64::NAN);
        total += v;
        table.push(vec![
            c.to_string(),
            fmt_f64(p.base[0]),
            fmt_f64(p.base[1]),
            fmt_f64(p.base[2]),
            p.word.to_string(),
            fmt_f64(v),
            fmt_f64(r.value("preimage_samples").unwrap_or(0.0)),
            fmt_f64(r.value("distinct_words_in_ball").unwrap_or(0.0)),
        ]);
    }
    rep.stat("violations", total, Some(0.0), total == 0.0);
    rep.rows = table;
    Ok(rep)
}

pub fn metric_axioms(cfg: &RunConfig) -> Result<ExperimentReport, ExperimentError> {
    let cx = main_complex(cfg)?;
    let ac = AxiomConfig { triples: cfg.triples, delta: cfg.delta, ..Default::default() };
    Ok(verify_metric_axioms(&cx, cfg.levels, &ac, cfg.seed)?)
}

fn ball_point(cx: &diamond_core::ComplexDescription, p: &LabeledPoint, r: f64, rng: &mut diamond_core::rng::Rng) -> LabeledPoint {
    let (lo, hi, _) = ball_box(&p.base, r);
    loop {
        let q = sample_in_box(cx, p.level(), &lo, &hi, rng);
        if euclid(&q.base, &p.base) <= r && distance_value(cx, p, &q) <= r {
            return q;
        }
    }
}

struct CenterResult {
    audits: Vec<PathAudit>,
    density: Vec<f64>,
    size: usize,
    sheets: usize,
}

fn audit_center(
    cx: &diamond_core::ComplexDescription,
    p: &LabeledPoint,
    r: f64,
    eps: f64,
    pairs: usize,
    density_points: usize,
    seed: u64,
) -> Result<CenterResult, ExperimentError> {
    let conf = build_configuration(cx, p, r, eps)?;
    let pts = &conf.points;
    let mut jobs: Vec<(usize, usize)> = (0..pts.len()).map(|i| (usize::MAX, i)).collect();
    let mut rng = stream(seed, 1);
    for _ in 0..pairs.min(pts.len() * pts.len()) {
        jobs.push((rng.gen_range(0..pts.len()), rng.gen_range(0..pts.len())));
    }
    let audits = jobs
        .par_iter()
        .map(|&(a, b)| {
            let from = if a == usize::MAX { p } else { &pts[a] };
            let to = &pts[b];
            let path = good_path(cx, from, to)?;
            Ok(audit_path(cx, &path, from, to, eps, r))
        })
        .collect::<Result<Vec<_>, diamond_core::Error>>()?;
    let density: Vec<f64> = (0..density_points)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(derive(seed, 2), i as u64);
            let q = ball_point(cx, p, r, &mut rng);
            conf.nearest_distance(cx, &q)
        })
        .collect();
    Ok(CenterResult { audits, density, size: pts.len(), sheets: conf.sheets.len() })
}

/// Good paths over full fundamental configurations at seeded centers, and
/// density of the configurations in their balls.
pub fn paths(cfg: &RunConfig) -> Result<ExperimentReport, ExperimentError> {
    if cfg.centers == 0 {
        return Err(ExperimentError::Usage("paths needs at least one center".into()));
    }
    let cx = main_complex(cfg)?;
    let l = cfg.levels;
    let (r, eps) = (cfg.radius, cfg.eps);
    let mut rep = ExperimentReport::new("paths", l, cfg.seed);
    rep.param("eps", eps)
        .param("r", r)
        .param("centers", cfg.centers)
        .param("pairs_per_center", cfg.pairs_per_center)
        .param("density_points", cfg.density_points)
        .param("stretch", cfg.stretch);
    let mut table = Table::new(&[
        "center", "x", "y", "z", "word", "points", "sheets", "paths", "bad_paths", "max_segments", "max_short", "max_jumps", "max_stretch", "max_density_gap",
    ]);
    let per_density = cfg.density_points.div_ceil(cfg.centers);
    let mut bad = 0usize;
    let mut short_len = 0usize;
    let mut n_paths = 0usize;
    let mut jumps = 0usize;
    let mut dens_bad = 0usize;
    let mut dens_n = 0usize;
    let mut worst_gap: f64 = 0.0;
    let mut worst_stretch: f64 = 0.0;
    let mut centers: Vec<(String, LabeledPoint, diamond_core::ComplexDescription)> = Vec::new();
    for c in 0..cfg.centers {
        let mut rng = stream(derive(cfg.seed, 0x9a7), c as u64);
        centers.push((c.to_string(), sample_point(&cx, l, &mut rng), cx.clone()));
    }
    // a full-scale cube near its jump pair, where good paths must jump
    let full = build(25, 1, false, None)?;
    let near = LabeledPoint::new([0.5 + 1e-4, 0.5, 0.5], full.resolve_word([0.5 + 1e-4, 0.5, 0.5], 1, diamond_core::Color::Green).word);
    centers.push(("full-jump".into(), near, full));
    for (i, (name, p, cx)) in centers.iter().enumerate() {
        let (rr, ee) = if name == "full-jump" { (0.012, 0.3) } else { (r, eps) };
        let res = audit_center(cx, p, rr, ee, cfg.pairs_per_center, per_density, derive(cfg.seed, i as u64))?;
        let b = res.audits.iter().filter(|a| !a.good(cfg.stretch)).count();
        bad += b;
        short_len += res.audits.iter().filter(|a| a.length < a.distance - 1e-12).count();
        n_paths += res.audits.len();
        jumps += res.audits.iter().map(|a| a.jump_count).sum::<usize>();
        let limit = 5.0 * ee * rr;
        dens_bad += res.density.iter().filter(|&&d| d > limit).count();
        dens_n += res.density.len();
        let gap = res.density.iter().map(|d| d / (ee * rr)).fold(0.0, f64::max);
        worst_gap = worst_gap.max(gap);
        let st = res.audits.iter().map(|a| a.stretch).fold(0.0, f64::max);
        worst_stretch = worst_stretch.max(st);
        table.push(vec![
            name.clone(),
            fmt_f64(p.base[0]),
            fmt_f64(p.base[1]),
            fmt_f64(p.base[2]),
            p.word.to_string(),
            res.size.to_string(),
            res.sheets.to_string(),
            res.audits.len().to_string(),
            b.to_string(),
            res.audits.iter().map(|a| a.segment_count).max().unwrap_or(0).to_string(),
            res.audits.iter().map(|a| a.short_segments).max().unwrap_or(0).to_string(),
            res.audits.iter().map(|a| a.jump_count).max().unwrap_or(0).to_string(),
            fmt_f64(st),
            fmt_f64(gap),
        ]);
    }
    rep.stat("bad_paths", bad as f64, Some(0.0), bad == 0)
        .stat("paths_shorter_than_distance", short_len as f64, Some(0.0), short_len == 0)
        .stat("density_violations", dens_bad as f64, Some(0.0), dens_bad == 0)
        .info("paths_audited", n_paths as f64)
        .info("jumps_used", jumps as f64)
        .info("ball_points", dens_n as f64)
        .info("max_gap_over_eps_r", worst_gap)
        .info("max_stretch", worst_stretch);
    rep.note("the last center is a full-scale cube with n=26 next to its jump pair (eps=0.3, r=0.012)");
    rep.rows = table;
    Ok(rep)
}
