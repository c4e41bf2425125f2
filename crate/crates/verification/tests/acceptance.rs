//! Acceptance criteria 1 to 13. Prints one line per criterion and exits
//! nonzero if any fails.

use std::fs;
use std::time::Instant;

use diamond_cli::{config_hash, output::write_report};
use diamond_core::color::LabeledPoint;
use diamond_core::{build_complex, build_schedule, distance, ExperimentReport, Rational, ScheduleParams};
use diamond_experiments::energy::gate_energies;
use diamond_experiments::{run_experiment, RunConfig, EXPERIMENTS};
use diamond_verification::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn stat(rep: &ExperimentReport, name: &str) -> f64 {
    rep.value(name).unwrap_or(f64::NAN)
}

fn check(parts: &[(&str, bool, String)]) -> Outcome {
    let pass = parts.iter().all(|p| p.1);
    let detail = parts.iter().map(|(n, ok, v)| format!("{n} {v}{}", if *ok { "" } else { " [x]" })).collect::<Vec<_>>().join("; ");
    Outcome { pass, detail }
}

fn run(name: &str, cfg: &RunConfig) -> Result<(ExperimentReport, f64), String> {
    let t = Instant::now();
    let rep = run_experiment(name, cfg).map_err(|e| e.to_string())?;
    Ok((rep, t.elapsed().as_secs_f64()))
}

fn jump() -> Result<(Outcome, f64), String> {
    let t = Instant::now();
    let s = build_schedule(ScheduleParams::full(JUMP_N0, 1)).map_err(|e| e.to_string())?;
    let cx = build_complex(&s, 1).map_err(|e| e.to_string())?;
    let g = LabeledPoint::new([0.5; 3], "g".parse().unwrap());
    let r = LabeledPoint::new([0.5; 3], "r".parse().unwrap());
    let d = distance(&cx, &g, &r, AXIOM_DELTA).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let exact = s.jump_cost(1) == Rational::new(1, 104);
    Ok((
        check(&[
            ("n", s.stage(1).n == 26, s.stage(1).n.to_string()),
            ("exact jump cost", exact, s.jump_cost(1).to_string()),
            ("upper", d.upper == JUMP_EXPECTED, format!("{:e}", d.upper)),
            ("lower", d.lower == JUMP_EXPECTED, format!("{:e}", d.lower)),
        ]),
        secs,
    ))
}

fn base() -> RunConfig {
    RunConfig::default()
}

fn axioms() -> Result<(ExperimentReport, f64), String> {
    let mut cfg = base();
    cfg.triples = AXIOM_TRIPLES;
    cfg.delta = AXIOM_DELTA;
    cfg.levels = AXIOM_LEVEL;
    run("metric-axioms", &cfg)
}

fn zero(rep: &ExperimentReport, name: &str) -> (String, bool, String) {
    let v = stat(rep, name);
    (name.to_string(), v == 0.0, v.to_string())
}

fn owned(parts: Vec<(String, bool, String)>) -> Outcome {
    let refs: Vec<(&str, bool, String)> = parts.iter().map(|(a, b, c)| (a.as_str(), *b, c.clone())).collect();
    check(&refs)
}

fn axiom_checks(rep: &ExperimentReport) -> Outcome {
    owned(vec![zero(rep, "symmetry_violations"), zero(rep, "triangle_violations"), zero(rep, "identity_violations")])
}

fn isometry_checks(rep: &ExperimentReport) -> Outcome {
    owned(vec![zero(rep, "sheet_isometry_violations"), zero(rep, "projection_violations")])
}

fn radial() -> Result<(Outcome, f64), String> {
    let mut cfg = base();
    cfg.grid_ladder = RADIAL_LADDER.to_vec();
    cfg.radial_tolerance = RADIAL_TOLERANCE;
    let (rep, secs) = run("radial-energy", &cfg)?;
    let err = stat(&rep, "error_vs_stated_closed_form");
    let mono = stat(&rep, "error_vs_stated_decreasing") == 1.0;
    Ok((
        check(&[
            ("error vs stated energy", err <= RADIAL_TOLERANCE, format!("{err:.4} (tolerance {RADIAL_TOLERANCE})")),
            ("error decreasing", mono, mono.to_string()),
            ("error vs integrated profile (info)", true, format!("{:.2e}", stat(&rep, "error_vs_profile_closed_form"))),
        ]),
        secs,
    ))
}

fn energy_bounds() -> Result<(Outcome, f64), String> {
    let mut cfg = base();
    cfg.grid_ladder = RADIAL_LADDER.to_vec();
    cfg.stabilization = ENERGY_STABILIZATION;
    let (real, a) = run("energy-bound", &cfg)?;
    let (l2, b) = run("energy-bound-l2", &cfg)?;
    let (c, cl2) = (stat(&real, "fitted_constant"), stat(&l2, "fitted_constant"));
    let (s, sl2) = (stat(&real, "ratio_change_between_finest_grids"), stat(&l2, "ratio_change_between_finest_grids"));
    Ok((
        check(&[
            ("c_Har", c > 0.0 && c.is_finite(), format!("{c:.4}")),
            ("stable", s <= ENERGY_STABILIZATION, format!("{s:.4}")),
            ("l2 constant", cl2 > 0.0 && cl2.is_finite(), format!("{cl2:.4}")),
            ("l2 stable", sl2 <= ENERGY_STABILIZATION, format!("{sl2:.4}")),
        ]),
        a + b,
    ))
}

fn approximations() -> Result<(Outcome, f64), String> {
    let mut cfg = base();
    cfg.functions = APPROX_FUNCTIONS;
    cfg.approx_levels = APPROX_LEVELS.to_vec();
    cfg.residual_tolerance = RESIDUAL_TOLERANCE;
    let t = Instant::now();
    let (orth, tele) = gate_energies(&cfg).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let worst = stat(&orth, "finest_max_residual");
    Ok((
        check(&[
            ("finest residual", worst <= RESIDUAL_TOLERANCE, format!("{worst:.4}")),
            ("ladders not decreasing", stat(&orth, "ladders_not_decreasing") == 0.0, stat(&orth, "ladders_not_decreasing").to_string()),
            ("chain violations", stat(&tele, "chain_violations") == 0.0, stat(&tele, "chain_violations").to_string()),
        ]),
        secs,
    ))
}

fn paths() -> Result<(ExperimentReport, f64), String> {
    let mut cfg = base();
    cfg.centers = PATH_CENTERS;
    cfg.density_points = DENSITY_POINTS;
    run("paths", &cfg)
}

fn path_checks(rep: &ExperimentReport) -> Outcome {
    let mut parts = vec![zero(rep, "bad_paths"), zero(rep, "paths_shorter_than_distance")];
    parts.push(("paths audited".into(), stat(rep, "paths_audited") > 0.0, stat(rep, "paths_audited").to_string()));
    parts.push(("jumps used".into(), stat(rep, "jumps_used") > 0.0, stat(rep, "jumps_used").to_string()));
    owned(parts)
}

fn density_checks(rep: &ExperimentReport) -> Outcome {
    let pts = rep.params.get("density_points").cloned().unwrap_or_default();
    owned(vec![zero(rep, "density_violations"), ("points".into(), pts == DENSITY_POINTS.to_string(), pts)])
}

fn doubling() -> Result<(Outcome, f64), String> {
    let mut cfg = base();
    cfg.trials = DOUBLING_TRIALS;
    cfg.levels = DOUBLING_LEVEL;
    cfg.doubling_bound = DOUBLING_BOUND;
    let (rep, secs) = run("doubling", &cfg)?;
    let max = stat(&rep, "max_ratio");
    let gap = stat(&rep, "level0_mean_ratio_minus_8");
    let se = stat(&rep, "level0_mean_ratio_stderr");
    Ok((
        check(&[
            ("max ratio", max.is_finite() && max <= DOUBLING_BOUND, format!("{max:.3}")),
            ("inconclusive", stat(&rep, "inconclusive_fraction") <= 0.1, stat(&rep, "inconclusive_fraction").to_string()),
            ("level-0 |mean-8|", gap <= LEVEL0_STDERRS * se, format!("{gap:.4} (se {se:.4})")),
        ]),
        secs,
    ))
}

fn tangent() -> Result<(Outcome, f64), String> {
    let mut cfg = base();
    cfg.tangent_tolerance = 1.0 - TANGENT_RATIO;
    cfg.tangent_min_diameter = TANGENT_DIAMETER;
    let (rep, secs) = run("tangent", &cfg)?;
    let (r, d) = (stat(&rep, "cross_color_ratio"), stat(&rep, "min_component_diameter"));
    Ok((check(&[("cross ratio", r >= TANGENT_RATIO, format!("{r:.3}")), ("min diameter", d >= TANGENT_DIAMETER, format!("{d:.3}"))]), secs))
}

fn collapse() -> Result<(Outcome, f64), String> {
    let mut cfg = base();
    cfg.functions = COLLAPSE_FUNCTIONS;
    cfg.collapse_bound = COLLAPSE_BOUND;
    let mut parts = Vec::new();
    let mut secs = 0.0;
    for name in ["collapse", "collapse-l2"] {
        let (rep, s) = run(name, &cfg)?;
        secs += s;
        let m = stat(&rep, "max_partial_sum_over_glip_sq");
        parts.push((format!("{name} affine bad"), stat(&rep, "affine_bad_cubes") == 0.0, stat(&rep, "affine_bad_cubes").to_string()));
        parts.push((format!("{name} max sum/glip²"), m <= COLLAPSE_BOUND, format!("{m:.3e}")));
        parts.push((format!("{name} decreases"), stat(&rep, "partial_sum_decreases") == 0.0, stat(&rep, "partial_sum_decreases").to_string()));
    }
    Ok((owned(parts), secs))
}

fn decay() -> Result<(Outcome, f64), String> {
    let mut cfg = base();
    cfg.decay_points = DECAY_POINTS;
    cfg.radii_exponents = DECAY_RADII.to_vec();
    cfg.zero_remainder_tolerance = ZERO_REMAINDER;
    let (rep, secs) = run("diff-decay", &cfg)?;
    let lin = stat(&rep, "linear_max_remainder");
    Ok((
        check(&[
            ("linear remainder", lin <= ZERO_REMAINDER, format!("{lin:.2e}")),
            ("median increases", stat(&rep, "median_increases") == 0.0, stat(&rep, "median_increases").to_string()),
            ("p90 increases", stat(&rep, "p90_increases") == 0.0, stat(&rep, "p90_increases").to_string()),
        ]),
        secs,
    ))
}

/// Reduced sizes; determinism does not depend on them.
fn small() -> RunConfig {
    let mut c = base();
    c.seed = 11;
    c.triples = 100;
    c.trials = 20;
    c.samples = 2048;
    c.level0_trials = 5;
    c.level0_samples = 4000;
    c.pairs_per_center = 20;
    c.density_points = 100;
    c.centers = 3;
    c.grid_ladder = vec![24, 48];
    c.cell_ladder = vec![2, 4];
    c.functions = 2;
    c.approx_levels = vec![1];
    c.collapse_levels = 2;
    c.collapse_budget = 200;
    c.decay_points = 20;
    c.decay_level = 3;
    c.radii_exponents = vec![1, 2];
    c.tangent_samples = 100;
    c.gate_trials = 2000;
    c
}

fn determinism() -> Result<(Outcome, f64), String> {
    let t = Instant::now();
    let cfg = small();
    let hash = config_hash(&cfg);
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut differing = Vec::new();
    for name in EXPERIMENTS {
        let mut files = Vec::new();
        for side in ["a", "b"] {
            let mut rep = run_experiment(name, &cfg).map_err(|e| format!("{name}: {e}"))?;
            rep.stamp(&hash);
            files.push(write_report(&rep, &tmp.path().join(side)).map_err(|e| e.to_string())?);
        }
        for (a, b) in files[0].iter().zip(&files[1]) {
            if fs::read(a).map_err(|e| e.to_string())? != fs::read(b).map_err(|e| e.to_string())? {
                differing.push(a.file_name().unwrap().to_string_lossy().into_owned());
            }
        }
    }
    let n = EXPERIMENTS.len();
    Ok((check(&[("experiments", true, n.to_string()), ("differing files", differing.is_empty(), format!("{differing:?}"))]), t.elapsed().as_secs_f64()))
}

fn report(k: usize, name: &str, res: Result<(Outcome, f64), String>, passed: &mut usize) {
    let line = match res {
        Ok((o, secs)) => {
            let in_time = secs <= BUDGET_SECONDS[k];
            let ok = o.pass && in_time;
            *passed += ok as usize;
            format!(
                "criterion {k:>2} {name}: {} ({}; {secs:.2}s of {}s{})",
                if ok { "PASS" } else { "FAIL" },
                o.detail,
                BUDGET_SECONDS[k],
                if in_time { "" } else { " [x]" }
            )
        }
        Err(e) => format!("criterion {k:>2} {name}: FAIL (error: {e})"),
    };
    println!("{line}");
}

fn main() {
    let mut passed = 0usize;
    report(1, "jump distance", jump(), &mut passed);
    match axioms() {
        Ok((rep, secs)) => {
            report(2, "metric axioms", Ok((axiom_checks(&rep), secs)), &mut passed);
            report(3, "sheet isometry and projection", Ok((isometry_checks(&rep), secs)), &mut passed);
        }
        Err(e) => {
            report(2, "metric axioms", Err(e.clone()), &mut passed);
            report(3, "sheet isometry and projection", Err(e), &mut passed);
        }
    }
    report(4, "radial energy", radial(), &mut passed);
    report(5, "energy lower bounds", energy_bounds(), &mut passed);
    report(6, "orthogonality and telescoping", approximations(), &mut passed);
    match paths() {
        Ok((rep, secs)) => {
            report(7, "good paths", Ok((path_checks(&rep), secs)), &mut passed);
            report(8, "configuration density", Ok((density_checks(&rep), secs)), &mut passed);
        }
        Err(e) => {
            report(7, "good paths", Err(e.clone()), &mut passed);
            report(8, "configuration density", Err(e), &mut passed);
        }
    }
    report(9, "doubling", doubling(), &mut passed);
    report(10, "tangent disconnection", tangent(), &mut passed);
    report(11, "collapse sweep", collapse(), &mut passed);
    report(12, "differentiability decay", decay(), &mut passed);
    report(13, "determinism", determinism(), &mut passed);
    println!("acceptance: {passed} of 13 criteria passed");
    if passed != 13 {
        std::process::exit(1);
    }
}
