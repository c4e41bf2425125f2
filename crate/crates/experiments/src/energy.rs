//! Drivers for the annulus energies and the piecewise harmonic approximations.

use diamond_core::report::{fmt_f64, Table};
use diamond_core::rng::derive;
use diamond_core::ExperimentReport;
use diamond_harmonic::approx::{decreasing_or_floored, ledger_ladder, sample_cell_lifts, EnergyLedger, LadderConfig};
use diamond_harmonic::benchmarks::{LowerBoundConfig, RadialConfig};
use diamond_harmonic::{check_energy_lower_bound, check_l2_energy_lower_bound, radial_benchmark, FunctionKind, LipschitzFunctionSpec};

use crate::{build, ExperimentError, RunConfig};

pub fn radial(cfg: &RunConfig) -> Result<ExperimentReport, ExperimentError> {
    let rc = RadialConfig {
        ladder: cfg.grid_ladder.iter().map(|&n| n as usize).collect(),
        tolerance: cfg.radial_tolerance,
        tol: cfg.solver_tol,
        max_iter: cfg.max_iter,
        ..Default::default()
    };
    Ok(radial_benchmark(&rc)?)
}

pub fn lower_bound(cfg: &RunConfig, l2: bool) -> Result<ExperimentReport, ExperimentError> {
    let lc = LowerBoundConfig {
        ladder: cfg.grid_ladder.clone(),
        stabilization: cfg.stabilization,
        m: cfg.components,
        cap: cfg.cap,
        tol: cfg.solver_tol,
        max_iter: cfg.max_iter,
        ..Default::default()
    };
    Ok(if l2 { check_l2_energy_lower_bound(&lc)? } else { check_energy_lower_bound(&lc)? })
}

/// MacShane test functions used by the approximation experiments.
pub fn macshane_specs(cfg: &RunConfig) -> Vec<LipschitzFunctionSpec> {
    (0..cfg.functions as u64)
        .map(|i| LipschitzFunctionSpec::scalar(FunctionKind::MacShane { anchors: cfg.anchors, lipschitz: 1.0, seed: derive(cfg.seed, i) }))
        .collect()
}

/// One ledger ladder per (level, function, cell).
pub struct LadderRun {
    pub level: u32,
    pub function: String,
    pub ledgers: Vec<EnergyLedger>,
}

pub fn ladder_runs(cfg: &RunConfig) -> Result<Vec<LadderRun>, ExperimentError> {
    if cfg.functions == 0 || cfg.cells_per_level == 0 || cfg.approx_levels.is_empty() {
        return Err(ExperimentError::Usage("need functions, cells and levels for the approximation experiments".into()));
    }
    let lc = LadderConfig { ladder: cfg.cell_ladder.clone(), tolerance: cfg.residual_tolerance, tol: cfg.solver_tol, max_iter: cfg.max_iter };
    let mut out = Vec::new();
    for &l in &cfg.approx_levels {
        let cx = build(cfg.n0, l, true, Some(cfg.gate_subdivision))?;
        let lifts = sample_cell_lifts(&cx, l, cfg.cells_per_level, derive(cfg.seed, l as u64))?;
        for spec in macshane_specs(cfg) {
            let f = spec.instantiate(&cx)?;
            for ledgers in ledger_ladder(&cx, &f, &lifts, &lc)? {
                out.push(LadderRun { level: l, function: spec.label(), ledgers });
            }
        }
    }
    Ok(out)
}

fn table(runs: &[LadderRun]) -> Table {
    let mut t = Table::new(&[
        "level",
        "function",
        "cell",
        "prefix",
        "per_cell",
        "energy_g_prev",
        "energy_h",
        "energy_g",
        "glip_sq",
        "orthogonality_h",
        "orthogonality_prev",
        "identity_gap",
    ]);
    for run in runs {
        for l in &run.ledgers {
            t.push(vec![
                run.level.to_string(),
                run.function.clone(),
                format!("{}:{}:{}", l.cell[0], l.cell[1], l.cell[2]),
                if l.prefix.is_empty() { "-".into() } else { l.prefix.clone() },
                l.per_cell.to_string(),
                fmt_f64(l.energy_g_prev),
                fmt_f64(l.energy_h),
                fmt_f64(l.energy_g),
                fmt_f64(l.glip * l.glip),
                fmt_f64(l.orthogonality_h),
                fmt_f64(l.orthogonality_prev),
                fmt_f64(l.identity_gap),
            ]);
        }
    }
    t
}

fn base_report(name: &str, cfg: &RunConfig) -> ExperimentReport {
    let mut rep = ExperimentReport::new(name, *cfg.approx_levels.iter().max().unwrap_or(&0), cfg.seed);
    rep.param("functions", cfg.functions)
        .param("anchors", cfg.anchors)
        .param("levels", format!("{:?}", cfg.approx_levels))
        .param("cells_per_level", cfg.cells_per_level)
        .param("cell_ladder", format!("{:?}", cfg.cell_ladder))
        .param("subdivision", cfg.gate_subdivision)
        .param("tolerance", cfg.residual_tolerance);
    rep
}

pub fn orthogonality_report(cfg: &RunConfig, runs: &[LadderRun]) -> ExperimentReport {
    let mut rep = base_report("orthogonality", cfg);
    let fine = runs.iter().map(|r| r.ledgers.last().expect("non-empty ladder"));
    let worst = fine.clone().map(EnergyLedger::max_residual).fold(0.0, f64::max);
    let not_decreasing = runs
        .iter()
        .filter(|r| !decreasing_or_floored(&r.ledgers.iter().map(EnergyLedger::max_residual).collect::<Vec<_>>()))
        .count();
    rep.stat("finest_max_residual", worst, Some(cfg.residual_tolerance), worst <= cfg.residual_tolerance)
        .stat("ladders_not_decreasing", not_decreasing as f64, Some(0.0), not_decreasing == 0)
        .info("finest_max_orthogonality_h", fine.clone().map(|l| l.orthogonality_h.abs()).fold(0.0, f64::max))
        .info("finest_max_orthogonality_prev", fine.clone().map(|l| l.orthogonality_prev.abs()).fold(0.0, f64::max))
        .info("finest_max_identity_gap", fine.map(|l| l.identity_gap.abs()).fold(0.0, f64::max));
    rep.note(format!("residuals at or below {:e} count as converged", diamond_harmonic::approx::RESIDUAL_FLOOR));
    rep.rows = table(runs);
    rep
}

pub fn telescoping_report(cfg: &RunConfig, runs: &[LadderRun]) -> ExperimentReport {
    let mut rep = base_report("telescoping", cfg);
    let fine: Vec<&EnergyLedger> = runs.iter().map(|r| r.ledgers.last().expect("non-empty ladder")).collect();
    let broken = fine.iter().filter(|l| !l.chain_holds(cfg.residual_tolerance)).count();
    let ratio = fine.iter().map(|l| l.energy_g / (l.glip * l.glip)).fold(0.0, f64::max);
    let gap_prev = fine.iter().map(|l| (l.energy_g_prev - l.energy_h) / l.energy_h.abs().max(f64::MIN_POSITIVE)).fold(f64::NEG_INFINITY, f64::max);
    let gap_h = fine.iter().map(|l| (l.energy_h - l.energy_g) / l.energy_h.abs().max(f64::MIN_POSITIVE)).fold(f64::NEG_INFINITY, f64::max);
    rep.stat("chain_violations", broken as f64, Some(0.0), broken == 0)
        .info("max_energy_g_over_glip_sq", ratio)
        .info("max_relative_excess_g_prev_over_h", gap_prev)
        .info("max_relative_excess_h_over_g", gap_h);
    rep.rows = table(runs);
    rep
}

/// Orthogonality and telescoping reports from one set of solves.
pub fn gate_energies(cfg: &RunConfig) -> Result<(ExperimentReport, ExperimentReport), ExperimentError> {
    let runs = ladder_runs(cfg)?;
    Ok((orthogonality_report(cfg, &runs), telescoping_report(cfg, &runs)))
}
