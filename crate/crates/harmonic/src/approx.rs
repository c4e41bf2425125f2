//! Piecewise harmonic approximations on one doubled cell.
//!
//! For a cell `Q` of `X_{j-1}` that is doubled at stage `j` the three fields
//! live on the same grid of `π^{-1}(Q)`: the shared part `Q \ K` with weight
//! 1 and the green and red copies of `K` with weight 1/2 each.
//!
//! - `g_{j-1}`: harmonic in `Q` with `f` on `∂Q`, pulled back to both copies;
//! - `h_j`: `f` on `∂Q` and on both gate boundaries, harmonic elsewhere;
//! - `g_j`: `f` on every face of the cells of `X_j`, harmonic inside them.

use std::sync::Arc;

use diamond_core::color::{Color, ColorWord, LabeledPoint};
use diamond_core::complex::{ComplexDescription, DoublingRecord};
use diamond_core::measure::random_color;
use diamond_core::report::{fmt_f64, ExperimentReport, Table};
use diamond_core::rng::stream;
use diamond_core::Rational;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{difference, dirichlet_energy, energy_inner, solve_dirichlet, DomainDescriptor, DomainShape, GridField, VoxelDomain, GREEN, RED, SHARED};
use crate::functions::LipschitzFunction;
use crate::HarmonicError;

/// Residuals at or below this level count as solved exactly; refinement
/// cannot shrink them further than the solver tolerance allows.
pub const RESIDUAL_FLOOR: f64 = 1e-6;

/// A lift of a doubled cell: its record and the colors of the cell at earlier stages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellLift {
    pub record: DoublingRecord,
    /// Colors at stages `1..stage` (wildcard where the cell is uncolored).
    pub prefix: ColorWord,
}

impl CellLift {
    /// `μ_{j-1}` of the lifted cell.
    pub fn measure(&self) -> f64 {
        self.record.base_side_f64().powi(3) * 0.5f64.powi(self.prefix.colored_count() as i32)
    }
}

/// Colors carried by the interior of the stage-`j` record cell at earlier stages.
fn colored_prefix_stages(cx: &ComplexDescription, rec: &DoublingRecord) -> Vec<u32> {
    let c = rec.center_lattice();
    let flags = cx.classify(&c, rec.stage - 1);
    (1..rec.stage).filter(|&i| flags[i as usize - 1].colored()).collect()
}

/// Every lift of the record, one per color choice at its colored earlier stages.
pub fn lifts_of(cx: &ComplexDescription, rec: &DoublingRecord) -> Vec<CellLift> {
    let stages = colored_prefix_stages(cx, rec);
    (0u64..1 << stages.len())
        .map(|bits| {
            let mut w = ColorWord::wildcard(rec.stage as usize - 1);
            for (i, &s) in stages.iter().enumerate() {
                w.set(s, Some(if (bits >> i) & 1 == 1 { Color::Red } else { Color::Green }));
            }
            CellLift { record: rec.clone(), prefix: w }
        })
        .collect()
}

/// Seeded lifts of doubled stage-`j` cells: uniform base point, rejection of
/// undoubled cells, fair colors at earlier stages.
pub fn sample_cell_lifts(cx: &ComplexDescription, j: u32, count: usize, seed: u64) -> Result<Vec<CellLift>, HarmonicError> {
    if j == 0 || j > cx.level {
        return Err(HarmonicError::Invalid(format!("stage {j} outside 1..={}", cx.level)));
    }
    let mut rng = stream(seed, j as u64);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 1000 * (count + 1) {
            return Err(HarmonicError::Invalid(format!("no doubled cells found at stage {j}")));
        }
        let x = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
        let Some(rec) = cx.record_for_cell(j, cx.cell_index(&x, j - 1)) else { continue };
        let stages = colored_prefix_stages(cx, &rec);
        let mut w = ColorWord::wildcard(j as usize - 1);
        for s in stages {
            w.set(s, Some(random_color(&mut rng)));
        }
        out.push(CellLift { record: rec, prefix: w });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxConfig {
    /// Grid intervals per edge of a cell of `X_j`.
    pub per_cell: u32,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig { per_cell: 4, tol: 1e-8, max_iter: 20_000 }
    }
}

/// Energies per unit measure of the lifted cell, and the cross terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub stage: u32,
    pub cell: [u128; 3],
    pub prefix: String,
    pub per_cell: u32,
    pub energy_g_prev: f64,
    pub energy_h: f64,
    pub energy_g: f64,
    /// `∫ (∇h - ∇g)·∇h / E[h]`.
    pub orthogonality_h: f64,
    /// `∫ ∇g_{j-1}·(∇h - ∇g_{j-1}) / E[h]`.
    pub orthogonality_prev: f64,
    /// `(E[g] - E[h] - E[g - h]) / E[h]`.
    pub identity_gap: f64,
    pub glip: f64,
    pub measure: f64,
}

impl EnergyLedger {
    pub fn max_residual(&self) -> f64 {
        self.orthogonality_h.abs().max(self.orthogonality_prev.abs()).max(self.identity_gap.abs())
    }

    /// `E[g_{j-1}] ≤ E[h_j] ≤ E[g_j] ≤ glip²`, each up to a relative slack.
    pub fn chain_holds(&self, slack: f64) -> bool {
        let le = |a: f64, b: f64| a <= b + slack * b.abs().max(self.energy_h.abs());
        le(self.energy_g_prev, self.energy_h) && le(self.energy_h, self.energy_g) && le(self.energy_g, self.glip * self.glip)
    }
}

pub struct LocalApproximation {
    pub domain: Arc<VoxelDomain>,
    pub g_prev: GridField,
    pub h: GridField,
    pub g: GridField,
    pub ledger: EnergyLedger,
}

fn grid_offset(x: &Rational, origin: &Rational, side: &Rational, n: u32) -> Result<u32, HarmonicError> {
    let t = (x - origin) / side * Rational::from_integer(n as i128);
    if !t.is_integer() {
        return Err(HarmonicError::Invalid("grid does not resolve the gate".into()));
    }
    Ok(*t.numer() as u32)
}

/// Point over `x` in the lift: earlier colors from the lift (green where the
/// lift leaves a colored stage open), `color` at the record stage, green below.
pub fn lift_point(cx: &ComplexDescription, lift: &CellLift, level: u32, x: [f64; 3], color: Option<Color>) -> LabeledPoint {
    let j = lift.record.stage;
    let mut w = cx.resolve_word_with(&x, level, |i| {
        if i < j {
            lift.prefix.at(i).unwrap_or(Color::Green)
        } else {
            Color::Green
        }
    });
    if j <= level {
        w.set(j, color);
    }
    LabeledPoint::new(x, w)
}

fn copy_color(copy: u8) -> Option<Color> {
    match copy {
        GREEN => Some(Color::Green),
        RED => Some(Color::Red),
        _ => None,
    }
}

/// Solve the three approximations of `f` on one lifted doubled cell.
pub fn piecewise_harmonic(
    cx: &ComplexDescription,
    f: &LipschitzFunction,
    lift: &CellLift,
    cfg: &ApproxConfig,
) -> Result<LocalApproximation, HarmonicError> {
    let rec = &lift.record;
    if rec.stage > f.level {
        return Err(HarmonicError::Invalid(format!("record stage {} above function level {}", rec.stage, f.level)));
    }
    if cfg.per_cell == 0 {
        return Err(HarmonicError::Invalid("need at least one grid interval per cell".into()));
    }
    let m = rec.subdivision as u32;
    let q = cfg.per_cell;
    let n = m * q;
    let (origin, _) = rec.base_bounds();
    let side = rec.base_side_f64();
    let k_lo = n / 3;
    let k_hi = 2 * n / 3;
    let g_lo = [0, 1, 2].map(|a| grid_offset(&rec.gate_origin[a], &rec.base_origin[a], &rec.base_side, n));
    let g_lo = [g_lo[0].clone()?, g_lo[1].clone()?, g_lo[2].clone()?];
    let g_hi = g_lo.map(|v| v + q);

    let dom = Arc::new(VoxelDomain::new(DomainDescriptor {
        shape: DomainShape::Doubled { lo: [k_lo; 3], hi: [k_hi; 3] },
        origin,
        side,
        n,
    }));
    let nn = dom.nodes.len();
    let on_skeleton = |i: u32| dom.nodes[i as usize].at.iter().any(|&a| a % q == 0);
    let fixed_h: Vec<bool> = (0..nn as u32).map(|i| dom.on_outer_boundary(i) || dom.on_box_surface(i, g_lo, g_hi)).collect();
    let fixed_g: Vec<bool> = (0..nn as u32).map(on_skeleton).collect();
    let level = f.level;
    let data: Vec<Option<Vec<f64>>> = (0..nn as u32)
        .into_par_iter()
        .map(|i| {
            (fixed_h[i as usize] || fixed_g[i as usize]).then(|| {
                let k = dom.nodes[i as usize];
                f.eval(cx, &lift_point(cx, lift, level, dom.position(i), copy_color(k.copy)))
            })
        })
        .collect();
    let dim = f.dim();
    let lookup = |i: u32| data[i as usize].clone().expect("boundary value evaluated");

    let g = solve_dirichlet(dom.clone(), fixed_g, dim, lookup, cfg.tol, cfg.max_iter)?;
    let h = solve_dirichlet(dom.clone(), fixed_h, dim, lookup, cfg.tol, cfg.max_iter)?;
    let cube = Arc::new(VoxelDomain::cube(origin, side, n));
    let fixed_c: Vec<bool> = (0..cube.nodes.len() as u32).map(|i| cube.on_outer_boundary(i)).collect();
    let g_prev_q = solve_dirichlet(
        cube.clone(),
        fixed_c,
        dim,
        |i| {
            let at = cube.nodes[i as usize].at;
            let d = dom.node(crate::domain::NodeKey { at, copy: SHARED }).expect("outer nodes are shared");
            lookup(d)
        },
        cfg.tol,
        cfg.max_iter,
    )?;
    let g_prev = g_prev_q.pull_back(dom.clone());

    let vol = dom.volume();
    let e_prev = dirichlet_energy(&g_prev);
    let e_h = dirichlet_energy(&h);
    let e_g = dirichlet_energy(&g);
    let h_minus_g = difference(&h, &g);
    let h_minus_prev = difference(&h, &g_prev);
    let norm = e_h.abs().max(f64::MIN_POSITIVE);
    let ledger = EnergyLedger {
        stage: rec.stage,
        cell: rec.cell,
        prefix: lift.prefix.to_string(),
        per_cell: q,
        energy_g_prev: e_prev / vol,
        energy_h: e_h / vol,
        energy_g: e_g / vol,
        orthogonality_h: energy_inner(&h_minus_g, &h) / norm,
        orthogonality_prev: energy_inner(&g_prev, &h_minus_prev) / norm,
        identity_gap: (e_g - e_h - dirichlet_energy(&h_minus_g)) / norm,
        glip: f.lip,
        measure: lift.measure(),
    };
    Ok(LocalApproximation { domain: dom, g_prev, h, g, ledger })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    /// Grid intervals per cell edge, coarse to fine.
    pub ladder: Vec<u32>,
    /// Bound on the residuals at the finest grid.
    pub tolerance: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig { ladder: vec![2, 4, 8], tolerance: 0.05, tol: 1e-8, max_iter: 20_000 }
    }
}

/// Ledgers of `f` on each lift, across the grid ladder (outer index: lift).
pub fn ledger_ladder(
    cx: &ComplexDescription,
    f: &LipschitzFunction,
    lifts: &[CellLift],
    cfg: &LadderConfig,
) -> Result<Vec<Vec<EnergyLedger>>, HarmonicError> {
    if cfg.ladder.is_empty() {
        return Err(HarmonicError::Invalid("empty grid ladder".into()));
    }
    lifts
        .iter()
        .map(|lift| {
            cfg.ladder
                .iter()
                .map(|&q| {
                    piecewise_harmonic(cx, f, lift, &ApproxConfig { per_cell: q, tol: cfg.tol, max_iter: cfg.max_iter })
                        .map(|a| a.ledger)
                })
                .collect()
        })
        .collect()
}

fn ledger_table(ledgers: &[Vec<EnergyLedger>]) -> Table {
    let mut t = Table::new(&[
        "stage",
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
    for row in ledgers.iter().flatten() {
        t.push(vec![
            row.stage.to_string(),
            format!("{}:{}:{}", row.cell[0], row.cell[1], row.cell[2]),
            if row.prefix.is_empty() { "-".into() } else { row.prefix.clone() },
            row.per_cell.to_string(),
            fmt_f64(row.energy_g_prev),
            fmt_f64(row.energy_h),
            fmt_f64(row.energy_g),
            fmt_f64(row.glip * row.glip),
            fmt_f64(row.orthogonality_h),
            fmt_f64(row.orthogonality_prev),
            fmt_f64(row.identity_gap),
        ]);
    }
    t
}

/// Residual sequences shrink under refinement unless already at the floor.
pub fn decreasing_or_floored(seq: &[f64]) -> bool {
    seq.windows(2).all(|w| w[1] <= RESIDUAL_FLOOR || w[1] < w[0])
}

/// Orthogonality residuals of `f` on the given lifts across the ladder.
pub fn check_orthogonality(
    cx: &ComplexDescription,
    f: &LipschitzFunction,
    lifts: &[CellLift],
    cfg: &LadderConfig,
) -> Result<ExperimentReport, HarmonicError> {
    let ledgers = ledger_ladder(cx, f, lifts, cfg)?;
    let j = lifts.first().map(|l| l.record.stage).unwrap_or(0);
    let mut rep = ExperimentReport::new("orthogonality", j, 0);
    rep.param("function", f.spec.label()).param("cells", lifts.len()).param("ladder", format!("{:?}", cfg.ladder));
    let fine: Vec<&EnergyLedger> = ledgers.iter().map(|l| l.last().unwrap()).collect();
    let worst = fine.iter().map(|l| l.max_residual()).fold(0.0, f64::max);
    let decreasing = ledgers.iter().all(|l| decreasing_or_floored(&l.iter().map(EnergyLedger::max_residual).collect::<Vec<_>>()));
    rep.stat("finest_max_residual", worst, Some(cfg.tolerance), worst <= cfg.tolerance)
        .stat("residuals_decrease", decreasing as u8 as f64, Some(1.0), decreasing)
        .info("finest_orthogonality_h", fine.iter().map(|l| l.orthogonality_h.abs()).fold(0.0, f64::max))
        .info("finest_orthogonality_prev", fine.iter().map(|l| l.orthogonality_prev.abs()).fold(0.0, f64::max))
        .info("finest_identity_gap", fine.iter().map(|l| l.identity_gap.abs()).fold(0.0, f64::max));
    rep.rows = ledger_table(&ledgers);
    Ok(rep)
}

/// The energy chain `E[g_{j-1}] ≤ E[h_j] ≤ E[g_j] ≤ glip²` on the given lifts.
pub fn check_telescoping(
    cx: &ComplexDescription,
    f: &LipschitzFunction,
    lifts: &[CellLift],
    cfg: &LadderConfig,
) -> Result<ExperimentReport, HarmonicError> {
    let ledgers = ledger_ladder(cx, f, lifts, cfg)?;
    let j = lifts.first().map(|l| l.record.stage).unwrap_or(0);
    let mut rep = ExperimentReport::new("telescoping", j, 0);
    rep.param("function", f.spec.label()).param("cells", lifts.len()).param("ladder", format!("{:?}", cfg.ladder));
    let fine: Vec<&EnergyLedger> = ledgers.iter().map(|l| l.last().unwrap()).collect();
    let broken = fine.iter().filter(|l| !l.chain_holds(cfg.tolerance)).count();
    let worst_ratio = fine.iter().map(|l| l.energy_g / (l.glip * l.glip)).fold(0.0, f64::max);
    // weighted sum over lifts of E[g_j] - E[g_{j-1}]: the telescoping increment
    let increment: f64 = fine.iter().map(|l| (l.energy_g - l.energy_g_prev) * l.measure).sum();
    let h_gain: f64 = fine.iter().map(|l| (l.energy_h - l.energy_g_prev) * l.measure).sum();
    rep.stat("chain_violations", broken as f64, Some(0.0), broken == 0)
        .info("max_energy_g_over_glip_sq", worst_ratio)
        .info("weighted_increment_g", increment)
        .info("weighted_increment_h", h_gain);
    rep.rows = ledger_table(&ledgers);
    Ok(rep)
}
