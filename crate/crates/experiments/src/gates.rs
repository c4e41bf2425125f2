//! Frequency of the events "some stage of block k puts the point in a gate".
//!
//! A μ-random point picks its stage-j subcell uniformly among the `m³`
//! subcells of its stage-(j-1) cell, independently across stages, so the
//! events are sampled from subcell digits without building the complex.

use diamond_core::complex::GateTracker;
use diamond_core::report::{fmt_f64, Table};
use diamond_core::rng::stream;
use diamond_core::ExperimentReport;
use rand::Rng as _;
use rayon::prelude::*;

use crate::{schedule_params, ExperimentError, RunConfig};

/// `1 - (1 - 1/m³)^(n³)`.
pub fn exact_frequency(n: u64, m: u64) -> f64 {
    1.0 - (1.0 - 1.0 / (m * m * m) as f64).powf((n * n * n) as f64)
}

/// Per-trial hit flags, one per block.
pub fn sample_events(blocks: &[(u64, u64)], trials: usize, seed: u64) -> Vec<Vec<bool>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t as u64);
            blocks
                .iter()
                .map(|&(n, m)| {
                    let cells = m * m * m;
                    let mut tr = GateTracker::default();
                    let mut hit = false;
                    for s in 0..n * n * n {
                        let central = rng.gen_range(0..cells) == cells / 2;
                        let (_, in_gate) = tr.step(s == 0, central);
                        hit |= in_gate;
                    }
                    hit
                })
                .collect()
        })
        .collect()
}

fn correlation(a: &[bool], b: &[bool]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().filter(|&&x| x).count() as f64 / n, b.iter().filter(|&&x| x).count() as f64 / n);
    let cov = a.iter().zip(b).map(|(&x, &y)| (x as u8 as f64 - ma) * (y as u8 as f64 - mb)).sum::<f64>() / n;
    let sd = (ma * (1.0 - ma) * mb * (1.0 - mb)).sqrt();
    if sd > 0.0 {
        cov / sd
    } else {
        0.0
    }
}

pub fn gate_frequency(cfg: &RunConfig) -> Result<ExperimentReport, ExperimentError> {
    if cfg.gate_trials == 0 || cfg.blocks == 0 {
        return Err(ExperimentError::Usage("gate-frequency needs trials and blocks".into()));
    }
    let params = schedule_params(cfg.n0, 1, cfg.toy, cfg.subdivision);
    let blocks: Vec<(u64, u64)> = (1..=cfg.blocks)
        .map(|k| {
            let n = params.block_n(k);
            (n, params.subdivision_for(n))
        })
        .collect();
    let events = sample_events(&blocks, cfg.gate_trials, cfg.seed);
    let t = cfg.gate_trials as f64;
    let mut rep = ExperimentReport::new("gate-frequency", 0, cfg.seed);
    rep.param("trials", cfg.gate_trials).param("blocks", cfg.blocks).param("toy", cfg.toy).param("n0", cfg.n0);
    let mut table = Table::new(&["block", "n", "subdivision", "stages", "hits", "frequency", "exact", "z"]);
    let mut max_z: f64 = 0.0;
    let mut min_freq = f64::INFINITY;
    let columns: Vec<Vec<bool>> = (0..blocks.len()).map(|k| events.iter().map(|e| e[k]).collect()).collect();
    for (k, &(n, m)) in blocks.iter().enumerate() {
        let hits = columns[k].iter().filter(|&&x| x).count();
        let freq = hits as f64 / t;
        let exact = exact_frequency(n, m);
        let se = (exact * (1.0 - exact) / t).sqrt();
        let z = if se > 0.0 { (freq - exact).abs() / se } else { 0.0 };
        max_z = max_z.max(z);
        min_freq = min_freq.min(freq);
        table.push(vec![(k + 1).to_string(), n.to_string(), m.to_string(), (n * n * n).to_string(), hits.to_string(), fmt_f64(freq), fmt_f64(exact), fmt_f64(z)]);
    }
    let max_corr = columns.windows(2).map(|w| correlation(&w[0], &w[1]).abs()).fold(0.0, f64::max);
    // four standard errors of a null correlation estimate
    let corr_tol = 4.0 / t.sqrt();
    rep.stat("min_block_frequency", min_freq, Some(0.0), min_freq > 0.0)
        .stat("max_z_vs_exact", max_z, Some(4.0), max_z <= 4.0)
        .stat("max_adjacent_correlation", max_corr, Some(corr_tol), max_corr <= corr_tol);
    rep.rows = table;
    Ok(rep)
}
