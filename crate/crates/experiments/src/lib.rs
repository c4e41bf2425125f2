//! End-to-end verification drivers. Each experiment turns a [`RunConfig`]
//! into one [`ExperimentReport`] whose pass flag is the conjunction of its
//! statistics.

pub mod collapse;
pub mod config;
pub mod decay;
pub mod energy;
pub mod gates;
pub mod metric;
pub mod tangent;

use diamond_core::{build_complex, build_schedule, ComplexDescription, ExperimentReport, ScheduleParams};
use diamond_harmonic::HarmonicError;

pub use config::RunConfig;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ExperimentError {
    /// Bad names or parameters.
    #[error("usage: {0}")]
    Usage(String),
    /// Resolution or evaluation budget exhausted.
    #[error("resource guard: {0}")]
    Resource(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl From<diamond_core::Error> for ExperimentError {
    fn from(e: diamond_core::Error) -> Self {
        use diamond_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::LevelMismatch(..) => ExperimentError::Usage(e.to_string()),
            E::ResolutionCap { .. } | E::BelowResolution(_) | E::Budget(_) => ExperimentError::Resource(e.to_string()),
            E::Registry(_) => ExperimentError::Numerical(e.to_string()),
        }
    }
}

impl From<HarmonicError> for ExperimentError {
    fn from(e: HarmonicError) -> Self {
        match e {
            HarmonicError::Invalid(_) | HarmonicError::Dimension { .. } => ExperimentError::Usage(e.to_string()),
            HarmonicError::Core(c) => c.into(),
            _ => ExperimentError::Numerical(e.to_string()),
        }
    }
}

/// Experiment names accepted by [`run_experiment`].
pub const EXPERIMENTS: &[&str] = &[
    "doubling",
    "ball-shape",
    "metric-axioms",
    "paths",
    "radial-energy",
    "energy-bound",
    "energy-bound-l2",
    "orthogonality",
    "telescoping",
    "collapse",
    "collapse-l2",
    "diff-decay",
    "tangent",
    "gate-frequency",
];

pub fn schedule_params(n0: u64, levels: u32, toy: bool, subdivision: Option<u64>) -> ScheduleParams {
    let p = if toy { ScheduleParams::toy(n0, levels) } else { ScheduleParams::full(n0, levels) };
    match subdivision {
        Some(m) => p.with_subdivision(m),
        None => p,
    }
}

/// Complex of the configured schedule, built to `levels`.
pub fn build(n0: u64, levels: u32, toy: bool, subdivision: Option<u64>) -> Result<ComplexDescription, ExperimentError> {
    let s = build_schedule(schedule_params(n0, levels, toy, subdivision))?;
    Ok(build_complex(&s, levels)?)
}

pub fn main_complex(cfg: &RunConfig) -> Result<ComplexDescription, ExperimentError> {
    build(cfg.n0, cfg.levels, cfg.toy, cfg.subdivision)
}

fn finish(name: &str, cfg: &RunConfig, mut rep: ExperimentReport) -> ExperimentReport {
    rep.seed = cfg.seed;
    rep.run_id = name.to_string();
    rep
}

/// Every experiment in [`EXPERIMENTS`] order; orthogonality and telescoping
/// share one set of solves.
pub fn run_all(cfg: &RunConfig) -> Vec<(&'static str, Result<ExperimentReport, ExperimentError>)> {
    let mut gate: Option<Result<(ExperimentReport, ExperimentReport), ExperimentError>> = None;
    EXPERIMENTS
        .iter()
        .map(|&name| {
            let res = match name {
                "orthogonality" | "telescoping" => {
                    let pair = gate.get_or_insert_with(|| energy::gate_energies(cfg));
                    match pair {
                        Ok((o, t)) => Ok(finish(name, cfg, if name == "orthogonality" { o.clone() } else { t.clone() })),
                        Err(e) => Err(e.clone()),
                    }
                }
                _ => run_experiment(name, cfg),
            };
            log::info!("{name}: {}", match &res { Ok(r) if r.pass => "pass", Ok(_) => "fail", Err(_) => "error" });
            (name, res)
        })
        .collect()
}

pub fn run_experiment(name: &str, cfg: &RunConfig) -> Result<ExperimentReport, ExperimentError> {
    let rep = match name {
        "doubling" => metric::doubling(cfg),
        "ball-shape" => metric::ball_shape(cfg),
        "metric-axioms" => metric::metric_axioms(cfg),
        "paths" => metric::paths(cfg),
        "radial-energy" => energy::radial(cfg),
        "energy-bound" => energy::lower_bound(cfg, false),
        "energy-bound-l2" => energy::lower_bound(cfg, true),
        "orthogonality" => energy::gate_energies(cfg).map(|(o, _)| o),
        "telescoping" => energy::gate_energies(cfg).map(|(_, t)| t),
        "collapse" => collapse::collapse(cfg, collapse::Mode::Real),
        "collapse-l2" => collapse::collapse(cfg, collapse::Mode::L2),
        "diff-decay" => decay::diff_decay(cfg),
        "tangent" => tangent::tangent(cfg),
        "gate-frequency" => gates::gate_frequency(cfg),
        other => Err(ExperimentError::Usage(format!("unknown experiment `{other}`; known: {}", EXPERIMENTS.join(", ")))),
    }?;
    Ok(finish(name, cfg, rep))
}
