//! Finite-depth model of the diamond-doubling inverse-limit space.
//!
//! The combinatorial layer ([`schedule`], [`complex`]) is exact: cube corners,
//! sides and jump costs are rationals and point classification uses integer
//! arithmetic on the binary expansion of `f64` coordinates. The analytic layer
//! ([`metric`], [`measure`], [`paths`]) works in floating point on top of it.

pub mod color;
pub mod complex;
pub mod exact;
pub mod measure;
pub mod metric;
pub mod paths;
pub mod report;
pub mod rng;
pub mod schedule;
pub mod verify;

pub use color::{Color, ColorWord, LabeledPoint};
pub use complex::{build_complex, ComplexDescription, DoublingRecord};
pub use metric::{discrete_log, distance, DistanceResult};
pub use report::ExperimentReport;
pub use schedule::{build_schedule, LevelSchedule, Rational, ScheduleParams};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("resolution cap exceeded at stage {stage}: side {side:e} below minimum {min_side:e}")]
    ResolutionCap { stage: u32, side: f64, min_side: f64 },
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),
    #[error("scale {0:e} is below the resolution of the built schedule")]
    BelowResolution(f64),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("inconsistent registry: {0}")]
    Registry(String),
}
