//! Pinned thresholds of the acceptance suite (`cargo test -p diamond-verification --test acceptance`).
//!
//! Each criterion has a runtime budget in seconds and its own tolerances.
//! Experiments run with these values regardless of the CLI defaults.

/// Jump between the two copy centers of the n = 26 diamond.
pub const JUMP_N0: u64 = 25;
pub const JUMP_EXPECTED: f64 = 1.0 / 104.0;

pub const AXIOM_TRIPLES: usize = 1000;
pub const AXIOM_DELTA: f64 = 0.02;
pub const AXIOM_LEVEL: u32 = 3;

/// Relative error allowed against the stated annulus energy.
pub const RADIAL_TOLERANCE: f64 = 0.05;
pub const RADIAL_LADDER: [u32; 3] = [24, 48, 96];

/// Largest relative change of the fitted ratio between the two finest grids.
pub const ENERGY_STABILIZATION: f64 = 0.1;

pub const APPROX_FUNCTIONS: usize = 5;
pub const APPROX_LEVELS: [u32; 2] = [1, 2];
pub const RESIDUAL_TOLERANCE: f64 = 0.05;

pub const PATH_CENTERS: usize = 10;
pub const DENSITY_POINTS: usize = 1000;

pub const DOUBLING_TRIALS: usize = 200;
pub const DOUBLING_LEVEL: u32 = 3;
/// Finite bound the largest doubling ratio must stay under.
pub const DOUBLING_BOUND: f64 = 64.0;
/// Level-0 mean ratio must lie within this many standard errors of 8.
pub const LEVEL0_STDERRS: f64 = 4.0;

pub const TANGENT_RATIO: f64 = 0.95;
pub const TANGENT_DIAMETER: f64 = 3.0;

pub const COLLAPSE_FUNCTIONS: usize = 5;
/// Fitted bound on partial sums divided by glip².
pub const COLLAPSE_BOUND: f64 = 1.0;

pub const DECAY_POINTS: usize = 200;
pub const DECAY_RADII: [u32; 4] = [1, 2, 3, 4];
pub const ZERO_REMAINDER: f64 = 1e-9;

/// Runtime budgets in seconds, indexed by criterion number.
pub const BUDGET_SECONDS: [f64; 14] = [0.0, 1.0, 120.0, 60.0, 300.0, 900.0, 1200.0, 300.0, 120.0, 600.0, 300.0, 900.0, 1200.0, 1800.0];
