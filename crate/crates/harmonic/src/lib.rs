//! Harmonic analysis on the diamond complex: a finite-difference Dirichlet
//! solver on voxel domains with doubled regions, Dirichlet energies, the
//! annulus energy bounds, piecewise harmonic approximations of Lipschitz
//! functions and horizontal gradients.

pub mod approx;
pub mod benchmarks;
pub mod domain;
pub mod dump;
pub mod functions;
pub mod gradient;
pub mod solver;

pub use approx::{check_orthogonality, check_telescoping, piecewise_harmonic, CellLift, EnergyLedger};
pub use benchmarks::{check_energy_lower_bound, check_l2_energy_lower_bound, radial_benchmark};
pub use domain::{dirichlet_energy, solve_dirichlet, GridField, VoxelDomain};
pub use functions::{FunctionKind, LipschitzFunction, LipschitzFunctionSpec};
pub use gradient::horizontal_gradient;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum HarmonicError {
    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("boundary data has {got} components, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] diamond_core::Error),
}
