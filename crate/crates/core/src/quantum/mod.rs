//! Finite-dimensional quantum kinematics: state evolution, the equivariant
//! configuration measure, the probability current and the minimal jump rates
//! derived from it.

mod kinematics;
mod operator;
mod povm;
mod space;
mod state;
mod system;

pub use kinematics::{
    current, evolve, master_equation_rhs, measure, measure_derivative, minimal_rates,
    transition_amplitudes, CurrentMatrix, MeasureDerivative, RateKernel,
};
pub use operator::{HermitianOperator, Spectral, DEFAULT_DIM_CAP};
pub use povm::Povm;
pub use space::ConfigSpace;
pub use state::{StateVector, NORM_TOL};
pub use system::{Evaluator, QuantumSystem};

use thiserror::Error;

pub type C64 = num_complex::Complex64;

/// Default threshold below which a configuration counts as a node.
pub const DEFAULT_NODE_EPS: f64 = 1e-12;

/// Roundoff allowance for negative values of `<psi, P(q) psi>`.
pub const MEASURE_CLAMP: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix deviates from its adjoint by {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("Hilbert-space dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("state vector contains non-finite amplitudes")]
    NonFinite,
    #[error("state vector cannot be normalized (norm {norm:e})")]
    NotNormalizable { norm: f64 },
    #[error("state vector norm {norm} is not 1")]
    NotNormalized { norm: f64 },
    #[error("hbar must be positive and finite, got {0}")]
    InvalidHbar(f64),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("measure of configuration {config} is {value:e}; the POVM element is not positive")]
    NegativeMeasure { config: usize, value: f64 },
    #[error("configuration space must contain at least one configuration")]
    EmptySpace,
    #[error("duplicate configuration label `{0}`")]
    DuplicateLabel(String),
    #[error("node threshold must be positive, got {0}")]
    InvalidNodeEps(f64),
}

pub type Result<T, E = QuantumError> = std::result::Result<T, E>;
