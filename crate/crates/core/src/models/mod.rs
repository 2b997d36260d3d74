//! Builders for concrete systems: the two-level fixture, a 1D lattice
//! particle, a lattice Fock space with creation and annihilation near fixed
//! sources, and a periodic 1+1D Dirac grid.

mod dirac;
mod fock;
mod lattice;
mod two_level;

pub use dirac::{build_dirac, DiracModel, DiracSpec, Spinor};
pub use fock::{build_fock, fock_dimension, FockBasis, FockInitial, FockModel, FockSpec};
pub use lattice::{build_lattice_particle, LatticeModel, LatticeSpec, Potential};
pub use two_level::build_two_level;

use thiserror::Error;

use crate::quantum::{ConfigSpace, HermitianOperator, Povm, QuantumError, QuantumSystem, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("initial profile is not normalizable")]
    NonNormalizable,
    #[error("configuration space dimension {dim} exceeds the cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Distance between configurations used for path-length functionals.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigMetric {
    /// Every jump has unit length.
    Discrete,
    /// Configurations are points on a line.
    Positions(Vec<f64>),
    /// L1 distance between occupation-number vectors.
    Occupations(Vec<Vec<u32>>),
}

impl ConfigMetric {
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        match self {
            ConfigMetric::Discrete => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
            ConfigMetric::Positions(p) => (p[a] - p[b]).abs(),
            ConfigMetric::Occupations(occ) => occ[a]
                .iter()
                .zip(&occ[b])
                .map(|(x, y)| x.abs_diff(*y) as f64)
                .sum(),
        }
    }
}

/// The pieces of a jump-process model before they are frozen into a
/// [`QuantumSystem`].
#[derive(Debug, Clone)]
pub struct JumpModel {
    pub space: ConfigSpace,
    pub hamiltonian: HermitianOperator,
    pub povm: Povm,
    pub psi0: StateVector,
    pub metric: ConfigMetric,
}

impl JumpModel {
    pub fn system(&self) -> Result<QuantumSystem> {
        Ok(QuantumSystem::new(
            self.space.clone(),
            self.hamiltonian.clone(),
            self.povm.clone(),
            self.psi0.clone(),
        )?)
    }
}
