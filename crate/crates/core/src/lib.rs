//! Simulation and verification of Markov jump processes whose time-dependent
//! rates are the minimal rates induced by a Schrödinger evolution.
//!
//! * [`quantum`]: state evolution, configuration measure, current and rates.
//! * [`models`]: two-level fixture, lattice particle, lattice Fock model with
//!   sources, and a periodic 1+1D Dirac grid.
//! * [`process`]: exact sampling of the time-inhomogeneous jump process.
//! * [`bohmian`]: continuum velocity fields, trajectory integration and the
//!   lattice-to-continuum drift comparison.
//! * [`verify`]: ensemble diagnostics (equivariance, jump-count identities,
//!   node avoidance, additivity, path functionals).

pub mod numeric;
pub mod process;
pub mod bohmian;
pub mod models;
pub mod quantum;
pub mod verify;
