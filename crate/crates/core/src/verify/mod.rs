//! Verification harness: ensemble statistics against the quantum measure,
//! the jump-count identity and its bound, `rho <= mu`, node avoidance,
//! structural identities of the rates, and path functionals for Bohmian
//! and Bohm–Dirac trajectories.
//!
//! Monte Carlo gates are 3 standard errors plus a small numerical floor for
//! quantities that are deterministic in exact arithmetic.

mod checks;
mod dirac;
mod functionals;
mod structural;

pub use checks::{
    equivariance_test, expected_jumps_check, node_avoidance_check, rho_leq_mu_check,
    survival_check, survival_curve, tv_scaling, RhoLeqMu, TvPoint, TvScaling,
};
pub use dirac::{dirac_l_bound, dirac_l_ensemble, sample_density, DiracLReport, LBound};
pub use functionals::{bohm_equivariance, distance_functional, log_variation, PathRef};
pub use structural::{
    additivity_check, minimality_comparison, structural_identities, MinimalityComparison,
    StructuralReport,
};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::bohmian::BohmError;
use crate::models::ModelError;
use crate::numeric::NumericError;
use crate::process::{ProcessError, Status, Trajectory};
use crate::quantum::QuantumError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] NumericError),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Bohm(#[from] BohmError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T, E = VerifyError> = std::result::Result<T, E>;

/// Empirical value against its theoretical counterpart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub empirical: f64,
    pub theoretical: f64,
    /// `theoretical - empirical`.
    pub slack: f64,
    pub stderr: f64,
    /// Allowed excess: `3 stderr` plus the numerical floor.
    pub tolerance: f64,
    pub passed: bool,
}

impl BoundReport {
    /// `empirical <= theoretical + tolerance`.
    pub fn upper(empirical: f64, theoretical: f64, stderr: f64, floor: f64) -> Self {
        let tolerance = 3.0 * stderr + floor;
        Self {
            empirical,
            theoretical,
            slack: theoretical - empirical,
            stderr,
            tolerance,
            passed: empirical.is_finite() && theoretical.is_finite() && empirical <= theoretical + tolerance,
        }
    }

    /// `|empirical - theoretical| <= tolerance`.
    pub fn equal(empirical: f64, theoretical: f64, stderr: f64, floor: f64) -> Self {
        let tolerance = 3.0 * stderr + floor;
        Self {
            empirical,
            theoretical,
            slack: theoretical - empirical,
            stderr,
            tolerance,
            passed: (empirical - theoretical).abs() <= tolerance,
        }
    }
}

/// One entry of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub empirical: f64,
    pub theoretical: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub seed: Option<u64>,
    /// Extra named quantities (per-checkpoint values, worst cases, ...).
    pub details: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, passed: bool, empirical: f64, theoretical: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed,
            empirical,
            theoretical,
            tolerance,
            samples: 0,
            seed: None,
            details: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_samples(mut self, samples: usize, seed: Option<u64>) -> Self {
        self.samples = samples;
        self.seed = seed;
        self
    }

    pub fn detail(mut self, key: impl Into<String>, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// Empirical distributions of an ensemble at checkpoint times.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub m: usize,
    pub times: Vec<f64>,
    /// `rho_hat[k][q]`: fraction of paths in `q` at `times[k]`.
    pub rho_hat: Vec<Vec<f64>>,
    /// Fraction in the cemetery at each checkpoint.
    pub cemetery: Vec<f64>,
    /// Fraction stopped by the node guard at each checkpoint.
    pub guarded: Vec<f64>,
    /// Jumps per path over its whole window.
    pub jump_counts: Vec<usize>,
    pub statuses: BTreeMap<Status, usize>,
}

impl EnsembleStats {
    pub fn new(trajectories: &[Trajectory], times: &[f64], dim: usize) -> Self {
        let m = trajectories.len();
        let w = 1.0 / m.max(1) as f64;
        let mut rho_hat = vec![vec![0.0; dim]; times.len()];
        let mut cemetery = vec![0.0; times.len()];
        let mut guarded = vec![0.0; times.len()];
        let mut counts = vec![vec![0usize; dim]; times.len()];
        let mut lost = vec![[0usize; 2]; times.len()];
        let mut statuses = BTreeMap::new();
        for tr in trajectories {
            *statuses.entry(tr.status).or_insert(0) += 1;
            for (k, &t) in times.iter().enumerate() {
                match tr.position_at(t) {
                    Some(q) => counts[k][q] += 1,
                    None if tr.status == Status::Cemetery => lost[k][0] += 1,
                    None => lost[k][1] += 1,
                }
            }
        }
        for k in 0..times.len() {
            for q in 0..dim {
                rho_hat[k][q] = counts[k][q] as f64 * w;
            }
            cemetery[k] = lost[k][0] as f64 * w;
            guarded[k] = lost[k][1] as f64 * w;
        }
        Self {
            m,
            times: times.to_vec(),
            rho_hat,
            cemetery,
            guarded,
            jump_counts: trajectories.iter().map(|t| t.jumps.len()).collect(),
            statuses,
        }
    }

    pub fn status_count(&self, s: Status) -> usize {
        self.statuses.get(&s).copied().unwrap_or(0)
    }
}

/// Binomial standard error for comparing a fraction `p_hat` over `m` draws
/// with a probability `p`, using the pooled estimate `(p_hat + p) / 2`
/// so that neither an empty nor a full cell has zero spread.
pub fn pooled_binomial_se(p_hat: f64, p: f64, m: usize) -> f64 {
    let pbar = (0.5 * (p_hat + p)).clamp(0.0, 1.0);
    (pbar * (1.0 - pbar) / m.max(1) as f64).sqrt()
}
