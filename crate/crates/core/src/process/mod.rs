//! Exact sampling of the pure jump process driven by minimal rates.
//!
//! Holding times are drawn by inverting the cumulative hazard
//! `Lambda(t) = int total(x, s) ds` against an `Exp(1)` variate. Rates blow
//! up near nodes, so there is no thinning majorant; instead the hazard is
//! integrated left to right with early exit and the crossing is located by
//! bisection.

mod hazard;
mod output;
mod sampler;

pub use hazard::{cumulative_hazard, sample_holding_time, Hazard, Holding};
pub use output::write_trajectories_csv;
pub use sampler::{
    count_jumps, sample_destination, sample_ensemble, sample_trajectory, trajectory_rng, Start,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::DEFAULT_NODE_EPS;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcessError {
    #[error("configuration {config} is a node at t = {time} (mu = {mu:e})")]
    NodeGuard { config: usize, time: f64, mu: f64 },
    #[error("hazard predicted a jump out of {config} at t = {time} but no rate is positive")]
    InconsistentJump { config: usize, time: f64 },
    #[error("invalid sampler setting `{name}`: {reason}")]
    InvalidConfig { name: &'static str, reason: String },
    #[error("invalid interval [{from}, {to}]")]
    InvalidInterval { from: f64, to: f64 },
    #[error("configuration index {0} out of range")]
    UnknownConfig(usize),
}

pub type Result<T, E = ProcessError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub max_jumps: usize,
    /// Absolute tolerance on the cumulative hazard.
    pub quad_tol: f64,
    /// Tolerance on jump times.
    pub root_tol: f64,
    pub seed: u64,
    pub node_eps: f64,
    /// Hazard level at which a jump is forced (survival `exp(-cap)`).
    pub hazard_cap: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            max_jumps: 1_000_000,
            quad_tol: 1e-9,
            root_tol: 1e-10,
            seed: 0,
            node_eps: DEFAULT_NODE_EPS,
            hazard_cap: 50.0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ProcessError::InvalidConfig {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                })
            }
        };
        positive("quad_tol", self.quad_tol)?;
        positive("root_tol", self.root_tol)?;
        positive("node_eps", self.node_eps)?;
        positive("hazard_cap", self.hazard_cap)?;
        if self.max_jumps == 0 {
            return Err(ProcessError::InvalidConfig {
                name: "max_jumps",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    /// Still being sampled.
    Alive,
    /// Reached the horizon.
    Horizon,
    /// Hit the jump cap; the path is in the cemetery from `end_time` on.
    Cemetery,
    /// Stopped on a numerically detected node; see the diagnostic.
    NodeGuard,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Alive => "ALIVE",
            Status::Horizon => "HORIZON",
            Status::Cemetery => "CEMETERY",
            Status::NodeGuard => "NODE_GUARD",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord {
    pub time: f64,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x0: usize,
    pub t0: f64,
    pub horizon: f64,
    pub jumps: Vec<JumpRecord>,
    pub status: Status,
    /// Time from which the path is undefined (cemetery or node guard);
    /// equals `horizon` otherwise.
    pub end_time: f64,
    pub diagnostic: Option<String>,
}

impl Trajectory {
    pub fn new(x0: usize, t0: f64, horizon: f64) -> Self {
        Self {
            x0,
            t0,
            horizon,
            jumps: Vec::new(),
            status: Status::Alive,
            end_time: horizon,
            diagnostic: None,
        }
    }

    /// Configuration at `t` with right-continuous paths, `None` once the
    /// path has stopped (cemetery or node guard) or outside `[t0, horizon]`.
    pub fn position_at(&self, t: f64) -> Option<usize> {
        if t < self.t0 || t > self.horizon {
            return None;
        }
        if matches!(self.status, Status::Cemetery | Status::NodeGuard) && t >= self.end_time {
            return None;
        }
        let k = self.jumps.partition_point(|j| j.time <= t);
        Some(if k == 0 { self.x0 } else { self.jumps[k - 1].to })
    }

    /// Configuration after the last jump.
    pub fn final_position(&self) -> usize {
        self.jumps.last().map_or(self.x0, |j| j.to)
    }
}
