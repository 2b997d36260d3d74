//! Continuum side: Bohmian and Bohm–Dirac velocity fields, trajectory
//! integration for closed-form wave functions, and the comparison between
//! the lattice jump process and the Bohmian velocity as the lattice shrinks.

mod drift;
mod packet;
mod path;

pub use drift::{continuum_limit_report, lattice_drift, ConvergenceReport, ConvergenceRow};
pub use packet::{GaussianPacket, PlaneWave, Wavefunction1d};
pub use path::{integrate_bohm, integrate_path, push_forward, BohmPath};

use thiserror::Error;

use crate::models::{DiracModel, ModelError};
use crate::numeric::NumericError;
use crate::quantum::{QuantumError, DEFAULT_NODE_EPS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BohmError {
    #[error("node at x = {x}, t = {t} (density {density:e})")]
    Node { x: f64, t: f64, density: f64 },
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = BohmError> = std::result::Result<T, E>;

/// `v = (hbar/m) Im(psi^* d_x psi) / |psi|^2`.
pub fn bohm_velocity<W: Wavefunction1d + ?Sized>(wf: &W, x: f64, t: f64, node_eps: f64) -> Result<f64> {
    let psi = wf.psi(x, t);
    let rho = psi.norm_sqr();
    if !(rho > node_eps) {
        return Err(BohmError::Node { x, t, density: rho });
    }
    Ok(wf.hbar() / wf.mass() * (psi.conj() * wf.dpsi_dx(x, t)).im / rho)
}

/// `v = c psi^* sigma_x psi / psi^* psi`, never faster than `c`.
pub fn bohm_dirac_velocity(model: &DiracModel, x: f64, t: f64, node_eps: f64) -> Result<f64> {
    let p = model.spinor_at(x, t);
    let rho = p[0].norm_sqr() + p[1].norm_sqr();
    if !(rho > node_eps) {
        return Err(BohmError::Node { x, t, density: rho });
    }
    Ok(model.spec().c * 2.0 * (p[0].conj() * p[1]).re / rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Bohm,
    BohmDirac,
}

/// A velocity field on the line.
#[derive(Clone, Copy)]
pub enum VelocityField<'a> {
    Bohm(&'a dyn Wavefunction1d),
    BohmDirac(&'a DiracModel),
}

impl VelocityField<'_> {
    pub fn kind(&self) -> FieldKind {
        match self {
            VelocityField::Bohm(_) => FieldKind::Bohm,
            VelocityField::BohmDirac(_) => FieldKind::BohmDirac,
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        match self {
            VelocityField::Bohm(w) => bohm_velocity(*w, x, t, DEFAULT_NODE_EPS),
            VelocityField::BohmDirac(m) => bohm_dirac_velocity(m, x, t, DEFAULT_NODE_EPS),
        }
    }

    /// `|psi_t(x)|^2`.
    pub fn density(&self, x: f64, t: f64) -> f64 {
        match self {
            VelocityField::Bohm(w) => w.psi(x, t).norm_sqr(),
            VelocityField::BohmDirac(m) => m.density(x, t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_dirac, DiracSpec};
    use crate::quantum::C64;

    #[test]
    fn dirac_velocity_special_cases() {
        let spec = DiracSpec::new(32, 0.25, 0.0, 3.0);
        let up = build_dirac(&spec, |x| [C64::new((-(x - 4.0).powi(2)).exp(), 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert_eq!(bohm_dirac_velocity(&up, 4.0, 0.0, 1e-12).unwrap().abs(), 0.0);
        // Massless positive-energy plane wave e^{ikx}(1,1)/sqrt 2, k > 0: v = +c.
        let k = 2.0 * std::f64::consts::PI * 3.0 / spec.period();
        let mode = build_dirac(&spec, |x| {
            let p = C64::from_polar(1.0, k * x);
            [p, p]
        })
        .unwrap();
        for &(x, t) in &[(0.3, 0.0), (2.0, 1.5), (7.1, 4.0)] {
            assert!((bohm_dirac_velocity(&mode, x, t, 1e-12).unwrap() - 3.0).abs() < 1e-12);
        }
    }
}
