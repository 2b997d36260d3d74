use rayon::prelude::*;

use super::{BohmError, Result, VelocityField, Wavefunction1d};
use crate::numeric::{dormand_prince, hermite, OdeFailure, OdeOptions, OdeSample};

/// A trajectory of a velocity field with dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct BohmPath {
    /// Accepted steps in integration order (time may decrease).
    pub samples: Vec<OdeSample>,
}

impl BohmPath {
    pub fn start(&self) -> OdeSample {
        self.samples[0]
    }

    pub fn end(&self) -> OdeSample {
        *self.samples.last().expect("paths are never empty")
    }

    /// Position at `t`, by cubic Hermite interpolation between steps.
    pub fn position_at(&self, t: f64) -> Option<f64> {
        let (a, b) = (self.start().t, self.end().t);
        if t < a.min(b) || t > a.max(b) {
            return None;
        }
        let forward = b >= a;
        let k = self
            .samples
            .partition_point(|s| if forward { s.t < t } else { s.t > t });
        if k == 0 {
            return Some(self.samples[0].x);
        }
        Some(hermite(&self.samples[k - 1], &self.samples[k.min(self.samples.len() - 1)], t))
    }

    /// Points `(t, x)` with `per_step` interpolated points inside each step.
    pub fn dense(&self, per_step: usize) -> Vec<(f64, f64)> {
        let mut out = vec![(self.samples[0].t, self.samples[0].x)];
        for w in self.samples.windows(2) {
            for j in 1..=per_step {
                let t = w[0].t + (w[1].t - w[0].t) * j as f64 / per_step as f64;
                out.push((t, hermite(&w[0], &w[1], t)));
            }
        }
        out
    }

    /// Length of the path between its endpoints, `int |v| dt`.
    pub fn arc_length(&self) -> f64 {
        self.dense(16).windows(2).map(|w| (w[1].1 - w[0].1).abs()).sum()
    }
}

/// Integrates `dx/dt = v(x, t)` from `(t0, x_start)` to `t1`.
pub fn integrate_path(field: VelocityField<'_>, x_start: f64, t0: f64, t1: f64, tol: f64) -> Result<BohmPath> {
    if !(tol > 0.0) || !x_start.is_finite() || !t0.is_finite() || !t1.is_finite() {
        return Err(BohmError::InvalidInput(format!(
            "need finite start/times and tol > 0, got x = {x_start}, [{t0}, {t1}], tol = {tol}"
        )));
    }
    let opts = OdeOptions {
        rtol: tol,
        atol: tol,
        max_steps: 1_000_000,
    };
    match dormand_prince(|t, x| field.eval(x, t), t0, x_start, t1, opts) {
        Ok(samples) => Ok(BohmPath { samples }),
        Err(OdeFailure::Field(e)) => Err(e),
        Err(OdeFailure::Stepper(e)) => Err(e.into()),
    }
}

/// Bohmian trajectory of a closed-form wave function.
pub fn integrate_bohm<W: Wavefunction1d>(wf: &W, x_start: f64, t0: f64, t1: f64, tol: f64) -> Result<BohmPath> {
    integrate_path(VelocityField::Bohm(wf), x_start, t0, t1, tol)
}

/// Endpoints at `t1` of the paths started at each of `starts` at `t0`.
pub fn push_forward(field: VelocityField<'_>, starts: &[f64], t0: f64, t1: f64, tol: f64) -> Result<Vec<f64>> {
    starts
        .par_iter()
        .map(|&x| integrate_path(field, x, t0, t1, tol).map(|p| p.end().x))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohmian::GaussianPacket;

    #[test]
    fn free_gaussian_scaling_law() {
        let p = GaussianPacket::new(0.0, 0.5, 0.0, 1.0);
        let path = integrate_bohm(&p, 1.0, 0.0, 1.0, 1e-11).unwrap();
        assert!((path.end().x - 5f64.sqrt()).abs() < 1e-8);
        assert!((path.arc_length() - (5f64.sqrt() - 1.0)).abs() < 1e-8);
        for i in 0..=20 {
            let t = i as f64 * 0.05;
            assert!((path.position_at(t).unwrap() - (1.0 + 4.0 * t * t).sqrt()).abs() < 1e-7);
        }
        let still = integrate_bohm(&p, 0.0, 0.0, 2.0, 1e-10).unwrap();
        assert_eq!(still.end().x, 0.0);
    }

    #[test]
    fn reversal_returns_to_start() {
        let p = GaussianPacket::new(0.2, 0.6, 0.9, 1.5);
        let fwd = integrate_bohm(&p, -0.4, 0.0, 1.7, 1e-12).unwrap();
        let back = integrate_bohm(&p, fwd.end().x, 1.7, 0.0, 1e-12).unwrap();
        assert!((back.end().x + 0.4).abs() < 1e-8);
        assert!(back.position_at(1.0).is_some());
    }
}
