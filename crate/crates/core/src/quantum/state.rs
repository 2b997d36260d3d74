use nalgebra::DVector;

use super::{QuantumError, Result, C64};

/// Tolerance on `| ||psi|| - 1 |` for states accepted or produced by evolution.
pub const NORM_TOL: f64 = 1e-10;

/// Normalized state vector together with its unit of action.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
    hbar: f64,
}

impl StateVector {
    /// Accepts `amps` as-is; the norm must already be 1 within [`NORM_TOL`].
    pub fn new(amps: DVector<C64>, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QuantumError::NonFinite);
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QuantumError::NotNormalized { norm });
        }
        Ok(Self { amps, hbar })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(amps: DVector<C64>, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QuantumError::NonFinite);
        }
        let norm = amps.norm();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(QuantumError::NotNormalizable { norm });
        }
        Ok(Self {
            amps: amps.unscale(norm),
            hbar,
        })
    }

    pub fn from_vec(amps: Vec<C64>, hbar: f64) -> Result<Self> {
        Self::normalized(DVector::from_vec(amps), hbar)
    }

    /// Basis vector `e_i` of a `dim`-dimensional space.
    pub fn basis(dim: usize, i: usize, hbar: f64) -> Result<Self> {
        if i >= dim {
            return Err(QuantumError::DimensionMismatch {
                expected: dim,
                found: i + 1,
            });
        }
        let mut amps = DVector::zeros(dim);
        amps[i] = C64::new(1.0, 0.0);
        Self::new(amps, hbar)
    }

    /// Wraps evolved amplitudes without renormalizing.
    pub(crate) fn from_evolved(amps: DVector<C64>, hbar: f64) -> Self {
        Self { amps, hbar }
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        Err(QuantumError::InvalidHbar(hbar))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        let v = DVector::from_vec(vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0)]);
        let s = StateVector::normalized(v.clone(), 1.0).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!(matches!(
            StateVector::new(v, 1.0),
            Err(QuantumError::NotNormalized { .. })
        ));
        assert!(matches!(
            StateVector::normalized(DVector::zeros(3), 1.0),
            Err(QuantumError::NotNormalizable { .. })
        ));
        assert!(matches!(
            StateVector::basis(2, 0, -1.0),
            Err(QuantumError::InvalidHbar(_))
        ));
        let nan = DVector::from_vec(vec![C64::new(f64::NAN, 0.0)]);
        assert_eq!(StateVector::normalized(nan, 1.0), Err(QuantumError::NonFinite));
    }
}
