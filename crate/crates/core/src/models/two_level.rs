use nalgebra::DMatrix;

use super::{invalid, ConfigMetric, JumpModel, Result};
use crate::quantum::{ConfigSpace, HermitianOperator, Povm, StateVector, C64};

/// Two configurations `1`, `2`, `H = omega * sigma_x`, state `(1, 0)`.
///
/// With `hbar = 1` the state is `(cos wt, -i sin wt)`, configuration `1`
/// becomes a node at `t = pi / (2 omega)`, and the only allowed jump on
/// `(0, pi / (2 omega))` is `1 -> 2`.
pub fn build_two_level(omega: f64, hbar: f64) -> Result<JumpModel> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(invalid("omega", format!("must be positive, got {omega}")));
    }
    let zero = C64::new(0.0, 0.0);
    let w = C64::new(omega, 0.0);
    let h = HermitianOperator::new(DMatrix::from_row_slice(2, 2, &[zero, w, w, zero]))?;
    Ok(JumpModel {
        space: ConfigSpace::numbered(2)?,
        hamiltonian: h,
        povm: Povm::identity_partition(2),
        psi0: StateVector::basis(2, 0, hbar)?,
        metric: ConfigMetric::Discrete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_forms() {
        let m = build_two_level(1.0, 1.0).unwrap();
        let sys = m.system().unwrap();
        for &t in &[0.1, 0.5, 1.0, 1.4] {
            let mu = sys.measure_at(t);
            assert_abs_diff_eq!(mu[0], t.cos().powi(2), epsilon = 1e-12);
            assert_abs_diff_eq!(mu[1], t.sin().powi(2), epsilon = 1e-12);
            let k = sys.rates_at(t, 1e-12).unwrap();
            assert_abs_diff_eq!(k.sigma[(1, 0)], 2.0 * t.tan(), epsilon = 1e-9);
        }
        let k = sys.rates_at(1e-9, 1e-12).unwrap();
        assert!(k.total[0] < 1e-8);
        assert!(build_two_level(0.0, 1.0).is_err());
    }
}
