use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{QuantumError, Result, C64};

/// Largest Hilbert-space dimension accepted unless a caller raises the cap.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Relative asymmetry above which an input matrix is rejected rather than
/// symmetrized.
const HERMITIAN_INPUT_TOL: f64 = 1e-8;

/// Eigen-decomposition `M = V diag(lambda) V^dagger`.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<C64>,
}

/// Dense self-adjoint matrix with a lazily computed, cached spectral
/// decomposition.
#[derive(Debug)]
pub struct HermitianOperator {
    matrix: DMatrix<C64>,
    spectral: OnceLock<Spectral>,
}

impl Clone for HermitianOperator {
    fn clone(&self) -> Self {
        let spectral = OnceLock::new();
        if let Some(s) = self.spectral.get() {
            let _ = spectral.set(s.clone());
        }
        Self {
            matrix: self.matrix.clone(),
            spectral,
        }
    }
}

impl HermitianOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        Self::with_cap(matrix, DEFAULT_DIM_CAP)
    }

    /// Ingests `matrix`, replacing it by `(M + M^dagger)/2`.
    pub fn with_cap(matrix: DMatrix<C64>, cap: usize) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(QuantumError::NotSquare { rows, cols });
        }
        if rows > cap {
            return Err(QuantumError::DimensionCap { dim: rows, cap });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QuantumError::NotHermitian {
                deviation: f64::NAN,
            });
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let deviation = max_adjoint_deviation(&matrix);
        if deviation > HERMITIAN_INPUT_TOL * scale {
            return Err(QuantumError::NotHermitian { deviation });
        }
        let adjoint = matrix.adjoint();
        let matrix = (matrix + adjoint).scale(0.5);
        Ok(Self {
            matrix,
            spectral: OnceLock::new(),
        })
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(QuantumError::NotSquare { rows: n, cols: r.len() });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
            spectral: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    /// Spectral data, computed on first use.
    pub fn spectral(&self) -> &Spectral {
        self.spectral.get_or_init(|| {
            let eig = SymmetricEigen::new(self.matrix.clone());
            Spectral {
                eigenvalues: eig.eigenvalues,
                eigenvectors: eig.eigenvectors,
            }
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(QuantumError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
            spectral: OnceLock::new(),
        })
    }

    pub fn adjoint_deviation(&self) -> f64 {
        max_adjoint_deviation(&self.matrix)
    }

    /// `max |V diag(lambda) V^dagger - M| / max(1, max |M|)`.
    pub fn reconstruction_error(&self) -> f64 {
        let s = self.spectral();
        let lam = DMatrix::from_diagonal(&s.eigenvalues.map(|l| C64::new(l, 0.0)));
        let rebuilt = &s.eigenvectors * lam * s.eigenvectors.adjoint();
        let scale = self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        (rebuilt - &self.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Off-diagonal support: `(i, j)` with `i != j` and a nonzero entry.
    pub fn off_diagonal_support(&self) -> Vec<(usize, usize)> {
        let n = self.dim();
        let mut out = Vec::new();
        for j in 0..n {
            for i in 0..n {
                if i != j && self.matrix[(i, j)] != C64::new(0.0, 0.0) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

fn max_adjoint_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrizes_and_reconstructs() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.5, 0.25 + 1e-12),
                C64::new(0.5, -0.25),
                C64::new(-2.0, 1e-13),
            ],
        );
        let h = HermitianOperator::new(m).unwrap();
        assert!(h.adjoint_deviation() <= 1e-12);
        assert!(h.reconstruction_error() <= 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(HermitianOperator::new(m), Err(QuantumError::NotHermitian { .. })));
        let m = DMatrix::<C64>::zeros(2, 3);
        assert!(matches!(HermitianOperator::new(m), Err(QuantumError::NotSquare { .. })));
        let m = DMatrix::<C64>::zeros(5, 5);
        assert!(matches!(
            HermitianOperator::with_cap(m, 4),
            Err(QuantumError::DimensionCap { dim: 5, cap: 4 })
        ));
    }
}
