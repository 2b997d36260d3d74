use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{QuantumError, Result, C64};

const POVM_SUM_TOL: f64 = 1e-10;
const POVM_PSD_TOL: f64 = 1e-12;

/// Positive-operator-valued measure over an enumerated configuration space.
///
/// `Partition` assigns each configuration a disjoint set of basis indices
/// (a projection-valued measure diagonal in the computational basis);
/// `General` stores explicit positive matrices.
#[derive(Debug, Clone, PartialEq)]
pub enum Povm {
    Partition {
        blocks: Vec<Vec<usize>>,
        owner: Vec<usize>,
    },
    General {
        elements: Vec<DMatrix<C64>>,
    },
}

impl Povm {
    /// Partition of `0..hilbert_dim` into the given index blocks.
    pub fn partition(blocks: Vec<Vec<usize>>, hilbert_dim: usize) -> Result<Self> {
        if blocks.is_empty() {
            return Err(QuantumError::EmptySpace);
        }
        let mut owner = vec![usize::MAX; hilbert_dim];
        for (q, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(QuantumError::InvalidPovm(format!(
                    "configuration {q} owns no basis index"
                )));
            }
            for &i in block {
                if i >= hilbert_dim {
                    return Err(QuantumError::InvalidPovm(format!(
                        "basis index {i} out of range for dimension {hilbert_dim}"
                    )));
                }
                if owner[i] != usize::MAX {
                    return Err(QuantumError::InvalidPovm(format!(
                        "basis index {i} owned by configurations {} and {q}",
                        owner[i]
                    )));
                }
                owner[i] = q;
            }
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(QuantumError::InvalidPovm(format!(
                "basis index {i} is not owned by any configuration"
            )));
        }
        Ok(Povm::Partition { blocks, owner })
    }

    /// One configuration per basis vector.
    pub fn identity_partition(dim: usize) -> Self {
        Povm::Partition {
            blocks: (0..dim).map(|i| vec![i]).collect(),
            owner: (0..dim).collect(),
        }
    }

    /// Explicit positive elements; they must sum to the identity.
    pub fn general(elements: Vec<DMatrix<C64>>) -> Result<Self> {
        let first = elements.first().ok_or(QuantumError::EmptySpace)?;
        let n = first.nrows();
        let mut sum = DMatrix::<C64>::zeros(n, n);
        for (q, e) in elements.iter().enumerate() {
            if e.shape() != (n, n) {
                return Err(QuantumError::DimensionMismatch {
                    expected: n,
                    found: e.nrows().max(e.ncols()),
                });
            }
            let herm_dev = (e - e.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if herm_dev > POVM_SUM_TOL {
                return Err(QuantumError::InvalidPovm(format!(
                    "element {q} is not self-adjoint (deviation {herm_dev:e})"
                )));
            }
            let min_eig = SymmetricEigen::new(e.clone())
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if min_eig < -POVM_PSD_TOL {
                return Err(QuantumError::InvalidPovm(format!(
                    "element {q} has negative eigenvalue {min_eig:e}"
                )));
            }
            sum += e;
        }
        let dev = (sum - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > POVM_SUM_TOL {
            return Err(QuantumError::InvalidPovm(format!(
                "elements sum to identity only within {dev:e}"
            )));
        }
        Ok(Povm::General { elements })
    }

    pub fn num_configs(&self) -> usize {
        match self {
            Povm::Partition { blocks, .. } => blocks.len(),
            Povm::General { elements } => elements.len(),
        }
    }

    pub fn hilbert_dim(&self) -> usize {
        match self {
            Povm::Partition { owner, .. } => owner.len(),
            Povm::General { elements } => elements[0].nrows(),
        }
    }

    /// True for a partition in which every configuration owns one index.
    pub fn is_simple(&self) -> bool {
        matches!(self, Povm::Partition { blocks, .. } if blocks.iter().all(|b| b.len() == 1))
    }

    /// `P(q) psi`.
    pub fn apply(&self, q: usize, psi: &DVector<C64>) -> DVector<C64> {
        match self {
            Povm::Partition { blocks, .. } => {
                let mut out = DVector::zeros(psi.len());
                for &i in &blocks[q] {
                    out[i] = psi[i];
                }
                out
            }
            Povm::General { elements } => &elements[q] * psi,
        }
    }

    /// Dense matrix of `P(q)`.
    pub fn element(&self, q: usize) -> DMatrix<C64> {
        match self {
            Povm::Partition { blocks, owner } => {
                let n = owner.len();
                let mut m = DMatrix::zeros(n, n);
                for &i in &blocks[q] {
                    m[(i, i)] = C64::new(1.0, 0.0);
                }
                m
            }
            Povm::General { elements } => elements[q].clone(),
        }
    }
}
