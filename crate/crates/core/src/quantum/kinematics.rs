use nalgebra::{DMatrix, DVector};

use super::{
    HermitianOperator, Povm, QuantumError, Result, StateVector, C64, MEASURE_CLAMP,
};

fn check_dims(psi: &StateVector, h: &HermitianOperator, povm: &Povm) -> Result<()> {
    if h.dim() != psi.dim() {
        return Err(QuantumError::DimensionMismatch {
            expected: h.dim(),
            found: psi.dim(),
        });
    }
    if povm.hilbert_dim() != psi.dim() {
        return Err(QuantumError::DimensionMismatch {
            expected: povm.hilbert_dim(),
            found: psi.dim(),
        });
    }
    Ok(())
}

/// `Psi_t = V exp(-i lambda t / hbar) V^dagger Psi_0`.
pub fn evolve(psi0: &StateVector, h: &HermitianOperator, t: f64) -> Result<StateVector> {
    if h.dim() != psi0.dim() {
        return Err(QuantumError::DimensionMismatch {
            expected: h.dim(),
            found: psi0.dim(),
        });
    }
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    let s = h.spectral();
    let hbar = psi0.hbar();
    let mut coeffs = s.eigenvectors.ad_mul(psi0.amps());
    for (c, &lam) in coeffs.iter_mut().zip(s.eigenvalues.iter()) {
        *c *= C64::from_polar(1.0, -lam * t / hbar);
    }
    Ok(StateVector::from_evolved(&s.eigenvectors * coeffs, hbar))
}

/// `mu(q) = <psi, P(q) psi>`, with roundoff negatives clamped to zero.
pub fn measure(psi: &StateVector, povm: &Povm) -> Result<Vec<f64>> {
    if povm.hilbert_dim() != psi.dim() {
        return Err(QuantumError::DimensionMismatch {
            expected: povm.hilbert_dim(),
            found: psi.dim(),
        });
    }
    let amps = psi.amps();
    let raw: Vec<f64> = match povm {
        Povm::Partition { blocks, .. } => blocks
            .iter()
            .map(|b| b.iter().map(|&i| amps[i].norm_sqr()).sum())
            .collect(),
        Povm::General { elements } => elements
            .iter()
            .map(|e| amps.dotc(&(e * amps)).re)
            .collect(),
    };
    raw.into_iter()
        .enumerate()
        .map(|(q, v)| {
            if v >= 0.0 {
                Ok(v)
            } else if v >= -MEASURE_CLAMP {
                Ok(0.0)
            } else {
                Err(QuantumError::NegativeMeasure { config: q, value: v })
            }
        })
        .collect()
}

/// Matrix of transition amplitudes `A(q, q') = <psi, P(q) H P(q') psi>`.
pub fn transition_amplitudes(
    psi: &StateVector,
    h: &HermitianOperator,
    povm: &Povm,
) -> Result<DMatrix<C64>> {
    check_dims(psi, h, povm)?;
    let n = povm.num_configs();
    let amps = psi.amps();
    let hm = h.matrix();
    let mut a = DMatrix::<C64>::zeros(n, n);
    match povm {
        Povm::Partition { owner, .. } => {
            let d = amps.len();
            for j in 0..d {
                let pj = amps[j];
                if pj == C64::new(0.0, 0.0) {
                    continue;
                }
                let qj = owner[j];
                for i in 0..d {
                    let hij = hm[(i, j)];
                    if hij == C64::new(0.0, 0.0) {
                        continue;
                    }
                    a[(owner[i], qj)] += amps[i].conj() * hij * pj;
                }
            }
        }
        Povm::General { elements } => {
            let projected: Vec<DVector<C64>> = elements.iter().map(|e| e * amps).collect();
            let pushed: Vec<DVector<C64>> = projected.iter().map(|p| hm * p).collect();
            for q in 0..n {
                for qp in 0..n {
                    a[(q, qp)] = projected[q].dotc(&pushed[qp]);
                }
            }
        }
    }
    Ok(a)
}

/// Probability current between configurations at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentMatrix {
    pub t: f64,
    /// `j[(q, q')]`: net probability flow per unit time from `q'` into `q`.
    pub j: DMatrix<f64>,
}

impl CurrentMatrix {
    /// `max |J + J^T|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        (&self.j + self.j.transpose())
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }
}

/// `J(q, q') = (2/hbar) Im <psi, P(q) H P(q') psi>`; `t` is bookkeeping only.
pub fn current(
    psi: &StateVector,
    h: &HermitianOperator,
    povm: &Povm,
    t: f64,
) -> Result<CurrentMatrix> {
    let a = transition_amplitudes(psi, h, povm)?;
    let k = 2.0 / psi.hbar();
    let mut j = a.map(|z| k * z.im);
    // A(q, q) is a real expectation value.
    j.fill_diagonal(0.0);
    Ok(CurrentMatrix { t, j })
}

/// Minimal jump rates at one instant.
///
/// Columns whose configuration carries measure at or below the node
/// threshold are flagged singular; their `sigma` entries and `total` are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct RateKernel {
    pub t: f64,
    /// `sigma[(q, q')]`: rate of jumping from `q'` to `q`.
    pub sigma: DMatrix<f64>,
    /// `total[q'] = sum_q sigma[(q, q')]`.
    pub total: Vec<f64>,
    pub singular: Vec<bool>,
    pub mu: Vec<f64>,
    /// Positive part of the current, `[J(q, q')]^+`.
    pub numerators: DMatrix<f64>,
}

impl RateKernel {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Rate from `from` to `to`, `None` when `from` is a flagged node.
    pub fn rate(&self, to: usize, from: usize) -> Option<f64> {
        (!self.singular[from]).then(|| self.sigma[(to, from)])
    }

    pub fn total_rate(&self, from: usize) -> Option<f64> {
        (!self.singular[from]).then(|| self.total[from])
    }
}

pub fn minimal_rates(
    psi: &StateVector,
    h: &HermitianOperator,
    povm: &Povm,
    t: f64,
    node_eps: f64,
) -> Result<RateKernel> {
    if !(node_eps > 0.0) {
        return Err(QuantumError::InvalidNodeEps(node_eps));
    }
    let cur = current(psi, h, povm, t)?;
    let mu = measure(psi, povm)?;
    let n = mu.len();
    let numerators = cur.j.map(|v| v.max(0.0));
    let singular: Vec<bool> = mu.iter().map(|&m| m <= node_eps).collect();
    let mut sigma = DMatrix::<f64>::zeros(n, n);
    let mut total = vec![0.0; n];
    for qp in 0..n {
        if singular[qp] {
            sigma.column_mut(qp).fill(f64::NAN);
            total[qp] = f64::NAN;
            continue;
        }
        let mut acc = 0.0;
        for q in 0..n {
            let s = if q == qp { 0.0 } else { numerators[(q, qp)] / mu[qp] };
            sigma[(q, qp)] = s;
            acc += s;
        }
        total[qp] = acc;
    }
    Ok(RateKernel {
        t,
        sigma,
        total,
        singular,
        mu,
        numerators,
    })
}

/// Time derivative of the configuration measure by two routes.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureDerivative {
    /// `(2/hbar) Im <psi, P(q) H psi>`.
    pub direct: Vec<f64>,
    /// `sum_q' J(q, q')`.
    pub from_current: Vec<f64>,
}

impl MeasureDerivative {
    pub fn discrepancy(&self) -> f64 {
        self.direct
            .iter()
            .zip(&self.from_current)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn measure_derivative(
    psi: &StateVector,
    h: &HermitianOperator,
    povm: &Povm,
    t: f64,
) -> Result<MeasureDerivative> {
    let cur = current(psi, h, povm, t)?;
    let amps = psi.amps();
    let h_psi = h.matrix() * amps;
    let k = 2.0 / psi.hbar();
    let direct = (0..povm.num_configs())
        .map(|q| k * povm.apply(q, amps).dotc(&h_psi).im)
        .collect();
    let from_current = cur.j.row_iter().map(|r| r.sum()).collect();
    Ok(MeasureDerivative {
        direct,
        from_current,
    })
}

/// Right side of the jump-process master equation,
/// `sum_q' sigma(q, q') rho(q') - total(q) rho(q)`.
///
/// The flux out of a column is `[J]^+ rho / mu`, which stays defined for
/// flagged columns as long as `mu > 0`; columns with `mu = 0` carry no flux.
pub fn master_equation_rhs(kernel: &RateKernel, rho: &[f64]) -> Vec<f64> {
    let n = kernel.dim();
    let mut out = vec![0.0; n];
    for qp in 0..n {
        let m = kernel.mu[qp];
        if m <= 0.0 || rho[qp] == 0.0 {
            continue;
        }
        let w = rho[qp] / m;
        for q in 0..n {
            if q == qp {
                continue;
            }
            let flux = kernel.numerators[(q, qp)] * w;
            out[q] += flux;
            out[qp] -= flux;
        }
    }
    out
}
