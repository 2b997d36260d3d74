use nalgebra::DMatrix;

use super::{CheckReport, Result, VerifyError};
use crate::models::FockModel;
use crate::quantum::{master_equation_rhs, measure_derivative, minimal_rates, QuantumSystem, RateKernel};

/// Worst violations of the exact identities over a set of times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StructuralReport {
    /// `max |J + J^T|`.
    pub antisymmetry: f64,
    /// `max |sigma(q,q') mu(q') - sigma(q',q) mu(q) - J(q,q')|` over
    /// non-singular column pairs.
    pub detailed_current: f64,
    /// `max sigma(q,q') sigma(q',q)`; exactly zero for minimal rates.
    pub minimality: f64,
    /// `max |master equation with rho = mu - d mu/dt|`.
    pub master_equation: f64,
    /// `max |(2/hbar) Im <P(q) H> - sum_q' J(q,q')|`.
    pub measure_derivative: f64,
    /// `max | ||psi_t|| - 1 |`.
    pub norm: f64,
}

impl StructuralReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.antisymmetry <= tol
            && self.detailed_current <= tol
            && self.minimality == 0.0
            && self.master_equation <= tol
            && self.measure_derivative <= tol
            && self.norm <= tol
    }

    pub fn to_report(&self, tol: f64) -> CheckReport {
        let worst = [
            self.antisymmetry,
            self.detailed_current,
            self.minimality,
            self.master_equation,
            self.measure_derivative,
            self.norm,
        ]
        .into_iter()
        .fold(0.0, f64::max);
        CheckReport::new("structural", self.passed(tol), worst, 0.0, tol)
            .detail("antisymmetry", self.antisymmetry)
            .detail("detailed_current", self.detailed_current)
            .detail("minimality", self.minimality)
            .detail("master_equation", self.master_equation)
            .detail("measure_derivative", self.measure_derivative)
            .detail("norm", self.norm)
    }
}

pub fn structural_identities(sys: &QuantumSystem, times: &[f64], node_eps: f64) -> Result<StructuralReport> {
    let mut r = StructuralReport::default();
    for &t in times {
        let psi = sys.state_at(t);
        r.norm = r.norm.max((psi.norm() - 1.0).abs());
        let cur = sys.current_at(t);
        r.antisymmetry = r.antisymmetry.max(cur.antisymmetry_defect());
        let k = minimal_rates(&psi, sys.hamiltonian(), sys.povm(), t, node_eps)?;
        let n = k.dim();
        for q in 0..n {
            for qp in 0..n {
                if q == qp {
                    continue;
                }
                if let (Some(a), Some(b)) = (k.rate(q, qp), k.rate(qp, q)) {
                    let lhs = a * k.mu[qp] - b * k.mu[q];
                    r.detailed_current = r.detailed_current.max((lhs - cur.j[(q, qp)]).abs());
                    r.minimality = r.minimality.max(a * b);
                }
            }
        }
        let md = measure_derivative(&psi, sys.hamiltonian(), sys.povm(), t)?;
        r.measure_derivative = r.measure_derivative.max(md.discrepancy());
        let rhs = master_equation_rhs(&k, &k.mu);
        for (a, b) in rhs.iter().zip(&md.direct) {
            r.master_equation = r.master_equation.max((a - b).abs());
        }
    }
    Ok(r)
}

/// `max |sigma(H0 + HI) - sigma(H0) - sigma(HI)|` over non-singular columns,
/// with all three kernels evaluated on the state evolved under the full `H`.
pub fn additivity_check(fock: &FockModel, times: &[f64], node_eps: f64) -> Result<CheckReport> {
    let s0 = fock.free.off_diagonal_support();
    let si = fock.interaction.off_diagonal_support();
    if let Some(p) = s0.iter().find(|p| si.contains(p)) {
        return Err(VerifyError::Precondition(format!(
            "H0 and HI share the off-diagonal entry {p:?}"
        )));
    }
    let sys = fock.system()?;
    let povm = sys.povm();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &t in times {
        let psi = sys.state_at(t);
        let full = minimal_rates(&psi, sys.hamiltonian(), povm, t, node_eps)?;
        let a = minimal_rates(&psi, &fock.free, povm, t, node_eps)?;
        let b = minimal_rates(&psi, &fock.interaction, povm, t, node_eps)?;
        for qp in 0..full.dim() {
            if full.singular[qp] {
                continue;
            }
            for q in 0..full.dim() {
                let d = full.sigma[(q, qp)] - a.sigma[(q, qp)] - b.sigma[(q, qp)];
                worst = worst.max(d.abs());
                scale = scale.max(full.sigma[(q, qp)]);
            }
        }
    }
    let tol = 1e-10;
    Ok(CheckReport::new("additivity", worst <= tol, worst, 0.0, tol).detail("max_rate", scale))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalityComparison {
    /// `max |sigma~ mu - sigma~^T mu - J|`.
    pub current_defect: f64,
    /// `min (sigma~ - sigma)` over non-singular columns.
    pub min_gap: f64,
}

/// Perturbs minimal rates by a symmetric non-negative flux `s K`:
/// `sigma~(q,q') = sigma(q,q') + s K(q,q') / mu(q')`. The net current is
/// unchanged and `sigma~ >= sigma`, so no flux-matched alternative undercuts
/// the minimal rates.
pub fn minimality_comparison(kernel: &RateKernel, current: &DMatrix<f64>, k: &DMatrix<f64>, s: f64) -> MinimalityComparison {
    let n = kernel.dim();
    let mut out = MinimalityComparison {
        current_defect: 0.0,
        min_gap: f64::INFINITY,
    };
    let tilde = |q: usize, qp: usize| -> Option<f64> {
        let base = kernel.rate(q, qp)?;
        Some(if q == qp { 0.0 } else { base + s * k[(q, qp)] / kernel.mu[qp] })
    };
    for qp in 0..n {
        for q in 0..n {
            if q == qp {
                continue;
            }
            if let (Some(a), Some(b)) = (tilde(q, qp), tilde(qp, q)) {
                let net = a * kernel.mu[qp] - b * kernel.mu[q];
                out.current_defect = out.current_defect.max((net - current[(q, qp)]).abs());
                out.min_gap = out.min_gap.min(a - kernel.sigma[(q, qp)]);
            }
        }
    }
    out
}
