use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{log_variation, BoundReport, CheckReport, Result, VerifyError};
use crate::bohmian::{integrate_path, BohmError, VelocityField};
use crate::models::DiracModel;
use crate::numeric::{mean_and_stderr, simpson_samples};
use crate::process::trajectory_rng;

/// Oversampling of the spatial grid used for envelopes, speed sampling and
/// the gradient quadrature.
const OVERSAMPLE: usize = 8;

fn fine_grid(model: &DiracModel) -> Vec<f64> {
    let spec = model.spec();
    let n = spec.sites * OVERSAMPLE;
    let h = spec.period() / n as f64;
    (0..n).map(|j| spec.origin + j as f64 * h).collect()
}

/// `n` positions in the periodic box drawn from `psi^* psi` at time `t`,
/// by rejection against a uniform envelope.
pub fn sample_density<R: Rng + ?Sized>(model: &DiracModel, t: f64, n: usize, rng: &mut R) -> Vec<f64> {
    let spec = model.spec();
    // band-limited, so an 8x grid sees the peak to well within 25 %
    let peak = fine_grid(model)
        .into_iter()
        .map(|x| model.density(x, t))
        .fold(0.0, f64::max)
        * 1.25;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = spec.origin + rng.random::<f64>() * spec.period();
        if rng.random::<f64>() * peak < model.density(x, t) {
            out.push(x);
        }
    }
    out
}

/// `(2/hbar) m c^2 (t2 - t1) + 4 c int int |psi^* d_x psi| dx dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LBound {
    pub mass_term: f64,
    pub gradient_term: f64,
    pub total: f64,
}

/// The bound by quadrature: periodic trapezoid in `x` on the oversampled
/// grid, Simpson in `t` over `nt` panels. Also returns the largest
/// Bohm–Dirac speed seen on the same space-time grid.
fn bound_and_speed(model: &DiracModel, t1: f64, t2: f64, nt: usize) -> (LBound, f64) {
    let spec = model.spec();
    let nt = nt.max(2) + nt % 2;
    let xs = fine_grid(model);
    let h = spec.period() / xs.len() as f64;
    let dt = (t2 - t1) / nt as f64;
    let rows: Vec<(f64, f64)> = (0..=nt)
        .into_par_iter()
        .map(|i| {
            let t = t1 + i as f64 * dt;
            let mut acc = 0.0;
            let mut vmax: f64 = 0.0;
            for &x in &xs {
                let (p, dp) = model.spinor_and_dx(x, t);
                acc += (p[0].conj() * dp[0] + p[1].conj() * dp[1]).norm();
                let rho = p[0].norm_sqr() + p[1].norm_sqr();
                if rho > 0.0 {
                    vmax = vmax.max((spec.c * 2.0 * (p[0].conj() * p[1]).re / rho).abs());
                }
            }
            (acc * h, vmax)
        })
        .collect();
    let inner: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let vmax = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let mass_term = 2.0 / spec.hbar * spec.rest_energy() * (t2 - t1);
    let gradient_term = 4.0 * spec.c * simpson_samples(&inner, dt);
    (
        LBound {
            mass_term,
            gradient_term,
            total: mass_term + gradient_term,
        },
        vmax,
    )
}

pub fn dirac_l_bound(model: &DiracModel, t1: f64, t2: f64, nt: usize) -> LBound {
    bound_and_speed(model, t1, t2, nt).0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiracLReport {
    pub mean_l: f64,
    pub stderr: f64,
    /// Largest `|v|` over the space-time grid and along every path.
    pub max_speed: f64,
    pub c: f64,
    pub bound: LBound,
    /// Paths that met a node (infinite `L`).
    pub nodes: usize,
    pub samples: usize,
    pub seed: u64,
    pub passed: bool,
}

impl DiracLReport {
    pub fn speed_ok(&self) -> bool {
        self.max_speed <= self.c * (1.0 + 1e-12)
    }

    pub fn to_report(&self) -> CheckReport {
        let b = BoundReport::upper(self.mean_l, self.bound.total, self.stderr, 0.0);
        CheckReport::new("bohm_dirac", self.passed, self.mean_l, self.bound.total, b.tolerance)
            .with_samples(self.samples, Some(self.seed))
            .detail("stderr", self.stderr)
            .detail("max_speed", self.max_speed)
            .detail("c", self.c)
            .detail("mass_term", self.bound.mass_term)
            .detail("gradient_term", self.bound.gradient_term)
            .detail("nodes", self.nodes as f64)
    }
}

/// Bohm–Dirac paths from `m` starts drawn from `|psi_t1|^2`, integrated to
/// `t2`; reports the ensemble mean of `L(t1, t2)` against the bound and the
/// largest speed seen.
pub fn dirac_l_ensemble(model: &DiracModel, m: usize, t1: f64, t2: f64, seed: u64, tol: f64) -> Result<DiracLReport> {
    if m == 0 || !(t2 > t1) {
        return Err(VerifyError::Precondition(format!("need m >= 1 and t2 > t1, got m = {m}, [{t1}, {t2}]")));
    }
    let starts = sample_density(model, t1, m, &mut trajectory_rng(seed, 0));
    let field = VelocityField::BohmDirac(model);
    let per_path: Vec<(f64, f64)> = starts
        .par_iter()
        .map(|&x| match integrate_path(field, x, t1, t2, tol) {
            Ok(path) => {
                let v = path.samples.iter().map(|s| s.v.abs()).fold(0.0, f64::max);
                Ok((log_variation(&path, field, t1, t2), v))
            }
            Err(BohmError::Node { .. }) => Ok((f64::INFINITY, 0.0)),
            Err(e) => Err(VerifyError::from(e)),
        })
        .collect::<Result<_>>()?;
    let ls: Vec<f64> = per_path.iter().map(|p| p.0).collect();
    let nodes = ls.iter().filter(|l| l.is_infinite()).count();
    let (mean_l, stderr) = mean_and_stderr(&ls);
    let nt = 64;
    let (bound, grid_speed) = bound_and_speed(model, t1, t2, nt);
    let max_speed = per_path.iter().map(|p| p.1).fold(grid_speed, f64::max);
    let c = model.spec().c;
    let mut report = DiracLReport {
        mean_l,
        stderr,
        max_speed,
        c,
        bound,
        nodes,
        samples: m,
        seed,
        passed: false,
    };
    report.passed = report.speed_ok()
        && mean_l.is_finite()
        && BoundReport::upper(mean_l, bound.total, stderr, 0.0).passed;
    Ok(report)
}
