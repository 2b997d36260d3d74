use super::{pooled_binomial_se, BoundReport, CheckReport, EnsembleStats, Result};
use crate::numeric::{adaptive_simpson, ks_critical_95, mean_and_stderr, pairwise_sum, total_variation};
use crate::process::{
    count_jumps, cumulative_hazard, sample_ensemble, Hazard, SamplerConfig, Start, Status, Trajectory,
};
use crate::quantum::{transition_amplitudes, QuantumSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvPoint {
    pub t: f64,
    /// Total variation between the empirical law (cemetery and node-guard
    /// mass included as extra cells) and `mu_t`.
    pub tv: f64,
}

fn tv_with_lost(stats: &EnsembleStats, k: usize, mu: &[f64]) -> f64 {
    let mut p = stats.rho_hat[k].clone();
    let mut q = mu.to_vec();
    p.push(stats.cemetery[k] + stats.guarded[k]);
    q.push(0.0);
    total_variation(&p, &q)
}

/// TV distance between the ensemble and `mu_t` at each checkpoint.
pub fn equivariance_test(sys: &QuantumSystem, stats: &EnsembleStats, tolerance: f64) -> (Vec<TvPoint>, CheckReport) {
    let points: Vec<TvPoint> = stats
        .times
        .iter()
        .enumerate()
        .map(|(k, &t)| TvPoint {
            t,
            tv: tv_with_lost(stats, k, &sys.measure_at(t)),
        })
        .collect();
    let worst = points.iter().map(|p| p.tv).fold(0.0, f64::max);
    let mut report = CheckReport::new("equivariance", worst <= tolerance, worst, 0.0, tolerance);
    for p in &points {
        report = report.detail(format!("tv@{}", p.t), p.tv);
    }
    (points, report.with_samples(stats.m, None))
}

/// Expected number of jumps on `[t1, t2]`: the identity against
/// `int sum sigma mu dt` and the bound `(2/hbar) int sum |<P(q) H P(q')>| dt`.
pub fn expected_jumps_check(
    sys: &QuantumSystem,
    trajectories: &[Trajectory],
    t1: f64,
    t2: f64,
    quad_tol: f64,
) -> Result<(BoundReport, BoundReport)> {
    let counts: Vec<f64> = trajectories.iter().map(|tr| count_jumps(tr, t1, t2) as f64).collect();
    let (mean, se) = mean_and_stderr(&counts);
    let flux = adaptive_simpson(
        |t| {
            let j = sys.current_at(t).j;
            j.iter().map(|v| v.max(0.0)).sum::<f64>()
        },
        t1,
        t2,
        quad_tol,
    )?;
    let k = 2.0 / sys.hbar();
    let bound = adaptive_simpson(
        |t| {
            let a = transition_amplitudes(&sys.state_at(t), sys.hamiltonian(), sys.povm())
                .expect("dimensions checked at construction");
            k * a.iter().map(|z| z.norm()).sum::<f64>()
        },
        t1,
        t2,
        quad_tol,
    )?;
    let floor = 10.0 * quad_tol;
    Ok((BoundReport::equal(mean, flux, se, floor), BoundReport::upper(mean, bound, se, floor)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoLeqMu {
    /// `max_{q,t} (rho_hat - mu - 3 se)`; `<= 0` passes.
    pub worst_excess: f64,
    pub worst_time: f64,
    pub worst_config: usize,
    /// `max_{q,t} (mu - rho_hat - 3 se)`: positive when some cell is
    /// significantly under-populated.
    pub worst_deficit: f64,
    pub max_cemetery: f64,
    pub report: CheckReport,
}

impl RhoLeqMu {
    /// Strict inequality with mass in the cemetery.
    pub fn strict(&self) -> bool {
        self.worst_deficit > 0.0 && self.max_cemetery > 0.0
    }
}

pub fn rho_leq_mu_check(sys: &QuantumSystem, stats: &EnsembleStats) -> RhoLeqMu {
    let mut worst = (f64::NEG_INFINITY, f64::NAN, 0);
    let mut deficit = f64::NEG_INFINITY;
    for (k, &t) in stats.times.iter().enumerate() {
        let mu = sys.measure_at(t);
        for (q, (&r, &m)) in stats.rho_hat[k].iter().zip(&mu).enumerate() {
            let se = pooled_binomial_se(r, m, stats.m);
            let excess = r - m - 3.0 * se;
            if excess > worst.0 {
                worst = (excess, t, q);
            }
            deficit = deficit.max(m - r - 3.0 * se);
        }
    }
    let max_cemetery = stats.cemetery.iter().copied().fold(0.0, f64::max);
    let report = CheckReport::new("rho_leq_mu", worst.0 <= 0.0, worst.0, 0.0, 0.0)
        .detail("worst_time", worst.1)
        .detail("worst_config", worst.2 as f64)
        .detail("worst_deficit", deficit)
        .detail("max_cemetery", max_cemetery)
        .with_samples(stats.m, None);
    RhoLeqMu {
        worst_excess: worst.0,
        worst_time: worst.1,
        worst_config: worst.2,
        worst_deficit: deficit,
        max_cemetery,
        report,
    }
}

/// Occupancy of `node_config` at `node_time - delta` against
/// `mu_{node_time - delta}`; also requires that no path was node-guarded.
pub fn node_avoidance_check(
    sys: &QuantumSystem,
    trajectories: &[Trajectory],
    node_config: usize,
    node_time: f64,
    delta: f64,
    node_eps: f64,
) -> CheckReport {
    let at_node = sys.measure_at(node_time)[node_config];
    let guarded = trajectories.iter().filter(|t| t.status == Status::NodeGuard).count();
    if at_node > node_eps {
        return CheckReport::new("node_avoidance", guarded == 0, 0.0, 0.0, 0.0)
            .detail("mu_at_node_time", at_node)
            .detail("node_guard", guarded as f64)
            .note("configuration is not a node at the given time; occupancy not applicable");
    }
    let t = node_time - delta;
    let m = trajectories.len();
    let hits = trajectories.iter().filter(|tr| tr.position_at(t) == Some(node_config)).count();
    let fraction = hits as f64 / m.max(1) as f64;
    let mu = sys.measure_at(t)[node_config];
    let tol = 3.0 * pooled_binomial_se(fraction, mu, m);
    CheckReport::new("node_avoidance", fraction <= mu + tol && guarded == 0, fraction, mu, tol)
        .detail("node_guard", guarded as f64)
        .detail("probe_time", t)
        .with_samples(m, None)
}

/// Survival function of the first holding time, `sum_x mu_{t0}(x) exp(-Lambda_x)`
/// (or a single term for a fixed start), tabulated on `n + 1` uniform times.
pub fn survival_curve(
    sys: &QuantumSystem,
    start: Start,
    t0: f64,
    horizon: f64,
    cfg: &SamplerConfig,
    n: usize,
) -> Result<Vec<(f64, f64)>> {
    let weights: Vec<(usize, f64)> = match start {
        Start::Config(x) => vec![(x, 1.0)],
        Start::InitialMeasure => sys
            .measure_at(t0)
            .into_iter()
            .enumerate()
            .filter(|&(_, m)| m > cfg.node_eps)
            .collect(),
    };
    let grid: Vec<f64> = (0..=n).map(|i| t0 + (horizon - t0) * i as f64 / n as f64).collect();
    let mut surv = vec![0.0; grid.len()];
    let mut ev = sys.evaluator(cfg.node_eps);
    for (x, w) in weights {
        let mut lambda = 0.0;
        surv[0] += w;
        for i in 1..grid.len() {
            match cumulative_hazard(&mut ev, x, grid[i - 1], grid[i], cfg)? {
                Hazard::Finite(l) => lambda += l,
                Hazard::Divergent { .. } => break,
            }
            surv[i] += w * (-lambda).exp();
        }
    }
    Ok(grid.into_iter().zip(surv).collect())
}

/// Kolmogorov–Smirnov test of the first jump times against
/// [`survival_curve`] on `[t0, horizon)`; paths without a jump are censored.
pub fn survival_check(
    sys: &QuantumSystem,
    trajectories: &[Trajectory],
    start: Start,
    cfg: &SamplerConfig,
    grid_points: usize,
) -> Result<CheckReport> {
    let Some(first) = trajectories.first() else {
        return Ok(CheckReport::new("survival", true, 0.0, 0.0, f64::INFINITY).note("empty ensemble"));
    };
    let (t0, horizon) = (first.t0, first.horizon);
    let curve = survival_curve(sys, start, t0, horizon, cfg, grid_points)?;
    let cdf = |t: f64| {
        let h = (horizon - t0) / grid_points as f64;
        let i = (((t - t0) / h).floor() as usize).min(grid_points - 1);
        let (a, b) = (curve[i], curve[i + 1]);
        1.0 - (a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0))
    };
    let mut times: Vec<f64> = trajectories
        .iter()
        .filter_map(|tr| tr.jumps.first().map(|j| j.time))
        .collect();
    times.sort_by(f64::total_cmp);
    let m = trajectories.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let f = cdf(t);
        d = d.max((f - i as f64 / m).abs()).max(((i + 1) as f64 / m - f).abs());
    }
    // Beyond the last jump the empirical CDF stays flat until the horizon.
    d = d.max((cdf(horizon) - times.len() as f64 / m).abs());
    let crit = ks_critical_95(trajectories.len());
    Ok(CheckReport::new("survival", d <= crit, d, 0.0, crit)
        .detail("censored", m - times.len() as f64)
        .with_samples(trajectories.len(), Some(cfg.seed)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvScaling {
    pub tv_m: f64,
    pub tv_4m: f64,
    pub ratio: f64,
    pub passed: bool,
}

/// Mean TV over `replicates` ensembles of size `m` and `4 m`; the ratio
/// should be 2 within a factor 1.5 if the harness has `M^{-1/2}` noise.
#[allow(clippy::too_many_arguments)]
pub fn tv_scaling(
    sys: &QuantumSystem,
    start: Start,
    t0: f64,
    horizon: f64,
    cfg: &SamplerConfig,
    times: &[f64],
    m: usize,
    replicates: usize,
) -> Result<TvScaling> {
    let mean_tv = |size: usize, salt: u64| -> Result<f64> {
        let mut tvs = Vec::new();
        for r in 0..replicates as u64 {
            let c = SamplerConfig {
                seed: cfg.seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(salt + 2 * r + 1)),
                ..cfg.clone()
            };
            let trajs = sample_ensemble(sys, start, t0, horizon, &c, size)?;
            let stats = EnsembleStats::new(&trajs, times, sys.dim());
            for k in 0..times.len() {
                tvs.push(tv_with_lost(&stats, k, &sys.measure_at(times[k])));
            }
        }
        Ok(pairwise_sum(&tvs) / tvs.len() as f64)
    };
    let tv_m = mean_tv(m, 0)?;
    let tv_4m = mean_tv(4 * m, 1)?;
    let ratio = tv_m / tv_4m;
    Ok(TvScaling {
        tv_m,
        tv_4m,
        ratio,
        passed: (2.0 / 1.5..=2.0 * 1.5).contains(&ratio),
    })
}
