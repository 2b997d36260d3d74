use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    sample_holding_time, Holding, JumpRecord, ProcessError, Result, SamplerConfig, Status,
    Trajectory,
};
use crate::quantum::{Evaluator, QuantumSystem};

/// Where a trajectory starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    Config(usize),
    /// Draw from `mu_{t0}`.
    InitialMeasure,
}

/// Independent stream for trajectory `index`, so ensembles do not depend on
/// scheduling.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws the destination of a jump out of `x` at `t` with weights
/// `sigma_t(q, x)`; the common `1/mu_t(x)` factor cancels, so this works
/// on the current numerators.
pub fn sample_destination<R: Rng + ?Sized>(
    ev: &mut Evaluator<'_>,
    x: usize,
    t: f64,
    rng: &mut R,
) -> Result<usize> {
    let d = ev.system().dim();
    if x >= d {
        return Err(ProcessError::UnknownConfig(x));
    }
    let mut w = vec![0.0; d];
    ev.outflow(x, t, &mut w);
    let total: f64 = w.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(ProcessError::InconsistentJump { config: x, time: t });
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (q, &wq) in w.iter().enumerate() {
        if wq <= 0.0 {
            continue;
        }
        acc += wq;
        last = Some(q);
        if u < acc {
            return Ok(q);
        }
    }
    // u landed on the rounding edge of the final bucket.
    last.ok_or(ProcessError::InconsistentJump { config: x, time: t })
}

fn draw_initial<R: Rng + ?Sized>(ev: &mut Evaluator<'_>, t0: f64, rng: &mut R) -> usize {
    let mu = ev.measure(t0);
    let u = rng.random::<f64>() * mu.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut last = 0;
    for (q, &m) in mu.iter().enumerate() {
        if m <= 0.0 {
            continue;
        }
        acc += m;
        last = q;
        if u < acc {
            return q;
        }
    }
    last
}

/// Samples one path on `[t0, horizon]`. Numerical node hits end the path
/// with status `NODE_GUARD`; exceeding `max_jumps` sends it to the cemetery.
pub fn sample_trajectory<R: Rng + ?Sized>(
    ev: &mut Evaluator<'_>,
    start: Start,
    t0: f64,
    horizon: f64,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Trajectory> {
    if !(t0.is_finite() && horizon.is_finite() && t0 <= horizon) {
        return Err(ProcessError::InvalidInterval { from: t0, to: horizon });
    }
    let x0 = match start {
        Start::Config(x) if x >= ev.system().dim() => return Err(ProcessError::UnknownConfig(x)),
        Start::Config(x) => x,
        Start::InitialMeasure => draw_initial(ev, t0, rng),
    };
    let mut traj = Trajectory::new(x0, t0, horizon);
    let (mut x, mut t) = (x0, t0);
    let stop = |traj: &mut Trajectory, status, at: f64, why: Option<String>| {
        traj.status = status;
        traj.end_time = at;
        traj.diagnostic = why;
    };
    loop {
        let tau = match sample_holding_time(ev, x, t, horizon, cfg, rng) {
            Ok(Holding::NoJump) => {
                stop(&mut traj, Status::Horizon, horizon, None);
                break;
            }
            Ok(Holding::Jump(tau)) => tau,
            Err(e @ ProcessError::NodeGuard { .. }) => {
                stop(&mut traj, Status::NodeGuard, t, Some(e.to_string()));
                break;
            }
            Err(e) => return Err(e),
        };
        if traj.jumps.len() >= cfg.max_jumps {
            stop(&mut traj, Status::Cemetery, tau, None);
            break;
        }
        match sample_destination(ev, x, tau, rng) {
            Ok(q) => {
                traj.jumps.push(JumpRecord { time: tau, from: x, to: q });
                x = q;
                t = tau;
            }
            Err(e @ ProcessError::InconsistentJump { .. }) => {
                stop(&mut traj, Status::NodeGuard, tau, Some(e.to_string()));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(traj)
}

/// `m` independent trajectories; trajectory `i` uses stream `i` of
/// `cfg.seed`, so the result is the same for any thread count.
pub fn sample_ensemble(
    sys: &QuantumSystem,
    start: Start,
    t0: f64,
    horizon: f64,
    cfg: &SamplerConfig,
    m: usize,
) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    (0..m as u64)
        .into_par_iter()
        .map_init(
            || sys.evaluator(cfg.node_eps),
            |ev, i| {
                let mut rng = trajectory_rng(cfg.seed, i);
                sample_trajectory(ev, start, t0, horizon, cfg, &mut rng)
            },
        )
        .collect()
}

/// Number of jumps with time in `[t1, t2]`.
pub fn count_jumps(traj: &Trajectory, t1: f64, t2: f64) -> usize {
    let lo = traj.jumps.partition_point(|j| j.time < t1);
    let hi = traj.jumps.partition_point(|j| j.time <= t2);
    hi.saturating_sub(lo)
}
