use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ContinuousCDF, Normal as NormalCdf};

use super::{CheckReport, Result, VerifyError};
use crate::bohmian::{push_forward, BohmPath, GaussianPacket, VelocityField};
use crate::models::ConfigMetric;
use crate::numeric::total_variation;
use crate::process::Trajectory;

/// A path for the distance functional.
#[derive(Debug, Clone, Copy)]
pub enum PathRef<'a> {
    /// Jump path; each jump contributes the metric distance it covers.
    Jump(&'a Trajectory, &'a ConfigMetric),
    Bohm(&'a BohmPath),
}

/// Points of `path` inside `[t1, t2]` (in time order), endpoints included.
fn window(path: &BohmPath, t1: f64, t2: f64) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = path
        .dense(8)
        .into_iter()
        .filter(|&(t, _)| t > t1 && t < t2)
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ends = [t1, t2].map(|t| path.position_at(t).map(|x| (t, x)));
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.extend(ends[0]);
    out.extend(pts);
    out.extend(ends[1]);
    out
}

/// Distance travelled on `[t1, t2]`.
pub fn distance_functional(path: PathRef<'_>, t1: f64, t2: f64) -> f64 {
    match path {
        PathRef::Jump(tr, metric) => tr
            .jumps
            .iter()
            .filter(|j| j.time >= t1 && j.time <= t2)
            .map(|j| metric.distance(j.from, j.to))
            .sum(),
        PathRef::Bohm(p) => window(p, t1, t2).windows(2).map(|w| (w[1].1 - w[0].1).abs()).sum(),
    }
}

/// Total variation of `log |psi_t(Q_t)|^2` along `path` on `[t1, t2]`;
/// infinite if the path meets a node.
pub fn log_variation(path: &BohmPath, field: VelocityField<'_>, t1: f64, t2: f64) -> f64 {
    let logs: Vec<f64> = window(path, t1, t2)
        .into_iter()
        .map(|(t, x)| field.density(x, t).ln())
        .collect();
    if logs.iter().any(|l| !l.is_finite()) {
        return f64::INFINITY;
    }
    logs.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Pushes `m` starts drawn from `|psi_0|^2` through the Bohmian flow to `t`
/// and compares their histogram over `bins` equal-probability cells of
/// `|psi_t|^2` in total variation.
pub fn bohm_equivariance(
    packet: &GaussianPacket,
    m: usize,
    t: f64,
    seed: u64,
    bins: usize,
    tolerance: f64,
) -> Result<CheckReport> {
    if m == 0 || bins < 2 {
        return Err(VerifyError::Precondition("need m >= 1 and at least two bins".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Normal::new(packet.x0, packet.s0).map_err(|e| VerifyError::Precondition(e.to_string()))?;
    let starts: Vec<f64> = (0..m).map(|_| start.sample(&mut rng)).collect();
    let ends = push_forward(VelocityField::Bohm(packet), &starts, 0.0, t, 1e-10)?;
    let law = NormalCdf::new(packet.center(t), packet.spread(t)).map_err(|e| VerifyError::Precondition(e.to_string()))?;
    let mut counts = vec![0.0; bins];
    for x in ends {
        let cell = ((law.cdf(x) * bins as f64) as usize).min(bins - 1);
        counts[cell] += 1.0 / m as f64;
    }
    let tv = total_variation(&counts, &vec![1.0 / bins as f64; bins]);
    Ok(CheckReport::new("bohm_equivariance", tv <= tolerance, tv, 0.0, tolerance).with_samples(m, Some(seed)))
}
