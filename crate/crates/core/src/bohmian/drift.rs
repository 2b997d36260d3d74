use std::io::Write;

use super::{bohm_velocity, BohmError, GaussianPacket, Result, Wavefunction1d};
use crate::models::{build_lattice_particle, LatticeSpec};
use crate::quantum::{QuantumSystem, DEFAULT_NODE_EPS};

/// Mean displacement rate of the jump process out of site `x`:
/// `sum_q (pos(q) - pos(x)) sigma_t(q, x)`.
pub fn lattice_drift(sys: &QuantumSystem, positions: &[f64], x: usize, t: f64, node_eps: f64) -> Result<f64> {
    if positions.len() != sys.dim() || x >= sys.dim() {
        return Err(BohmError::InvalidInput(format!(
            "{} positions for {} configurations, site {x}",
            positions.len(),
            sys.dim()
        )));
    }
    let mut ev = sys.evaluator(node_eps);
    let mut out = vec![0.0; sys.dim()];
    let mu = ev.outflow(x, t, &mut out);
    if mu <= node_eps {
        return Err(BohmError::Node {
            x: positions[x],
            t,
            density: mu,
        });
    }
    let px = positions[x];
    Ok(out.iter().zip(positions).map(|(s, p)| (p - px) * s).sum::<f64>() / mu)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    /// Lattice site actually probed (the one nearest to the requested point).
    pub site_position: f64,
    pub drift: f64,
    pub velocity: f64,
    pub abs_error: f64,
}

impl ConvergenceRow {
    pub fn rel_error(&self) -> f64 {
        self.abs_error / self.velocity.abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub t: f64,
    pub x_probe: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].abs_error < w[0].abs_error)
    }

    /// Least-squares slope of `ln error` against `ln eps`.
    pub fn order(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.abs_error > 0.0)
            .map(|r| (r.eps.ln(), r.abs_error.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }

    /// CSV with columns `eps,drift,velocity,abs_error`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["eps", "drift", "velocity", "abs_error"])?;
        for r in &self.rows {
            w.write_record([
                r.eps.to_string(),
                r.drift.to_string(),
                r.velocity.to_string(),
                r.abs_error.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// For each spacing, discretizes `packet` on `window`, evolves it exactly on
/// the lattice and compares the jump-process drift at the site nearest to
/// `x_probe` with the Bohmian velocity there.
pub fn continuum_limit_report(
    packet: &GaussianPacket,
    eps_list: &[f64],
    t: f64,
    x_probe: f64,
    window: (f64, f64),
) -> Result<ConvergenceReport> {
    if eps_list.is_empty() || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(BohmError::InvalidInput("eps_list must be non-empty and decreasing".into()));
    }
    if !(window.0 < x_probe && x_probe < window.1) {
        return Err(BohmError::InvalidInput(format!(
            "probe {x_probe} outside window [{}, {}]",
            window.0, window.1
        )));
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let spec = LatticeSpec {
            hbar: packet.hbar,
            ..LatticeSpec::covering(window.0, window.1, eps, packet.mass)
        };
        let lattice = build_lattice_particle(&spec, |x, _| packet.psi(x, 0.0))?;
        let sys = lattice.system()?;
        let site = lattice.nearest_site(x_probe);
        let pos = lattice.positions[site];
        let drift = lattice_drift(&sys, &lattice.positions, site, t, DEFAULT_NODE_EPS)?;
        let velocity = bohm_velocity(packet, pos, t, DEFAULT_NODE_EPS)?;
        log::debug!("eps = {eps}: drift {drift}, velocity {velocity}");
        rows.push(ConvergenceRow {
            eps,
            site_position: pos,
            drift,
            velocity,
            abs_error: (drift - velocity).abs(),
        });
    }
    Ok(ConvergenceReport { t, x_probe, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohmian::PlaneWave;
    use crate::models::{build_two_level, LatticeSpec};
    use crate::quantum::C64;

    #[test]
    fn symmetric_two_site_has_no_drift() {
        let spec = LatticeSpec::new(2, 1.0, 1.0);
        let lm = build_lattice_particle(&spec, |_, _| C64::new(1.0, 0.0)).unwrap();
        let sys = lm.system().unwrap();
        for &t in &[0.0, 0.4, 2.0] {
            for x in 0..2 {
                assert_eq!(lattice_drift(&sys, &lm.positions, x, t, 1e-12).unwrap(), 0.0);
            }
        }
        let rabi = build_two_level(1.0, 1.0).unwrap().system().unwrap();
        assert!(lattice_drift(&rabi, &[0.0], 0, 0.1, 1e-12).is_err());
    }

    #[test]
    fn plane_wave_drift_is_uniform() {
        // On a lattice, e^{ikx} has current hbar sin(k eps)/(m eps) on every bond.
        let (eps, k) = (0.1, 1.3);
        let pw = PlaneWave { k, mass: 1.0, hbar: 1.0 };
        let spec = LatticeSpec::covering(0.0, 6.0, eps, 1.0);
        let lm = build_lattice_particle(&spec, |x, _| pw.psi(x, 0.0)).unwrap();
        let sys = lm.system().unwrap();
        let expect = (k * eps).sin() / eps;
        for site in 10..50 {
            let d = lattice_drift(&sys, &lm.positions, site, 0.0, 1e-12).unwrap();
            assert!((d - expect).abs() < 1e-8, "site {site}: {d} vs {expect}");
        }
    }
}
