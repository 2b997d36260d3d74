use std::f64::consts::PI;
use std::fmt::Write;

use anyhow::Result;

use crate::config::{build, Built, ModelConfig};

/// Model card: parameters (defaults filled in), dimensions, Hamiltonian
/// structure and analytically known nodes.
pub fn describe(model: &ModelConfig) -> Result<String> {
    let mut s = String::new();
    let params = serde_json::to_string(model)?;
    writeln!(s, "model: {}", model.kind())?;
    writeln!(s, "parameters: {params}")?;
    writeln!(s, "boundary: {}", model.boundary())?;
    let built = build(model)?;
    if let Some(jm) = built.jump_model() {
        let h = &jm.hamiltonian;
        writeln!(s, "configurations: {}", jm.space.dim())?;
        writeln!(s, "hilbert dimension: {}", h.dim())?;
        writeln!(s, "hamiltonian nonzero off-diagonal entries: {}", h.off_diagonal_support().len())?;
    }
    match (model, &built) {
        (ModelConfig::TwoLevel(p), _) => {
            writeln!(s, "hamiltonian: H = omega sigma_x, omega = {}", p.omega)?;
            writeln!(s, "initial state: (1, 0)")?;
            let t = PI * p.hbar / (2.0 * p.omega);
            writeln!(s, "node: configuration 1 at t = pi hbar / (2 omega) = {t}")?;
        }
        (ModelConfig::Lattice1d(p), Built::Lattice(l)) => {
            writeln!(
                s,
                "hamiltonian: -hbar^2/(2m) discrete Laplacian + V, {} sites on [{}, {}], hopping {}",
                l.spec.sites,
                l.positions[0],
                l.positions[l.positions.len() - 1],
                l.spec.hopping()
            )?;
            writeln!(
                s,
                "initial state: Gaussian packet x0 = {}, s0 = {}, u = {}",
                p.packet.x0, p.packet.s0, p.packet.u
            )?;
            writeln!(s, "nodes: none known in closed form")?;
        }
        (ModelConfig::Fock(p), Built::Fock(f)) => {
            writeln!(
                s,
                "hamiltonian: H0 (bosonic hopping, {} sites) + HI (creation/annihilation near sources {:?})",
                p.sites, p.sources
            )?;
            writeln!(s, "dimension: {} (occupations with at most {} bosons)", f.basis.len(), p.n_max)?;
            let profile: Vec<f64> = (0..p.sites).map(|x| f.spec.source_profile(x)).collect();
            writeln!(s, "source profile: {profile:?}")?;
            writeln!(s, "initial state: {:?}", p.initial)?;
            writeln!(s, "nodes: none known in closed form")?;
        }
        (ModelConfig::Dirac(p), Built::Dirac(d)) => {
            writeln!(
                s,
                "hamiltonian: c hbar k sigma_x + m c^2 sigma_z per mode, {} modes, period {}",
                d.wavenumbers().len(),
                d.spec().period()
            )?;
            writeln!(s, "rest energy: {}", d.spec().rest_energy())?;
            writeln!(s, "speed of light: {}", p.c)?;
            writeln!(s, "nodes: none known in closed form")?;
        }
        _ => unreachable!("model and build agree"),
    }
    Ok(s)
}
