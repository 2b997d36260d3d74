use nalgebra::{DMatrix, DVector};

use super::{invalid, ConfigMetric, JumpModel, ModelError, Result};
use crate::quantum::{
    ConfigSpace, HermitianOperator, Povm, QuantumSystem, StateVector, C64, DEFAULT_DIM_CAP,
};

/// External potential on the lattice.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// One real value per site; an empty vector means `V = 0`.
    Scalar(Vec<f64>),
    /// One Hermitian `k x k` block per site acting on a `k`-component wave
    /// function.
    Blocks {
        components: usize,
        blocks: Vec<DMatrix<C64>>,
    },
}

impl Default for Potential {
    fn default() -> Self {
        Potential::Scalar(Vec::new())
    }
}

/// A finite 1D lattice with Dirichlet ends: sites at `origin + i * spacing`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub sites: usize,
    pub spacing: f64,
    pub mass: f64,
    pub potential: Potential,
    pub origin: f64,
    pub hbar: f64,
}

impl LatticeSpec {
    pub fn new(sites: usize, spacing: f64, mass: f64) -> Self {
        Self {
            sites,
            spacing,
            mass,
            potential: Potential::default(),
            origin: 0.0,
            hbar: 1.0,
        }
    }

    /// Lattice covering `[lo, hi]` with the given spacing; `hi` is rounded
    /// down to the last site that fits.
    pub fn covering(lo: f64, hi: f64, spacing: f64, mass: f64) -> Self {
        let sites = ((hi - lo) / spacing + 1e-9).floor() as usize + 1;
        Self {
            origin: lo,
            ..Self::new(sites, spacing, mass)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(invalid("sites", format!("need at least 2, got {}", self.sites)));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(invalid("spacing", format!("must be positive, got {}", self.spacing)));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(invalid("mass", format!("must be positive, got {}", self.mass)));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(invalid("hbar", format!("must be positive, got {}", self.hbar)));
        }
        match &self.potential {
            Potential::Scalar(v) if !v.is_empty() && v.len() != self.sites => Err(invalid(
                "potential",
                format!("expected {} values, got {}", self.sites, v.len()),
            )),
            Potential::Blocks { components, blocks } => {
                if *components == 0 || blocks.len() != self.sites {
                    return Err(invalid("potential", "need one block per site"));
                }
                if blocks.iter().any(|b| b.shape() != (*components, *components)) {
                    return Err(invalid("potential", "block shape mismatch"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn components(&self) -> usize {
        match &self.potential {
            Potential::Scalar(_) => 1,
            Potential::Blocks { components, .. } => *components,
        }
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.sites)
            .map(|i| self.origin + i as f64 * self.spacing)
            .collect()
    }

    /// Hopping amplitude `-hbar^2 / (2 m eps^2)` of the lattice Laplacian term.
    pub fn hopping(&self) -> f64 {
        -self.hbar * self.hbar / (2.0 * self.mass * self.spacing * self.spacing)
    }
}

/// Single particle on a lattice with its site positions.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    pub spec: LatticeSpec,
    pub positions: Vec<f64>,
    pub model: JumpModel,
}

impl LatticeModel {
    pub fn system(&self) -> Result<QuantumSystem> {
        self.model.system()
    }

    /// Site whose position is closest to `x`.
    pub fn nearest_site(&self, x: f64) -> usize {
        let i = ((x - self.spec.origin) / self.spec.spacing).round();
        i.clamp(0.0, (self.spec.sites - 1) as f64) as usize
    }
}

/// `H = -hbar^2/(2m) Laplacian_eps + V` with Dirichlet ends.
///
/// `profile(x, c)` gives the unnormalized amplitude of component `c` at
/// position `x`; amplitudes are weighted by `sqrt(eps)` and normalized.
pub fn build_lattice_particle<F>(spec: &LatticeSpec, profile: F) -> Result<LatticeModel>
where
    F: Fn(f64, usize) -> C64,
{
    spec.validate()?;
    let k = spec.components();
    let n = spec.sites;
    let dim = n * k;
    if dim > DEFAULT_DIM_CAP {
        return Err(ModelError::DimensionOverflow {
            dim,
            cap: DEFAULT_DIM_CAP,
        });
    }
    let hop = spec.hopping();
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for s in 0..n {
        for c in 0..k {
            let i = s * k + c;
            m[(i, i)] += C64::new(-2.0 * hop, 0.0);
            if s + 1 < n {
                let j = (s + 1) * k + c;
                m[(i, j)] = C64::new(hop, 0.0);
                m[(j, i)] = C64::new(hop, 0.0);
            }
        }
        match &spec.potential {
            Potential::Scalar(v) if !v.is_empty() => m[(s, s)] += C64::new(v[s], 0.0),
            Potential::Scalar(_) => {}
            Potential::Blocks { blocks, .. } => {
                for a in 0..k {
                    for b in 0..k {
                        m[(s * k + a, s * k + b)] += blocks[s][(a, b)];
                    }
                }
            }
        }
    }
    let hamiltonian = HermitianOperator::new(m)?;

    let positions = spec.positions();
    let w = spec.spacing.sqrt();
    let amps = DVector::from_iterator(
        dim,
        positions
            .iter()
            .flat_map(|&x| (0..k).map(move |c| (x, c)))
            .map(|(x, c)| profile(x, c) * w),
    );
    let psi0 = StateVector::normalized(amps, spec.hbar).map_err(|_| ModelError::NonNormalizable)?;
    let blocks = (0..n).map(|s| (s * k..(s + 1) * k).collect()).collect();
    let povm = Povm::partition(blocks, dim)?;
    let space = ConfigSpace::new((0..n).map(|s| s.to_string()))?;
    Ok(LatticeModel {
        spec: spec.clone(),
        positions: positions.clone(),
        model: JumpModel {
            space,
            hamiltonian,
            povm,
            psi0,
            metric: ConfigMetric::Positions(positions),
        },
    })
}
