use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::{invalid, ConfigMetric, JumpModel, LatticeSpec, ModelError, Potential, Result};
use crate::quantum::{
    ConfigSpace, HermitianOperator, Povm, QuantumSystem, StateVector, C64, DEFAULT_DIM_CAP,
};

/// Initial state of the Fock model.
#[derive(Debug, Clone, PartialEq)]
pub enum FockInitial {
    Vacuum,
    /// One boson at the given site.
    Particle(usize),
    /// Explicit superposition of occupation vectors (normalized on build).
    Superposition(Vec<(Vec<u32>, C64)>),
}

/// Bosons on a lattice, created and annihilated near fixed sources.
///
/// `lattice.mass` is the boson mass; `lattice.potential`, when given, must
/// be scalar and enters as `sum_x V(x) n_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockSpec {
    pub lattice: LatticeSpec,
    pub n_max: usize,
    pub sources: Vec<usize>,
    /// Support radius of the form factor, in sites.
    pub radius: usize,
    /// Amplitude of the form factor.
    pub coupling: f64,
    pub initial: FockInitial,
    pub dim_cap: usize,
}

impl Default for FockSpec {
    fn default() -> Self {
        Self {
            lattice: LatticeSpec::new(3, 1.0, 1.0),
            n_max: 2,
            sources: vec![1],
            radius: 1,
            coupling: 0.1,
            initial: FockInitial::Particle(0),
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

impl FockSpec {
    /// Form factor `phi(d)`: a truncated parabolic bump of height `coupling`
    /// vanishing beyond `radius` sites.
    pub fn form_factor(&self, d: i64) -> f64 {
        let r = self.radius as i64;
        if d.abs() > r {
            return 0.0;
        }
        let s = d as f64 / (self.radius as f64 + 1.0);
        self.coupling * (1.0 - s * s)
    }

    /// `Phi(x) = sum_{y in sources} phi(x - y)`.
    pub fn source_profile(&self, x: usize) -> f64 {
        self.sources
            .iter()
            .map(|&y| self.form_factor(x as i64 - y as i64))
            .sum()
    }
}

/// Binomial `C(sites + n_max, n_max)`: multisets of size at most `n_max`.
pub fn fock_dimension(sites: usize, n_max: usize) -> Option<usize> {
    let mut acc: u128 = 1;
    for i in 1..=n_max as u128 {
        acc = acc.checked_mul(sites as u128 + i)? / i;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Enumerated occupation-number basis with total particle number at most
/// `n_max`, ordered by particle number.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    configs: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl FockBasis {
    pub fn new(sites: usize, n_max: usize) -> Self {
        let mut configs = Vec::new();
        let mut cur = vec![0u32; sites];
        for n in 0..=n_max {
            compositions(&mut cur, 0, n as u32, &mut configs);
        }
        let lookup = configs
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        Self { configs, lookup }
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[Vec<u32>] {
        &self.configs
    }

    pub fn config(&self, i: usize) -> &[u32] {
        &self.configs[i]
    }

    pub fn index_of(&self, occ: &[u32]) -> Option<usize> {
        self.lookup.get(occ).copied()
    }

    pub fn particle_number(&self, i: usize) -> u32 {
        self.configs[i].iter().sum()
    }

    pub fn label(&self, i: usize) -> String {
        let parts: Vec<String> = self.configs[i].iter().map(u32::to_string).collect();
        format!("[{}]", parts.join(" "))
    }

    /// Amplitude of the symmetric many-particle wave function on a tuple of
    /// positions realizing configuration `i`, given the occupation-basis
    /// amplitude `c`: `c * sqrt(prod q(x)! / n!)`.
    pub fn symmetric_amplitude(&self, i: usize, c: C64) -> C64 {
        let occ = &self.configs[i];
        let n: u32 = occ.iter().sum();
        let num: f64 = occ.iter().map(|&k| factorial(k)).product();
        c * (num / factorial(n)).sqrt()
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

fn compositions(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(cur.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        cur[pos] = k;
        compositions(cur, pos + 1, remaining - k, out);
    }
    cur[pos] = 0;
}

/// Fock model with free and interaction Hamiltonians kept separately.
#[derive(Debug, Clone)]
pub struct FockModel {
    pub spec: FockSpec,
    pub basis: FockBasis,
    pub free: HermitianOperator,
    pub interaction: HermitianOperator,
    pub model: JumpModel,
}

impl FockModel {
    pub fn system(&self) -> Result<QuantumSystem> {
        self.model.system()
    }

    /// `H0 + HI`.
    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.model.hamiltonian
    }
}

/// Builds `H0` (boson hopping with Dirichlet ends), `HI = sum_x Phi(x)(a_x^dagger + a_x)`
/// truncated at `n_max`, and the full `H = H0 + HI` on the occupation basis.
pub fn build_fock(spec: &FockSpec) -> Result<FockModel> {
    let lat = &spec.lattice;
    lat.validate()?;
    if spec.n_max < 1 {
        return Err(invalid("n_max", "must be at least 1"));
    }
    if let Some(&s) = spec.sources.iter().find(|&&s| s >= lat.sites) {
        return Err(invalid("sources", format!("site {s} outside lattice of {} sites", lat.sites)));
    }
    if !spec.coupling.is_finite() {
        return Err(invalid("coupling", "must be finite"));
    }
    let potential = match &lat.potential {
        Potential::Scalar(v) => v.clone(),
        Potential::Blocks { .. } => return Err(invalid("potential", "Fock model needs a scalar potential")),
    };
    let dim = fock_dimension(lat.sites, spec.n_max).unwrap_or(usize::MAX);
    if dim > spec.dim_cap {
        return Err(ModelError::DimensionOverflow {
            dim,
            cap: spec.dim_cap,
        });
    }
    let basis = FockBasis::new(lat.sites, spec.n_max);
    debug_assert_eq!(basis.len(), dim);

    let hop = lat.hopping();
    let mut h0 = DMatrix::<C64>::zeros(dim, dim);
    let mut hi = DMatrix::<C64>::zeros(dim, dim);
    let profile: Vec<f64> = (0..lat.sites).map(|x| spec.source_profile(x)).collect();
    for (i, occ) in basis.configs().iter().enumerate() {
        let diag: f64 = occ
            .iter()
            .enumerate()
            .map(|(x, &k)| (-2.0 * hop + potential.get(x).copied().unwrap_or(0.0)) * k as f64)
            .sum();
        h0[(i, i)] = C64::new(diag, 0.0);
        // a_x^dagger a_y for neighbouring x, y
        for x in 0..lat.sites {
            for y in [x.wrapping_sub(1), x + 1] {
                if y >= lat.sites || occ[y] == 0 {
                    continue;
                }
                let mut to = occ.clone();
                to[y] -= 1;
                to[x] += 1;
                let j = basis.index_of(&to).expect("hopping preserves particle number");
                let amp = hop * (occ[y] as f64).sqrt() * (occ[x] as f64 + 1.0).sqrt();
                h0[(j, i)] += C64::new(amp, 0.0);
            }
        }
        let n: u32 = occ.iter().sum();
        if n as usize >= spec.n_max {
            continue;
        }
        for (x, &phi) in profile.iter().enumerate() {
            if phi == 0.0 {
                continue;
            }
            let mut to = occ.clone();
            to[x] += 1;
            let j = basis.index_of(&to).expect("creation below n_max stays in basis");
            let amp = C64::new(phi * (occ[x] as f64 + 1.0).sqrt(), 0.0);
            hi[(j, i)] = amp;
            hi[(i, j)] = amp.conj();
        }
    }
    let free = HermitianOperator::with_cap(h0, spec.dim_cap)?;
    let interaction = HermitianOperator::with_cap(hi, spec.dim_cap)?;
    let hamiltonian = free.try_add(&interaction)?;

    let mut amps = DVector::<C64>::zeros(dim);
    match &spec.initial {
        FockInitial::Vacuum => amps[basis.index_of(&vec![0; lat.sites]).unwrap()] = C64::new(1.0, 0.0),
        FockInitial::Particle(x) => {
            if *x >= lat.sites {
                return Err(invalid("initial", format!("site {x} outside lattice")));
            }
            let mut occ = vec![0; lat.sites];
            occ[*x] = 1;
            amps[basis.index_of(&occ).unwrap()] = C64::new(1.0, 0.0);
        }
        FockInitial::Superposition(terms) => {
            for (occ, c) in terms {
                let i = basis
                    .index_of(occ)
                    .ok_or_else(|| invalid("initial", format!("occupation {occ:?} not in basis")))?;
                amps[i] += c;
            }
        }
    }
    let psi0 = StateVector::normalized(amps, lat.hbar).map_err(|_| ModelError::NonNormalizable)?;
    let space = ConfigSpace::new((0..dim).map(|i| basis.label(i)))?;
    Ok(FockModel {
        spec: spec.clone(),
        model: JumpModel {
            space,
            hamiltonian,
            povm: Povm::identity_partition(dim),
            psi0,
            metric: ConfigMetric::Occupations(basis.configs().to_vec()),
        },
        basis,
        free,
        interaction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts multisets of size <= n over `sites` symbols by brute force.
    fn brute_count(sites: usize, n_max: usize) -> usize {
        let mut count = 0;
        let total = (n_max + 1).pow(sites as u32);
        for code in 0..total {
            let mut c = code;
            let mut s = 0;
            for _ in 0..sites {
                s += c % (n_max + 1);
                c /= n_max + 1;
            }
            if s <= n_max {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn dimension_matches_multiset_count() {
        assert_eq!(FockBasis::new(3, 2).len(), 10);
        for sites in 1..5 {
            for n in 1..4 {
                let b = FockBasis::new(sites, n);
                assert_eq!(b.len(), brute_count(sites, n));
                assert_eq!(fock_dimension(sites, n), Some(b.len()));
                for i in 0..b.len() {
                    assert_eq!(b.index_of(b.config(i)), Some(i));
                }
            }
        }
    }

    #[test]
    fn sector_structure_and_disjoint_supports() {
        let m = build_fock(&FockSpec::default()).unwrap();
        let b = &m.basis;
        let (h0, hi) = (m.free.matrix(), m.interaction.matrix());
        let zero = C64::new(0.0, 0.0);
        for i in 0..b.len() {
            for j in 0..b.len() {
                let (ni, nj) = (b.particle_number(i), b.particle_number(j));
                if ni != nj {
                    assert_eq!(h0[(i, j)], zero);
                }
                if hi[(i, j)] != zero {
                    assert_eq!(ni.abs_diff(nj), 1);
                    assert_eq!(hi[(i, j)], hi[(j, i)].conj());
                }
                if i != j {
                    assert!(h0[(i, j)] == zero || hi[(i, j)] == zero);
                }
            }
        }
    }

    #[test]
    fn truncation_edge_has_no_creation() {
        let m = build_fock(&FockSpec::default()).unwrap();
        let b = &m.basis;
        let hi = m.interaction.matrix();
        for i in (0..b.len()).filter(|&i| b.particle_number(i) == 2) {
            for j in 0..b.len() {
                if hi[(j, i)] != C64::new(0.0, 0.0) {
                    assert_eq!(b.particle_number(j), 1);
                }
            }
        }
    }

    /// Rates written with symmetric tuple amplitudes `psi` take the textbook
    /// creation/annihilation form: creation carries `sqrt(#q + 1)`, and each
    /// of the `q(x)` bosons at `x` is annihilated with `(#q)^(-1/2)`.
    #[test]
    fn rates_match_tuple_amplitude_formulas() {
        let m = build_fock(&FockSpec::default()).unwrap();
        let sys = m.system().unwrap();
        let b = &m.basis;
        let spec = &m.spec;
        for &t in &[0.3, 1.7, 4.2] {
            let psi = sys.state_at(t);
            let k = sys.rates_at(t, 1e-12).unwrap();
            let tup = |i: usize| b.symmetric_amplitude(i, psi.amps()[i]);
            let mut checked = 0;
            for i in 0..b.len() {
                let q = b.config(i);
                let n = b.particle_number(i) as f64;
                let den = tup(i).norm_sqr();
                if den < 1e-8 {
                    continue;
                }
                for x in 0..q.len() {
                    let phi = spec.source_profile(x);
                    if (n as usize) < spec.n_max {
                        let mut up = q.to_vec();
                        up[x] += 1;
                        let j = b.index_of(&up).unwrap();
                        let expect = (2.0 * (tup(j).conj() * (n + 1.0).sqrt() * phi * tup(i)).im).max(0.0) / den;
                        assert!((k.sigma[(j, i)] - expect).abs() < 1e-9 * (1.0 + expect));
                        checked += 1;
                    }
                    if q[x] > 0 {
                        let mut down = q.to_vec();
                        down[x] -= 1;
                        let j = b.index_of(&down).unwrap();
                        let per = (2.0 * (tup(j).conj() * n.powf(-0.5) * phi * tup(i)).im).max(0.0) / den;
                        let expect = q[x] as f64 * per;
                        assert!((k.sigma[(j, i)] - expect).abs() < 1e-9 * (1.0 + expect));
                        checked += 1;
                    }
                }
            }
            assert!(checked > 10);
        }
    }

    #[test]
    fn vacuum_column_is_creation_rate() {
        let spec = FockSpec {
            initial: FockInitial::Vacuum,
            ..FockSpec::default()
        };
        let m = build_fock(&spec).unwrap();
        let sys = m.system().unwrap();
        let vac = m.basis.index_of(&[0, 0, 0]).unwrap();
        let t = 0.8;
        let psi = sys.state_at(t);
        let k = sys.rates_at(t, 1e-12).unwrap();
        let p0 = psi.amps()[vac];
        for x in 0..3 {
            let mut occ = vec![0; 3];
            occ[x] = 1;
            let j = m.basis.index_of(&occ).unwrap();
            let phi: f64 = spec.sources.iter().map(|&y| spec.form_factor(x as i64 - y as i64)).sum();
            let num = (2.0 * (psi.amps()[j].conj() * phi * p0).im).max(0.0);
            assert!((k.numerators[(j, vac)] - num).abs() < 1e-12);
        }
    }

    #[test]
    fn form_factor_is_bump() {
        let s = FockSpec::default();
        assert_eq!(s.form_factor(0), 0.1);
        assert!((s.form_factor(1) - 0.075).abs() < 1e-15);
        assert_eq!(s.form_factor(-1), s.form_factor(1));
        assert_eq!(s.form_factor(2), 0.0);
    }

    #[test]
    fn zero_coupling_has_zero_interaction() {
        let spec = FockSpec {
            coupling: 0.0,
            ..FockSpec::default()
        };
        let m = build_fock(&spec).unwrap();
        assert!(m.interaction.matrix().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn rejects_bad_specs() {
        let over = FockSpec {
            dim_cap: 9,
            ..FockSpec::default()
        };
        assert_eq!(
            build_fock(&over).unwrap_err(),
            ModelError::DimensionOverflow { dim: 10, cap: 9 }
        );
        let bad_source = FockSpec {
            sources: vec![7],
            ..FockSpec::default()
        };
        assert!(build_fock(&bad_source).is_err());
    }
}
