use nalgebra::DVector;

use super::{
    evolve, measure, minimal_rates, ConfigSpace, CurrentMatrix, HermitianOperator, Povm,
    QuantumError, RateKernel, Result, StateVector, C64,
};

/// Sparse access pattern used by [`Evaluator`] to compute one rate column.
#[derive(Debug, Clone)]
enum Stencil {
    /// Singleton partition: column `x` couples to `(q, H[q, x])`.
    Simple { cols: Vec<Vec<(usize, C64)>> },
    /// Block partition: for configuration `x`, the nonzero `(i, j, H[i, j])`
    /// with `j` owned by `x`.
    Blocks {
        blocks: Vec<Vec<usize>>,
        owner: Vec<usize>,
        cols: Vec<Vec<(usize, usize, C64)>>,
    },
    Dense,
}

/// A closed quantum system driving a jump process: configuration labels,
/// Hamiltonian, POVM and the state at time zero.
///
/// Immutable once built; share it across threads and give each worker its
/// own [`Evaluator`].
#[derive(Debug, Clone)]
pub struct QuantumSystem {
    space: ConfigSpace,
    hamiltonian: HermitianOperator,
    povm: Povm,
    psi0: StateVector,
    coeffs: Vec<C64>,
    eigenvalues: Vec<f64>,
    /// Row-major eigenvector matrix.
    rows: Vec<C64>,
    stencil: Stencil,
}

impl QuantumSystem {
    pub fn new(
        space: ConfigSpace,
        hamiltonian: HermitianOperator,
        povm: Povm,
        psi0: StateVector,
    ) -> Result<Self> {
        if space.dim() != povm.num_configs() {
            return Err(QuantumError::DimensionMismatch {
                expected: povm.num_configs(),
                found: space.dim(),
            });
        }
        for found in [hamiltonian.dim(), psi0.dim()] {
            if found != povm.hilbert_dim() {
                return Err(QuantumError::DimensionMismatch {
                    expected: povm.hilbert_dim(),
                    found,
                });
            }
        }
        let spectral = hamiltonian.spectral();
        let d = hamiltonian.dim();
        let coeffs: Vec<C64> = spectral.eigenvectors.ad_mul(psi0.amps()).iter().copied().collect();
        let eigenvalues = spectral.eigenvalues.iter().copied().collect();
        let mut rows = Vec::with_capacity(d * d);
        for i in 0..d {
            for k in 0..d {
                rows.push(spectral.eigenvectors[(i, k)]);
            }
        }
        let stencil = build_stencil(&hamiltonian, &povm);
        Ok(Self {
            space,
            hamiltonian,
            povm,
            psi0,
            coeffs,
            eigenvalues,
            rows,
            stencil,
        })
    }

    pub fn space(&self) -> &ConfigSpace {
        &self.space
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn psi0(&self) -> &StateVector {
        &self.psi0
    }

    pub fn hbar(&self) -> f64 {
        self.psi0.hbar()
    }

    /// Number of configurations.
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn state_at(&self, t: f64) -> StateVector {
        evolve(&self.psi0, &self.hamiltonian, t).expect("dimensions checked at construction")
    }

    pub fn measure_at(&self, t: f64) -> Vec<f64> {
        measure(&self.state_at(t), &self.povm).expect("POVM validated at construction")
    }

    pub fn current_at(&self, t: f64) -> CurrentMatrix {
        super::current(&self.state_at(t), &self.hamiltonian, &self.povm, t)
            .expect("dimensions checked at construction")
    }

    pub fn rates_at(&self, t: f64, node_eps: f64) -> Result<RateKernel> {
        minimal_rates(&self.state_at(t), &self.hamiltonian, &self.povm, t, node_eps)
    }

    pub fn evaluator(&self, node_eps: f64) -> Evaluator<'_> {
        let d = self.hamiltonian.dim();
        Evaluator {
            sys: self,
            node_eps,
            time: f64::NAN,
            phased: vec![C64::new(0.0, 0.0); d],
            psi: vec![C64::new(0.0, 0.0); d],
            have_psi: false,
            scratch: vec![C64::new(0.0, 0.0); d],
            evaluations: 0,
        }
    }
}

fn build_stencil(h: &HermitianOperator, povm: &Povm) -> Stencil {
    let d = h.dim();
    let m = h.matrix();
    let zero = C64::new(0.0, 0.0);
    match povm {
        Povm::Partition { blocks, owner } if povm.is_simple() => {
            let mut cols = vec![Vec::new(); blocks.len()];
            for (x, block) in blocks.iter().enumerate() {
                let j = block[0];
                for i in 0..d {
                    if owner[i] != x && m[(i, j)] != zero {
                        cols[x].push((owner[i], m[(i, j)]));
                    }
                }
            }
            Stencil::Simple { cols }
        }
        Povm::Partition { blocks, owner } => {
            let mut cols = vec![Vec::new(); blocks.len()];
            for (x, block) in blocks.iter().enumerate() {
                for &j in block {
                    for i in 0..d {
                        if m[(i, j)] != zero {
                            cols[x].push((i, j, m[(i, j)]));
                        }
                    }
                }
            }
            Stencil::Blocks {
                blocks: blocks.clone(),
                owner: owner.clone(),
                cols,
            }
        }
        Povm::General { .. } => Stencil::Dense,
    }
}

/// Per-worker scratch space for repeated evaluation of the rates of a
/// [`QuantumSystem`] at arbitrary times.
#[derive(Debug)]
pub struct Evaluator<'a> {
    sys: &'a QuantumSystem,
    node_eps: f64,
    time: f64,
    phased: Vec<C64>,
    psi: Vec<C64>,
    have_psi: bool,
    scratch: Vec<C64>,
    evaluations: u64,
}

impl<'a> Evaluator<'a> {
    pub fn system(&self) -> &'a QuantumSystem {
        self.sys
    }

    pub fn node_eps(&self) -> f64 {
        self.node_eps
    }

    /// Number of distinct times at which the state has been synthesized.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn set_time(&mut self, t: f64) {
        if t == self.time {
            return;
        }
        let hbar = self.sys.hbar();
        for ((p, &c), &lam) in self
            .phased
            .iter_mut()
            .zip(&self.sys.coeffs)
            .zip(&self.sys.eigenvalues)
        {
            *p = c * C64::from_polar(1.0, -lam * t / hbar);
        }
        self.time = t;
        self.have_psi = false;
        self.evaluations += 1;
    }

    #[inline]
    fn component(&self, i: usize) -> C64 {
        let d = self.phased.len();
        let row = &self.sys.rows[i * d..(i + 1) * d];
        let mut acc = C64::new(0.0, 0.0);
        for (v, p) in row.iter().zip(&self.phased) {
            acc += v * p;
        }
        acc
    }

    fn full_state(&mut self) {
        if self.have_psi {
            return;
        }
        for i in 0..self.psi.len() {
            self.psi[i] = self.component(i);
        }
        self.have_psi = true;
    }

    /// `mu_t(x)`.
    pub fn mu(&mut self, x: usize, t: f64) -> f64 {
        self.set_time(t);
        let sys = self.sys;
        match &sys.stencil {
            Stencil::Simple { .. } => {
                let Povm::Partition { blocks, .. } = &sys.povm else {
                    unreachable!()
                };
                self.component(blocks[x][0]).norm_sqr()
            }
            Stencil::Blocks { blocks, .. } => {
                blocks[x].iter().map(|&i| self.component(i).norm_sqr()).sum()
            }
            Stencil::Dense => {
                self.full_state();
                let psi = DVector::from_column_slice(&self.psi);
                psi.dotc(&sys.povm.apply(x, &psi)).re.max(0.0)
            }
        }
    }

    /// Full measure vector `mu_t`.
    pub fn measure(&mut self, t: f64) -> Vec<f64> {
        (0..self.sys.dim()).map(|x| self.mu(x, t)).collect()
    }

    /// Writes `[J_t(q, x)]^+` for every `q` into `out` and returns `mu_t(x)`.
    pub fn outflow(&mut self, x: usize, t: f64, out: &mut [f64]) -> f64 {
        self.set_time(t);
        out.iter_mut().for_each(|v| *v = 0.0);
        let sys = self.sys;
        let k = 2.0 / sys.hbar();
        match &sys.stencil {
            Stencil::Simple { cols } => {
                let Povm::Partition { blocks, .. } = &sys.povm else {
                    unreachable!()
                };
                let px = self.component(blocks[x][0]);
                for &(q, h) in &cols[x] {
                    let pq = self.component(blocks[q][0]);
                    let j = k * (pq.conj() * h * px).im;
                    if j > 0.0 {
                        out[q] += j;
                    }
                }
                px.norm_sqr()
            }
            Stencil::Blocks {
                blocks,
                owner,
                cols,
            } => {
                self.full_state();
                // w = H P(x) psi, accumulated per owning configuration.
                let zero = C64::new(0.0, 0.0);
                self.scratch.iter_mut().for_each(|v| *v = zero);
                for &(i, j, h) in &cols[x] {
                    self.scratch[i] += h * self.psi[j];
                }
                let mut per_q = vec![zero; blocks.len()];
                for (i, w) in self.scratch.iter().enumerate() {
                    if *w != zero {
                        per_q[owner[i]] += self.psi[i].conj() * w;
                    }
                }
                for (q, a) in per_q.iter().enumerate() {
                    if q != x {
                        out[q] = (k * a.im).max(0.0);
                    }
                }
                blocks[x].iter().map(|&i| self.psi[i].norm_sqr()).sum()
            }
            Stencil::Dense => {
                self.full_state();
                let psi = DVector::from_column_slice(&self.psi);
                let pushed = sys.hamiltonian.matrix() * sys.povm.apply(x, &psi);
                for (q, o) in out.iter_mut().enumerate() {
                    if q != x {
                        *o = (k * sys.povm.apply(q, &psi).dotc(&pushed).im).max(0.0);
                    }
                }
                psi.dotc(&sys.povm.apply(x, &psi)).re.max(0.0)
            }
        }
    }

    /// Total jump rate out of `x` at `t`, `None` when `x` is a flagged node.
    pub fn total_rate(&mut self, x: usize, t: f64) -> Option<f64> {
        self.set_time(t);
        let sys = self.sys;
        if let Stencil::Simple { cols } = &sys.stencil {
            // Fast path avoiding the output buffer.
            let Povm::Partition { blocks, .. } = &sys.povm else {
                unreachable!()
            };
            let px = self.component(blocks[x][0]);
            let mu = px.norm_sqr();
            if mu <= self.node_eps {
                return None;
            }
            let k = 2.0 / sys.hbar();
            let mut acc = 0.0;
            for &(q, h) in &cols[x] {
                let pq = self.component(blocks[q][0]);
                let j = k * (pq.conj() * h * px).im;
                if j > 0.0 {
                    acc += j;
                }
            }
            return Some(acc / mu);
        }
        let mut buf = vec![0.0; sys.dim()];
        let mu = self.outflow(x, t, &mut buf);
        if mu <= self.node_eps {
            return None;
        }
        Some(buf.iter().sum::<f64>() / mu)
    }
}
