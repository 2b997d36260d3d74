use std::f64::consts::PI;

use rustfft::FftPlanner;

use super::{invalid, ModelError, Result};
use crate::quantum::C64;

/// Two-component spinor `(psi_1, psi_2)`.
pub type Spinor = [C64; 2];

/// Free 1+1D Dirac particle on a periodic grid, with `alpha = sigma_x` and
/// `beta = sigma_z`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracSpec {
    pub sites: usize,
    pub spacing: f64,
    pub mass: f64,
    pub c: f64,
    pub hbar: f64,
    pub origin: f64,
}

impl DiracSpec {
    pub fn new(sites: usize, spacing: f64, mass: f64, c: f64) -> Self {
        Self {
            sites,
            spacing,
            mass,
            c,
            hbar: 1.0,
            origin: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 || !self.sites.is_multiple_of(2) {
            return Err(invalid("sites", format!("need an even count >= 2, got {}", self.sites)));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(invalid("spacing", format!("must be positive, got {}", self.spacing)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid("c", format!("must be positive, got {}", self.c)));
        }
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(invalid("mass", format!("must be non-negative, got {}", self.mass)));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(invalid("hbar", format!("must be positive, got {}", self.hbar)));
        }
        Ok(())
    }

    /// Length of the periodic box.
    pub fn period(&self) -> f64 {
        self.sites as f64 * self.spacing
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.sites)
            .map(|j| self.origin + j as f64 * self.spacing)
            .collect()
    }

    /// Rest energy `m c^2`.
    pub fn rest_energy(&self) -> f64 {
        self.mass * self.c * self.c
    }
}

/// Band-limited Dirac field: the grid profile is expanded in the `sites`
/// plane waves of the box and each mode is propagated exactly, so the field
/// can be evaluated at any `(x, t)`.
#[derive(Debug, Clone)]
pub struct DiracModel {
    spec: DiracSpec,
    wavenumbers: Vec<f64>,
    coeffs: Vec<Spinor>,
}

/// `exp(-i H(k) t / hbar)` applied to `v`, with `H(k) = c hbar k sigma_x + m c^2 sigma_z`.
fn propagate(spec: &DiracSpec, k: f64, t: f64, v: Spinor) -> Spinor {
    let a = spec.c * spec.hbar * k;
    let b = spec.rest_energy();
    let e = a.hypot(b);
    if e == 0.0 || t == 0.0 {
        return v;
    }
    let th = e * t / spec.hbar;
    let (s, co) = th.sin_cos();
    let f = C64::new(0.0, -s / e);
    [
        v[0] * co + f * (b * v[0] + a * v[1]),
        v[1] * co + f * (a * v[0] - b * v[1]),
    ]
}

fn apply_h(spec: &DiracSpec, k: f64, v: Spinor) -> Spinor {
    let a = spec.c * spec.hbar * k;
    let b = spec.rest_energy();
    [v[0] * b + v[1] * a, v[0] * a - v[1] * b]
}

impl DiracModel {
    pub fn spec(&self) -> &DiracSpec {
        &self.spec
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// `exp(i k_m (x - origin))` for every mode, by recurrence in `m`.
    fn phases(&self, x: f64) -> impl Iterator<Item = C64> {
        let r = x - self.spec.origin;
        let dk = 2.0 * PI / self.spec.period();
        let step = C64::from_polar(1.0, dk * r);
        let first = C64::from_polar(1.0, self.wavenumbers[0] * r);
        std::iter::successors(Some(first), move |p| Some(p * step)).take(self.wavenumbers.len())
    }

    fn evolved(&self, t: f64) -> Vec<Spinor> {
        self.wavenumbers
            .iter()
            .zip(&self.coeffs)
            .map(|(&k, &v)| propagate(&self.spec, k, t, v))
            .collect()
    }

    /// Field and its spatial derivative at `(x, t)`.
    pub fn spinor_and_dx(&self, x: f64, t: f64) -> (Spinor, Spinor) {
        let z = C64::new(0.0, 0.0);
        let (mut psi, mut dpsi) = ([z; 2], [z; 2]);
        let mut ph = self.phases(x);
        for (&k, v) in self.wavenumbers.iter().zip(self.evolved(t)) {
            let e = ph.next().expect("one phase per mode");
            let ik = C64::new(0.0, k);
            for c in 0..2 {
                psi[c] += e * v[c];
                dpsi[c] += ik * e * v[c];
            }
        }
        (psi, dpsi)
    }

    pub fn spinor_at(&self, x: f64, t: f64) -> Spinor {
        self.spinor_and_dx(x, t).0
    }

    pub fn dspinor_dx(&self, x: f64, t: f64) -> Spinor {
        self.spinor_and_dx(x, t).1
    }

    /// `d psi / dt = -(i/hbar) H psi`, evaluated mode by mode.
    pub fn dspinor_dt(&self, x: f64, t: f64) -> Spinor {
        let z = C64::new(0.0, 0.0);
        let mut out = [z; 2];
        let f = C64::new(0.0, -1.0 / self.spec.hbar);
        let mut ph = self.phases(x);
        for (&k, v) in self.wavenumbers.iter().zip(self.evolved(t)) {
            let e = ph.next().expect("one phase per mode");
            let hv = apply_h(&self.spec, k, v);
            for c in 0..2 {
                out[c] += f * e * hv[c];
            }
        }
        out
    }

    /// `psi^* psi` at `(x, t)`.
    pub fn density(&self, x: f64, t: f64) -> f64 {
        let p = self.spinor_at(x, t);
        p[0].norm_sqr() + p[1].norm_sqr()
    }

    /// Field values at the grid points, computed by inverse FFT.
    pub fn grid_state(&self, t: f64) -> Vec<Spinor> {
        let n = self.spec.sites;
        let ev = self.evolved(t);
        let mut planner = FftPlanner::<f64>::new();
        let ifft = planner.plan_fft_inverse(n);
        let mut out = vec![[C64::new(0.0, 0.0); 2]; n];
        for c in 0..2 {
            // mode m of the symmetric range lives at FFT bin m mod n
            let mut buf = vec![C64::new(0.0, 0.0); n];
            for (m, v) in ev.iter().enumerate() {
                buf[bin_of(m, n)] = v[c];
            }
            ifft.process(&mut buf);
            for (o, b) in out.iter_mut().zip(buf) {
                o[c] = b;
            }
        }
        out
    }

    /// Total probability `sum_j psi^* psi eps` on the grid.
    pub fn norm(&self, t: f64) -> f64 {
        self.grid_state(t)
            .iter()
            .map(|p| p[0].norm_sqr() + p[1].norm_sqr())
            .sum::<f64>()
            * self.spec.spacing
    }
}

/// Modes are stored for `m = 0..n` as wavenumber index `m - n/2`.
fn bin_of(m: usize, n: usize) -> usize {
    (m + n - n / 2) % n
}

/// Samples `profile(x)` on the grid, normalizes to `sum |psi|^2 eps = 1`,
/// and expands it in plane waves.
pub fn build_dirac<F>(spec: &DiracSpec, profile: F) -> Result<DiracModel>
where
    F: Fn(f64) -> Spinor,
{
    spec.validate()?;
    let n = spec.sites;
    let samples: Vec<Spinor> = spec.positions().into_iter().map(&profile).collect();
    let norm: f64 = samples
        .iter()
        .map(|p| p[0].norm_sqr() + p[1].norm_sqr())
        .sum::<f64>()
        * spec.spacing;
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(ModelError::NonNormalizable);
    }
    let scale = 1.0 / (norm.sqrt() * n as f64);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut coeffs = vec![[C64::new(0.0, 0.0); 2]; n];
    for c in 0..2 {
        let mut buf: Vec<C64> = samples.iter().map(|p| p[c]).collect();
        fft.process(&mut buf);
        for (m, v) in coeffs.iter_mut().enumerate() {
            v[c] = buf[bin_of(m, n)] * scale;
        }
    }
    let wavenumbers = (0..n)
        .map(|m| 2.0 * PI * (m as f64 - (n / 2) as f64) / spec.period())
        .collect();
    Ok(DiracModel {
        spec: spec.clone(),
        wavenumbers,
        coeffs,
    })
}
