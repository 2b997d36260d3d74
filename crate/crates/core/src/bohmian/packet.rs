use std::f64::consts::PI;

use crate::quantum::C64;

/// A closed-form solution of the free 1D Schrödinger equation.
pub trait Wavefunction1d: Sync {
    fn psi(&self, x: f64, t: f64) -> C64;
    fn dpsi_dx(&self, x: f64, t: f64) -> C64;
    fn mass(&self) -> f64;
    fn hbar(&self) -> f64;
}

/// Free Gaussian packet, centred at `x0` with position spread `s0` and
/// group velocity `u` at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub x0: f64,
    pub s0: f64,
    pub u: f64,
    pub mass: f64,
    pub hbar: f64,
}

impl GaussianPacket {
    pub fn new(x0: f64, s0: f64, u: f64, mass: f64) -> Self {
        assert!(s0 > 0.0 && mass > 0.0, "spread and mass must be positive");
        Self {
            x0,
            s0,
            u,
            mass,
            hbar: 1.0,
        }
    }

    /// Spreading rate `hbar / (2 m s0^2)`.
    pub fn tau(&self) -> f64 {
        self.hbar / (2.0 * self.mass * self.s0 * self.s0)
    }

    /// Position spread at `t`: `s0 sqrt(1 + tau^2 t^2)`.
    pub fn spread(&self, t: f64) -> f64 {
        self.s0 * (1.0 + (self.tau() * t).powi(2)).sqrt()
    }

    pub fn center(&self, t: f64) -> f64 {
        self.x0 + self.u * t
    }

    /// `|psi_t(x)|^2`, a normal density.
    pub fn density(&self, x: f64, t: f64) -> f64 {
        let s = self.spread(t);
        let y = x - self.center(t);
        (-y * y / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt())
    }

    /// Closed-form velocity `u + (x - x0 - u t) tau^2 t / (1 + tau^2 t^2)`.
    pub fn velocity(&self, x: f64, t: f64) -> f64 {
        let a = self.tau() * self.tau() * t;
        self.u + (x - self.center(t)) * a / (1.0 + a * t)
    }

    /// Exact Bohmian path through `(t0, x_start)`: the packet's affine
    /// scaling about its moving centre.
    pub fn exact_path(&self, x_start: f64, t0: f64, t: f64) -> f64 {
        self.center(t) + (x_start - self.center(t0)) * self.spread(t) / self.spread(t0)
    }

    fn exponent_and_slope(&self, x: f64, t: f64) -> (C64, C64) {
        let w = C64::new(1.0, self.tau() * t);
        let y = x - self.center(t);
        let k = self.mass * self.u / self.hbar;
        let four_s2 = 4.0 * self.s0 * self.s0;
        let exponent = -y * y / (four_s2 * w) + C64::new(0.0, k * (x - self.x0) - 0.5 * k * self.u * t);
        let slope = -2.0 * y / (four_s2 * w) + C64::new(0.0, k);
        (exponent, slope)
    }
}

impl Wavefunction1d for GaussianPacket {
    fn psi(&self, x: f64, t: f64) -> C64 {
        let w = C64::new(1.0, self.tau() * t);
        let norm = (2.0 * PI * self.s0 * self.s0).powf(-0.25);
        norm / w.sqrt() * self.exponent_and_slope(x, t).0.exp()
    }

    fn dpsi_dx(&self, x: f64, t: f64) -> C64 {
        self.psi(x, t) * self.exponent_and_slope(x, t).1
    }

    fn mass(&self) -> f64 {
        self.mass
    }

    fn hbar(&self) -> f64 {
        self.hbar
    }
}

/// `exp(i (k x - hbar k^2 t / 2m))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub k: f64,
    pub mass: f64,
    pub hbar: f64,
}

impl Wavefunction1d for PlaneWave {
    fn psi(&self, x: f64, t: f64) -> C64 {
        C64::from_polar(1.0, self.k * x - self.hbar * self.k * self.k * t / (2.0 * self.mass))
    }

    fn dpsi_dx(&self, x: f64, t: f64) -> C64 {
        C64::new(0.0, self.k) * self.psi(x, t)
    }

    fn mass(&self) -> f64 {
        self.mass
    }

    fn hbar(&self) -> f64 {
        self.hbar
    }
}
