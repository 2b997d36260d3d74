//! Experiment configuration: one JSON document per run.

use std::fmt;
use std::path::Path;

use bpl_core::bohmian::GaussianPacket;
use bpl_core::models::{
    build_dirac, build_fock, build_lattice_particle, build_two_level, DiracModel, DiracSpec, FockInitial, FockModel,
    FockSpec, JumpModel, LatticeModel, LatticeSpec, Potential,
};
use bpl_core::process::SamplerConfig;
use bpl_core::quantum::{DEFAULT_DIM_CAP, C64};
use serde::{Deserialize, Serialize};

/// Invalid configuration, anchored to a line of the source when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub file: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{}:{}:{}: {}", self.file, l, c, self.message),
            (Some(l), None) => write!(f, "{}:{}: {}", self.file, l, self.message),
            _ => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default)]
    pub checks: Vec<CheckConfig>,
    #[serde(default)]
    pub outputs: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelConfig {
    TwoLevel(TwoLevelParams),
    #[serde(rename = "LATTICE_1D")]
    Lattice1d(LatticeParams),
    Fock(FockParams),
    Dirac(DiracParams),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoLevelParams {
    pub omega: f64,
    pub hbar: f64,
}

impl Default for TwoLevelParams {
    fn default() -> Self {
        Self { omega: 1.0, hbar: 1.0 }
    }
}

/// Gaussian packet `x0`, spread `s0`, group velocity `u`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PacketParams {
    pub x0: f64,
    pub s0: f64,
    pub u: f64,
}

impl Default for PacketParams {
    fn default() -> Self {
        Self { x0: 0.0, s0: 1.0, u: 0.5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeParams {
    /// `[lo, hi]`; sites at `lo + i * spacing`.
    pub window: [f64; 2],
    pub spacing: f64,
    pub mass: f64,
    pub hbar: f64,
    /// One value per site; empty for `V = 0`.
    pub potential: Vec<f64>,
    pub packet: PacketParams,
}

impl Default for LatticeParams {
    fn default() -> Self {
        Self {
            window: [-10.0, 10.0],
            spacing: 0.1,
            mass: 1.0,
            hbar: 1.0,
            potential: Vec::new(),
            packet: PacketParams::default(),
        }
    }
}

impl LatticeParams {
    pub fn packet(&self) -> GaussianPacket {
        GaussianPacket {
            hbar: self.hbar,
            ..GaussianPacket::new(self.packet.x0, self.packet.s0, self.packet.u, self.mass)
        }
    }

    pub fn spec(&self) -> LatticeSpec {
        LatticeSpec {
            hbar: self.hbar,
            potential: Potential::Scalar(self.potential.clone()),
            ..LatticeSpec::covering(self.window[0], self.window[1], self.spacing, self.mass)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FockStart {
    Vacuum,
    /// One boson at the given site.
    Particle(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FockParams {
    pub sites: usize,
    pub spacing: f64,
    pub mass: f64,
    pub hbar: f64,
    pub n_max: usize,
    pub sources: Vec<usize>,
    pub radius: usize,
    pub coupling: f64,
    pub initial: FockStart,
}

impl Default for FockParams {
    fn default() -> Self {
        let s = FockSpec::default();
        Self {
            sites: s.lattice.sites,
            spacing: s.lattice.spacing,
            mass: s.lattice.mass,
            hbar: s.lattice.hbar,
            n_max: s.n_max,
            sources: s.sources,
            radius: s.radius,
            coupling: s.coupling,
            initial: FockStart::Particle(0),
        }
    }
}

impl FockParams {
    pub fn spec(&self) -> FockSpec {
        FockSpec {
            lattice: LatticeSpec {
                hbar: self.hbar,
                ..LatticeSpec::new(self.sites, self.spacing, self.mass)
            },
            n_max: self.n_max,
            sources: self.sources.clone(),
            radius: self.radius,
            coupling: self.coupling,
            initial: match self.initial {
                FockStart::Vacuum => FockInitial::Vacuum,
                FockStart::Particle(x) => FockInitial::Particle(x),
            },
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

/// Periodic grid with initial spinor `exp(-(x-x0)^2/(4 s0^2) + i k0 x) (a, b)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiracParams {
    pub sites: usize,
    pub spacing: f64,
    pub mass: f64,
    pub c: f64,
    pub hbar: f64,
    pub x0: f64,
    pub s0: f64,
    pub k0: f64,
    /// `[[re, im], [re, im]]` of the two components.
    pub spinor: [[f64; 2]; 2],
}

impl Default for DiracParams {
    fn default() -> Self {
        Self {
            sites: 128,
            spacing: 0.125,
            mass: 1.0,
            c: 1.0,
            hbar: 1.0,
            x0: 8.0,
            s0: 1.0,
            k0: 1.0,
            spinor: [[1.0, 0.0], [0.0, 0.0]],
        }
    }
}

impl DiracParams {
    pub fn spec(&self) -> DiracSpec {
        DiracSpec {
            hbar: self.hbar,
            ..DiracSpec::new(self.sites, self.spacing, self.mass, self.c)
        }
    }

    pub fn build(&self) -> bpl_core::models::Result<DiracModel> {
        let (a, b) = (
            C64::new(self.spinor[0][0], self.spinor[0][1]),
            C64::new(self.spinor[1][0], self.spinor[1][1]),
        );
        let (x0, s0, k0) = (self.x0, self.s0, self.k0);
        build_dirac(&self.spec(), |x| {
            let env = C64::new(-(x - x0).powi(2) / (4.0 * s0 * s0), k0 * x).exp();
            [env * a, env * b]
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StartConfig {
    /// Draw the initial configuration from the quantum measure at `t0`.
    InitialMeasure,
    /// Start every path in the configuration with this label.
    Config(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(default)]
    pub t0: f64,
    pub horizon: f64,
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    #[serde(default = "initial_measure")]
    pub start: StartConfig,
}

fn initial_measure() -> StartConfig {
    StartConfig::InitialMeasure
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckConfig {
    /// Exact identities of current and rates at `t0` and the checkpoints.
    Structural {
        #[serde(default = "exact_tol")]
        tolerance: f64,
    },
    /// Rate additivity `sigma(H0 + HI) = sigma(H0) + sigma(HI)`.
    Additivity {
        #[serde(default)]
        times: Vec<f64>,
    },
    /// TV between the ensemble and the quantum measure at the checkpoints.
    Equivariance { tolerance: f64 },
    /// Expected jump count: identity and upper bound.
    ExpectedJumps {
        #[serde(default)]
        t1: Option<f64>,
        #[serde(default)]
        t2: Option<f64>,
    },
    /// Empirical occupancy never significantly above the measure.
    RhoLeqMu,
    /// Occupancy of a node configuration shortly before the node time.
    NodeAvoidance { config: String, time: f64, delta: f64 },
    /// KS test of the first jump time against the exact survival curve.
    Survival {
        #[serde(default = "survival_grid")]
        grid: usize,
    },
    /// Lattice drift against the Bohmian velocity as the spacing shrinks.
    ContinuumLimit {
        eps: Vec<f64>,
        t: f64,
        probe: f64,
        #[serde(default = "five_percent")]
        max_rel_error: f64,
    },
    /// Bohm–Dirac speeds and the log-variation functional against its bound.
    BohmDirac {
        #[serde(rename = "M")]
        m: usize,
        t1: f64,
        t2: f64,
        #[serde(default = "ode_tol")]
        tol: f64,
    },
}

fn exact_tol() -> f64 {
    1e-10
}
fn survival_grid() -> usize {
    2000
}
fn five_percent() -> f64 {
    0.05
}
fn ode_tol() -> f64 {
    1e-9
}

impl CheckConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CheckConfig::Structural { .. } => "structural",
            CheckConfig::Additivity { .. } => "additivity",
            CheckConfig::Equivariance { .. } => "equivariance",
            CheckConfig::ExpectedJumps { .. } => "expected_jumps",
            CheckConfig::RhoLeqMu => "rho_leq_mu",
            CheckConfig::NodeAvoidance { .. } => "node_avoidance",
            CheckConfig::Survival { .. } => "survival",
            CheckConfig::ContinuumLimit { .. } => "continuum_limit",
            CheckConfig::BohmDirac { .. } => "bohm_dirac",
        }
    }

    /// Whether the check reads the jump-process ensemble.
    pub fn uses_ensemble(&self) -> bool {
        matches!(
            self,
            CheckConfig::Equivariance { .. }
                | CheckConfig::ExpectedJumps { .. }
                | CheckConfig::RhoLeqMu
                | CheckConfig::NodeAvoidance { .. }
                | CheckConfig::Survival { .. }
        )
    }

    /// Whether a failure may be sampling noise (rerun once at `4 M`).
    pub fn is_monte_carlo(&self) -> bool {
        self.uses_ensemble() || matches!(self, CheckConfig::BohmDirac { .. })
    }

    fn applies_to(&self, model: &ModelConfig) -> bool {
        match self {
            CheckConfig::Additivity { .. } => matches!(model, ModelConfig::Fock(_)),
            CheckConfig::ContinuumLimit { .. } => matches!(model, ModelConfig::Lattice1d(_)),
            CheckConfig::BohmDirac { .. } => matches!(model, ModelConfig::Dirac(_)),
            _ => !matches!(model, ModelConfig::Dirac(_)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// File names inside the output directory; `null` disables a file.
    pub trajectories: Option<String>,
    pub report: String,
    pub convergence: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            trajectories: Some("trajectories.csv".into()),
            report: "report.json".into(),
            convergence: Some("convergence.csv".into()),
        }
    }
}

impl ModelConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelConfig::TwoLevel(_) => "TWO_LEVEL",
            ModelConfig::Lattice1d(_) => "LATTICE_1D",
            ModelConfig::Fock(_) => "FOCK",
            ModelConfig::Dirac(_) => "DIRAC",
        }
    }

    pub fn boundary(&self) -> &'static str {
        match self {
            ModelConfig::TwoLevel(_) | ModelConfig::Fock(_) => "NONE",
            ModelConfig::Lattice1d(_) => "DIRICHLET",
            ModelConfig::Dirac(_) => "PERIODIC",
        }
    }

    /// Defaults for a model name as accepted by `describe`.
    pub fn default_for(kind: &str) -> Option<Self> {
        Some(match kind {
            "TWO_LEVEL" => ModelConfig::TwoLevel(TwoLevelParams::default()),
            "LATTICE_1D" => ModelConfig::Lattice1d(LatticeParams::default()),
            "FOCK" => ModelConfig::Fock(FockParams::default()),
            "DIRAC" => ModelConfig::Dirac(DiracParams::default()),
            _ => return None,
        })
    }
}

/// A built model.
pub enum Built {
    Jump(JumpModel),
    Lattice(LatticeModel),
    Fock(FockModel),
    Dirac(DiracModel),
}

impl Built {
    pub fn jump_model(&self) -> Option<&JumpModel> {
        match self {
            Built::Jump(m) => Some(m),
            Built::Lattice(l) => Some(&l.model),
            Built::Fock(f) => Some(&f.model),
            Built::Dirac(_) => None,
        }
    }
}

pub fn build(model: &ModelConfig) -> bpl_core::models::Result<Built> {
    Ok(match model {
        ModelConfig::TwoLevel(p) => Built::Jump(build_two_level(p.omega, p.hbar)?),
        ModelConfig::Lattice1d(p) => {
            let packet = p.packet();
            Built::Lattice(build_lattice_particle(&p.spec(), |x, _| {
                bpl_core::bohmian::Wavefunction1d::psi(&packet, x, 0.0)
            })?)
        }
        ModelConfig::Fock(p) => Built::Fock(build_fock(&p.spec())?),
        ModelConfig::Dirac(p) => Built::Dirac(p.build()?),
    })
}

/// 1-based line of the first occurrence of `"key"` in `src`.
fn line_of(src: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    src.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<(Self, String), ConfigError> {
        let file = path.display().to_string();
        let src = std::fs::read_to_string(path).map_err(|e| ConfigError {
            file: file.clone(),
            line: None,
            column: None,
            message: format!("cannot read config: {e}"),
        })?;
        let cfg = Self::parse(&src, &file)?;
        Ok((cfg, src))
    }

    pub fn parse(src: &str, file: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(src).map_err(|e| {
            let msg = e.to_string();
            // Errors inside tagged enums are reported at the end of the
            // enclosing object; point at the offending key instead.
            let named = msg
                .split('`')
                .nth(1)
                .and_then(|k| line_of(src, k))
                .filter(|_| msg.contains("unknown field") || msg.contains("missing field"));
            let (line, column) = match named {
                Some(l) => (Some(l), None),
                None if e.line() > 0 => (Some(e.line()), Some(e.column())),
                None => (None, None),
            };
            let message = match msg.rfind(" at line ") {
                Some(i) => msg[..i].to_string(),
                None => msg,
            };
            ConfigError {
                file: file.to_string(),
                line,
                column,
                message,
            }
        })?;
        cfg.validate(src, file)?;
        Ok(cfg)
    }

    fn validate(&self, src: &str, file: &str) -> Result<(), ConfigError> {
        let fail = |key: &str, message: String| ConfigError {
            file: file.to_string(),
            line: line_of(src, key),
            column: None,
            message,
        };
        self.sampler.validate().map_err(|e| fail("sampler", e.to_string()))?;
        let is_dirac = matches!(self.model, ModelConfig::Dirac(_));
        for c in &self.checks {
            if !c.applies_to(&self.model) {
                return Err(fail(
                    c.name(),
                    format!("check `{}` does not apply to model {}", c.name(), self.model.kind()),
                ));
            }
        }
        for c in &self.checks {
            if let CheckConfig::BohmDirac { m, t1, t2, tol } = c {
                if *m == 0 || !(t2 > t1) || !(*tol > 0.0) {
                    return Err(fail("bohm_dirac", format!("need M >= 1, t2 > t1 and tol > 0, got M = {m}, [{t1}, {t2}], tol = {tol}")));
                }
            }
        }
        let built = build(&self.model).map_err(|e| fail("model", format!("invalid model: {e}")))?;
        if is_dirac {
            return Ok(());
        }
        let Some(ens) = &self.ensemble else {
            return Err(fail("model", format!("model {} needs an `ensemble` section", self.model.kind())));
        };
        if !(ens.t0.is_finite() && ens.horizon.is_finite() && ens.horizon > ens.t0) {
            return Err(fail(
                "horizon",
                format!("horizon must exceed t0, got t0 = {}, horizon = {}", ens.t0, ens.horizon),
            ));
        }
        if ens.m == 0 {
            return Err(fail("M", "ensemble size M must be at least 1".into()));
        }
        if let Some(t) = ens.checkpoints.iter().find(|&&t| !(t >= ens.t0 && t <= ens.horizon)) {
            return Err(fail("checkpoints", format!("checkpoint {t} outside [t0, horizon]")));
        }
        let space = &built.jump_model().expect("jump model").space;
        if let StartConfig::Config(label) = &ens.start {
            if space.index_of(label).is_none() {
                return Err(fail("start", format!("unknown start configuration `{label}`")));
            }
        }
        for c in &self.checks {
            match c {
                CheckConfig::NodeAvoidance { config, time, delta } => {
                    if space.index_of(config).is_none() {
                        return Err(fail("config", format!("unknown configuration `{config}`")));
                    }
                    let probe = time - delta;
                    if !(*delta > 0.0 && probe >= ens.t0 && probe <= ens.horizon) {
                        return Err(fail(
                            "delta",
                            format!("probe time {probe} = time - delta must lie in [t0, horizon]"),
                        ));
                    }
                }
                CheckConfig::ExpectedJumps { t1, t2 } => {
                    let (a, b) = (t1.unwrap_or(ens.t0), t2.unwrap_or(ens.horizon));
                    if !(a >= ens.t0 && a <= b && b <= ens.horizon) {
                        return Err(fail("expected_jumps", format!("window [{a}, {b}] outside [t0, horizon]")));
                    }
                }
                CheckConfig::Equivariance { .. } | CheckConfig::RhoLeqMu if ens.checkpoints.is_empty() => {
                    return Err(fail(c.name(), format!("check `{}` needs ensemble checkpoints", c.name())));
                }
                CheckConfig::ContinuumLimit { eps, probe, .. } => {
                    let ModelConfig::Lattice1d(p) = &self.model else { unreachable!() };
                    if eps.is_empty() || eps.windows(2).any(|w| w[1] >= w[0]) || eps.iter().any(|e| !(*e > 0.0)) {
                        return Err(fail("eps", "eps must be positive and strictly decreasing".into()));
                    }
                    if !(p.window[0] < *probe && *probe < p.window[1]) {
                        return Err(fail("probe", format!("probe {probe} outside the lattice window")));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}
