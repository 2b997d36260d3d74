use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bpl_core::bohmian::{continuum_limit_report, ConvergenceReport};
use bpl_core::process::{sample_ensemble, write_trajectories_csv, SamplerConfig, Start, Trajectory};
use bpl_core::quantum::QuantumSystem;
use bpl_core::verify::{
    additivity_check, dirac_l_ensemble, equivariance_test, expected_jumps_check, node_avoidance_check,
    rho_leq_mu_check, structural_identities, survival_check, CheckReport, EnsembleStats,
};
use serde::Serialize;

use crate::config::{build, Built, CheckConfig, EnsembleConfig, ExperimentConfig, ModelConfig, StartConfig};

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub model: &'static str,
    pub boundary: &'static str,
    pub seed: u64,
    /// Ensemble size behind the reported Monte Carlo checks.
    pub samples: Option<usize>,
    pub t0: Option<f64>,
    pub horizon: Option<f64>,
    /// 1 if failing Monte Carlo checks were rerun at four times the size.
    pub reruns: usize,
    pub statuses: BTreeMap<String, usize>,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
}

struct Ensemble {
    start: Start,
    trajectories: Vec<Trajectory>,
    stats: EnsembleStats,
}

fn sample(sys: &QuantumSystem, ens: &EnsembleConfig, sampler: &SamplerConfig, m: usize) -> Result<Ensemble> {
    let start = match &ens.start {
        StartConfig::InitialMeasure => Start::InitialMeasure,
        StartConfig::Config(label) => Start::Config(sys.space().index_of(label).expect("validated label")),
    };
    log::info!("sampling {m} trajectories on [{}, {}]", ens.t0, ens.horizon);
    let trajectories = sample_ensemble(sys, start, ens.t0, ens.horizon, sampler, m)?;
    let stats = EnsembleStats::new(&trajectories, &ens.checkpoints, sys.dim());
    Ok(Ensemble {
        start,
        trajectories,
        stats,
    })
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    built: &'a Built,
    sys: Option<QuantumSystem>,
    convergence: Option<ConvergenceReport>,
}

impl Runner<'_> {
    fn evaluate(&mut self, check: &CheckConfig, ens: Option<&Ensemble>, scale: usize) -> Result<CheckReport> {
        let sampler = &self.cfg.sampler;
        let window = self.cfg.ensemble.as_ref();
        let mut times = window.map(|e| vec![e.t0]).unwrap_or_default();
        times.extend(window.map(|e| e.checkpoints.clone()).unwrap_or_default());
        Ok(match check {
            CheckConfig::Structural { tolerance } => {
                let sys = self.sys.as_ref().expect("jump model");
                structural_identities(sys, &times, sampler.node_eps)?.to_report(*tolerance)
            }
            CheckConfig::Additivity { times: at } => {
                let Built::Fock(fock) = self.built else { unreachable!("validated") };
                let at = if at.is_empty() { &times } else { at };
                additivity_check(fock, at, sampler.node_eps)?
            }
            CheckConfig::Equivariance { tolerance } => {
                let (sys, e) = (self.sys.as_ref().expect("jump model"), ens.expect("ensemble"));
                equivariance_test(sys, &e.stats, *tolerance).1
            }
            CheckConfig::ExpectedJumps { t1, t2 } => {
                let (sys, e) = (self.sys.as_ref().expect("jump model"), ens.expect("ensemble"));
                let w = window.expect("ensemble");
                let (a, b) = (t1.unwrap_or(w.t0), t2.unwrap_or(w.horizon));
                let (identity, bound) = expected_jumps_check(sys, &e.trajectories, a, b, sampler.quad_tol)?;
                CheckReport::new(
                    "expected_jumps",
                    identity.passed && bound.passed,
                    identity.empirical,
                    identity.theoretical,
                    identity.tolerance,
                )
                .with_samples(e.trajectories.len(), Some(sampler.seed))
                .detail("stderr", identity.stderr)
                .detail("bound", bound.theoretical)
                .detail("bound_slack", bound.slack)
                .detail("bound_passed", f64::from(u8::from(bound.passed)))
                .detail("t1", a)
                .detail("t2", b)
            }
            CheckConfig::RhoLeqMu => {
                let (sys, e) = (self.sys.as_ref().expect("jump model"), ens.expect("ensemble"));
                rho_leq_mu_check(sys, &e.stats).report.with_samples(e.stats.m, Some(sampler.seed))
            }
            CheckConfig::NodeAvoidance { config, time, delta } => {
                let (sys, e) = (self.sys.as_ref().expect("jump model"), ens.expect("ensemble"));
                let q = sys.space().index_of(config).expect("validated label");
                node_avoidance_check(sys, &e.trajectories, q, *time, *delta, sampler.node_eps)
                    .with_samples(e.trajectories.len(), Some(sampler.seed))
            }
            CheckConfig::Survival { grid } => {
                let (sys, e) = (self.sys.as_ref().expect("jump model"), ens.expect("ensemble"));
                survival_check(sys, &e.trajectories, e.start, sampler, *grid)?
            }
            CheckConfig::ContinuumLimit {
                eps,
                t,
                probe,
                max_rel_error,
            } => {
                let ModelConfig::Lattice1d(p) = &self.cfg.model else { unreachable!("validated") };
                let report = continuum_limit_report(&p.packet(), eps, *t, *probe, (p.window[0], p.window[1]))?;
                let last = report.rows.last().expect("non-empty eps list").rel_error();
                let passed = report.strictly_decreasing() && last <= *max_rel_error;
                let mut r = CheckReport::new("continuum_limit", passed, last, 0.0, *max_rel_error)
                    .detail("order", report.order().unwrap_or(f64::NAN));
                for row in &report.rows {
                    r = r.detail(format!("abs_error@{}", row.eps), row.abs_error);
                }
                self.convergence = Some(report);
                r
            }
            CheckConfig::BohmDirac { m, t1, t2, tol } => {
                let Built::Dirac(model) = self.built else { unreachable!("validated") };
                dirac_l_ensemble(model, m * scale, *t1, *t2, sampler.seed, *tol)?.to_report()
            }
        })
    }
}

fn write_file(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    f(&mut w)?;
    w.flush()?;
    Ok(path)
}

/// Runs the configured experiment and writes its artifacts into `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let built = build(&cfg.model)?;
    let sys = built.jump_model().map(|m| m.system()).transpose()?;
    let needs_ensemble = cfg.checks.iter().any(CheckConfig::uses_ensemble) || cfg.outputs.trajectories.is_some();
    let ensemble_cfg = cfg.ensemble.as_ref().filter(|_| sys.is_some());
    let mut ensemble = match (&sys, ensemble_cfg) {
        (Some(sys), Some(e)) if needs_ensemble => Some(sample(sys, e, &cfg.sampler, e.m)?),
        _ => None,
    };
    let mut runner = Runner {
        cfg,
        built: &built,
        sys,
        convergence: None,
    };
    let mut reports = Vec::with_capacity(cfg.checks.len());
    for check in &cfg.checks {
        let r = runner.evaluate(check, ensemble.as_ref(), 1)?;
        log::info!("{}: {}", r.name, if r.passed { "pass" } else { "FAIL" });
        reports.push(r);
    }

    let mut reruns = 0;
    let mc_failed = cfg.checks.iter().zip(&reports).any(|(c, r)| c.is_monte_carlo() && !r.passed);
    if mc_failed {
        reruns = 1;
        log::warn!("Monte Carlo check failed; rerunning once at 4x the sample size");
        if let (Some(sys), Some(e)) = (&runner.sys, ensemble_cfg) {
            if ensemble.is_some() {
                ensemble = Some(sample(sys, e, &cfg.sampler, 4 * e.m)?);
            }
        }
        for (c, r) in cfg.checks.iter().zip(reports.iter_mut()) {
            if c.is_monte_carlo() {
                *r = runner.evaluate(c, ensemble.as_ref(), 4)?.note("rerun at 4x sample size");
            }
        }
    }

    let mut statuses = BTreeMap::new();
    if let Some(e) = &ensemble {
        for (s, n) in &e.stats.statuses {
            statuses.insert(s.as_str().to_string(), *n);
        }
    }
    let report = RunReport {
        model: cfg.model.kind(),
        boundary: cfg.model.boundary(),
        seed: cfg.sampler.seed,
        samples: ensemble.as_ref().map(|e| e.trajectories.len()),
        t0: ensemble_cfg.map(|e| e.t0),
        horizon: ensemble_cfg.map(|e| e.horizon),
        reruns,
        statuses,
        passed: reports.iter().all(|r| r.passed),
        checks: reports,
    };

    if let (Some(name), Some(e), Some(sys)) = (&cfg.outputs.trajectories, &ensemble, &runner.sys) {
        let p = write_file(out, name, |w| Ok(write_trajectories_csv(w, sys.space(), &e.trajectories)?))?;
        log::info!("wrote {}", p.display());
    }
    if let (Some(name), Some(conv)) = (&cfg.outputs.convergence, &runner.convergence) {
        write_file(out, name, |w| Ok(conv.write_csv(w)?))?;
    }
    write_file(out, &cfg.outputs.report, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)?;
        Ok(())
    })?;
    Ok(report)
}
