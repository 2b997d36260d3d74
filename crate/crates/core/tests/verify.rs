use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use bpl_core::models::{build_fock, build_lattice_particle, build_two_level, ConfigMetric, FockSpec, LatticeSpec};
use bpl_core::process::{count_jumps, sample_ensemble, SamplerConfig, Start, Status};
use bpl_core::quantum::{ConfigSpace, HermitianOperator, Povm, QuantumSystem, StateVector, C64};
use bpl_core::verify::{
    additivity_check, distance_functional, equivariance_test, expected_jumps_check, node_avoidance_check,
    rho_leq_mu_check, structural_identities, survival_check, tv_scaling, EnsembleStats, PathRef, VerifyError,
};

const HORIZON: f64 = FRAC_PI_2 - 1e-6;

fn rabi() -> QuantumSystem {
    build_two_level(1.0, 1.0).unwrap().system().unwrap()
}

/// `H = sigma_x` in its ground state: nothing moves.
fn stationary() -> QuantumSystem {
    let h = HermitianOperator::from_real(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let s = 0.5f64.sqrt();
    let psi = StateVector::from_vec(vec![C64::new(s, 0.0), C64::new(-s, 0.0)], 1.0).unwrap();
    QuantumSystem::new(ConfigSpace::numbered(2).unwrap(), h, Povm::identity_partition(2), psi).unwrap()
}

fn chain(sites: usize) -> QuantumSystem {
    build_lattice_particle(&LatticeSpec::new(sites, 1.0, 1.0), |x, _| {
        C64::new(if x == 0.0 { 1.0 } else { 0.0 }, 0.0)
    })
    .unwrap()
    .system()
    .unwrap()
}

#[test]
fn rabi_ensemble_follows_measure() {
    let sys = rabi();
    let cfg = SamplerConfig { seed: 1, ..SamplerConfig::default() };
    let m = 20_000;
    let trajs = sample_ensemble(&sys, Start::InitialMeasure, 0.0, HORIZON, &cfg, m).unwrap();
    let stats = EnsembleStats::new(&trajs, &[0.0, 0.4, 0.7, 1.2], 2);
    let (points, report) = equivariance_test(&sys, &stats, 0.02);
    assert!(report.passed, "{report:?}");
    assert_eq!(points[0].tv, 0.0);
    // t = 0 is a point mass matched exactly; use the interior checkpoints.
    let interior = EnsembleStats::new(&trajs, &[0.4, 0.7, 1.2], 2);
    let rho = rho_leq_mu_check(&sys, &interior);
    assert!(rho.report.passed && rho.worst_excess < 0.0);
    assert_eq!(rho.max_cemetery, 0.0);
    let surv = survival_check(&sys, &trajs, Start::InitialMeasure, &cfg, 400).unwrap();
    assert!(surv.passed, "{surv:?}");
}

#[test]
fn stationary_state_histogram_is_constant() {
    let sys = stationary();
    let trajs = sample_ensemble(&sys, Start::InitialMeasure, 0.0, 3.0, &SamplerConfig::default(), 4000).unwrap();
    assert!(trajs.iter().all(|t| t.jumps.is_empty()));
    let stats = EnsembleStats::new(&trajs, &[0.0, 1.0, 3.0], 2);
    assert_eq!(stats.rho_hat[0], stats.rho_hat[2]);
    let (_, report) = equivariance_test(&sys, &stats, 3.0 / (4000f64).sqrt());
    assert!(report.passed);
    // No node anywhere: the occupancy check does not apply.
    let node = node_avoidance_check(&sys, &trajs, 0, 1.0, 0.1, 1e-12);
    assert!(node.passed && !node.notes.is_empty());
}

#[test]
fn rabi_expected_jumps_equal_one() {
    let sys = rabi();
    let trajs = sample_ensemble(&sys, Start::InitialMeasure, 0.0, HORIZON, &SamplerConfig::default(), 1000).unwrap();
    let (identity, bound) = expected_jumps_check(&sys, &trajs, 0.0, HORIZON, 1e-10).unwrap();
    assert!((identity.theoretical - 1.0).abs() < 1e-9);
    assert_eq!(identity.empirical, 1.0);
    assert!(identity.passed && bound.passed);
    // |A(1,2)| + |A(2,1)| = 2 |cos t sin t| adds up to 1 as well, plus the
    // zero diagonal.
    assert!((bound.theoretical - 2.0).abs() < 1e-9, "{}", bound.theoretical);
    for tr in &trajs {
        assert_eq!(distance_functional(PathRef::Jump(tr, &ConfigMetric::Discrete), 0.0, HORIZON), count_jumps(tr, 0.0, HORIZON) as f64);
    }
}

#[test]
fn zero_hamiltonian_has_no_jumps_and_zero_bound() {
    let psi = StateVector::basis(3, 0, 1.0).unwrap();
    let sys = QuantumSystem::new(ConfigSpace::numbered(3).unwrap(), HermitianOperator::zeros(3), Povm::identity_partition(3), psi).unwrap();
    let trajs = sample_ensemble(&sys, Start::InitialMeasure, 0.0, 2.0, &SamplerConfig::default(), 50).unwrap();
    let (identity, bound) = expected_jumps_check(&sys, &trajs, 0.0, 2.0, 1e-10).unwrap();
    assert_eq!((identity.empirical, identity.theoretical), (0.0, 0.0));
    assert_eq!((bound.empirical, bound.theoretical), (0.0, 0.0));
    assert!(identity.passed && bound.passed);
}

#[test]
fn fock_jump_count_below_bound() {
    let sys = build_fock(&FockSpec::default()).unwrap().system().unwrap();
    let trajs = sample_ensemble(&sys, Start::InitialMeasure, 0.0, 2.0, &SamplerConfig::default(), 3000).unwrap();
    let (identity, bound) = expected_jumps_check(&sys, &trajs, 0.0, 2.0, 1e-10).unwrap();
    assert!(identity.passed, "{identity:?}");
    assert!(bound.passed && bound.theoretical.is_finite());
    assert!(bound.slack > 0.0);
}

#[test]
fn truncation_leaks_mass_to_cemetery() {
    let sys = chain(4);
    let cfg = SamplerConfig { max_jumps: 1, ..SamplerConfig::default() };
    let times = [1.0, 2.0, 4.0, 6.0];
    let trajs = sample_ensemble(&sys, Start::InitialMeasure, 0.0, 6.0, &cfg, 4000).unwrap();
    let stats = EnsembleStats::new(&trajs, &times, sys.dim());
    assert!(stats.status_count(Status::Cemetery) > 0);
    let r = rho_leq_mu_check(&sys, &stats);
    assert!(r.report.passed, "{:?}", r.report);
    assert!(r.strict(), "{r:?}");
    for (k, &t) in times.iter().enumerate() {
        let real: f64 = stats.rho_hat[k].iter().sum();
        assert!((real + stats.cemetery[k] - 1.0).abs() < 1e-12, "{t}");
    }
}

#[test]
fn node_occupancy_at_and_away_from_the_node() {
    let sys = rabi();
    let trajs = sample_ensemble(&sys, Start::InitialMeasure, 0.0, HORIZON, &SamplerConfig::default(), 20_000).unwrap();
    let near = node_avoidance_check(&sys, &trajs, 0, FRAC_PI_2, 1e-3, 1e-12);
    assert!(near.passed && near.empirical <= 1e-4, "{near:?}");
    let mid = node_avoidance_check(&sys, &trajs, 0, FRAC_PI_2, FRAC_PI_4, 1e-12);
    assert!(mid.passed);
    assert!((mid.empirical - 0.5).abs() < 3.0 * (0.25f64 / 20_000.0).sqrt(), "{}", mid.empirical);
}

#[test]
fn structural_identities_on_shipped_models() {
    let times = [0.0, 0.3, 0.9, 1.4];
    for sys in [rabi(), chain(5), build_fock(&FockSpec::default()).unwrap().system().unwrap()] {
        let r = structural_identities(&sys, &times, 1e-12).unwrap();
        assert!(r.passed(1e-10), "{r:?}");
    }
}

#[test]
fn fock_process_additivity() {
    let fock = build_fock(&FockSpec::default()).unwrap();
    let r = additivity_check(&fock, &[0.5], 1e-12).unwrap();
    assert!(r.passed && r.empirical <= 1e-10, "{r:?}");
    let free = build_fock(&FockSpec { coupling: 0.0, ..FockSpec::default() }).unwrap();
    let r = additivity_check(&free, &[0.0, 0.5, 1.0], 1e-12).unwrap();
    assert_eq!(r.empirical, 0.0);
}

#[test]
fn overlapping_supports_are_rejected() {
    let mut fock = build_fock(&FockSpec::default()).unwrap();
    fock.interaction = fock.free.clone();
    assert!(matches!(additivity_check(&fock, &[0.5], 1e-12), Err(VerifyError::Precondition(_))));
}

#[test]
fn equivariance_noise_scales_as_inverse_root() {
    let sys = rabi();
    let cfg = SamplerConfig { seed: 21, ..SamplerConfig::default() };
    let s = tv_scaling(&sys, Start::InitialMeasure, 0.0, HORIZON, &cfg, &[0.4, 0.7, 1.2], 1000, 16).unwrap();
    assert!(s.passed, "{s:?}");
}
