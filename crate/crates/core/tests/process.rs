use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use bpl_core::models::{build_fock, build_lattice_particle, build_two_level, FockInitial, FockSpec, LatticeSpec};
use bpl_core::process::{
    count_jumps, cumulative_hazard, sample_destination, sample_ensemble, sample_holding_time, sample_trajectory,
    trajectory_rng, write_trajectories_csv, Hazard, Holding, SamplerConfig, Start, Status,
};
use bpl_core::quantum::{QuantumSystem, C64};

fn rabi() -> QuantumSystem {
    build_two_level(1.0, 1.0).unwrap().system().unwrap()
}

/// Three sites, particle on the middle one: both neighbours are reached
/// with equal rates by symmetry.
fn three_sites() -> QuantumSystem {
    build_lattice_particle(&LatticeSpec::new(3, 1.0, 1.0), |x, _| {
        C64::new(if x == 1.0 { 1.0 } else { 0.0 }, 0.0)
    })
    .unwrap()
    .system()
    .unwrap()
}

#[test]
fn rabi_hazard_is_minus_two_log_cos() {
    let sys = rabi();
    let cfg = SamplerConfig::default();
    let mut ev = sys.evaluator(cfg.node_eps);
    for &t in &[0.3, 1.0, 1.5] {
        match cumulative_hazard(&mut ev, 0, 0.0, t, &cfg).unwrap() {
            Hazard::Finite(l) => assert!((l + 2.0 * t.cos().ln()).abs() < 1e-8, "{t}: {l}"),
            h => panic!("{h:?}"),
        }
    }
    assert!(matches!(
        cumulative_hazard(&mut ev, 0, 0.0, FRAC_PI_2, &cfg).unwrap(),
        Hazard::Divergent { .. }
    ));
}

#[test]
fn rabi_holding_time_median_is_quarter_period() {
    let sys = rabi();
    let cfg = SamplerConfig::default();
    let mut ev = sys.evaluator(cfg.node_eps);
    let m = 4000;
    let below = (0..m)
        .filter(|&i| {
            let mut rng = trajectory_rng(11, i);
            match sample_holding_time(&mut ev, 0, 0.0, 2.0, &cfg, &mut rng).unwrap() {
                Holding::Jump(t) => t < FRAC_PI_4,
                Holding::NoJump => panic!("the node forces a jump before pi/2"),
            }
        })
        .count();
    let p = below as f64 / m as f64;
    assert!((p - 0.5).abs() < 3.0 * (0.25 / m as f64).sqrt(), "{p}");
}

#[test]
fn rabi_destination_is_certain() {
    let sys = rabi();
    let mut ev = sys.evaluator(1e-12);
    let mut rng = trajectory_rng(0, 0);
    for i in 1..50 {
        let t = i as f64 * 0.03;
        assert_eq!(sample_destination(&mut ev, 0, t, &mut rng).unwrap(), 1);
    }
}

#[test]
fn symmetric_destinations_split_evenly() {
    let sys = three_sites();
    let k = sys.rates_at(0.3, 1e-12).unwrap();
    assert!((k.sigma[(0, 1)] - k.sigma[(2, 1)]).abs() < 1e-12 && k.sigma[(0, 1)] > 0.0);
    let mut ev = sys.evaluator(1e-12);
    let mut rng = trajectory_rng(5, 0);
    let n = 10_000;
    let left = (0..n)
        .filter(|_| sample_destination(&mut ev, 1, 0.3, &mut rng).unwrap() == 0)
        .count() as f64;
    assert!((left - 0.5 * n as f64).abs() < 3.0 * (0.25 * n as f64).sqrt(), "{left}");
}

#[test]
fn rabi_from_initial_measure_jumps_exactly_once() {
    let sys = rabi();
    let cfg = SamplerConfig::default();
    let horizon = FRAC_PI_2 - 1e-6;
    for tr in sample_ensemble(&sys, Start::InitialMeasure, 0.0, horizon, &cfg, 2000).unwrap() {
        assert_eq!(tr.x0, 0);
        assert_eq!(tr.jumps.len(), 1);
        assert_eq!(tr.status, Status::Horizon);
        assert_eq!(count_jumps(&tr, 0.0, horizon), 1);
    }
}

#[test]
fn free_vacuum_never_jumps() {
    let spec = FockSpec {
        coupling: 0.0,
        initial: FockInitial::Vacuum,
        ..FockSpec::default()
    };
    let sys = build_fock(&spec).unwrap().system().unwrap();
    let trajs = sample_ensemble(&sys, Start::InitialMeasure, 0.0, 5.0, &SamplerConfig::default(), 200).unwrap();
    assert!(trajs.iter().all(|t| t.jumps.is_empty() && t.status == Status::Horizon));
}

#[test]
fn zero_rates_never_jump() {
    let sys = three_sites();
    let cfg = SamplerConfig::default();
    let mut ev = sys.evaluator(cfg.node_eps);
    let mut rng = trajectory_rng(1, 0);
    // At t = 0 the state is real and the window is empty.
    assert_eq!(sample_holding_time(&mut ev, 1, 0.0, 0.0, &cfg, &mut rng).unwrap(), Holding::NoJump);
}

#[test]
fn jump_counts_concatenate() {
    let sys = three_sites();
    let cfg = SamplerConfig { seed: 9, ..SamplerConfig::default() };
    let trajs = sample_ensemble(&sys, Start::InitialMeasure, 0.0, 6.0, &cfg, 200).unwrap();
    assert!(trajs.iter().any(|t| t.jumps.len() > 2));
    for tr in &trajs {
        for &(a, b, c) in &[(0.0, 1.2345, 6.0), (0.5, 3.1, 4.7)] {
            assert_eq!(count_jumps(tr, a, b) + count_jumps(tr, b, c), count_jumps(tr, a, c));
        }
        if let Some(j) = tr.jumps.first() {
            assert_eq!(count_jumps(tr, j.time, j.time), 1);
        }
        assert_eq!(count_jumps(tr, 0.777, 0.777), tr.jumps.iter().filter(|j| j.time == 0.777).count());
    }
}

#[test]
fn paths_are_consistent_with_their_jumps() {
    let sys = three_sites();
    let cfg = SamplerConfig::default();
    for tr in sample_ensemble(&sys, Start::Config(1), 0.0, 6.0, &cfg, 100).unwrap() {
        let mut at = tr.x0;
        let mut last = tr.t0;
        for j in &tr.jumps {
            assert_eq!(j.from, at);
            assert_ne!(j.to, j.from);
            assert!(j.time > last && j.time <= tr.horizon);
            assert_eq!(tr.position_at(j.time), Some(j.to));
            at = j.to;
            last = j.time;
        }
        assert_eq!(tr.final_position(), at);
    }
}

#[test]
fn ensembles_do_not_depend_on_thread_count() {
    let sys = build_fock(&FockSpec::default()).unwrap().system().unwrap();
    let cfg = SamplerConfig { seed: 42, ..SamplerConfig::default() };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let trajs = pool
            .install(|| sample_ensemble(&sys, Start::InitialMeasure, 0.0, 2.0, &cfg, 300))
            .unwrap();
        let mut out = Vec::new();
        write_trajectories_csv(&mut out, sys.space(), &trajs).unwrap();
        out
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(1));
}

#[test]
fn single_path_matches_ensemble_stream() {
    let sys = rabi();
    let cfg = SamplerConfig { seed: 3, ..SamplerConfig::default() };
    let trajs = sample_ensemble(&sys, Start::Config(0), 0.0, 1.5, &cfg, 5).unwrap();
    let mut ev = sys.evaluator(cfg.node_eps);
    let mut rng = trajectory_rng(3, 4);
    let single = sample_trajectory(&mut ev, Start::Config(0), 0.0, 1.5, &cfg, &mut rng).unwrap();
    assert_eq!(single, trajs[4]);
}
