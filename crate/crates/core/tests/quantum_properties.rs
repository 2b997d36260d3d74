use bpl_core::quantum::{
    current, evolve, master_equation_rhs, measure, measure_derivative, minimal_rates, ConfigSpace,
    HermitianOperator, Povm, QuantumSystem, StateVector, C64,
};
use bpl_core::verify::{minimality_comparison, structural_identities};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn hermitian(d: usize, re: &[f64], im: &[f64]) -> HermitianOperator {
    let mut m = DMatrix::<C64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = C64::new(re[i * d + j], im[i * d + j]);
        }
    }
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    HermitianOperator::new(h).unwrap()
}

fn state(d: usize, re: &[f64], im: &[f64]) -> StateVector {
    let v: Vec<C64> = (0..d).map(|i| C64::new(re[i], im[i] + 1e-3)).collect();
    StateVector::normalized(DVector::from_vec(v), 1.0).unwrap()
}

/// Consecutive basis indices grouped into blocks of size `sizes[k] % 3 + 1`.
fn blocks(d: usize, sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut i = 0;
    for s in sizes.iter().cycle() {
        if i >= d {
            break;
        }
        let end = (i + s % 3 + 1).min(d);
        out.push((i..end).collect());
        i = end;
    }
    out
}

fn as_general(blocks: &[Vec<usize>], d: usize) -> Povm {
    let elements = blocks
        .iter()
        .map(|b| {
            let mut p = DMatrix::<C64>::zeros(d, d);
            for &i in b {
                p[(i, i)] = C64::new(1.0, 0.0);
            }
            p
        })
        .collect();
    Povm::general(elements).unwrap()
}

#[derive(Debug, Clone)]
struct Case {
    d: usize,
    h_re: Vec<f64>,
    h_im: Vec<f64>,
    s_re: Vec<f64>,
    s_im: Vec<f64>,
    sizes: Vec<usize>,
    t: f64,
}

fn case() -> impl Strategy<Value = Case> {
    (2usize..=12).prop_flat_map(|d| {
        (
            prop::collection::vec(-1.0..1.0f64, d * d),
            prop::collection::vec(-1.0..1.0f64, d * d),
            prop::collection::vec(-1.0..1.0f64, d),
            prop::collection::vec(-1.0..1.0f64, d),
            prop::collection::vec(0usize..3, d),
            0.0..3.0f64,
        )
            .prop_map(move |(h_re, h_im, s_re, s_im, sizes, t)| Case {
                d,
                h_re,
                h_im,
                s_re,
                s_im,
                sizes,
                t,
            })
    })
}

fn system(c: &Case, general: bool) -> QuantumSystem {
    let h = hermitian(c.d, &c.h_re, &c.h_im);
    let b = blocks(c.d, &c.sizes);
    let n = b.len();
    let povm = if general { as_general(&b, c.d) } else { Povm::partition(b, c.d).unwrap() };
    QuantumSystem::new(ConfigSpace::numbered(n).unwrap(), h, povm, state(c.d, &c.s_re, &c.s_im)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn structural_identities_hold(c in case()) {
        for general in [false, true] {
            let sys = system(&c, general);
            let r = structural_identities(&sys, &[0.0, c.t], 1e-12).unwrap();
            prop_assert!(r.passed(TOL), "{:?}", r);
        }
    }

    #[test]
    fn evolution_is_unitary(c in case()) {
        let h = hermitian(c.d, &c.h_re, &c.h_im);
        let psi = state(c.d, &c.s_re, &c.s_im);
        let a = evolve(&psi, &h, c.t).unwrap();
        prop_assert!((a.norm() - 1.0).abs() < TOL);
        let back = evolve(&a, &h, -c.t).unwrap();
        prop_assert!((back.amps() - psi.amps()).norm() < 1e-9);
    }

    #[test]
    fn measure_derivative_matches_finite_difference(c in case()) {
        let sys = system(&c, false);
        let dt = 1e-5;
        let md = measure_derivative(&sys.state_at(c.t), sys.hamiltonian(), sys.povm(), c.t).unwrap();
        let plus = sys.measure_at(c.t + dt);
        let minus = sys.measure_at(c.t - dt);
        let norm = sys.hamiltonian().matrix().norm().max(1.0);
        for q in 0..sys.dim() {
            let fd = (plus[q] - minus[q]) / (2.0 * dt);
            prop_assert!((fd - md.direct[q]).abs() < 1e-6 * norm * norm, "{} vs {}", fd, md.direct[q]);
        }
        prop_assert!(md.direct.iter().sum::<f64>().abs() < TOL);
    }

    #[test]
    fn evaluator_agrees_with_kernel(c in case()) {
        for general in [false, true] {
            let sys = system(&c, general);
            let k = sys.rates_at(c.t, 1e-12).unwrap();
            let mut ev = sys.evaluator(1e-12);
            let mut out = vec![0.0; sys.dim()];
            for x in 0..sys.dim() {
                let mu = ev.outflow(x, c.t, &mut out);
                prop_assert!((mu - k.mu[x]).abs() < TOL);
                for q in 0..sys.dim() {
                    prop_assert!((out[q] - k.numerators[(q, x)]).abs() < 1e-9, "{} vs {}", out[q], k.numerators[(q, x)]);
                }
                match (ev.total_rate(x, c.t), k.total_rate(x)) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0)),
                    (None, None) => {}
                    other => prop_assert!(false, "singularity mismatch {:?}", other),
                }
            }
        }
    }

    #[test]
    fn flux_matched_alternatives_are_not_smaller(c in case(), s in 0.0..2.0f64, kv in prop::collection::vec(0.0..1.0f64, 144)) {
        let sys = system(&c, false);
        let psi = sys.state_at(c.t);
        let kernel = minimal_rates(&psi, sys.hamiltonian(), sys.povm(), c.t, 1e-12).unwrap();
        let n = kernel.dim();
        let j = current(&psi, sys.hamiltonian(), sys.povm(), c.t).unwrap().j;
        let sym = DMatrix::from_fn(n, n, |a, b| if a == b { 0.0 } else { kv[a.min(b) * 12 + a.max(b)] });
        let cmp = minimality_comparison(&kernel, &j, &sym, s);
        prop_assert!(cmp.current_defect < 1e-9 * (1.0 + s / kernel.mu.iter().cloned().filter(|m| *m > 0.0).fold(1.0, f64::min)));
        prop_assert!(cmp.min_gap >= 0.0);
    }

    #[test]
    fn master_equation_preserves_mass(c in case(), rho in prop::collection::vec(0.0..1.0f64, 12)) {
        let sys = system(&c, false);
        let k = sys.rates_at(c.t, 1e-12).unwrap();
        let rho = &rho[..k.dim()];
        let rhs = master_equation_rhs(&k, rho);
        let scale = rho.iter().zip(&k.total).map(|(r, s)| r * s).sum::<f64>().max(1.0);
        prop_assert!(rhs.iter().sum::<f64>().abs() < 1e-9 * scale);
    }
}

#[test]
fn uniform_general_povm_gives_uniform_measure() {
    let d = 4;
    let elements = vec![DMatrix::<C64>::identity(d, d) * C64::new(0.25, 0.0); 4];
    let povm = Povm::general(elements).unwrap();
    let psi = StateVector::normalized(
        DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.3, -0.2), C64::new(0.0, 2.0), C64::new(-1.0, 0.5)]),
        1.0,
    )
    .unwrap();
    for v in measure(&psi, &povm).unwrap() {
        assert!((v - 0.25).abs() < 1e-14);
    }
}

#[test]
fn zero_hamiltonian_freezes_state() {
    let psi = StateVector::basis(3, 1, 1.0).unwrap();
    let out = evolve(&psi, &HermitianOperator::zeros(3), 17.0).unwrap();
    assert_eq!(out.amps(), psi.amps());
}

#[test]
fn real_state_real_hamiltonian_has_no_current() {
    let h = HermitianOperator::from_real(&[vec![0.0, 1.0, 0.5], vec![1.0, 2.0, -1.0], vec![0.5, -1.0, 0.0]]).unwrap();
    let psi = StateVector::normalized(
        DVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(-0.3, 0.0), C64::new(0.2, 0.0)]),
        1.0,
    )
    .unwrap();
    let j = current(&psi, &h, &Povm::identity_partition(3), 0.0).unwrap();
    assert!(j.j.iter().all(|&v| v == 0.0));
}

#[test]
fn stationary_state_has_zero_measure_derivative() {
    let h = HermitianOperator::from_real(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let s = 0.5f64.sqrt();
    let psi = StateVector::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0)], 1.0).unwrap();
    let md = measure_derivative(&psi, &h, &Povm::identity_partition(2), 0.3).unwrap();
    assert!(md.direct.iter().all(|v| v.abs() < 1e-15));
}
