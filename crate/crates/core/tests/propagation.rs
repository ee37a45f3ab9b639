mod common;

use nalgebra::DMatrix;
use qsw::evolution::{
    build_liouvillian, coherence_l1, populations, propagate, DensityMatrix, Method, PropagationConfig,
};
use qsw::graph::{build_line, classical_generator};
use qsw::oracles::{classical_master_solve, reference_lindblad_rk4, schrodinger_solve};
use qsw::scenario::{build_walk, WalkOptions, WalkRegime};
use qsw::C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).camax()
}

#[test]
fn semigroup() {
    let mut rng = StdRng::seed_from_u64(21);
    for _ in 0..12 {
        let n = rng.random_range(2..=10);
        let g = common::random_graph(&mut rng, n);
        let (_, h, ls) = common::random_walk(&mut rng, &g);
        let l = build_liouvillian(&h, &ls, rng.random_range(0.0..=1.0)).unwrap();
        let rho0 = common::random_state(&mut rng, n);
        for method in [Method::MatrixExponential, Method::AdaptiveRk] {
            let cfg = PropagationConfig::with_method(method);
            let (t1, t2) = (rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
            let split = propagate(&propagate(&rho0, &l, t1, &cfg).unwrap().state, &l, t2, &cfg).unwrap();
            let whole = propagate(&rho0, &l, t1 + t2, &cfg).unwrap();
            let err = max_diff(split.state.matrix(), whole.state.matrix());
            assert!(err <= 10.0 * cfg.rel_tol, "{method}: {err:e}");
        }
    }
}

#[test]
fn coherent_endpoint_matches_schrodinger() {
    let mut rng = StdRng::seed_from_u64(22);
    for _ in 0..10 {
        let n = rng.random_range(2..=12);
        let g = common::random_graph(&mut rng, n);
        let (_, h, ls) = common::random_walk(&mut rng, &g);
        let mut psi: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|z| *z /= norm);
        let t = rng.random_range(0.5..5.0);
        let out = propagate(&DensityMatrix::pure(&psi).unwrap(), &build_liouvillian(&h, &ls, 0.0).unwrap(), t, &PropagationConfig::default())
            .unwrap();
        let phi = nalgebra::DVector::from_vec(schrodinger_solve(&h, &psi, t).unwrap());
        let expected = &phi * phi.adjoint();
        assert!(max_diff(out.state.matrix(), &expected) <= 1e-8);
    }
}

#[test]
fn classical_endpoint_stays_diagonal() {
    let mut rng = StdRng::seed_from_u64(23);
    for _ in 0..10 {
        let n = rng.random_range(2..=12);
        let g = common::random_graph(&mut rng, n);
        let (h, ls) = build_walk(&g, WalkRegime::Crw, &WalkOptions::default()).unwrap();
        let mut p0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = p0.iter().sum();
        p0.iter_mut().for_each(|p| *p /= total);
        let l = build_liouvillian(&h, &ls, 1.0).unwrap();
        for t in [0.1, 1.0, 5.0] {
            let out = propagate(&DensityMatrix::diagonal(&p0).unwrap(), &l, t, &PropagationConfig::default()).unwrap();
            assert!(coherence_l1(&out.state) <= 1e-10);
            let expected = classical_master_solve(&classical_generator(&g), &p0, t).unwrap();
            let got = populations(&out.state).values;
            for (x, y) in got.iter().zip(&expected) {
                assert!((x - y).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn methods_agree_on_line_walks() {
    let line = build_line(61, 1.0).unwrap();
    let rho0 = DensityMatrix::basis(61, line.center()).unwrap();
    for (regime, omega) in [(WalkRegime::Crw, 1.0), (WalkRegime::Qw, 0.0), (WalkRegime::Crw, 0.5), (WalkRegime::QswGlobal, 1.0)] {
        let (h, ls) = build_walk(line.graph(), regime, &WalkOptions::default()).unwrap();
        let l = build_liouvillian(&h, &ls, omega).unwrap();
        let expm = propagate(&rho0, &l, 5.0, &PropagationConfig::with_method(Method::MatrixExponential)).unwrap();
        let rk = propagate(&rho0, &l, 5.0, &PropagationConfig::with_method(Method::AdaptiveRk)).unwrap();
        assert_eq!(expm.method, Method::MatrixExponential);
        assert_eq!(rk.method, Method::AdaptiveRk);
        let err = max_diff(expm.state.matrix(), rk.state.matrix());
        assert!(err <= 1e-7, "{regime} omega={omega}: {err:e}");
    }
}

#[test]
fn intermediate_omega_matches_brute_force() {
    let line = build_line(31, 1.0).unwrap();
    let rho0 = DensityMatrix::basis(31, line.center()).unwrap();
    for (regime, omega) in [(WalkRegime::Crw, 0.1), (WalkRegime::Crw, 0.6), (WalkRegime::QswGlobal, 0.3)] {
        let (h, ls) = build_walk(line.graph(), regime, &WalkOptions::default()).unwrap();
        let out = propagate(&rho0, &build_liouvillian(&h, &ls, omega).unwrap(), 3.0, &PropagationConfig::default()).unwrap();
        let reference = reference_lindblad_rk4(&h, &ls, omega, rho0.matrix(), 3.0, 0.002).unwrap();
        assert!(max_diff(out.state.matrix(), &reference) <= 1e-9, "{regime} omega={omega}");
    }
}

#[test]
fn large_graphs_use_runge_kutta() {
    let line = build_line(71, 1.0).unwrap();
    let (h, ls) = build_walk(line.graph(), WalkRegime::Crw, &WalkOptions::default()).unwrap();
    let out = propagate(
        &DensityMatrix::basis(71, line.center()).unwrap(),
        &build_liouvillian(&h, &ls, 1.0).unwrap(),
        1.0,
        &PropagationConfig::default(),
    )
    .unwrap();
    assert_eq!(out.method, Method::AdaptiveRk);
    assert!(out.steps > 0);
    assert!(out.diagnostics.trace_drift <= 1e-9);
}
