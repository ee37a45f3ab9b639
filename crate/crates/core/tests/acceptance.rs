//! Exit criteria. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any fails.

mod common;

use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use qsw::discrete::{apply_map, kraus_from_stochastic, StochasticMatrix};
use qsw::evolution::{
    build_liouvillian, lindblad_rhs, populations, propagate, DensityMatrix, PropagationConfig, StateTolerances,
};
use qsw::graph::build_line;
use qsw::operators::{audit_axioms, Axiom};
use qsw::oracles::{
    crw_line_analytic, line_spec, qw_line_analytic, reference_lindblad_rk4, total_variation, variance,
    LineDistribution,
};
use qsw::scenario::{build_walk, run_grid, WalkOptions, WalkRegime};
use qsw::C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const N_SITES: usize = 61;
const GAMMA: f64 = 1.0;
const T: f64 = 5.0;
const WINDOW: i64 = 20;
const LIMIT_TOL: f64 = 1e-6;

struct Outcome {
    passed: bool,
    detail: String,
}

fn line_walk(regime: WalkRegime, omegas: &[f64]) -> Vec<Vec<f64>> {
    let line = build_line(N_SITES, GAMMA).unwrap();
    let (h, ls) = build_walk(line.graph(), regime, &WalkOptions::default()).unwrap();
    run_grid(&h, &ls, line.center(), omegas, &[T], &PropagationConfig::default(), 0)
        .unwrap()
        .into_iter()
        .map(|r| r.populations)
        .collect()
}

fn window_error(p: &[f64], oracle: &LineDistribution) -> f64 {
    let h = (N_SITES as i64 - 1) / 2;
    (-WINDOW..=WINDOW).map(|j| (p[(j + h) as usize] - oracle.probability(j)).abs()).fold(0.0, f64::max)
}

fn oracles() -> (LineDistribution, LineDistribution) {
    let spec = line_spec(&build_line(N_SITES, GAMMA).unwrap(), T).unwrap();
    (crw_line_analytic(&spec), qw_line_analytic(&spec))
}

fn positions() -> Vec<i64> {
    build_line(N_SITES, GAMMA).unwrap().positions()
}

fn crw_limit() -> Outcome {
    let start = Instant::now();
    let p = line_walk(WalkRegime::Crw, &[1.0]).remove(0);
    let elapsed = start.elapsed().as_secs_f64();
    let err = window_error(&p, &oracles().0);
    Outcome {
        passed: err <= LIMIT_TOL && elapsed <= 10.0,
        detail: format!("max error {err:.3e} (<= 1e-6), {elapsed:.2} s (<= 10 s)"),
    }
}

fn qw_limit() -> Outcome {
    let p = line_walk(WalkRegime::Qw, &[0.0]).remove(0);
    let err = window_error(&p, &oracles().1);
    Outcome { passed: err <= LIMIT_TOL, detail: format!("max error {err:.3e} (<= 1e-6)") }
}

fn spreading() -> Outcome {
    let x = positions();
    let var_qw = variance(&x, &line_walk(WalkRegime::Qw, &[0.0])[0]);
    let var_crw = variance(&x, &line_walk(WalkRegime::Crw, &[1.0])[0]);
    let (want_qw, want_crw) = (2.0 * (GAMMA * T).powi(2), 2.0 * GAMMA * T);
    let rel_qw = (var_qw / want_qw - 1.0).abs();
    let rel_crw = (var_crw / want_crw - 1.0).abs();
    Outcome {
        passed: rel_qw <= 0.01 && rel_crw <= 0.01,
        detail: format!("QW variance {var_qw:.6} vs {want_qw}, CRW variance {var_crw:.6} vs {want_crw}"),
    }
}

fn interpolation() -> Outcome {
    let omegas: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
    let rows = line_walk(WalkRegime::Crw, &omegas);
    let (crw, qw) = oracles();
    let err_qw = window_error(&rows[0], &qw);
    let err_crw = window_error(&rows[10], &crw);
    let max_step = rows.windows(2).map(|w| total_variation(&w[0], &w[1]).unwrap()).fold(0.0, f64::max);
    Outcome {
        passed: err_qw <= LIMIT_TOL && err_crw <= LIMIT_TOL && max_step <= 0.2,
        detail: format!("omega=0 error {err_qw:.3e}, omega=1 error {err_crw:.3e}, max adjacent TV {max_step:.4} (<= 0.2)"),
    }
}

fn global_distinct() -> Outcome {
    const STEP: f64 = 0.004;
    let line = build_line(N_SITES, GAMMA).unwrap();
    let (h, ls) = build_walk(line.graph(), WalkRegime::QswGlobal, &WalkOptions::default()).unwrap();
    let rho0 = DensityMatrix::basis(N_SITES, line.center()).unwrap();
    let liouvillian = build_liouvillian(&h, &ls, 1.0).unwrap();
    let produced = populations(&propagate(&rho0, &liouvillian, T, &PropagationConfig::default()).unwrap().state).values;
    let (crw, qw) = oracles();
    let tv_crw = total_variation(&produced, &crw.probabilities).unwrap();
    let tv_qw = total_variation(&produced, &qw.probabilities).unwrap();

    let diag = |m: &DMatrix<C64>| -> Vec<f64> { (0..N_SITES).map(|i| m[(i, i)].re).collect() };
    let coarse = diag(&reference_lindblad_rk4(&h, &ls, 1.0, rho0.matrix(), T, STEP).unwrap());
    let fine = diag(&reference_lindblad_rk4(&h, &ls, 1.0, rho0.matrix(), T, STEP / 2.0).unwrap());
    let max_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let halving = max_diff(&coarse, &fine);
    let vs_production = max_diff(&fine, &produced);
    Outcome {
        passed: tv_crw >= 0.01 && tv_qw >= 0.01 && halving <= 1e-7 && vs_production <= 1e-7,
        detail: format!(
            "TV to CRW {tv_crw:.4}, TV to QW {tv_qw:.4} (>= 0.01); brute force step halving {halving:.2e}, \
             brute force vs solver {vs_production:.2e} (<= 1e-7)"
        ),
    }
}

fn axiom_audit() -> Outcome {
    let line = build_line(5, 1.0).unwrap();
    let start = Instant::now();
    let mut passed = true;
    let mut parts = Vec::new();
    for regime in [WalkRegime::Crw, WalkRegime::Qw, WalkRegime::QswGlobal] {
        let (h, ls) = build_walk(line.graph(), regime, &WalkOptions::default()).unwrap();
        let report = audit_axioms(&h, &ls, line.graph(), 1e-10).unwrap();
        let axiom6_nonzero = report.axioms.iter().any(|s| s.axiom == Axiom::PopulationToNeighborCoherence.id() && s.nonzero > 0);
        let axiom6_ok = axiom6_nonzero == (regime == WalkRegime::QswGlobal);
        let sparse = report.connectivity_violations.is_empty();
        let ok = report.max_deviation <= 1e-10 && report.tensor_elements_checked == 625 && sparse && axiom6_ok;
        passed &= ok;
        parts.push(format!(
            "{regime}: deviation {:.1e}, {} nonzero non-adjacent elements, axiom 6 {}",
            report.max_deviation,
            report.connectivity_violations.len(),
            if axiom6_nonzero { "nonzero" } else { "zero" },
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    passed &= elapsed <= 1.0;
    parts.push(format!("{elapsed:.3} s"));
    Outcome { passed, detail: parts.join("; ") }
}

fn state_invariants() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let tol = StateTolerances::PROPAGATED;
    let (mut worst_trace, mut worst_herm, mut worst_eig) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut failures = 0;
    for _ in 0..50 {
        let n = rng.random_range(2..=12);
        let g = common::random_graph(&mut rng, n);
        let (_, h, ls) = common::random_walk(&mut rng, &g);
        let omega = rng.random_range(0.0..=1.0);
        let rho0 = common::random_state(&mut rng, n);
        let liouvillian = build_liouvillian(&h, &ls, omega).unwrap();
        for t in [0.5, 5.0] {
            let d = match propagate(&rho0, &liouvillian, t, &PropagationConfig::default()) {
                Ok(out) => out.state.diagnostics(),
                Err(_) => {
                    failures += 1;
                    continue;
                }
            };
            worst_trace = worst_trace.max(d.trace_drift);
            worst_herm = worst_herm.max(d.hermiticity);
            worst_eig = worst_eig.min(d.min_eigenvalue);
            if !d.within(&tol) {
                failures += 1;
            }
        }
    }
    Outcome {
        passed: failures == 0,
        detail: format!(
            "100 propagations, {failures} failures; worst trace drift {worst_trace:.1e}, \
             hermiticity {worst_herm:.1e}, min eigenvalue {worst_eig:.1e}"
        ),
    }
}

fn superoperator_consistency() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst_ratio = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=40);
        let g = common::random_graph(&mut rng, n);
        let (_, h, ls) = common::random_walk(&mut rng, &g);
        let omega = rng.random_range(0.0..=1.0);
        let rho = common::random_state(&mut rng, n);
        let direct = lindblad_rhs(&h, &ls, omega, &rho).unwrap();
        let via_super = build_liouvillian(&h, &ls, omega).unwrap().apply_to(&rho).unwrap();
        let err = (direct - via_super).camax();
        worst_ratio = worst_ratio.max(err / (1e-12 * (n * n) as f64));
    }
    Outcome {
        passed: worst_ratio <= 1.0,
        detail: format!("100 states, worst error / (1e-12 dim^2) = {worst_ratio:.3}"),
    }
}

fn discrete_embedding() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    let (mut worst_diag, mut worst_completeness) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let n = rng.random_range(2..=10);
        let mut s = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.0..1.0));
        for mut col in s.column_iter_mut() {
            let total = col.sum();
            col /= total;
        }
        let mut p0 = DVector::from_fn(n, |_, _| rng.random_range(0.0..1.0));
        p0 /= p0.sum();
        let stochastic = StochasticMatrix::new(s.clone()).unwrap();
        let ks = kraus_from_stochastic(&stochastic);
        let mut rho = DensityMatrix::diagonal(p0.as_slice()).unwrap();
        let mut p = p0.clone();
        for _ in 0..10 {
            worst_completeness = worst_completeness.max(ks.completeness_deviation());
            rho = apply_map(&ks, &rho).unwrap();
            p = &s * p;
        }
        let diag_err = (0..n).map(|i| (rho.matrix()[(i, i)].re - p[i]).abs()).fold(0.0, f64::max);
        worst_diag = worst_diag.max(diag_err);
    }
    Outcome {
        passed: worst_diag <= 1e-10 && worst_completeness <= 1e-10,
        detail: format!("20 chains, diagonal error {worst_diag:.1e}, completeness deviation {worst_completeness:.1e}"),
    }
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("qsw-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let run = |name: &str| -> Vec<u8> {
        let path = dir.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_qsw"))
            .args(["sweep", "--graph", "line:61:1", "--regime", "crw", "--omega", "0:1:11", "--t", "5", "--output"])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(&path).unwrap()
    };
    let first = run("first.json");
    let second = run("second.json");
    let _ = std::fs::remove_dir_all(&dir);
    Outcome {
        passed: !first.is_empty() && first == second,
        detail: format!("{} and {} bytes, identical: {}", first.len(), second.len(), first == second),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("classical limit on the line", crw_limit),
        ("coherent limit on the line", qw_limit),
        ("ballistic and diffusive spreading", spreading),
        ("omega sweep endpoints and continuity", interpolation),
        ("global-operator walk differs from both limits", global_distinct),
        ("axiom table and tensor sparsity", axiom_audit),
        ("propagated state invariants", state_invariants),
        ("superoperator matches direct right-hand side", superoperator_consistency),
        ("discrete chain embedding", discrete_embedding),
        ("sweep output is reproducible", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        println!("criterion {:>2} {}: {name}: {}", i + 1, if outcome.passed { "PASS" } else { "FAIL" }, outcome.detail);
        failed += usize::from(!outcome.passed);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
