mod common;

use proptest::prelude::*;
use qsw::graph::{build_line, Graph};
use qsw::operators::{axiom_rate, tensor_element, Axiom, GlobalOperatorForm};
use qsw::scenario::{build_walk, WalkOptions, WalkRegime};
use qsw::C64;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn all_regimes(g: &Graph) -> Vec<(WalkRegime, qsw::operators::Hamiltonian, qsw::operators::JumpOperatorSet)> {
    let mut out = Vec::new();
    for regime in [WalkRegime::Crw, WalkRegime::Qw, WalkRegime::QswGlobal] {
        let (h, ls) = build_walk(g, regime, &WalkOptions::default()).unwrap();
        out.push((regime, h, ls));
    }
    let offdiag = WalkOptions { global_form: GlobalOperatorForm::OffDiagonal, ..WalkOptions::default() };
    let (h, ls) = build_walk(g, WalkRegime::QswGlobal, &offdiag).unwrap();
    out.push((WalkRegime::QswGlobal, h, ls));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generator_preserves_trace_and_hermiticity(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng, n);
        for (_, h, ls) in all_regimes(&g) {
            for b in 0..n {
                for beta in 0..n {
                    let flow: C64 = (0..n).map(|a| tensor_element(&h, &ls, a, a, b, beta).unwrap().value).sum();
                    prop_assert!(flow.norm() <= 1e-12);
                    for a in 0..n {
                        for alpha in 0..n {
                            let t = tensor_element(&h, &ls, a, alpha, b, beta).unwrap().value;
                            let mirrored = tensor_element(&h, &ls, alpha, a, beta, b).unwrap().value;
                            prop_assert!((t - mirrored.conj()).norm() <= 1e-13);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn coherent_walk_has_no_population_transfer() {
    let line = build_line(7, 1.0).unwrap();
    let (h, ls) = build_walk(line.graph(), WalkRegime::Qw, &WalkOptions::default()).unwrap();
    for a in 0..7 {
        for b in 0..7 {
            if a != b {
                assert_eq!(tensor_element(&h, &ls, a, a, b, b).unwrap().value, C64::new(0.0, 0.0));
            }
        }
    }
}

#[test]
fn axiom6_on_consecutive_triples() {
    for n in [3, 5, 7, 9] {
        let line = build_line(n, 1.0).unwrap();
        for (regime, h, ls) in all_regimes(line.graph()) {
            for m in 1..n - 1 {
                let rate = axiom_rate(&h, &ls, Axiom::PopulationToNeighborCoherence, m, m - 1, m + 1).unwrap().value;
                if regime == WalkRegime::QswGlobal {
                    assert!(rate.norm() > 0.5, "{regime} n={n} m={m}: {rate}");
                } else {
                    assert_eq!(rate, C64::new(0.0, 0.0));
                }
            }
        }
    }
}
