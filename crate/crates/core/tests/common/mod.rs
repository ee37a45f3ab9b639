#![allow(dead_code)]

use nalgebra::DMatrix;
use qsw::evolution::DensityMatrix;
use qsw::graph::Graph;
use qsw::operators::{GlobalOperatorForm, Hamiltonian, JumpOperatorSet};
use qsw::scenario::{build_walk, WalkOptions, WalkRegime};
use qsw::C64;
use rand::rngs::StdRng;
use rand::Rng;

/// Erdos-Renyi graph with weights in `[0.5, 2)`.
pub fn random_graph(rng: &mut StdRng, n: usize) -> Graph {
    let p = rng.random_range(0.2..0.8);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v, rng.random_range(0.5..2.0)));
            }
        }
    }
    Graph::from_edge_list(n, &edges).unwrap()
}

/// `G G^dagger / Tr` for a random complex `G` of random rank.
pub fn random_state(rng: &mut StdRng, n: usize) -> DensityMatrix {
    let rank = rng.random_range(1..=n);
    let g = DMatrix::from_fn(n, rank, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new(rho).unwrap()
}

/// A random regime with its operators.
pub fn random_walk(rng: &mut StdRng, g: &Graph) -> (WalkRegime, Hamiltonian, JumpOperatorSet) {
    let regime = [WalkRegime::Crw, WalkRegime::Qw, WalkRegime::QswGlobal][rng.random_range(0..3)];
    let opts = WalkOptions {
        global_form: if rng.random_bool(0.5) { GlobalOperatorForm::Full } else { GlobalOperatorForm::OffDiagonal },
        ..WalkOptions::default()
    };
    let (h, ls) = build_walk(g, regime, &opts).unwrap();
    (regime, h, ls)
}
