//! Discrete-time walks: Markov chains on a graph and their embedding as
//! quantum stochastic maps `rho -> sum_k C_k rho C_k^dagger`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::evolution::{DensityMatrix, StateTolerances};
use crate::graph::Graph;
use crate::linalg::{C64, ZERO};

/// Column-stochastic matrix, `p'_a = sum_b S[a][b] p_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    entries: DMatrix<f64>,
}

impl StochasticMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n != entries.ncols() {
            return Err(Error::DimensionMismatch { expected: n, found: entries.ncols() });
        }
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if let Some(bad) = entries.iter().find(|&&x| !(x >= 0.0)) {
            return Err(Error::InvalidStochasticMatrix(format!("entry {bad} is negative")));
        }
        for (b, col) in entries.column_iter().enumerate() {
            let sum = col.sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidStochasticMatrix(format!("column {b} sums to {sum}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: p.len() });
        }
        Ok((&self.entries * nalgebra::DVector::from_column_slice(p)).as_slice().to_vec())
    }
}

/// Lazy random walk: stay put with probability `hold`, otherwise move to a
/// uniformly chosen neighbour.
pub fn lazy_walk_matrix(g: &Graph, hold: f64) -> Result<StochasticMatrix> {
    if !(0.0..=1.0).contains(&hold) {
        return Err(Error::InvalidStochasticMatrix(format!("hold probability {hold} outside [0, 1]")));
    }
    let n = g.n_vertices();
    let mut s = DMatrix::zeros(n, n);
    for b in 0..n {
        let degree = g.degree(b);
        if degree == 0 {
            if hold < 1.0 {
                return Err(Error::IsolatedVertexWithoutHold(b));
            }
        } else {
            let move_prob = (1.0 - hold) / degree as f64;
            for &(a, _) in g.neighbors(b) {
                s[(a, b)] = move_prob;
            }
        }
        s[(b, b)] = hold;
    }
    StochasticMatrix::new(s)
}

/// Kraus operators of a trace-preserving completely positive map.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    dim: usize,
    operators: Vec<DMatrix<C64>>,
}

impl KrausSet {
    /// Checks `sum_k C_k^dagger C_k = I` to `1e-10`.
    pub fn new(dim: usize, operators: Vec<DMatrix<C64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        for op in &operators {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: op.nrows().max(op.ncols()) });
            }
        }
        let set = Self { dim, operators };
        let deviation = set.completeness_deviation();
        if deviation > 1e-10 {
            return Err(Error::IncompleteKrausSet(deviation));
        }
        Ok(set)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(dim, vec![DMatrix::identity(dim, dim)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[DMatrix<C64>] {
        &self.operators
    }

    /// `max |sum_k C_k^dagger C_k - I|`
    pub fn completeness_deviation(&self) -> f64 {
        let total = self
            .operators
            .iter()
            .fold(DMatrix::<C64>::zeros(self.dim, self.dim), |acc, c| acc + c.adjoint() * c);
        (total - DMatrix::<C64>::identity(self.dim, self.dim)).camax()
    }
}

/// One operator `sqrt(S[a][b]) |a><b|` per positive entry.
pub fn kraus_from_stochastic(s: &StochasticMatrix) -> KrausSet {
    let n = s.dim();
    let mut operators = Vec::new();
    for b in 0..n {
        for a in 0..n {
            let p = s.matrix()[(a, b)];
            if p > 0.0 {
                let mut op = DMatrix::zeros(n, n);
                op[(a, b)] = C64::new(p.sqrt(), 0.0);
                operators.push(op);
            }
        }
    }
    KrausSet { dim: n, operators }
}

fn apply_unchecked(ks: &KrausSet, rho: &DMatrix<C64>) -> DMatrix<C64> {
    ks.operators
        .iter()
        .fold(DMatrix::zeros(ks.dim, ks.dim), |acc, c| acc + c * rho * c.adjoint())
}

/// `sum_k C_k rho C_k^dagger`; the image is validated as a state.
pub fn apply_map(ks: &KrausSet, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ks.dim {
        return Err(Error::DimensionMismatch { expected: ks.dim, found: rho.dim() });
    }
    DensityMatrix::with_tolerances(apply_unchecked(ks, rho.matrix()), &StateTolerances::PROPAGATED)
}

/// `sum_k <a|C_k|b> <beta|C_k^dagger|alpha>`
pub fn map_tensor_element(ks: &KrausSet, a: usize, alpha: usize, b: usize, beta: usize) -> Result<C64> {
    for index in [a, alpha, b, beta] {
        if index >= ks.dim {
            return Err(Error::IndexOutOfRange { index, n_vertices: ks.dim });
        }
    }
    Ok(ks.operators.iter().fold(ZERO, |acc, c| acc + c[(a, b)] * c[(alpha, beta)].conj()))
}

/// Applies the map `steps` times, validating the state after each step.
pub fn iterate_map(ks: &KrausSet, rho0: &DensityMatrix, steps: usize) -> Result<DensityMatrix> {
    (0..steps).try_fold(rho0.clone(), |rho, _| apply_map(ks, &rho))
}
