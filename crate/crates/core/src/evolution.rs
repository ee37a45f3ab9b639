//! Density matrices, the omega-interpolated Lindblad generator and its
//! propagation in continuous time.
//!
//! Vectorization is column stacking: `vec(rho)[a + dim * alpha] = rho[a][alpha]`,
//! so the superoperator entry at row `a + dim * alpha`, column `b + dim * beta`
//! is the tensor element `T[a, alpha; b, beta]`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dormand_prince, expm, expm_action, CsrMatrix, RkOptions, C64, ZERO};
use crate::operators::{Hamiltonian, JumpOperatorSet};

const I: C64 = C64::new(0.0, 1.0);

/// Bounds a density matrix must satisfy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTolerances {
    pub trace: f64,
    pub hermiticity: f64,
    /// Most negative eigenvalue allowed (a negative number).
    pub min_eigenvalue: f64,
}

impl StateTolerances {
    /// For states supplied by a caller.
    pub const INPUT: StateTolerances = StateTolerances { trace: 1e-12, hermiticity: 1e-12, min_eigenvalue: -1e-9 };
    /// For states produced by a propagator or map.
    pub const PROPAGATED: StateTolerances = StateTolerances { trace: 1e-9, hermiticity: 1e-10, min_eigenvalue: -1e-9 };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateDiagnostics {
    /// `|Tr rho - 1|`
    pub trace_drift: f64,
    /// `max |rho - rho^dagger|`
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn within(&self, tol: &StateTolerances) -> bool {
        self.trace_drift <= tol.trace && self.hermiticity <= tol.hermiticity && self.min_eigenvalue >= tol.min_eigenvalue
    }

    fn into_error(self) -> Error {
        Error::StateInvariantViolated {
            trace_drift: self.trace_drift,
            hermiticity: self.hermiticity,
            min_eigenvalue: self.min_eigenvalue,
        }
    }
}

/// Hermitian, unit-trace, positive semidefinite walker state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerances(matrix, &StateTolerances::INPUT)
    }

    pub fn with_tolerances(matrix: DMatrix<C64>, tol: &StateTolerances) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidState(format!("{}x{} is not square", matrix.nrows(), matrix.ncols())));
        }
        if matrix.nrows() == 0 {
            return Err(Error::ZeroDimension);
        }
        let state = Self { matrix };
        let diag = state.diagnostics();
        if !diag.within(tol) {
            return Err(diag.into_error());
        }
        Ok(state)
    }

    /// `|i><i|`
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::IndexOutOfRange { index: i, n_vertices: dim });
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, i)] = C64::new(1.0, 0.0);
        Ok(Self { matrix: m })
    }

    /// `|psi><psi|` for a unit vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("state vector norm^2 {norm} != 1")));
        }
        let v = DVector::from_column_slice(psi);
        Self::new(&v * v.adjoint())
    }

    /// `diag(p)` for a probability vector.
    pub fn diagonal(p: &[f64]) -> Result<Self> {
        if p.iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidState("negative probability".into()));
        }
        Self::new(DMatrix::from_diagonal(&DVector::from_iterator(p.len(), p.iter().map(|&x| C64::new(x, 0.0)))))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { matrix: DMatrix::identity(dim, dim).map(|z: C64| z / dim as f64) })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// Column-stacked vector.
    pub fn to_vec(&self) -> Vec<C64> {
        self.matrix.as_slice().to_vec()
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        let m = &self.matrix;
        let trace_drift = (m.trace() - C64::new(1.0, 0.0)).norm();
        let hermiticity = (m - m.adjoint()).camax();
        let hermitian_part = (m + m.adjoint()).map(|z| z * 0.5);
        let min_eigenvalue = hermitian_part.symmetric_eigenvalues().min();
        StateDiagnostics { trace_drift, hermiticity, min_eigenvalue }
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::OmegaOutOfRange(omega));
    }
    Ok(())
}

fn check_generator_dims(h: &Hamiltonian, ls: &JumpOperatorSet) -> Result<usize> {
    if h.dim() != ls.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: ls.dim() });
    }
    Ok(h.dim())
}

/// `-(1 - omega) i [H, rho] + omega sum_k (L rho L^dagger - 1/2 {L^dagger L, rho})`
pub fn lindblad_rhs(h: &Hamiltonian, ls: &JumpOperatorSet, omega: f64, rho: &DensityMatrix) -> Result<DMatrix<C64>> {
    check_omega(omega)?;
    let dim = check_generator_dims(h, ls)?;
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rho.dim() });
    }
    Ok(lindblad_rhs_matrix(h, ls, omega, rho.matrix()))
}

fn lindblad_rhs_matrix(h: &Hamiltonian, ls: &JumpOperatorSet, omega: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let hm = h.matrix();
    let mut out = (hm * rho - rho * hm) * (-I * (1.0 - omega));
    if omega != 0.0 {
        for l in ls.operators() {
            let k = l.adjoint() * l;
            let jump = l * rho * l.adjoint() - (&k * rho + rho * &k) * C64::new(0.5, 0.0);
            out += jump * C64::new(omega, 0.0);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq)]
enum SuperMatrix {
    Dense(DMatrix<C64>),
    Sparse(CsrMatrix),
}

/// Superoperator of the omega-interpolated generator acting on column-stacked
/// density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    dim: usize,
    omega: f64,
    matrix: SuperMatrix,
    hamiltonian: Hamiltonian,
    jump_operators: JumpOperatorSet,
}

/// Dimension from which [`build_liouvillian`] stores the superoperator
/// sparsely.
pub const SPARSE_THRESHOLD: usize = 32;

/// Row/column of the superoperator addressing `rho[a][alpha]`.
pub fn vec_index(dim: usize, a: usize, alpha: usize) -> usize {
    a + dim * alpha
}

fn nonzeros(m: &DMatrix<C64>) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if m[(r, c)] != ZERO {
                out.push((r, c, m[(r, c)]));
            }
        }
    }
    out
}

fn superoperator_triplets(h: &Hamiltonian, ls: &JumpOperatorSet, omega: f64) -> Vec<(usize, usize, C64)> {
    let n = h.dim();
    let mut triplets = Vec::new();
    let idx = |a, alpha| vec_index(n, a, alpha);

    let mut left = DMatrix::<C64>::zeros(n, n); // acts as X rho
    let mut right = DMatrix::<C64>::zeros(n, n); // acts as rho Y
    if omega != 1.0 {
        left += h.matrix() * (-I * (1.0 - omega));
        right += h.matrix() * (I * (1.0 - omega));
    }
    if omega != 0.0 && !ls.is_empty() {
        let k = ls.dissipation_matrix();
        left -= &k * C64::new(0.5 * omega, 0.0);
        right -= &k * C64::new(0.5 * omega, 0.0);
    }
    // (X rho)[a][alpha] = X[a][b] rho[b][alpha]
    for (a, b, x) in nonzeros(&left) {
        triplets.extend((0..n).map(|alpha| (idx(a, alpha), idx(b, alpha), x)));
    }
    // (rho Y)[a][alpha] = rho[a][beta] Y[beta][alpha]
    for (beta, alpha, y) in nonzeros(&right) {
        triplets.extend((0..n).map(|a| (idx(a, alpha), idx(a, beta), y)));
    }
    if omega != 0.0 {
        // (L rho L^dagger)[a][alpha] = L[a][b] rho[b][beta] conj(L[alpha][beta])
        for l in ls.operators() {
            let entries = nonzeros(l);
            for &(a, b, lab) in &entries {
                for &(alpha, beta, lab2) in &entries {
                    triplets.push((idx(a, alpha), idx(b, beta), lab * lab2.conj() * omega));
                }
            }
        }
    }
    triplets
}

/// Builds the superoperator, dense below [`SPARSE_THRESHOLD`] and sparse
/// from it on.
pub fn build_liouvillian(h: &Hamiltonian, ls: &JumpOperatorSet, omega: f64) -> Result<Liouvillian> {
    let repr = if h.dim() >= SPARSE_THRESHOLD { Representation::Sparse } else { Representation::Dense };
    build_liouvillian_with(h, ls, omega, repr)
}

pub fn build_liouvillian_with(
    h: &Hamiltonian,
    ls: &JumpOperatorSet,
    omega: f64,
    repr: Representation,
) -> Result<Liouvillian> {
    check_omega(omega)?;
    let dim = check_generator_dims(h, ls)?;
    let n2 = dim * dim;
    let triplets = superoperator_triplets(h, ls, omega);
    let matrix = match repr {
        Representation::Dense => {
            let mut m = DMatrix::zeros(n2, n2);
            for (r, c, v) in triplets {
                m[(r, c)] += v;
            }
            SuperMatrix::Dense(m)
        }
        Representation::Sparse => SuperMatrix::Sparse(CsrMatrix::from_triplets(n2, n2, triplets)),
    };
    Ok(Liouvillian { dim, omega, matrix, hamiltonian: h.clone(), jump_operators: ls.clone() })
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn jump_operators(&self) -> &JumpOperatorSet {
        &self.jump_operators
    }

    pub fn representation(&self) -> Representation {
        match self.matrix {
            SuperMatrix::Dense(_) => Representation::Dense,
            SuperMatrix::Sparse(_) => Representation::Sparse,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        match &self.matrix {
            SuperMatrix::Dense(m) => m[(row, col)],
            SuperMatrix::Sparse(m) => m.get(row, col),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.matrix {
            SuperMatrix::Dense(m) => m.clone(),
            SuperMatrix::Sparse(m) => m.to_dense(),
        }
    }

    fn to_sparse(&self) -> CsrMatrix {
        match &self.matrix {
            SuperMatrix::Dense(m) => {
                let n2 = m.nrows();
                CsrMatrix::from_triplets(n2, n2, nonzeros(m))
            }
            SuperMatrix::Sparse(m) => m.clone(),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        self.apply_into(v, &mut out);
        out
    }

    fn apply_into(&self, v: &[C64], out: &mut [C64]) {
        match &self.matrix {
            SuperMatrix::Dense(m) => {
                let x = DVector::from_column_slice(v);
                out.copy_from_slice((m * x).as_slice());
            }
            SuperMatrix::Sparse(m) => m.mul_vec_into(v, out),
        }
    }

    /// `d rho / dt` through the superoperator.
    pub fn apply_to(&self, rho: &DensityMatrix) -> Result<DMatrix<C64>> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rho.dim() });
        }
        Ok(DMatrix::from_column_slice(self.dim, self.dim, &self.apply(&rho.to_vec())))
    }

    /// `max_j |sum_a L[(a,a), j]|`, the size of `vec(I)^dagger L`.
    pub fn trace_leak(&self) -> f64 {
        let n = self.dim;
        let mut sums = vec![ZERO; n * n];
        for a in 0..n {
            let row = vec_index(n, a, a);
            match &self.matrix {
                SuperMatrix::Dense(m) => {
                    for (j, s) in sums.iter_mut().enumerate() {
                        *s += m[(row, j)];
                    }
                }
                SuperMatrix::Sparse(m) => {
                    for (_, c, v) in m.iter().filter(|&(r, _, _)| r == row) {
                        sums[c] += v;
                    }
                }
            }
        }
        sums.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Exponential for `dim <= 64`, adaptive Runge-Kutta above.
    #[default]
    Auto,
    MatrixExponential,
    AdaptiveRk,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Auto => "auto",
            Method::MatrixExponential => "matrix-exponential",
            Method::AdaptiveRk => "adaptive-rk",
        })
    }
}

/// Largest walker dimension that [`Method::Auto`] sends to the exponential.
pub const AUTO_EXPONENTIAL_MAX_DIM: usize = 64;
/// Largest dimension for which the exponential is formed densely.
pub const DENSE_EXPM_MAX_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagationConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Trace and Hermiticity are checked every this many solver steps.
    pub validate_every: usize,
    pub max_steps: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            validate_every: 25,
            max_steps: 1_000_000,
        }
    }
}

impl PropagationConfig {
    pub fn with_method(method: Method) -> Self {
        Self { method, ..Self::default() }
    }

    fn check(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidConfig("max_step must be positive".into()));
        }
        if self.validate_every == 0 {
            return Err(Error::InvalidConfig("validate_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub state: DensityMatrix,
    pub diagnostics: StateDiagnostics,
    /// Concrete method that ran (never `Auto`).
    pub method: Method,
    /// Accepted Runge-Kutta steps, or exponential sub-intervals.
    pub steps: usize,
}

fn cheap_check(dim: usize, v: &[C64]) -> Result<()> {
    let trace: C64 = (0..dim).map(|a| v[vec_index(dim, a, a)]).sum();
    let trace_drift = (trace - C64::new(1.0, 0.0)).norm();
    let mut hermiticity: f64 = 0.0;
    for a in 0..dim {
        for alpha in 0..a {
            let d = v[vec_index(dim, a, alpha)] - v[vec_index(dim, alpha, a)].conj();
            hermiticity = hermiticity.max(d.norm());
        }
        hermiticity = hermiticity.max(2.0 * v[vec_index(dim, a, a)].im.abs());
    }
    let tol = StateTolerances::PROPAGATED;
    if trace_drift > tol.trace || hermiticity > tol.hermiticity {
        return Err(Error::StateInvariantViolated { trace_drift, hermiticity, min_eigenvalue: f64::NAN });
    }
    Ok(())
}

/// `rho(t) = exp(t L)[rho0]`. The result must satisfy
/// [`StateTolerances::PROPAGATED`]; states are never renormalised.
pub fn propagate(rho0: &DensityMatrix, liouvillian: &Liouvillian, t: f64, cfg: &PropagationConfig) -> Result<Propagation> {
    cfg.check()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidConfig(format!("propagation time {t} must be finite and non-negative")));
    }
    let dim = liouvillian.dim();
    if rho0.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rho0.dim() });
    }
    let method = match cfg.method {
        Method::Auto if dim <= AUTO_EXPONENTIAL_MAX_DIM => Method::MatrixExponential,
        Method::Auto => Method::AdaptiveRk,
        m => m,
    };
    if t == 0.0 {
        return Ok(Propagation { state: rho0.clone(), diagnostics: rho0.diagnostics(), method, steps: 0 });
    }

    let v0 = rho0.to_vec();
    let (v, steps) = match method {
        Method::MatrixExponential if dim <= DENSE_EXPM_MAX_DIM => {
            let generator = liouvillian.to_dense() * C64::new(t, 0.0);
            let v = expm(&generator) * DVector::from_column_slice(&v0);
            (v.as_slice().to_vec(), 1)
        }
        Method::MatrixExponential => {
            let sparse = liouvillian.to_sparse();
            let every = cfg.validate_every;
            let (v, stats) = expm_action(&sparse, t, &v0, |step, v| {
                if step % every == 0 {
                    cheap_check(dim, v)
                } else {
                    Ok(())
                }
            })?;
            (v, stats.substeps)
        }
        _ => {
            let opts =
                RkOptions { rel_tol: cfg.rel_tol, abs_tol: cfg.abs_tol, max_step: cfg.max_step, max_steps: cfg.max_steps };
            let every = cfg.validate_every;
            let (v, stats) = dormand_prince(
                |y, dy| liouvillian.apply_into(y, dy),
                &v0,
                t,
                &opts,
                |step, v| if step % every == 0 { cheap_check(dim, v) } else { Ok(()) },
                Error::ToleranceNotMet,
            )?;
            (v, stats.accepted)
        }
    };

    let state = DensityMatrix { matrix: DMatrix::from_column_slice(dim, dim, &v) };
    let diagnostics = state.diagnostics();
    if !diagnostics.within(&StateTolerances::PROPAGATED) {
        return Err(diagnostics.into_error());
    }
    Ok(Propagation { state, diagnostics, method, steps })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Populations {
    pub values: Vec<f64>,
    /// Set when a slightly negative diagonal entry was clamped to zero.
    pub clamped: bool,
}

/// Diagonal of `rho`; entries in `[-1e-9, 0)` are clamped to zero.
pub fn populations(rho: &DensityMatrix) -> Populations {
    let mut clamped = false;
    let values = rho
        .matrix()
        .diagonal()
        .iter()
        .map(|z| {
            if z.re < 0.0 && z.re >= -1e-9 {
                clamped = true;
                0.0
            } else {
                z.re
            }
        })
        .collect();
    Populations { values, clamped }
}

/// `sum_{a != alpha} |rho[a][alpha]|`
pub fn coherence_l1(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let n = m.nrows();
    (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .map(|(a, b)| m[(a, b)].norm())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_line, classical_generator, Graph};
    use crate::operators::{
        edge_jump_operators, empty_jump_operators, global_jump_operator, hamiltonian_from_generator,
        tensor_element, AmplitudeConvention, GlobalOperatorForm,
    };

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pair_setup() -> (Hamiltonian, JumpOperatorSet) {
        let m = classical_generator(&Graph::from_edge_list(2, &[(0, 1, 1.0)]).unwrap());
        (hamiltonian_from_generator(&m).unwrap(), edge_jump_operators(&m, AmplitudeConvention::Sqrt))
    }

    #[test]
    fn state_constructors() {
        let r = DensityMatrix::basis(3, 0).unwrap();
        assert_eq!(populations(&r).values, vec![1.0, 0.0, 0.0]);
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        assert_eq!(populations(&mixed).values, vec![0.25; 4]);
        assert_eq!(coherence_l1(&mixed), 0.0);

        let s = 0.5f64.sqrt();
        let plus = DensityMatrix::pure(&[c(s, 0.0), c(s, 0.0)]).unwrap();
        let p = populations(&plus).values;
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        assert!((coherence_l1(&plus) - 1.0).abs() < 1e-15);

        assert_eq!(coherence_l1(&DensityMatrix::diagonal(&[0.2, 0.8]).unwrap()), 0.0);
    }

    #[test]
    fn state_validation_rejects_bad_matrices() {
        let not_unit = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.5, 0.0), c(0.6, 0.0)]));
        assert!(matches!(DensityMatrix::new(not_unit), Err(Error::StateInvariantViolated { .. })));
        let negative = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
        assert!(DensityMatrix::new(negative).is_err());
        let non_hermitian = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(DensityMatrix::new(non_hermitian).is_err());
        assert!(DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn populations_clamp_tiny_negatives() {
        let rho = DensityMatrix {
            matrix: DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0 + 1e-10, 0.0), c(-1e-10, 0.0)])),
        };
        let p = populations(&rho);
        assert!(p.clamped);
        assert_eq!(p.values[1], 0.0);
    }

    #[test]
    fn rhs_endpoints() {
        let (h, ls) = pair_setup();
        let rho = DensityMatrix::basis(2, 0).unwrap();
        let qw = lindblad_rhs(&h, &ls, 0.0, &rho).unwrap();
        let commutator = (h.matrix() * rho.matrix() - rho.matrix() * h.matrix()) * (-I);
        assert_eq!(qw, commutator);

        let empty = empty_jump_operators(2).unwrap();
        assert_eq!(lindblad_rhs(&h, &empty, 1.0, &rho).unwrap(), DMatrix::zeros(2, 2));

        let crw = lindblad_rhs(&h, &ls, 1.0, &rho).unwrap();
        assert_eq!(crw, DMatrix::from_row_slice(2, 2, &[c(-1.0, 0.0), ZERO, ZERO, c(1.0, 0.0)]));

        assert_eq!(lindblad_rhs(&h, &ls, 1.5, &rho), Err(Error::OmegaOutOfRange(1.5)));
        let big = DensityMatrix::basis(3, 0).unwrap();
        assert!(matches!(lindblad_rhs(&h, &ls, 0.5, &big), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn liouvillian_spectrum_of_pauli_x_commutator() {
        let x = DMatrix::from_row_slice(2, 2, &[ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO]);
        let h = Hamiltonian::from_matrix(x).unwrap();
        let l = build_liouvillian(&h, &empty_jump_operators(2).unwrap(), 0.0).unwrap();
        let mut eig: Vec<C64> = l.to_dense().schur().eigenvalues().unwrap().iter().copied().collect();
        eig.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        let expected = [c(0.0, -2.0), ZERO, ZERO, c(0.0, 2.0)];
        for (got, want) in eig.iter().zip(expected) {
            assert!((got - want).norm() < 1e-12, "{eig:?}");
        }
    }

    #[test]
    fn liouvillian_zero_without_dynamics() {
        let (h, _) = pair_setup();
        let l = build_liouvillian(&h, &empty_jump_operators(2).unwrap(), 1.0).unwrap();
        assert!(l.to_dense().iter().all(|z| *z == ZERO));
    }

    #[test]
    fn liouvillian_entries_are_tensor_elements() {
        let line = build_line(5, 1.0).unwrap();
        let m = classical_generator(line.graph());
        let h = hamiltonian_from_generator(&m).unwrap();
        let ls = global_jump_operator(&m, GlobalOperatorForm::Full);
        let l = build_liouvillian(&h, &ls, 1.0).unwrap();
        let h0 = Hamiltonian::zeros(5);
        let n = 5;
        for a in 0..n {
            for alpha in 0..n {
                for b in 0..n {
                    for beta in 0..n {
                        let t = tensor_element(&h0, &ls, a, alpha, b, beta).unwrap().value;
                        let got = l.get(vec_index(n, a, alpha), vec_index(n, b, beta));
                        assert!((t - got).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn sparse_and_dense_agree() {
        let line = build_line(7, 1.0).unwrap();
        let m = classical_generator(line.graph());
        let h = hamiltonian_from_generator(&m).unwrap();
        let ls = edge_jump_operators(&m, AmplitudeConvention::Sqrt);
        let dense = build_liouvillian_with(&h, &ls, 0.3, Representation::Dense).unwrap();
        let sparse = build_liouvillian_with(&h, &ls, 0.3, Representation::Sparse).unwrap();
        assert!((dense.to_dense() - sparse.to_dense()).camax() < 1e-15);
        assert!(dense.trace_leak() < 1e-14);
        assert!(sparse.trace_leak() < 1e-14);
        assert_eq!(build_liouvillian(&h, &ls, 0.3).unwrap().representation(), Representation::Dense);
    }

    #[test]
    fn propagate_zero_time_is_identity() {
        let (h, ls) = pair_setup();
        let l = build_liouvillian(&h, &ls, 0.5).unwrap();
        let rho = DensityMatrix::basis(2, 1).unwrap();
        let out = propagate(&rho, &l, 0.0, &PropagationConfig::default()).unwrap();
        assert_eq!(out.state, rho);
        assert!(propagate(&rho, &l, -1.0, &PropagationConfig::default()).is_err());
    }

    #[test]
    fn two_site_classical_relaxation() {
        // p0(t) = (1 + e^{-2t}) / 2 for the symmetric two-state chain.
        let (h, ls) = pair_setup();
        let l = build_liouvillian(&h, &ls, 1.0).unwrap();
        let rho = DensityMatrix::basis(2, 0).unwrap();
        for method in [Method::MatrixExponential, Method::AdaptiveRk] {
            let out = propagate(&rho, &l, 0.8, &PropagationConfig::with_method(method)).unwrap();
            let p = populations(&out.state).values;
            assert!((p[0] - 0.5 * (1.0 + (-1.6f64).exp())).abs() < 1e-9, "{method}: {p:?}");
            assert!(coherence_l1(&out.state) < 1e-12);
        }
    }

    #[test]
    fn rk_failure_surfaces_as_tolerance_error() {
        let (h, ls) = pair_setup();
        let l = build_liouvillian(&h, &ls, 0.5).unwrap();
        let rho = DensityMatrix::basis(2, 0).unwrap();
        let cfg = PropagationConfig { method: Method::AdaptiveRk, max_steps: 3, max_step: 1e-3, ..Default::default() };
        assert!(matches!(propagate(&rho, &l, 1.0, &cfg), Err(Error::ToleranceNotMet(_))));
        let bad = PropagationConfig { rel_tol: 0.0, ..Default::default() };
        assert!(matches!(propagate(&rho, &l, 1.0, &bad), Err(Error::InvalidConfig(_))));
    }
}
