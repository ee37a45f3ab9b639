//! Hamiltonians and jump-operator sets derived from a classical generator,
//! plus element-wise evaluation of the Lindblad transition tensor.
//!
//! The tensor `T[a, alpha; b, beta]` is the rate at which the density-matrix
//! element `rho[b][beta]` feeds `d rho[a][alpha] / dt`:
//!
//! ```text
//! T = delta(alpha, beta) <a| -iH - 1/2 K |b>
//!   + delta(a, b)        <beta| iH - 1/2 K |alpha>
//!   + sum_k <a|L_k|b> <beta|L_k^dagger|alpha>,      K = sum_k L_k^dagger L_k
//! ```
//!
//! The Hamiltonian terms appear once, independent of the number of jump
//! operators.

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{GeneratorMatrix, Graph};
use crate::linalg::{C64, ZERO};

const I: C64 = C64::new(0.0, 1.0);

/// Hermitian coupling matrix of the coherent walk, `H[a][b] = M[a][b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    matrix: DMatrix<C64>,
}

impl Hamiltonian {
    /// Accepts any matrix that is Hermitian to within `1e-14` of its largest
    /// entry; the stored matrix is symmetrised exactly.
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        if matrix.nrows() == 0 {
            return Err(Error::ZeroDimension);
        }
        let deviation = (&matrix - matrix.adjoint()).camax();
        if deviation > 1e-14 * matrix.camax().max(1.0) {
            return Err(Error::NonHermitianSource(deviation));
        }
        let matrix = (&matrix + matrix.adjoint()).map(|z| z * 0.5);
        Ok(Self { matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: DMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn get(&self, a: usize, b: usize) -> C64 {
        self.matrix[(a, b)]
    }
}

/// Copies the (symmetric) generator into a real Hamiltonian.
pub fn hamiltonian_from_generator(m: &GeneratorMatrix) -> Result<Hamiltonian> {
    let asym = m.max_asymmetry();
    if asym > 1e-12 {
        return Err(Error::NonHermitianSource(asym));
    }
    let n = m.dim();
    let matrix = DMatrix::from_fn(n, n, |a, b| C64::new(0.5 * (m.rate(a, b) + m.rate(b, a)), 0.0));
    Ok(Hamiltonian { matrix })
}

/// Which construction produced a jump-operator set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// One operator per directed edge; recovers the classical walk.
    EdgeLocal,
    /// A single operator built from the whole generator.
    Global,
    /// No operators; the purely coherent walk.
    Empty,
    /// User-supplied operators.
    Custom,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Regime::EdgeLocal => "edge-local",
            Regime::Global => "global",
            Regime::Empty => "empty",
            Regime::Custom => "custom",
        };
        f.write_str(name)
    }
}

/// How an edge rate becomes a jump-operator amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeConvention {
    /// Amplitude `sqrt(rate)`, so the population transfer rate equals the
    /// classical rate for any weight.
    #[default]
    Sqrt,
    /// Amplitude equal to the rate itself; transfer rate is `rate^2`.
    Literal,
}

/// Which generator entries enter the single global operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GlobalOperatorForm {
    /// Every entry of the generator, diagonal included.
    #[default]
    Full,
    OffDiagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperatorSet {
    dim: usize,
    operators: Vec<DMatrix<C64>>,
    regime: Regime,
}

impl JumpOperatorSet {
    pub fn custom(dim: usize, operators: Vec<DMatrix<C64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        for op in &operators {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: op.nrows().max(op.ncols()) });
            }
        }
        Ok(Self { dim, operators, regime: Regime::Custom })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[DMatrix<C64>] {
        &self.operators
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `sum_k L_k^dagger L_k`.
    pub fn dissipation_matrix(&self) -> DMatrix<C64> {
        self.operators
            .iter()
            .fold(DMatrix::zeros(self.dim, self.dim), |acc, l| acc + l.adjoint() * l)
    }
}

/// One operator `sqrt(M[k][k']) |k><k'|` per ordered pair of distinct
/// vertices with a nonzero rate (or `M[k][k'] |k><k'|` under
/// [`AmplitudeConvention::Literal`]).
pub fn edge_jump_operators(m: &GeneratorMatrix, convention: AmplitudeConvention) -> JumpOperatorSet {
    let n = m.dim();
    let mut operators = Vec::new();
    // Column-major order: all targets of source 0 first.
    for from in 0..n {
        for to in (0..n).filter(|&to| to != from) {
            let rate = m.rate(to, from);
            if rate == 0.0 {
                continue;
            }
            let amplitude = match convention {
                AmplitudeConvention::Sqrt => rate.abs().sqrt(),
                AmplitudeConvention::Literal => rate,
            };
            let mut op = DMatrix::zeros(n, n);
            op[(to, from)] = C64::new(amplitude, 0.0);
            operators.push(op);
        }
    }
    JumpOperatorSet { dim: n, operators, regime: Regime::EdgeLocal }
}

/// The single operator `L = sum M[k][k'] |k><k'|`.
pub fn global_jump_operator(m: &GeneratorMatrix, form: GlobalOperatorForm) -> JumpOperatorSet {
    let n = m.dim();
    let op = DMatrix::from_fn(n, n, |a, b| match form {
        GlobalOperatorForm::OffDiagonal if a == b => ZERO,
        _ => C64::new(m.rate(a, b), 0.0),
    });
    JumpOperatorSet { dim: n, operators: vec![op], regime: Regime::Global }
}

pub fn empty_jump_operators(dim: usize) -> Result<JumpOperatorSet> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok(JumpOperatorSet { dim, operators: Vec::new(), regime: Regime::Empty })
}

/// A single entry of the transition tensor: `rho[b][beta] -> rho[a][alpha]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TensorElement {
    pub a: usize,
    pub alpha: usize,
    pub b: usize,
    pub beta: usize,
    #[serde(serialize_with = "serialize_complex")]
    pub value: C64,
}

fn serialize_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

fn check_dims(h: &Hamiltonian, ls: &JumpOperatorSet) -> Result<usize> {
    if h.dim() != ls.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: ls.dim() });
    }
    Ok(h.dim())
}

fn check_index(index: usize, n_vertices: usize) -> Result<()> {
    if index >= n_vertices {
        return Err(Error::IndexOutOfRange { index, n_vertices });
    }
    Ok(())
}

/// `sum_k <x|L_k^dagger L_k|y>` without forming the products.
fn dissipation_entry(ls: &JumpOperatorSet, x: usize, y: usize) -> C64 {
    ls.operators
        .iter()
        .map(|l| (0..ls.dim).map(|c| l[(c, x)].conj() * l[(c, y)]).sum::<C64>())
        .sum()
}

/// `sum_k <p|L_k|q> <r|L_k^dagger|s>`, where `<r|L^dagger|s> = conj(<s|L|r>)`.
fn sandwich(ls: &JumpOperatorSet, p: usize, q: usize, r: usize, s: usize) -> C64 {
    ls.operators.iter().map(|l| l[(p, q)] * l[(s, r)].conj()).sum()
}

/// Evaluates the three-term tensor formula literally for one index tuple.
pub fn tensor_element(
    h: &Hamiltonian,
    ls: &JumpOperatorSet,
    a: usize,
    alpha: usize,
    b: usize,
    beta: usize,
) -> Result<TensorElement> {
    let n = check_dims(h, ls)?;
    for index in [a, alpha, b, beta] {
        check_index(index, n)?;
    }
    let mut value = ZERO;
    if alpha == beta {
        value += -I * h.get(a, b) - 0.5 * dissipation_entry(ls, a, b);
    }
    if a == b {
        value += I * h.get(beta, alpha) - 0.5 * dissipation_entry(ls, beta, alpha);
    }
    value += sandwich(ls, a, b, beta, alpha);
    Ok(TensorElement { a, alpha, b, beta, value })
}

/// The six classes of connectivity-allowed transitions out of a vertex `m`
/// with neighbours `n` and `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Axiom {
    /// `|m><m| -> |m><m|`
    PopulationRetention = 1,
    /// `|m><m| -> |n><n|`
    PopulationHop = 2,
    /// `|m><m| -> |m><n|`
    PopulationToCoherence = 3,
    /// `|m><n| -> |m><n|`
    CoherenceRetention = 4,
    /// `|m><n| -> |l><n|`
    CoherenceHop = 5,
    /// `|m><m| -> |l><n|`
    PopulationToNeighborCoherence = 6,
}

impl Axiom {
    pub const ALL: [Axiom; 6] = [
        Axiom::PopulationRetention,
        Axiom::PopulationHop,
        Axiom::PopulationToCoherence,
        Axiom::CoherenceRetention,
        Axiom::CoherenceHop,
        Axiom::PopulationToNeighborCoherence,
    ];

    pub fn from_id(id: u8) -> Result<Self> {
        Axiom::ALL.get((id as usize).wrapping_sub(1)).copied().ok_or(Error::UnknownAxiom(id))
    }

    pub fn id(self) -> u8 {
        self as u8
    }

    /// Tensor indices `(a, alpha, b, beta)` that this axiom's rate occupies.
    pub fn tensor_indices(self, m: usize, n: usize, l: usize) -> (usize, usize, usize, usize) {
        match self {
            Axiom::PopulationRetention => (m, m, m, m),
            Axiom::PopulationHop => (n, n, m, m),
            Axiom::PopulationToCoherence => (m, n, m, m),
            Axiom::CoherenceRetention => (m, n, m, n),
            Axiom::CoherenceHop => (l, n, m, n),
            Axiom::PopulationToNeighborCoherence => (l, n, m, m),
        }
    }
}

/// Evaluates the per-axiom rate formula as tabulated, summing the jump
/// operator terms over `k`. `n` is ignored by axiom 1 and `l` by axioms 1-4.
pub fn axiom_rate(
    h: &Hamiltonian,
    ls: &JumpOperatorSet,
    axiom: Axiom,
    m: usize,
    n: usize,
    l: usize,
) -> Result<TensorElement> {
    let dim = check_dims(h, ls)?;
    let distinct_err = || Error::IndicesNotDistinct { axiom: axiom.id(), m, n, l };
    check_index(m, dim)?;
    if axiom != Axiom::PopulationRetention {
        check_index(n, dim)?;
        if m == n {
            return Err(distinct_err());
        }
    }
    if matches!(axiom, Axiom::CoherenceHop | Axiom::PopulationToNeighborCoherence) {
        check_index(l, dim)?;
        if l == m || l == n {
            return Err(distinct_err());
        }
    }

    let big_l = |p: usize, q: usize, r: usize, s: usize| sandwich(ls, p, q, r, s);
    let k = |x: usize, y: usize| dissipation_entry(ls, x, y);
    let hm = |x: usize, y: usize| h.get(x, y);

    let value = match axiom {
        Axiom::PopulationRetention => big_l(m, m, m, m) - k(m, m),
        Axiom::PopulationHop => big_l(n, m, m, n),
        Axiom::PopulationToCoherence => big_l(m, m, m, n) + I * hm(m, n) - 0.5 * k(m, n),
        Axiom::CoherenceRetention => {
            big_l(m, m, n, n) - I * hm(m, m) + I * hm(n, n) - 0.5 * k(m, m) - 0.5 * k(n, n)
        }
        Axiom::CoherenceHop => big_l(l, m, n, n) - I * hm(l, m) - 0.5 * k(l, m),
        Axiom::PopulationToNeighborCoherence => big_l(l, m, m, n),
    };
    let (a, alpha, b, beta) = axiom.tensor_indices(m, n, l);
    Ok(TensorElement { a, alpha, b, beta, value })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomSummary {
    pub axiom: u8,
    pub evaluations: usize,
    pub max_deviation: f64,
    pub max_abs_rate: f64,
    pub nonzero: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomMismatch {
    pub axiom: u8,
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub conjugate: bool,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub regime: Regime,
    pub dim: usize,
    pub tolerance: f64,
    /// Largest |axiom formula - tensor element| over every comparison,
    /// including the conjugate elements.
    pub max_deviation: f64,
    pub comparisons: usize,
    pub axioms: Vec<AxiomSummary>,
    pub mismatches: Vec<AxiomMismatch>,
    /// Nonzero axiom-6 rates as `(l, m, n)` tensor elements.
    pub axiom6_nonzero: Vec<TensorElement>,
    pub tensor_elements_checked: usize,
    /// Nonzero elements whose ket move `b -> a` or bra move `beta -> alpha`
    /// joins two distinct vertices without an edge.
    pub connectivity_violations: Vec<TensorElement>,
    pub axioms_match: bool,
    pub connectivity_respected: bool,
    pub passed: bool,
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "regime {} on {} vertices", self.regime, self.dim)?;
        for s in &self.axioms {
            writeln!(
                f,
                "  axiom {}: {} evaluations, max deviation {:.3e}, max |rate| {:.3e}, {} nonzero",
                s.axiom, s.evaluations, s.max_deviation, s.max_abs_rate, s.nonzero
            )?;
        }
        writeln!(
            f,
            "  {} tensor elements checked, {} connectivity violations",
            self.tensor_elements_checked,
            self.connectivity_violations.len()
        )?;
        write!(f, "  {}", if self.passed { "PASS" } else { "FAIL" })
    }
}

/// Compares every tabulated axiom rate reachable from each vertex's
/// neighbourhood against the tensor formula, then scans all `dim^4` tensor
/// elements for nonzero entries between unconnected vertices.
pub fn audit_axioms(h: &Hamiltonian, ls: &JumpOperatorSet, g: &Graph, tol: f64) -> Result<AuditReport> {
    let dim = check_dims(h, ls)?;
    if g.n_vertices() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: g.n_vertices() });
    }

    let mut summaries: Vec<AxiomSummary> = Axiom::ALL
        .iter()
        .map(|a| AxiomSummary { axiom: a.id(), evaluations: 0, max_deviation: 0.0, max_abs_rate: 0.0, nonzero: 0 })
        .collect();
    let mut mismatches = Vec::new();
    let mut axiom6_nonzero = Vec::new();
    let mut comparisons = 0;

    let mut tuples: Vec<(Axiom, usize, usize, usize)> = Vec::new();
    for m in 0..dim {
        tuples.push((Axiom::PopulationRetention, m, m, m));
        let neighbors: Vec<usize> = g.neighbors(m).iter().map(|&(v, _)| v).collect();
        for &n in &neighbors {
            for axiom in [Axiom::PopulationHop, Axiom::PopulationToCoherence, Axiom::CoherenceRetention] {
                tuples.push((axiom, m, n, m));
            }
            for &l in neighbors.iter().filter(|&&l| l != n) {
                tuples.push((Axiom::CoherenceHop, m, n, l));
                tuples.push((Axiom::PopulationToNeighborCoherence, m, n, l));
            }
        }
    }

    for (axiom, m, n, l) in tuples {
        let rate = axiom_rate(h, ls, axiom, m, n, l)?;
        let direct = tensor_element(h, ls, rate.a, rate.alpha, rate.b, rate.beta)?;
        // Conjugate element: rho[beta][b] -> rho[alpha][a].
        let mirrored = tensor_element(h, ls, rate.alpha, rate.a, rate.beta, rate.b)?;
        let summary = &mut summaries[axiom.id() as usize - 1];
        summary.evaluations += 1;
        summary.max_abs_rate = summary.max_abs_rate.max(rate.value.norm());
        if rate.value != ZERO {
            summary.nonzero += 1;
        }
        for (conjugate, expected, got) in [(false, rate.value, direct.value), (true, rate.value.conj(), mirrored.value)] {
            comparisons += 1;
            let deviation = (expected - got).norm();
            summary.max_deviation = summary.max_deviation.max(deviation);
            if deviation > tol {
                mismatches.push(AxiomMismatch { axiom: axiom.id(), m, n, l, conjugate, deviation });
            }
        }
        if axiom == Axiom::PopulationToNeighborCoherence && rate.value.norm() > tol {
            axiom6_nonzero.push(rate);
        }
    }

    let mut connectivity_violations = Vec::new();
    let mut checked = 0;
    for a in 0..dim {
        for alpha in 0..dim {
            for b in 0..dim {
                for beta in 0..dim {
                    checked += 1;
                    if g.is_connected_or_equal(a, b) && g.is_connected_or_equal(alpha, beta) {
                        continue;
                    }
                    let element = tensor_element(h, ls, a, alpha, b, beta)?;
                    if element.value != ZERO {
                        connectivity_violations.push(element);
                    }
                }
            }
        }
    }

    let max_deviation = summaries.iter().map(|s| s.max_deviation).fold(0.0, f64::max);
    let axioms_match = mismatches.is_empty();
    let connectivity_respected = connectivity_violations.is_empty();
    Ok(AuditReport {
        regime: ls.regime(),
        dim,
        tolerance: tol,
        max_deviation,
        comparisons,
        axioms: summaries,
        mismatches,
        axiom6_nonzero,
        tensor_elements_checked: checked,
        connectivity_violations,
        axioms_match,
        connectivity_respected,
        passed: axioms_match && connectivity_respected,
    })
}
