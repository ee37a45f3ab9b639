//! Reference solutions that share no code with the propagators: closed-form
//! walks on the infinite line, eigendecomposition solvers for the classical
//! and coherent walks, and a fixed-step Runge-Kutta Lindblad integrator that
//! works on sparse operator entries instead of the superoperator.

mod bessel;

pub use bessel::{bessel_j_sequence, scaled_bessel_i_sequence};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{GeneratorMatrix, LineGraph};
use crate::linalg::{C64, ZERO};
use crate::operators::{Hamiltonian, JumpOperatorSet};

/// A walk on the line truncated to `n_sites` sites, started at position 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineWalkSpec {
    pub n_sites: usize,
    pub gamma: f64,
    pub t: f64,
}

impl LineWalkSpec {
    pub fn new(n_sites: usize, gamma: f64, t: f64) -> Result<Self> {
        if n_sites < 3 || n_sites.is_multiple_of(2) {
            return Err(Error::InvalidLineLength(n_sites));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidRate(gamma));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidConfig(format!("time {t} must be finite and non-negative")));
        }
        Ok(Self { n_sites, gamma, t })
    }

    pub fn half_width(&self) -> i64 {
        (self.n_sites as i64 - 1) / 2
    }
}

/// Infinite-line probabilities restricted to `|j| <= half_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineDistribution {
    pub positions: Vec<i64>,
    pub probabilities: Vec<f64>,
    /// Probability the infinite-line walker sits outside the window.
    pub tail_mass: f64,
}

impl LineDistribution {
    fn from_orders(spec: &LineWalkSpec, by_order: &[f64]) -> Self {
        let h = spec.half_width();
        let positions: Vec<i64> = (-h..=h).collect();
        let probabilities: Vec<f64> = positions.iter().map(|j| by_order[j.unsigned_abs() as usize]).collect();
        let inside: f64 = probabilities.iter().sum();
        Self { positions, probabilities, tail_mass: (1.0 - inside).max(0.0) }
    }

    pub fn probability(&self, position: i64) -> f64 {
        let h = (self.positions.len() as i64 - 1) / 2;
        if position.abs() > h {
            0.0
        } else {
            self.probabilities[(position + h) as usize]
        }
    }

    pub fn variance(&self) -> f64 {
        variance(&self.positions, &self.probabilities)
    }
}

/// `p_j = e^{-2 gamma t} I_|j|(2 gamma t)`: the diffusive walk.
pub fn crw_line_analytic(spec: &LineWalkSpec) -> LineDistribution {
    let x = 2.0 * spec.gamma * spec.t;
    let orders = scaled_bessel_i_sequence(spec.half_width() as usize, x);
    LineDistribution::from_orders(spec, &orders)
}

/// `p_j = J_j(2 gamma t)^2`: the ballistic coherent walk.
pub fn qw_line_analytic(spec: &LineWalkSpec) -> LineDistribution {
    let x = 2.0 * spec.gamma * spec.t;
    let orders: Vec<f64> = bessel_j_sequence(spec.half_width() as usize, x).iter().map(|j| j * j).collect();
    LineDistribution::from_orders(spec, &orders)
}

/// Convenience: the analytic walk matching a [`LineGraph`].
pub fn line_spec(line: &LineGraph, t: f64) -> Result<LineWalkSpec> {
    LineWalkSpec::new(line.n_sites(), line.gamma(), t)
}

/// `exp(M t) p0` through the eigendecomposition of the symmetric generator.
pub fn classical_master_solve(m: &GeneratorMatrix, p0: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = m.dim();
    if p0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p0.len() });
    }
    let asym = m.max_asymmetry();
    if asym > 1e-12 {
        return Err(Error::NonHermitianSource(asym));
    }
    if t == 0.0 {
        return Ok(p0.to_vec());
    }
    let eig = m.matrix().clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let coeffs = v.transpose() * DVector::from_column_slice(p0);
    let decayed = DVector::from_iterator(n, coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, l)| c * (l * t).exp()));
    Ok((v * decayed).as_slice().to_vec())
}

/// `exp(-i H t) psi0` through the eigendecomposition of `H`.
pub fn schrodinger_solve(h: &Hamiltonian, psi0: &[C64], t: f64) -> Result<Vec<C64>> {
    let n = h.dim();
    if psi0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: psi0.len() });
    }
    if t == 0.0 {
        return Ok(psi0.to_vec());
    }
    let eig = h.matrix().clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let coeffs = v.adjoint() * DVector::from_column_slice(psi0);
    let rotated = DVector::from_iterator(
        n,
        coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, &l)| c * C64::new(0.0, -l * t).exp()),
    );
    Ok((v * rotated).as_slice().to_vec())
}

/// `1/2 sum |p_i - q_i|`
pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Second central moment of a distribution over integer positions.
pub fn variance(positions: &[i64], probabilities: &[f64]) -> f64 {
    let total: f64 = probabilities.iter().sum();
    let mean = positions.iter().zip(probabilities).map(|(&j, p)| j as f64 * p).sum::<f64>() / total;
    positions.iter().zip(probabilities).map(|(&j, p)| (j as f64 - mean).powi(2) * p).sum::<f64>() / total
}

type Entries = Vec<(usize, usize, C64)>;

fn entries(m: &DMatrix<C64>) -> Entries {
    let mut out = Vec::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if m[(r, c)] != ZERO {
                out.push((r, c, m[(r, c)]));
            }
        }
    }
    out
}

struct SparseLindblad {
    n: usize,
    omega: f64,
    h: Entries,
    k: Entries,
    ls: Vec<Entries>,
}

impl SparseLindblad {
    fn rhs(&self, rho: &[C64], out: &mut [C64]) {
        let n = self.n;
        // Row-major storage: rho[i][j] = rho[i * n + j].
        out.iter_mut().for_each(|z| *z = ZERO);
        let coherent = C64::new(0.0, -(1.0 - self.omega));
        for &(i, j, h) in &self.h {
            for c in 0..n {
                out[i * n + c] += coherent * h * rho[j * n + c];
                out[c * n + j] -= coherent * rho[c * n + i] * h;
            }
        }
        if self.omega == 0.0 {
            return;
        }
        let half = 0.5 * self.omega;
        for &(i, j, k) in &self.k {
            for c in 0..n {
                out[i * n + c] -= half * k * rho[j * n + c];
                out[c * n + j] -= half * rho[c * n + i] * k;
            }
        }
        for l in &self.ls {
            for &(a, b, x) in l {
                for &(alpha, beta, y) in l {
                    out[a * n + alpha] += self.omega * x * rho[b * n + beta] * y.conj();
                }
            }
        }
    }
}

/// Classic fourth-order Runge-Kutta on the Lindblad equation with a fixed
/// step no larger than `step`. Intended as a slow, obviously-correct
/// cross-check of the production propagators.
pub fn reference_lindblad_rk4(
    h: &Hamiltonian,
    ls: &JumpOperatorSet,
    omega: f64,
    rho0: &DMatrix<C64>,
    t: f64,
    step: f64,
) -> Result<DMatrix<C64>> {
    let n = h.dim();
    if ls.dim() != n || rho0.nrows() != n || rho0.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: ls.dim().max(rho0.nrows()) });
    }
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::OmegaOutOfRange(omega));
    }
    if !(step > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidConfig("reference integrator needs step > 0 and t >= 0".into()));
    }
    let k_total = ls.operators().iter().fold(DMatrix::<C64>::zeros(n, n), |acc, l| acc + l.adjoint() * l);
    let system = SparseLindblad {
        n,
        omega,
        h: entries(h.matrix()),
        k: entries(&k_total),
        ls: ls.operators().iter().map(entries).collect(),
    };

    let steps = (t / step).ceil().max(0.0) as usize;
    let dt = if steps == 0 { 0.0 } else { t / steps as f64 };
    let mut y: Vec<C64> = rho0.transpose().as_slice().to_vec();
    let len = y.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![ZERO; len], vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]);
    let mut tmp = vec![ZERO; len];
    for _ in 0..steps {
        system.rhs(&y, &mut k1);
        for i in 0..len {
            tmp[i] = y[i] + k1[i] * (0.5 * dt);
        }
        system.rhs(&tmp, &mut k2);
        for i in 0..len {
            tmp[i] = y[i] + k2[i] * (0.5 * dt);
        }
        system.rhs(&tmp, &mut k3);
        for i in 0..len {
            tmp[i] = y[i] + k3[i] * dt;
        }
        system.rhs(&tmp, &mut k4);
        for i in 0..len {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
    Ok(DMatrix::from_row_slice(n, n, &y))
}
