//! Numerical kernels used by the propagators: a compressed sparse row
//! matrix, the dense matrix exponential, the action of the exponential on a
//! vector, and an embedded Runge-Kutta integrator.

mod expm;
mod rk;
mod sparse;

pub use expm::{expm, expm_action, ExpmActionStats};
pub use rk::{dormand_prince, RkOptions, RkStats};
pub use sparse::CsrMatrix;

pub use num_complex::Complex64 as C64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);

/// Largest absolute entry.
pub fn max_abs(values: &[C64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
