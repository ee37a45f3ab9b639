//! Integer-order Bessel functions by Miller's downward recurrence.
//!
//! Both families are normalised with their generating-function sums:
//! `J_0 + 2 sum_k J_2k = 1` and `I_0 + 2 sum_k I_k = e^x`.

const RESCALE_ABOVE: f64 = 1e250;

fn start_order(max_order: usize, x: f64) -> usize {
    let base = (max_order as f64).max(x.abs());
    let start = base as usize + 30 + (40.0 * base).sqrt() as usize;
    start + start % 2
}

/// `J_0(x) ..= J_max_order(x)` for `x >= 0`.
pub fn bessel_j_sequence(max_order: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "bessel_j_sequence needs finite x >= 0");
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = start_order(max_order, x);
    let mut next = 0.0; // f_{k+1}
    let mut current = 1e-300; // f_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let previous = 2.0 * k as f64 / x * current - next;
        next = current;
        current = previous;
        // `current` now holds f_{k-1}.
        let order = k - 1;
        if order <= max_order {
            out[order] = current;
        }
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * current;
        }
        if current.abs() > RESCALE_ABOVE {
            current /= RESCALE_ABOVE;
            next /= RESCALE_ABOVE;
            norm /= RESCALE_ABOVE;
            for v in out.iter_mut().skip(order) {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    norm += current;
    for v in &mut out {
        *v /= norm;
    }
    out
}

/// Exponentially scaled modified Bessel functions `e^-x I_k(x)` for
/// `k = 0..=max_order`, `x >= 0`.
pub fn scaled_bessel_i_sequence(max_order: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "scaled_bessel_i_sequence needs finite x >= 0");
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = start_order(max_order, x);
    let mut next = 0.0;
    let mut current = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let previous = 2.0 * k as f64 / x * current + next;
        next = current;
        current = previous;
        let order = k - 1;
        if order <= max_order {
            out[order] = current;
        }
        if order > 0 {
            norm += 2.0 * current;
        }
        if current > RESCALE_ABOVE {
            current /= RESCALE_ABOVE;
            next /= RESCALE_ABOVE;
            norm /= RESCALE_ABOVE;
            for v in out.iter_mut().skip(order) {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    norm += current;
    for v in &mut out {
        *v /= norm;
    }
    out
}
