use super::{C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RkOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RkStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

// Dormand-Prince 5(4) tableau. The system is autonomous, so the nodes are
// not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates the autonomous system `y' = f(y)` from 0 to `t_end` with
/// step-size control on the mixed relative/absolute RMS error.
///
/// `observe` is called after every accepted step with the step count and
/// current state; an error from it aborts the integration.
pub fn dormand_prince<E2>(
    mut f: impl FnMut(&[C64], &mut [C64]),
    y0: &[C64],
    t_end: f64,
    opts: &RkOptions,
    mut observe: impl FnMut(usize, &[C64]) -> Result<(), E2>,
    on_failure: impl Fn(String) -> E2,
) -> Result<(Vec<C64>, RkStats), E2> {
    let n = y0.len();
    let mut stats = RkStats::default();
    let mut y = y0.to_vec();
    if t_end == 0.0 {
        return Ok((y, stats));
    }

    let mut k: Vec<Vec<C64>> = vec![vec![ZERO; n]; 7];
    let mut stage = vec![ZERO; n];
    let mut y_new = vec![ZERO; n];
    f(&y, &mut k[0]);
    stats.rhs_evals += 1;

    // Max norm: near-zero components of a large state must not dilute the error.
    let weighted_max = |v: &[C64], y: &[C64]| -> f64 {
        v.iter().zip(y).map(|(e, yi)| e.norm() / (opts.abs_tol + opts.rel_tol * yi.norm())).fold(0.0, f64::max)
    };

    // Initial step from the usual ratio-of-norms heuristic.
    let d0 = weighted_max(&y, &y);
    let d1 = weighted_max(&k[0], &y);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(opts.max_step).min(t_end);

    let mut t = 0.0;
    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(on_failure(format!("exceeded {} steps at t = {t}", opts.max_steps)));
        }
        if h < 1e-14 * t_end.max(1.0) {
            return Err(on_failure(format!("step size underflow ({h:e}) at t = {t}")));
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        acc += kj[i] * (h * A[s][j]);
                    }
                }
                stage[i] = acc;
            }
            f(&stage, &mut k[s]);
            stats.rhs_evals += 1;
        }
        // Stage 7 was evaluated at the fifth-order solution (FSAL).
        y_new.copy_from_slice(&stage);

        let mut err = vec![ZERO; n];
        for (s, ks) in k.iter().enumerate() {
            if E[s] != 0.0 {
                for i in 0..n {
                    err[i] += ks[i] * (h * E[s]);
                }
            }
        }
        let scale: Vec<C64> = y
            .iter()
            .zip(&y_new)
            .map(|(a, b)| C64::new(a.norm().max(b.norm()), 0.0))
            .collect();
        let err_norm = weighted_max(&err, &scale);

        if err_norm <= 1.0 {
            t = if last { t_end } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            stats.accepted += 1;
            observe(stats.accepted, &y)?;
        } else {
            stats.rejected += 1;
        }
        let factor = if err_norm == 0.0 { 5.0 } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(opts.max_step);
    }
    Ok((y, stats))
}
