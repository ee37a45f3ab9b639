use nalgebra::DMatrix;

use super::{max_abs, CsrMatrix, C64, ZERO};

// Higham (2005) Padé degree thresholds on the 1-norm.
const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn norm1(a: &DMatrix<C64>) -> f64 {
    a.column_iter().map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn scaled(a: &DMatrix<C64>, s: f64) -> DMatrix<C64> {
    a.map(|z| z * s)
}

/// Low-degree Padé numerator/denominator pieces `(U, V)` for degree 3..=9.
fn pade_low(a: &DMatrix<C64>, b: &[f64]) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = a.nrows();
    let a2 = a * a;
    let mut power = DMatrix::<C64>::identity(n, n);
    let mut u_inner = scaled(&power, b[1]);
    let mut v = scaled(&power, b[0]);
    for k in (2..b.len()).step_by(2) {
        power = &power * &a2;
        v += scaled(&power, b[k]);
        u_inner += scaled(&power, b[k + 1]);
    }
    (a * u_inner, v)
}

fn pade_13(a: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = a.nrows();
    let b = &B13;
    let ident = DMatrix::<C64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_high = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u_inner = &a6 * u_high + scaled(&a6, b[7]) + scaled(&a4, b[5]) + scaled(&a2, b[3]) + scaled(&ident, b[1]);
    let v_high = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v = &a6 * v_high + scaled(&a6, b[6]) + scaled(&a4, b[4]) + scaled(&a2, b[2]) + scaled(&ident, b[0]);
    (a * u_inner, v)
}

/// Dense matrix exponential by scaling and squaring with a Padé
/// approximant of degree 3, 5, 7, 9 or 13 chosen from the 1-norm.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let norm = norm1(a);
    let (u, v, squarings) = if norm <= THETA_3 {
        let (u, v) = pade_low(a, &B3);
        (u, v, 0)
    } else if norm <= THETA_5 {
        let (u, v) = pade_low(a, &B5);
        (u, v, 0)
    } else if norm <= THETA_7 {
        let (u, v) = pade_low(a, &B7);
        (u, v, 0)
    } else if norm <= THETA_9 {
        let (u, v) = pade_low(a, &B9);
        (u, v, 0)
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        let (u, v) = pade_13(&scaled(a, 2f64.powi(-s)));
        (u, v, s)
    };
    let numerator = &v + &u;
    let denominator = v - u;
    let mut result = denominator
        .lu()
        .solve(&numerator)
        .expect("Padé denominator is nonsingular for the selected degree");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

// Al-Mohy & Higham (2011) truncated-Taylor thresholds for double precision.
const TAYLOR_THETA: [(usize, f64); 35] = [
    (1, 2.29e-16),
    (2, 2.58e-8),
    (3, 1.39e-5),
    (4, 3.40e-4),
    (5, 2.40e-3),
    (6, 9.07e-3),
    (7, 2.38e-2),
    (8, 5.00e-2),
    (9, 8.96e-2),
    (10, 1.44e-1),
    (11, 2.14e-1),
    (12, 3.00e-1),
    (13, 4.00e-1),
    (14, 5.14e-1),
    (15, 6.41e-1),
    (16, 7.81e-1),
    (17, 9.31e-1),
    (18, 1.09),
    (19, 1.26),
    (20, 1.44),
    (21, 1.62),
    (22, 1.82),
    (23, 2.01),
    (24, 2.22),
    (25, 2.43),
    (26, 2.64),
    (27, 2.86),
    (28, 3.08),
    (29, 3.31),
    (30, 3.54),
    (35, 4.7),
    (40, 6.0),
    (45, 7.2),
    (50, 8.5),
    (55, 9.9),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpmActionStats {
    /// Number of scaling sub-intervals.
    pub substeps: usize,
    pub taylor_degree: usize,
    pub matvecs: usize,
}

/// Computes `exp(t A) v` by splitting `[0, t]` into `s` pieces and summing a
/// truncated Taylor series on each, with the trace shifted out of `A`.
///
/// `on_substep` runs after every piece with the current vector; returning an
/// error aborts the computation.
pub fn expm_action<E>(
    a: &CsrMatrix,
    t: f64,
    v: &[C64],
    mut on_substep: impl FnMut(usize, &[C64]) -> Result<(), E>,
) -> Result<(Vec<C64>, ExpmActionStats), E> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(v.len(), n);
    let mut stats = ExpmActionStats { substeps: 0, taylor_degree: 0, matvecs: 0 };
    if t == 0.0 || n == 0 {
        return Ok((v.to_vec(), stats));
    }

    let mu = a.trace() / n as f64;
    let shifted = CsrMatrix::from_triplets(
        n,
        n,
        a.iter()
            .map(|(r, c, x)| (r, c, if r == c { x - mu } else { x }))
            .chain((0..n).map(|i| (i, i, ZERO)))
            .collect(),
    );
    let norm = shifted.norm1() * t.abs();

    let (degree, substeps) = if norm == 0.0 {
        (0, 1)
    } else {
        TAYLOR_THETA
            .iter()
            .map(|&(m, theta)| (m, ((norm / theta).ceil() as usize).max(1)))
            .min_by_key(|&(m, s)| (m * s, m))
            .unwrap()
    };
    stats.taylor_degree = degree;
    stats.substeps = substeps;

    let tol = f64::EPSILON / 2.0;
    let eta = (mu * (t / substeps as f64)).exp();
    let h = t / substeps as f64;
    let mut f = v.to_vec();
    let mut b = v.to_vec();
    let mut scratch = vec![ZERO; n];
    for step in 0..substeps {
        let mut c1 = max_abs(&b);
        for j in 1..=degree {
            shifted.mul_vec_into(&b, &mut scratch);
            stats.matvecs += 1;
            let coef = h / j as f64;
            for (bi, &si) in b.iter_mut().zip(&scratch) {
                *bi = si * coef;
            }
            for (fi, &bi) in f.iter_mut().zip(&b) {
                *fi += bi;
            }
            let c2 = max_abs(&b);
            if c1 + c2 <= tol * max_abs(&f) {
                break;
            }
            c1 = c2;
        }
        for fi in f.iter_mut() {
            *fi *= eta;
        }
        b.copy_from_slice(&f);
        on_substep(step + 1, &f)?;
    }
    Ok((f, stats))
}
