//! Small dense matrix helpers.

use nalgebra::SMatrix;

/// Diagonal Padé coefficients of order 6 for `exp`.
const PADE6: [f64; 7] = [
    1.0,
    1.0 / 2.0,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

/// Matrix exponential. Scalar `exp` in one dimension, otherwise scaling and squaring with
/// the order-6 diagonal Padé approximant.
pub fn expm<const D: usize>(a: &SMatrix<f64, D, D>) -> SMatrix<f64, D, D> {
    if D == 1 {
        return SMatrix::from_element(a[(0, 0)].exp());
    }
    let norm = (0..D)
        .map(|j| (0..D).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let x = a / 2f64.powi(squarings);
    let id = SMatrix::<f64, D, D>::identity();
    let mut num = id * PADE6[0];
    let mut den = id * PADE6[0];
    let mut power = id;
    for (k, &c) in PADE6.iter().enumerate().skip(1) {
        power *= x;
        num += power * c;
        den += power * if k % 2 == 0 { c } else { -c };
    }
    let mut r = solve(&den, &num).expect("Padé denominator is nonsingular for ||X|| <= 1/2");
    for _ in 0..squarings {
        r = r * r;
    }
    r
}

/// Partial-pivot LU factorization of a small square matrix: packed factors, row
/// permutation and permutation sign. `None` when a pivot vanishes.
fn lu<const D: usize>(a: &SMatrix<f64, D, D>) -> Option<(SMatrix<f64, D, D>, [usize; D], f64)> {
    let mut m = *a;
    let mut perm = [0usize; D];
    for (i, p) in perm.iter_mut().enumerate() {
        *p = i;
    }
    let mut sign = 1.0;
    for k in 0..D {
        let piv = (k..D).max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs()))?;
        if m[(piv, k)] == 0.0 || !m[(piv, k)].is_finite() {
            return None;
        }
        if piv != k {
            m.swap_rows(piv, k);
            perm.swap(piv, k);
            sign = -sign;
        }
        for i in k + 1..D {
            let f = m[(i, k)] / m[(k, k)];
            m[(i, k)] = f;
            for j in k + 1..D {
                m[(i, j)] -= f * m[(k, j)];
            }
        }
    }
    Some((m, perm, sign))
}

/// Solves `A X = B`.
pub fn solve<const D: usize>(a: &SMatrix<f64, D, D>, b: &SMatrix<f64, D, D>) -> Option<SMatrix<f64, D, D>> {
    let (m, perm, _) = lu(a)?;
    let mut x = SMatrix::<f64, D, D>::zeros();
    for c in 0..D {
        let mut y = [0.0; D];
        for i in 0..D {
            y[i] = b[(perm[i], c)] - (0..i).map(|j| m[(i, j)] * y[j]).sum::<f64>();
        }
        for i in (0..D).rev() {
            let s: f64 = (i + 1..D).map(|j| m[(i, j)] * x[(j, c)]).sum();
            x[(i, c)] = (y[i] - s) / m[(i, i)];
        }
    }
    Some(x)
}

pub fn inverse<const D: usize>(a: &SMatrix<f64, D, D>) -> Option<SMatrix<f64, D, D>> {
    if D == 1 {
        return (a[(0, 0)] != 0.0).then(|| SMatrix::from_element(1.0 / a[(0, 0)]));
    }
    solve(a, &SMatrix::identity())
}

pub fn determinant<const D: usize>(a: &SMatrix<f64, D, D>) -> f64 {
    match D {
        1 => a[(0, 0)],
        2 => a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)],
        _ => match lu(a) {
            Some((m, _, sign)) => sign * (0..D).map(|i| m[(i, i)]).product::<f64>(),
            None => 0.0,
        },
    }
}
