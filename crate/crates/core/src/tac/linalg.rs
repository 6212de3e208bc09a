//! Dense linear least squares by Householder QR.

use crate::scalar::Scalar;

/// Solution of `min ||X beta - y||` for a column-major design.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares<T> {
    pub coefficients: Vec<T>,
    pub rss: T,
}

/// Solves the least-squares problem with design columns `columns`.
///
/// Returns `None` when the design is numerically rank deficient.
pub fn least_squares<T: Scalar>(columns: &[Vec<T>], y: &[T]) -> Option<LeastSquares<T>> {
    let p = columns.len();
    let m = y.len();
    if p == 0 || p > m || columns.iter().any(|c| c.len() != m) {
        return None;
    }
    let mut a: Vec<Vec<T>> = columns.to_vec();
    let mut rhs = y.to_vec();
    let mut diag = vec![T::zero(); p];

    for j in 0..p {
        let norm = a[j][j..].iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm == T::zero() {
            return None;
        }
        let alpha = if a[j][j] > T::zero() { -norm } else { norm };
        // v = x - alpha e_1, stored in place of the column.
        a[j][j] = a[j][j] - alpha;
        let vnorm2: T = a[j][j..].iter().map(|&v| v * v).sum();
        diag[j] = alpha;
        if vnorm2 == T::zero() {
            continue;
        }
        let (head, tail) = a.split_at_mut(j + 1);
        let v = &head[j][j..];
        for col in tail.iter_mut() {
            reflect(v, vnorm2, &mut col[j..]);
        }
        reflect(v, vnorm2, &mut rhs[j..]);
    }

    let scale = diag.iter().fold(T::zero(), |s, d| s.max(d.abs()));
    let cutoff = scale * T::epsilon() * T::from_usize_lossy(100 * m.max(p));
    if diag.iter().any(|d| d.abs() <= cutoff) {
        return None;
    }

    let mut beta = vec![T::zero(); p];
    for j in (0..p).rev() {
        let mut s = rhs[j];
        for (l, b) in beta.iter().enumerate().skip(j + 1) {
            s = s - a[l][j] * *b;
        }
        beta[j] = s / diag[j];
    }

    let rss = (0..m)
        .map(|i| {
            let fitted: T = columns.iter().zip(&beta).map(|(c, &b)| c[i] * b).sum();
            let r = y[i] - fitted;
            r * r
        })
        .sum();
    Some(LeastSquares {
        coefficients: beta,
        rss,
    })
}

/// Applies `I - 2 v v^T / |v|^2` to `x`.
fn reflect<T: Scalar>(v: &[T], vnorm2: T, x: &mut [T]) {
    let dot: T = v.iter().zip(x.iter()).map(|(&a, &b)| a * b).sum();
    let f = T::two() * dot / vnorm2;
    for (xi, &vi) in x.iter_mut().zip(v) {
        *xi = *xi - f * vi;
    }
}

/// Coordinatewise product of two vectors.
pub fn hadamard<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x * y).collect()
}
