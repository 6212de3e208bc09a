//! Derivative-free root refinement on a sign-changing bracket: bisection
//! down to a coarse width, then Brent's inverse quadratic / secant polish.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub(crate) struct RootOptions<T> {
    /// Bracket width at which bisection hands over to the polish phase.
    pub switch_width: T,
    /// Absolute bracket width at which the root is accepted.
    pub x_tol: T,
    /// `|f(x)|` at or below which `x` is accepted.
    pub f_tol: T,
    pub max_iter: usize,
}

/// Finds a root of `f` in `[lo, hi]` given `f(lo)` and `f(hi)` of opposite
/// sign (or one of them zero).
pub(crate) fn find_root<T, F>(
    mut f: F,
    mut lo: T,
    mut hi: T,
    mut f_lo: T,
    mut f_hi: T,
    opts: RootOptions<T>,
) -> Option<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if f_lo == T::zero() {
        return Some(lo);
    }
    if f_hi == T::zero() {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }

    let mut iter = 0;
    while (hi - lo).abs() > opts.switch_width && iter < opts.max_iter {
        let mid = lo + (hi - lo) * T::half();
        let fm = f(mid);
        iter += 1;
        if fm == T::zero() || fm.abs() <= opts.f_tol && (hi - lo).abs() <= opts.x_tol {
            return Some(mid);
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }

    brent(f, lo, hi, f_lo, f_hi, opts, opts.max_iter.saturating_sub(iter))
}

fn brent<T, F>(
    mut f: F,
    a0: T,
    b0: T,
    fa0: T,
    fb0: T,
    opts: RootOptions<T>,
    max_iter: usize,
) -> Option<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let (mut a, mut b, mut fa, mut fb) = (a0, b0, fa0, fb0);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    let two = T::two();
    let three = T::lit(3.0);

    for _ in 0..max_iter.max(1) {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::epsilon() * b.abs() + T::half() * opts.x_tol;
        let xm = T::half() * (c - b);
        if xm.abs() <= tol1 || fb == T::zero() || (fb.abs() <= opts.f_tol && xm.abs() <= opts.x_tol) {
            return Some(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = three * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b = b + d;
        } else {
            b = b + if xm > T::zero() { tol1 } else { -tol1 };
        }
        fb = f(b);
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> RootOptions<f64> {
        RootOptions {
            switch_width: 1e-6,
            x_tol: 1e-14,
            f_tol: 0.0,
            max_iter: 500,
        }
    }

    #[test]
    fn sqrt_two() {
        let f = |x: f64| x * x - 2.0;
        let r = find_root(f, 0.0, 2.0, f(0.0), f(2.0), opts()).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn flat_near_root() {
        let f = |x: f64| (x - 0.3).powi(3);
        let r = find_root(f, 0.0, 1.0, f(0.0), f(1.0), opts()).unwrap();
        assert!((r - 0.3).abs() < 1e-5);
    }

    #[test]
    fn no_sign_change() {
        let f = |x: f64| x * x + 1.0;
        assert!(find_root(f, -1.0, 1.0, 2.0, 2.0, opts()).is_none());
    }
}
