//! Fixed-rate minimax fitting over the two-function bases `{t, 1}` and
//! `{exp(k*t), 1}`, alternation certificates, and the constant-width band.
//!
//! Both bases are Haar systems on increasing abscissae, so the discrete
//! minimax error equals the largest three-point alternation level over all
//! index triples. Small datasets use that characterisation directly; larger
//! ones take the narrowest vertical strip around the convex hull of
//! `(phi(t_i), T_i)`.

use crate::dataset::Dataset;
use crate::error::{FitError, Result};
use crate::model::{checked_exp, Approximant, ExponentialModel};
use crate::scalar::Scalar;

/// Largest `n` solved by exhaustive triple enumeration.
pub const TRIPLE_LIMIT: usize = 64;

/// Alternating extremal residuals certifying a max-norm fit.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternationCertificate<T> {
    /// Increasing data indices (0-based) where the residual attains the
    /// max-norm with alternating sign.
    pub indices: Vec<usize>,
    /// Sign of the residual `T_i - f(t_i)` at the first index.
    pub delta: i8,
    /// Max-norm of the residual vector over all points.
    pub error: T,
}

impl<T: Scalar> AlternationCertificate<T> {
    /// Builds the certificate of a residual vector: the first index of each
    /// maximal run of equal-signed extremal residuals, which is the
    /// lexicographically smallest longest alternating set.
    pub fn from_residuals(residuals: &[T]) -> Self {
        let error = residuals.iter().fold(T::zero(), |m, r| m.max(r.abs()));
        if error == T::zero() {
            return AlternationCertificate {
                indices: (0..residuals.len()).collect(),
                delta: 1,
                error,
            };
        }
        let runs = extremal_runs(residuals, error);
        AlternationCertificate {
            indices: runs.iter().map(|r| r.first).collect(),
            delta: runs.first().map_or(1, |r| r.sign),
            error,
        }
    }

    /// Checks the alternation invariant against `residuals`.
    pub fn verify(&self, residuals: &[T]) -> bool {
        let tol = T::certificate_tol() * (T::one() + self.error);
        let max = residuals.iter().fold(T::zero(), |m, r| m.max(r.abs()));
        if (max - self.error).abs() > tol || self.indices.len() < 3.min(residuals.len()) {
            return false;
        }
        if self.error == T::zero() {
            return true;
        }
        let mut sign = T::from(self.delta).unwrap();
        let mut prev = None;
        for &i in &self.indices {
            if prev.is_some_and(|p| p >= i) {
                return false;
            }
            if (residuals[i] - sign * self.error).abs() > tol {
                return false;
            }
            sign = -sign;
            prev = Some(i);
        }
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Run {
    pub sign: i8,
    pub first: usize,
    /// Index with the largest `|r|` inside the run.
    pub peak: usize,
}

/// Runs of equal sign among residuals with `|r| >= level - tol*(1+level)`.
pub(crate) fn runs_with_tol<T: Scalar>(residuals: &[T], level: T, rel_tol: T) -> Vec<Run> {
    let threshold = level - rel_tol * (T::one() + level);
    let mut runs: Vec<Run> = Vec::new();
    for (i, &r) in residuals.iter().enumerate() {
        if r.abs() < threshold || r == T::zero() {
            continue;
        }
        let sign = if r > T::zero() { 1 } else { -1 };
        match runs.last_mut() {
            Some(run) if run.sign == sign => {
                if r.abs() > residuals[run.peak].abs() {
                    run.peak = i;
                }
            }
            _ => runs.push(Run { sign, first: i, peak: i }),
        }
    }
    runs
}

pub(crate) fn extremal_runs<T: Scalar>(residuals: &[T], level: T) -> Vec<Run> {
    runs_with_tol(residuals, level, T::certificate_tol())
}

/// Basis `{phi, 1}` with `phi(t) = t` or `phi(t) = exp(k*t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Basis<T> {
    Line,
    Exp(T),
}

impl<T: Scalar> Basis<T> {
    pub fn for_rate(k: T) -> Self {
        if k == T::zero() {
            Basis::Line
        } else {
            Basis::Exp(k)
        }
    }

    /// `phi(t) - phi(s)` divided by the positive factor `exp(k*s)`.
    #[inline]
    fn diff(&self, s: T, t: T) -> T {
        match *self {
            Basis::Line => t - s,
            Basis::Exp(k) => (k * (t - s)).exp_m1(),
        }
    }

    /// `exp(k*(t - s))`, the ratio between anchoring at `t` and at `s`.
    #[inline]
    fn shift(&self, s: T, t: T) -> T {
        match *self {
            Basis::Line => T::one(),
            Basis::Exp(k) => (k * (t - s)).exp(),
        }
    }
}

/// Fixed-basis solution `alpha*phi(t - anchor) + beta`, kept anchored so
/// that extreme rates never overflow.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AnchoredFit<T> {
    pub basis: Basis<T>,
    pub anchor: T,
    pub alpha: T,
    pub beta: T,
    /// Minimax error of the fit.
    pub error: T,
}

impl<T: Scalar> AnchoredFit<T> {
    pub fn value(&self, t: T) -> T {
        match self.basis {
            Basis::Line => self.alpha * (t - self.anchor) + self.beta,
            Basis::Exp(k) => self.alpha * (k * (t - self.anchor)).exp() + self.beta,
        }
    }

    pub fn residuals(&self, data: &Dataset<T>) -> Vec<T> {
        data.t()
            .iter()
            .zip(data.values())
            .map(|(&t, &y)| y - self.value(t))
            .collect()
    }

    /// Canonical `a*exp(k*t) + b` (or line / constant) form.
    pub fn to_model(self) -> Result<ExponentialModel<T>> {
        if self.alpha == T::zero() {
            return Ok(ExponentialModel::constant(self.beta));
        }
        match self.basis {
            Basis::Line => Ok(ExponentialModel::line(
                self.alpha,
                self.beta - self.alpha * self.anchor,
            )),
            Basis::Exp(k) => {
                let a = self.alpha * checked_exp(k, -self.anchor)?;
                Ok(ExponentialModel::exponential(a, k, self.beta))
            }
        }
    }
}

/// Signed three-point alternation level `r_i = -r_j = r_m` for `i < j < m`.
#[inline]
fn triple_level<T: Scalar>(d_ij: T, d_im: T, d_jm: T, w_ij: T, yi: T, yj: T, ym: T) -> T {
    let lambda = d_ij / d_im;
    let one_minus = w_ij * d_jm / d_im;
    T::half() * (one_minus * yi + lambda * ym - yj)
}

struct PairTable<T> {
    n: usize,
    diff: Vec<T>,
    shift: Vec<T>,
}

impl<T: Scalar> PairTable<T> {
    fn new(basis: Basis<T>, t: &[T]) -> Self {
        let n = t.len();
        let mut diff = vec![T::zero(); n * n];
        let mut shift = vec![T::one(); n * n];
        for i in 0..n {
            for j in i + 1..n {
                diff[i * n + j] = basis.diff(t[i], t[j]);
                shift[i * n + j] = basis.shift(t[i], t[j]);
            }
        }
        PairTable { n, diff, shift }
    }

    #[inline]
    fn d(&self, i: usize, j: usize) -> T {
        self.diff[i * self.n + j]
    }

    #[inline]
    fn w(&self, i: usize, j: usize) -> T {
        self.shift[i * self.n + j]
    }
}

/// Best triple `(i, j, m)` and its signed level, by exhaustive enumeration.
fn best_triple<T: Scalar>(basis: Basis<T>, data: &Dataset<T>) -> ((usize, usize, usize), T) {
    let (t, y) = (data.t(), data.values());
    let table = PairTable::new(basis, t);
    let n = t.len();
    let mut best = ((0, 1, 2), T::zero());
    let mut best_abs = T::neg_infinity();
    for i in 0..n {
        for m in i + 2..n {
            let d_im = table.d(i, m);
            for j in i + 1..m {
                let h = triple_level(
                    table.d(i, j),
                    d_im,
                    table.d(j, m),
                    table.w(i, j),
                    y[i],
                    y[j],
                    y[m],
                );
                if h.abs() > best_abs {
                    best_abs = h.abs();
                    best = ((i, j, m), h);
                }
            }
        }
    }
    best
}

/// Minimax fit by exhaustive triple enumeration.
pub(crate) fn solve_by_triples<T: Scalar>(basis: Basis<T>, data: &Dataset<T>) -> AnchoredFit<T> {
    let ((i, _, m), h) = best_triple(basis, data);
    let (t, y) = (data.t(), data.values());
    // The fit interpolates T_i - h and T_m - h; anchor at t_i.
    let alpha = (y[m] - y[i]) / basis.diff(t[i], t[m]);
    let beta = match basis {
        Basis::Line => y[i] - h,
        Basis::Exp(_) => y[i] - h - alpha,
    };
    AnchoredFit {
        basis,
        anchor: t[i],
        alpha,
        beta,
        error: h.abs(),
    }
}

/// Minimax fit as the narrowest vertical strip containing the points
/// `(phi(t_i), T_i)`: the optimal slope is the slope of a hull edge.
pub(crate) fn solve_by_hull<T: Scalar>(basis: Basis<T>, data: &Dataset<T>) -> AnchoredFit<T> {
    let (t, y) = (data.t(), data.values());
    let n = t.len();
    // Anchor where phi is largest so every coordinate stays in [0, 1].
    let anchor = match basis {
        Basis::Exp(k) if k > T::zero() => t[n - 1],
        _ => t[0],
    };
    let x: Vec<T> = t
        .iter()
        .map(|&ti| match basis {
            Basis::Line => ti - anchor,
            Basis::Exp(k) => (k * (ti - anchor)).exp(),
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| {
        x[p].partial_cmp(&x[q])
            .unwrap()
            .then(y[p].partial_cmp(&y[q]).unwrap())
    });

    let cross = |o: usize, a: usize, b: usize| {
        (x[a] - x[o]) * (y[b] - y[o]) - (y[a] - y[o]) * (x[b] - x[o])
    };
    let mut lower: Vec<usize> = Vec::new();
    for &p in &order {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= T::zero() {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &p in order.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= T::zero() {
            upper.pop();
        }
        upper.push(p);
    }

    let width_at = |slope: T| {
        let (mut hi, mut lo) = (T::neg_infinity(), T::infinity());
        for l in 0..n {
            let v = y[l] - slope * x[l];
            hi = hi.max(v);
            lo = lo.min(v);
        }
        (hi, lo)
    };

    let mut best: Option<(T, T, T)> = None;
    for hull in [&lower, &upper] {
        for e in hull.windows(2) {
            let (p, q) = (e[0], e[1]);
            if x[p] == x[q] {
                continue;
            }
            let slope = (y[q] - y[p]) / (x[q] - x[p]);
            let (hi, lo) = width_at(slope);
            if best.is_none_or(|(_, bh, bl)| hi - lo < bh - bl) {
                best = Some((slope, hi, lo));
            }
        }
    }
    let (slope, hi, lo) = best.unwrap_or_else(|| {
        let (hi, lo) = width_at(T::zero());
        (T::zero(), hi, lo)
    });
    AnchoredFit {
        basis,
        anchor,
        alpha: slope,
        beta: (hi + lo) * T::half(),
        error: (hi - lo) * T::half(),
    }
}

pub(crate) fn solve<T: Scalar>(basis: Basis<T>, data: &Dataset<T>) -> AnchoredFit<T> {
    if data.len() <= TRIPLE_LIMIT {
        solve_by_triples(basis, data)
    } else {
        solve_by_hull(basis, data)
    }
}

/// Max-norm error of the best fixed-basis approximation, without forming
/// the model (safe for any finite rate).
pub(crate) fn level<T: Scalar>(basis: Basis<T>, data: &Dataset<T>) -> T {
    if data.len() <= TRIPLE_LIMIT {
        best_triple(basis, data).1.abs()
    } else {
        solve_by_hull(basis, data).error
    }
}

/// Best uniform line `a*t + b` with its alternation certificate.
pub fn fit_line_minimax<T: Scalar>(
    data: &Dataset<T>,
) -> Result<(ExponentialModel<T>, AlternationCertificate<T>)> {
    data.require_len(3)?;
    let fit = solve(Basis::Line, data);
    let model = fit.to_model()?;
    let model = if model.kind == crate::model::ModelKind::Constant {
        ExponentialModel::line(T::zero(), model.b)
    } else {
        model
    };
    let cert = certify(&Approximant::Model(model), data)?;
    Ok((model, cert))
}

/// Best `a*exp(k*t) + b` for a fixed rate `k != 0`.
pub fn fit_fixed_k<T: Scalar>(
    k: T,
    data: &Dataset<T>,
) -> Result<(ExponentialModel<T>, AlternationCertificate<T>)> {
    if k == T::zero() {
        return Err(FitError::ZeroRate);
    }
    data.require_len(3)?;
    let model = solve(Basis::Exp(k), data).to_model()?;
    let cert = certify(&Approximant::Model(model), data)?;
    Ok((model, cert))
}

/// Residual certificate of any approximant on `data`.
pub fn certify<T: Scalar>(approx: &Approximant<T>, data: &Dataset<T>) -> Result<AlternationCertificate<T>> {
    Ok(AlternationCertificate::from_residuals(&approx.residuals(data)?))
}

/// The constant-width band `f(t_i) +/- r` where `r` is the max-norm error;
/// every data point lies inside it.
pub fn band<T: Scalar>(approx: &Approximant<T>, data: &Dataset<T>) -> Result<(Vec<T>, Vec<T>)> {
    let fitted = approx.values_on(data)?;
    let r = fitted
        .iter()
        .zip(data.values())
        .fold(T::zero(), |m, (f, y)| m.max((*y - *f).abs()));
    Ok((
        fitted.iter().map(|&f| f + r).collect(),
        fitted.iter().map(|&f| f - r).collect(),
    ))
}
