//! Global minimisation of the max-norm error over the rate.
//!
//! In the canonical frame the error `E(k)` is quasiconvex on `(-inf, 0)`, so
//! a geometric scan brackets the minimiser and golden-section reduction
//! shrinks the bracket. The result is then snapped to the exact solution of
//! the extremal quartet at the search rate.

use crate::classify::{classify, closed_form, closed_form_candidates, ln_psi, Taxonomy, TaxonomyTag};
use crate::dataset::Dataset;
use crate::error::{FitError, Result};
use crate::minimax::{certify, level, runs_with_tol, solve, AnchoredFit, Basis};
use crate::model::{Approximant, ExponentialModel, ModelKind};
use crate::quartet::fit_quartet;
use crate::report::FitReport;
use crate::roots::{find_root, RootOptions};
use crate::scalar::Scalar;

const MAX_SCAN_STEPS: i32 = 60;
pub const DEFAULT_BRACKET_TOL: f64 = 1e-10;
const PLATEAU_REL_TOL: f64 = 1e-12;
const QUARTET_ACCEPT_TOL: f64 = 1e-12;
const MAX_GOLDEN_ITER: usize = 400;

/// Max-norm error of the best approximation with rate `k`; `k = 0` gives the
/// best line. Finite for every finite `k`.
pub fn error_at<T: Scalar>(k: T, data: &Dataset<T>) -> T {
    if k > T::zero() {
        level(Basis::Exp(-k), &data.reflect_t())
    } else {
        level(Basis::for_rate(k), data)
    }
}

/// Search settings for [`fit_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions<T> {
    /// Golden-section stops once the bracket is narrower than
    /// `bracket_tol * (1 + |k|)`.
    pub bracket_tol: T,
    /// Restricts the rate to `[lo, hi]`, an interval of one sign.
    pub k_range: Option<(T, T)>,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        FitOptions {
            bracket_tol: T::lit(DEFAULT_BRACKET_TOL),
            k_range: None,
        }
    }
}

struct Search<'a, T> {
    data: &'a Dataset<T>,
    trace: Vec<(T, T)>,
    tol: T,
}

impl<T: Scalar> Search<'_, T> {
    fn eval(&mut self, k: T) -> T {
        let e = error_at(k, self.data);
        self.trace.push((k, e));
        e
    }

    /// Golden-section reduction of `[lo, hi]`; returns the best evaluated
    /// point and the final bracket width.
    fn golden(&mut self, mut lo: T, mut hi: T) -> ((T, T), T) {
        let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::half();
        let mut f_lo = self.eval(lo);
        let mut f_hi = self.eval(hi);
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = self.eval(x1);
        let mut f2 = self.eval(x2);
        for _ in 0..MAX_GOLDEN_ITER {
            let best = f_lo.min(f_hi).min(f1).min(f2);
            let worst = f_lo.max(f_hi).max(f1).max(f2);
            let mid = (lo + hi) * T::half();
            if hi - lo <= self.tol * (T::one() + mid.abs())
                || worst - best <= T::lit(PLATEAU_REL_TOL) * (T::one() + best)
            {
                break;
            }
            if f1 <= f2 {
                hi = x2;
                f_hi = f2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = self.eval(x1);
            } else {
                lo = x1;
                f_lo = f1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = self.eval(x2);
            }
        }
        let best = [(lo, f_lo), (x1, f1), (x2, f2), (hi, f_hi)]
            .into_iter()
            .fold((lo, f_lo), |b, p| if p.1 < b.1 { p } else { b });
        (best, hi - lo)
    }

    /// Geometric scan `k_j = -2^j / span` outward from `j = 0` until the
    /// error stops decreasing on both sides; returns `[lo, hi]` with `hi < 0`.
    fn bracket(&mut self) -> Option<(T, T)> {
        let k0 = T::one() / self.data.span();
        let k_of = |j: i32| -k0 * T::two().powi(j);
        let e0 = self.eval(k_of(0));
        let e_out = self.eval(k_of(1));
        let (mut j, mut e, step): (i32, T, i32) = if e_out < e0 { (1, e_out, 1) } else { (0, e0, -1) };
        loop {
            let next = j + step;
            if next.abs() > MAX_SCAN_STEPS {
                return None;
            }
            let e_next = self.eval(k_of(next));
            if e_next >= e {
                let (a, b) = (k_of(j - 1), k_of(j + 1));
                return Some((a.min(b), a.max(b)));
            }
            j = next;
            e = e_next;
        }
    }
}

/// Quartets of consecutive sign runs of near-extremal residuals, each run
/// represented by its largest residual.
fn candidate_quartets<T: Scalar>(residuals: &[T], error: T) -> Vec<[usize; 4]> {
    let mut tol = T::lit(1e-6);
    loop {
        let runs = runs_with_tol(residuals, error, tol);
        if runs.len() >= 4 || tol >= T::one() {
            return runs
                .windows(4)
                .map(|w| [w[0].peak, w[1].peak, w[2].peak, w[3].peak])
                .collect();
        }
        tol = tol * T::lit(10.0);
    }
}

/// Exact three-point interpolation in the canonical frame:
/// `psi(k) = (T1 - T2) / (T2 - T3)` with `k < 0`.
fn three_point_rate<T: Scalar>(data: &Dataset<T>) -> Option<T> {
    let (t, y) = (data.t(), data.values());
    let target = ((y[0] - y[1]) / (y[1] - y[2])).ln();
    let f = |k: T| ln_psi(k, t[0], t[1], t[2]) - target;
    let mut hi = -T::one() / data.span();
    let mut f_hi = f(hi);
    let mut n = 0;
    while f_hi >= T::zero() {
        n += 1;
        if n > MAX_SCAN_STEPS {
            return None;
        }
        hi = hi * T::half();
        f_hi = f(hi);
    }
    let mut lo = hi * T::two();
    let mut f_lo = f(lo);
    while f_lo <= T::zero() {
        n += 1;
        if n > 2 * MAX_SCAN_STEPS {
            return None;
        }
        lo = lo * T::two();
        f_lo = f(lo);
    }
    let opts = RootOptions {
        switch_width: T::zero(),
        x_tol: T::root_bracket_tol() * (T::one() + lo.abs()),
        f_tol: T::zero(),
        max_iter: 300,
    };
    find_root(f, lo, hi, f_lo, f_hi, opts)
}

/// Best approximation of `data` by `a*exp(k*t) + b` or its limits.
pub fn fit<T: Scalar>(data: &Dataset<T>) -> Result<FitReport<T>> {
    fit_with(data, &FitOptions::default())
}

/// [`fit`] or [`fit_in_range`] with explicit settings.
pub fn fit_with<T: Scalar>(data: &Dataset<T>, options: &FitOptions<T>) -> Result<FitReport<T>> {
    if !(options.bracket_tol > T::zero()) {
        return Err(FitError::Precondition("bracket tolerance must be positive".into()));
    }
    match options.k_range {
        Some((lo, hi)) => range_fit(data, lo, hi, options.bracket_tol),
        None => global_fit(data, options.bracket_tol),
    }
}

fn global_fit<T: Scalar>(data: &Dataset<T>, tol: T) -> Result<FitReport<T>> {
    let taxonomy = classify(data)?;
    if taxonomy.tag != TaxonomyTag::InteriorExponential {
        return closed_form(data, taxonomy);
    }
    let oriented = taxonomy.orientation.apply(data);
    let mut search = Search {
        data: &oriented,
        trace: Vec::new(),
        tol,
    };

    if oriented.len() == 3 {
        let Some(k) = three_point_rate(&oriented) else {
            return fallback(data, taxonomy, search.trace, "three-point rate not bracketed");
        };
        search.eval(k);
        let fit = solve(Basis::Exp(k), &oriented);
        return finish(data, taxonomy, search.trace, fit, None, Some(k), None);
    }

    let Some((lo, hi)) = search.bracket() else {
        return fallback(data, taxonomy, search.trace, "rate scan found no interior minimum");
    };
    let ((k_s, _), width) = search.golden(lo, hi);
    let fit = solve(Basis::Exp(k_s), &oriented);
    let (fit, quartet) = polish(&oriented, fit, |_| true);
    finish(data, taxonomy, search.trace, fit, quartet, Some(k_s), Some(width))
}

/// Best approximation with the rate restricted to `[k_lo, k_hi]`, an
/// interval of one sign not containing zero.
pub fn fit_in_range<T: Scalar>(data: &Dataset<T>, k_lo: T, k_hi: T) -> Result<FitReport<T>> {
    range_fit(data, k_lo, k_hi, T::lit(DEFAULT_BRACKET_TOL))
}

fn range_fit<T: Scalar>(data: &Dataset<T>, k_lo: T, k_hi: T, tol: T) -> Result<FitReport<T>> {
    data.require_len(3)?;
    if !(k_lo < k_hi) || k_lo * k_hi <= T::zero() {
        return Err(FitError::Precondition(
            "rate range must be increasing, of one sign and exclude 0".into(),
        ));
    }
    let taxonomy = classify(data)?;
    let mut search = Search {
        data,
        trace: Vec::new(),
        tol,
    };
    let ((k_s, _), width) = search.golden(k_lo, k_hi);
    let fit = solve(Basis::Exp(k_s), data);
    let in_range = |k: T| k >= k_lo && k <= k_hi;
    let (fit, quartet) = if data.len() >= 4 {
        polish(data, fit, in_range)
    } else {
        (fit.into(), None)
    };
    let mut report = finish(
        data,
        Taxonomy {
            orientation: Default::default(),
            ..taxonomy.clone()
        },
        search.trace,
        fit,
        quartet,
        Some(k_s),
        Some(width),
    )?;
    report.taxonomy = taxonomy;
    if report.taxonomy.tag != TaxonomyTag::InteriorExponential {
        report
            .warnings
            .push(format!("unrestricted classification is {}", report.taxonomy.tag.name()));
    }
    Ok(report)
}

/// Replaces the search result by the exact solution of an extremal quartet
/// when that is at least as good on the full data.
fn polish<T: Scalar>(
    data: &Dataset<T>,
    fit: AnchoredFit<T>,
    accept_rate: impl Fn(T) -> bool,
) -> (Candidate<T>, Option<[usize; 4]>) {
    let residuals = fit.residuals(data);
    let search_error = residuals.iter().fold(T::zero(), |m, r| m.max(r.abs()));
    let mut best: Option<(ExponentialModel<T>, T, [usize; 4])> = None;
    for quartet in candidate_quartets(&residuals, search_error) {
        let Ok(sub) = data.select(&quartet) else { continue };
        let Ok(rep) = fit_quartet(&sub) else { continue };
        let Some(model) = rep.approximant.model() else { continue };
        if model.kind != ModelKind::Exponential || !accept_rate(model.k) {
            continue;
        }
        let Ok(cert) = certify(&Approximant::Model(*model), data) else { continue };
        if best.as_ref().is_none_or(|b| cert.error < b.1) {
            best = Some((*model, cert.error, quartet));
        }
    }
    match best {
        Some((model, error, quartet))
            if error <= search_error + T::lit(QUARTET_ACCEPT_TOL) * (T::one() + search_error) =>
        {
            (Candidate::Model(model), Some(quartet))
        }
        _ => (Candidate::Anchored(fit), None),
    }
}

enum Candidate<T> {
    Anchored(AnchoredFit<T>),
    Model(ExponentialModel<T>),
}

impl<T: Scalar> From<AnchoredFit<T>> for Candidate<T> {
    fn from(f: AnchoredFit<T>) -> Self {
        Candidate::Anchored(f)
    }
}

fn finish<T: Scalar>(
    data: &Dataset<T>,
    taxonomy: Taxonomy,
    trace: Vec<(T, T)>,
    fit: impl Into<Candidate<T>>,
    quartet: Option<[usize; 4]>,
    search_k: Option<T>,
    width: Option<T>,
) -> Result<FitReport<T>> {
    let o = taxonomy.orientation;
    let n = data.len();
    let oriented_model = match fit.into() {
        Candidate::Anchored(f) => f.to_model()?,
        Candidate::Model(m) => m,
    };
    let approximant = Approximant::Model(o.map_model(&oriented_model));
    let certificate = certify(&approximant, data)?;
    let mut report = FitReport::closed_form(taxonomy, approximant, certificate.error, certificate);
    report.evals = trace.len();
    report.trace = trace
        .into_iter()
        .map(|(k, e)| (if o.reflect_t { -k } else { k }, e))
        .collect();
    report.search_k = search_k.map(|k| if o.reflect_t { -k } else { k });
    report.k_bracket = width;
    report.quartet = quartet.map(|q| {
        let v = o.map_indices(&q, n);
        [v[0], v[1], v[2], v[3]]
    });
    report.alternatives = closed_form_candidates(data)?;

    let tol = T::lit(PLATEAU_REL_TOL) * (T::one() + report.error);
    if let Some(better) = report
        .alternatives
        .iter()
        .filter(|a| a.error + tol < report.error)
        .min_by(|a, b| a.error.partial_cmp(&b.error).unwrap())
    {
        report.warnings.push(format!(
            "closed form `{}` has smaller error than the rate search",
            better.label
        ));
    }
    Ok(report)
}

fn fallback<T: Scalar>(
    data: &Dataset<T>,
    taxonomy: Taxonomy,
    trace: Vec<(T, T)>,
    reason: &str,
) -> Result<FitReport<T>> {
    let candidates = closed_form_candidates(data)?;
    let best = candidates
        .iter()
        .min_by(|a, b| a.error.partial_cmp(&b.error).unwrap())
        .expect("line candidate always present")
        .clone();
    let certificate = certify(&best.approximant, data)?;
    let mut report = FitReport::closed_form(taxonomy, best.approximant, certificate.error, certificate);
    report.alternatives = candidates.into_iter().filter(|a| a.label != best.label).collect();
    report.evals = trace.len();
    report.trace = trace;
    report
        .warnings
        .push(format!("{reason}; returning closed form `{}`", best.label));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimax::fit_line_minimax;

    fn ds(t: &[f64], y: &[f64]) -> Dataset<f64> {
        Dataset::new(t.to_vec(), y.to_vec()).unwrap()
    }

    fn constructed() -> Dataset<f64> {
        let t = [0.0, 1.0, 2.0, 4.0];
        let y: Vec<f64> = t
            .iter()
            .zip([0.1, -0.1, 0.1, -0.1])
            .map(|(x, r): (&f64, f64)| 4.0 * (-0.5 * x).exp() + 1.0 + r)
            .collect();
        ds(&t, &y)
    }

    #[test]
    fn error_at_examples() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = t.iter().map(|x: &f64| 2.0 * (-0.7 * x).exp() + 1.0).collect();
        assert!(error_at(-0.7, &ds(&t, &y)) < 1e-14);

        let d = ds(&[0.0, 1.0, 2.0], &[2.0, 0.0, 1.0]);
        assert!((error_at(-1.0, &d) - 0.634471).abs() < 1e-6);

        let d = ds(&[0.0, 0.5, 1.3, 2.0, 3.1], &[3.0, 1.9, 1.5, 0.8, 0.9]);
        let line = fit_line_minimax(&d).unwrap().1.error;
        assert!((error_at(-1e-6, &d) - line).abs() <= 1e-4 * line);
    }

    #[test]
    fn positive_rate_by_reflection() {
        let d = ds(&[0.0, 0.5, 1.3, 2.0, 3.1], &[0.2, 0.5, 1.5, 2.8, 6.9]);
        let direct = solve(Basis::Exp(0.8), &d).error;
        assert!((error_at(0.8, &d) - direct).abs() < 1e-12);
    }

    #[test]
    fn constructed_quartet_through_fit() {
        let rep = fit(&constructed()).unwrap();
        let m = rep.approximant.model().unwrap();
        assert!((m.k + 0.5).abs() < 1e-7);
        assert!((m.a - 4.0).abs() < 1e-7);
        assert!((m.b - 1.0).abs() < 1e-7);
        assert!(rep.certificate.indices.len() >= 4);
        assert!(rep.warnings.is_empty());
    }

    #[test]
    fn paradigm_report() {
        let rep = fit(&ds(&[1.0, 2.0, 3.0, 4.0], &[3.0, 0.0, 1.0, 2.0])).unwrap();
        assert_eq!(rep.taxonomy.tag, TaxonomyTag::LimitNegInf);
        match &rep.approximant {
            Approximant::Limit(l) => assert_eq!(l.values, vec![2.0, 1.0, 1.0, 1.0]),
            other => panic!("{other:?}"),
        }
        assert_eq!(rep.error, 1.0);
    }

    #[test]
    fn three_points_interpolated() {
        let t = [0.0, 0.7, 2.0];
        let y: Vec<f64> = t.iter().map(|x: &f64| 3.0 * (-1.3 * x).exp() - 0.5).collect();
        let rep = fit(&ds(&t, &y)).unwrap();
        let m = rep.approximant.model().unwrap();
        assert!((m.k + 1.3).abs() < 1e-9);
        assert!(rep.error < 1e-12);
    }

    #[test]
    fn newton_cooling_surrogate() {
        let t: Vec<f64> = (0..12).map(|i| 200.0 * i as f64).collect();
        let mut y: Vec<f64> = t
            .iter()
            .map(|x| 5.7259032 * (-0.0026042 * x).exp() - 1.3743464)
            .collect();
        for (i, s) in [(0, 1.0), (3, -1.0), (7, 1.0), (11, -1.0)] {
            y[i] += 0.01 * s;
        }
        let rep = fit(&ds(&t, &y)).unwrap();
        let m = rep.approximant.model().unwrap();
        assert!((m.k + 0.0026042).abs() < 1e-5);
    }

    #[test]
    fn range_restricted_fit() {
        let rep = fit_in_range(&constructed(), -2.0, -0.1).unwrap();
        assert!((rep.approximant.model().unwrap().k + 0.5).abs() < 1e-7);
        let rep = fit_in_range(&constructed(), -2.0, -1.0).unwrap();
        let k = rep.approximant.model().unwrap().k;
        assert!((-2.0..=-1.0).contains(&k));
        assert!((k + 1.0).abs() < 1e-8);
        assert!(fit_in_range(&constructed(), -1.0, 1.0).is_err());
    }
}
