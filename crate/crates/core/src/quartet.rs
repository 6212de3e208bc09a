//! Exact best approximation of four points.
//!
//! With residual signs `(+, -, +, -)` the four alternation equalities reduce
//! to one equation in the rate. Writing `s_i = t_i - t_1` and `z = e^k`,
//! `q(z) = d13 z^{s4} - d24 z^{s3} - d13 z^{s2} + d24` has the trivial root
//! `z = 1` and, when `S13 > S24 > 0`, exactly one more root in `(0, 1)`.

use crate::classify::{classify, closed_form, Orientation, Taxonomy, TaxonomyTag};
use crate::dataset::Dataset;
use crate::error::{FitError, Result};
use crate::minimax::certify;
use crate::model::{checked_exp, Approximant, ExponentialModel};
use crate::report::FitReport;
use crate::roots::{find_root, RootOptions};
use crate::scalar::Scalar;

/// Initial distance below `w = 1` where the sign of `q` is probed.
const INITIAL_ETA: f64 = 1e-3;
const ETA_HALVINGS: usize = 40;
/// Bracket width in `w` at which bisection hands over to Brent.
const BISECTION_WIDTH: f64 = 1e-6;
/// Relative tolerance for declaring the two secant slopes equal.
const EQUAL_SLOPE_TOL: f64 = 1e-12;

/// The quartet rate equation in shifted exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootProblem<T> {
    /// `(s2, s3, s4)` with `s_i = t_i - t_1`.
    pub s: [T; 3],
    pub d13: T,
    pub d24: T,
}

impl<T: Scalar> RootProblem<T> {
    pub fn from_data(data: &Dataset<T>) -> Result<Self> {
        if data.len() != 4 {
            return Err(FitError::WrongSize {
                expected: 4,
                found: data.len(),
            });
        }
        let (t, y) = (data.t(), data.values());
        Ok(RootProblem {
            s: [t[1] - t[0], t[2] - t[0], t[3] - t[0]],
            d13: y[0] - y[2],
            d24: y[1] - y[3],
        })
    }

    /// `q(e^k)` in a form that stays accurate as `k -> 0`.
    pub fn q_at_rate(&self, k: T) -> T {
        let [s2, s3, s4] = self.s;
        self.d13 * (k * s2).exp() * (k * (s4 - s2)).exp_m1() - self.d24 * (k * s3).exp_m1()
    }

    /// `q` as a function of `w = z^{s4}` on `[0, 1]`.
    fn q_at_w(&self, w: T) -> T {
        if w == T::zero() {
            self.d24
        } else {
            self.q_at_rate(w.ln() / self.s[2])
        }
    }

    /// `q'(1)`; positive exactly when the second root lies below `z = 1`.
    pub fn dq_at_one(&self) -> T {
        let [s2, s3, s4] = self.s;
        (s4 - s2) * self.d13 - self.d24 * s3
    }

    fn scale(&self) -> T {
        self.d13.abs() + self.d24.abs()
    }
}

/// Rate `k < 0` of the non-trivial root of `q` in `(0, 1)`.
///
/// Requires `d24 > 0` and `q'(1) > 0`.
pub fn solve_rate<T: Scalar>(problem: &RootProblem<T>) -> Result<T> {
    if !(problem.d24 > T::zero() && problem.dq_at_one() > T::zero()) {
        return Err(FitError::BracketNotFound(
            "quartet slopes do not isolate a root in (0, 1)".into(),
        ));
    }
    let mut eta = T::lit(INITIAL_ETA);
    let mut hi = None;
    for _ in 0..=ETA_HALVINGS {
        let w = T::one() - eta;
        let q = problem.q_at_w(w);
        if q < T::zero() {
            hi = Some((w, q));
            break;
        }
        eta = eta * T::half();
    }
    let (w_hi, q_hi) = hi.ok_or_else(|| {
        FitError::BracketNotFound("no sign change of q just below z = 1".into())
    })?;

    // Coarse isolation in w, which keeps the bracket independent of units.
    let mut lo = (T::zero(), problem.d24);
    let mut hi = (w_hi, q_hi);
    while hi.0 - lo.0 > T::lit(BISECTION_WIDTH) {
        let mid = (lo.0 + hi.0) * T::half();
        let qm = problem.q_at_w(mid);
        if qm == T::zero() {
            return Ok(mid.ln() / problem.s[2]);
        }
        if qm > T::zero() {
            lo = (mid, qm);
        } else {
            hi = (mid, qm);
        }
    }

    // Polish in k, where the tolerance is relative to the rate itself.
    let s4 = problem.s[2];
    let k_hi = hi.0.ln() / s4;
    let (mut k_lo, mut q_lo) = if lo.0 > T::zero() {
        (lo.0.ln() / s4, lo.1)
    } else {
        (k_hi * T::two(), problem.q_at_rate(k_hi * T::two()))
    };
    let mut widen = 0;
    while q_lo <= T::zero() {
        widen += 1;
        if widen > 60 {
            return Err(FitError::BracketNotFound("q has no sign change as k -> -inf".into()));
        }
        k_lo = k_lo * T::two();
        q_lo = problem.q_at_rate(k_lo);
    }
    let opts = RootOptions {
        switch_width: T::zero(),
        x_tol: T::root_bracket_tol() * (T::one() + k_hi.abs()),
        f_tol: T::root_residual_tol() * problem.scale(),
        max_iter: 200,
    };
    let root = find_root(|k| problem.q_at_rate(k), k_lo, k_hi, q_lo, hi.1, opts)
        .ok_or_else(|| FitError::BracketNotFound("lost sign change while polishing".into()))?;
    Ok(root)
}

/// Model with residual pattern `(+r, -r, +r, -r)` for data in the canonical
/// slope configuration; returns `(model, r)`.
fn canonical_fit<T: Scalar>(data: &Dataset<T>) -> Result<(ExponentialModel<T>, T)> {
    let problem = RootProblem::from_data(data)?;
    let k = solve_rate(&problem)?;
    let (t, y) = (data.t(), data.values());
    let [s2, s3, _] = problem.s;
    let a_ref = -problem.d13 / (k * s3).exp_m1();
    let b = T::half() * (y[0] - a_ref + y[1] - a_ref * (k * s2).exp());
    let r = y[0] - a_ref - b;
    let a = a_ref * checked_exp(k, -t[0])?;
    Ok((ExponentialModel::exponential(a, k, b), r))
}

fn slopes_equal<T: Scalar>(s13: T, s24: T) -> bool {
    (s13 - s24).abs() <= T::lit(EQUAL_SLOPE_TOL) * s13.abs().max(s24.abs())
}

/// Orientation taking four points to the canonical configuration
/// `S13 > S24 > 0`, if any.
fn quartet_orientation<T: Scalar>(s13: T, s24: T) -> Option<Orientation> {
    let zero = T::zero();
    let o = |reflect_t, negate| Some(Orientation { reflect_t, negate });
    if s13 > s24 && s24 > zero {
        o(false, false)
    } else if s24 < s13 && s13 < zero {
        o(true, false)
    } else if s13 < s24 && s24 < zero {
        o(false, true)
    } else if s24 > s13 && s13 > zero {
        o(true, true)
    } else {
        None
    }
}

/// Best approximation of exactly four points.
pub fn fit_quartet<T: Scalar>(data: &Dataset<T>) -> Result<FitReport<T>> {
    if data.len() != 4 {
        return Err(FitError::WrongSize {
            expected: 4,
            found: data.len(),
        });
    }
    let (t, y) = (data.t(), data.values());
    let d13 = y[0] - y[2];
    let d24 = y[1] - y[3];
    let s13 = d13 / (t[2] - t[0]);
    let s24 = d24 / (t[3] - t[1]);

    if d13 != T::zero() && d24 != T::zero() && slopes_equal(s13, s24) {
        let tax = Taxonomy {
            tag: TaxonomyTag::LineBest,
            orientation: Orientation::IDENTITY,
            witness: vec![0, 1, 2, 3],
        };
        return closed_form(data, tax);
    }
    let Some(orientation) = quartet_orientation(s13, s24) else {
        let mut report = closed_form(data, classify(data)?)?;
        if let Approximant::Limit(_) = report.approximant {
            let residuals = report.approximant.residuals(data)?;
            let slack = T::certificate_tol() * (T::one() + report.error);
            let skippable: Vec<usize> = (0..4)
                .filter(|&i| residuals[i].abs() < report.error - slack)
                .collect();
            if !skippable.is_empty() {
                report.warnings.push(format!(
                    "points {skippable:?} do not affect the limit approximation"
                ));
            }
        }
        return Ok(report);
    };

    let oriented = orientation.apply(data);
    let mut warnings = Vec::new();
    let (approximant, tax) = match canonical_fit(&oriented) {
        Ok((model, _)) => (
            Approximant::Model(orientation.map_model(&model)),
            Taxonomy {
                tag: TaxonomyTag::InteriorExponential,
                orientation,
                witness: vec![0, 1, 2, 3],
            },
        ),
        Err(e) => {
            warnings.push(format!("rate solve failed ({e}); returning best line"));
            let mut report = closed_form(
                data,
                Taxonomy {
                    tag: TaxonomyTag::LineBest,
                    orientation: Orientation::IDENTITY,
                    witness: vec![0, 1, 2],
                },
            )?;
            report.warnings = warnings;
            return Ok(report);
        }
    };
    let certificate = certify(&approximant, data)?;
    let mut report = FitReport::closed_form(tax, approximant, certificate.error, certificate);
    report.quartet = Some([0, 1, 2, 3]);
    report.warnings = warnings;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelKind;

    fn constructed() -> Dataset<f64> {
        Dataset::new(
            vec![0.0, 1.0, 2.0, 4.0],
            vec![5.1, 3.326123, 2.571518, 1.441341],
        )
        .unwrap()
    }

    fn exact_constructed() -> Dataset<f64> {
        let t = [0.0, 1.0, 2.0, 4.0];
        let y = t
            .iter()
            .zip([0.1, -0.1, 0.1, -0.1])
            .map(|(x, r): (&f64, f64)| 4.0 * (-0.5 * x).exp() + 1.0 + r)
            .collect();
        Dataset::new(t.to_vec(), y).unwrap()
    }

    #[test]
    fn recovers_constructed_quartet() {
        let rep = fit_quartet(&exact_constructed()).unwrap();
        let m = rep.approximant.model().unwrap();
        assert_eq!(m.kind, ModelKind::Exponential);
        assert!((m.a - 4.0).abs() < 1e-8);
        assert!((m.k + 0.5).abs() < 1e-8);
        assert!((m.b - 1.0).abs() < 1e-8);
        assert!((rep.error - 0.1).abs() < 1e-8);
        assert_eq!(rep.certificate.indices, vec![0, 1, 2, 3]);
        assert_eq!(rep.certificate.delta, 1);
    }

    #[test]
    fn rounded_constructed_quartet() {
        let rep = fit_quartet(&constructed()).unwrap();
        let m = rep.approximant.model().unwrap();
        assert!((m.k + 0.5).abs() < 1e-6);
        assert!((rep.error - 0.1).abs() < 1e-6);
    }

    #[test]
    fn rate_of_constructed_problem() {
        let p = RootProblem::from_data(&exact_constructed()).unwrap();
        let k = solve_rate(&p).unwrap();
        assert!((k + 0.5).abs() < 1e-9);
        assert!(((k.exp()) - 0.606531).abs() < 1e-6);
    }

    #[test]
    fn rate_of_shifted_exponential() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = t
            .iter()
            .zip([0.05, -0.05, 0.05, -0.05])
            .map(|(x, r): (&f64, f64)| 3.0 * (-x).exp() - 1.0 + r)
            .collect();
        let p = RootProblem::from_data(&Dataset::new(t.to_vec(), y).unwrap()).unwrap();
        assert!((solve_rate(&p).unwrap() + 1.0).abs() < 1e-9);
    }

    #[test]
    fn equal_slopes_have_no_second_root() {
        let d = Dataset::new(vec![0.0, 1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0, 0.0]).unwrap();
        let p = RootProblem::from_data(&d).unwrap();
        assert!(matches!(solve_rate(&p), Err(FitError::BracketNotFound(_))));
        let rep = fit_quartet(&d).unwrap();
        assert_eq!(rep.taxonomy.tag, TaxonomyTag::LineBest);
        assert!(rep.error < 1e-15);
    }

    #[test]
    fn paradigm_cases() {
        let d = Dataset::new(vec![1.0, 2.0, 3.0, 4.0], vec![3.0, 0.0, 1.0, 2.0]).unwrap();
        let rep = fit_quartet(&d).unwrap();
        assert_eq!(rep.taxonomy.tag, TaxonomyTag::LimitNegInf);
        match &rep.approximant {
            Approximant::Limit(l) => assert_eq!(l.values, vec![2.0, 1.0, 1.0, 1.0]),
            other => panic!("{other:?}"),
        }
        assert_eq!(rep.error, 1.0);
        assert_eq!(rep.warnings, vec!["points [2] do not affect the limit approximation"]);

        let d = Dataset::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 0.0, 2.0, 0.0]).unwrap();
        let rep = fit_quartet(&d).unwrap();
        assert_eq!(rep.taxonomy.tag, TaxonomyTag::ConstantBest);
        assert_eq!(rep.approximant.model().unwrap().b, 1.0);
        assert_eq!(rep.error, 1.0);
    }

    #[test]
    fn symmetric_branches() {
        let d = exact_constructed();
        for (o, want) in [
            (Orientation { reflect_t: true, negate: false }, (4.0, 0.5, 1.0)),
            (Orientation { reflect_t: false, negate: true }, (-4.0, -0.5, -1.0)),
            (Orientation { reflect_t: true, negate: true }, (-4.0, 0.5, -1.0)),
        ] {
            let rep = fit_quartet(&o.apply(&d)).unwrap();
            let m = rep.approximant.model().unwrap();
            assert!((m.a - want.0).abs() < 1e-8, "{o:?} {m:?}");
            assert!((m.k - want.1).abs() < 1e-8, "{o:?} {m:?}");
            assert!((m.b - want.2).abs() < 1e-8, "{o:?} {m:?}");
            assert!((rep.error - 0.1).abs() < 1e-9);
        }
    }

    #[test]
    fn wrong_size() {
        let d = Dataset::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 2.0]).unwrap();
        assert!(matches!(fit_quartet(&d), Err(FitError::WrongSize { .. })));
    }
}
