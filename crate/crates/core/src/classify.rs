//! Solvability taxonomy of a dataset: interior exponential, constant, line,
//! or a limit vector as the rate diverges, together with the closed-form
//! answers for every non-interior case.

use crate::dataset::Dataset;
use crate::error::{FitError, Result};
use crate::minimax::{certify, extremal_runs, solve, Basis};
use crate::model::{midrange, Approximant, ExponentialModel, LimitDirection, LimitVector};
use crate::report::{Alternative, FitReport};
use crate::scalar::{max_min, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaxonomyTag {
    InteriorExponential,
    ConstantBest,
    LimitNegInf,
    LimitPosInf,
    LineBest,
}

impl TaxonomyTag {
    pub fn name(&self) -> &'static str {
        match self {
            TaxonomyTag::InteriorExponential => "InteriorExponential",
            TaxonomyTag::ConstantBest => "ConstantBest",
            TaxonomyTag::LimitNegInf => "LimitNegInf",
            TaxonomyTag::LimitPosInf => "LimitPosInf",
            TaxonomyTag::LineBest => "LineBest",
        }
    }
}

/// Symmetry transforms taking a dataset to its canonical frame, where an
/// interior best exponential has `a > 0` and `k < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Orientation {
    pub reflect_t: bool,
    pub negate: bool,
}

impl Orientation {
    pub const IDENTITY: Orientation = Orientation { reflect_t: false, negate: false };

    /// Order in which orientations are tried.
    pub const SEARCH_ORDER: [Orientation; 4] = [
        Orientation { reflect_t: false, negate: false },
        Orientation { reflect_t: true, negate: false },
        Orientation { reflect_t: false, negate: true },
        Orientation { reflect_t: true, negate: true },
    ];

    pub fn apply<T: Scalar>(&self, data: &Dataset<T>) -> Dataset<T> {
        let d = if self.reflect_t { data.reflect_t() } else { data.clone() };
        if self.negate {
            d.negate_values()
        } else {
            d
        }
    }

    /// Maps an approximant of the oriented data back to the original frame
    /// (and vice versa: every orientation is an involution).
    pub fn map_approximant<T: Scalar>(&self, approx: &Approximant<T>) -> Approximant<T> {
        let a = if self.negate { approx.negate() } else { approx.clone() };
        if self.reflect_t {
            a.reflect_t()
        } else {
            a
        }
    }

    pub fn map_model<T: Scalar>(&self, m: &ExponentialModel<T>) -> ExponentialModel<T> {
        let m = if self.negate { m.negate() } else { *m };
        if self.reflect_t {
            m.reflect_t()
        } else {
            m
        }
    }

    /// Index in the other frame of data index `i` out of `n`.
    pub fn map_index(&self, i: usize, n: usize) -> usize {
        if self.reflect_t {
            n - 1 - i
        } else {
            i
        }
    }

    pub fn map_indices(&self, indices: &[usize], n: usize) -> Vec<usize> {
        let mut out: Vec<usize> = indices.iter().map(|&i| self.map_index(i, n)).collect();
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    pub tag: TaxonomyTag,
    /// Frame in which the tag was decided.
    pub orientation: Orientation,
    /// Data indices (original frame, increasing) justifying the tag.
    pub witness: Vec<usize>,
}

/// Assigns exactly one taxonomy tag to a dataset with `n >= 3`.
pub fn classify<T: Scalar>(data: &Dataset<T>) -> Result<Taxonomy> {
    data.require_len(3)?;
    let y = data.values();
    let n = data.len();
    let (hi, lo) = max_min(y);

    if hi == lo {
        return Ok(Taxonomy {
            tag: TaxonomyTag::ConstantBest,
            orientation: Orientation::IDENTITY,
            witness: vec![0, 1, 2],
        });
    }
    if let Some(w) = sandwich(y, hi, lo).or_else(|| sandwich(y, lo, hi)) {
        return Ok(Taxonomy {
            tag: TaxonomyTag::ConstantBest,
            orientation: Orientation::IDENTITY,
            witness: w.to_vec(),
        });
    }

    let line = solve(Basis::Line, data);
    let scale = y.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let line_tax = |witness: Vec<usize>| Taxonomy {
        tag: TaxonomyTag::LineBest,
        orientation: Orientation::IDENTITY,
        witness,
    };
    if line.error <= T::certificate_tol() * (T::one() + scale) {
        return Ok(line_tax(vec![0, 1, 2]));
    }
    let residuals = line.residuals(data);
    let runs = extremal_runs(&residuals, line.error);
    if runs.len() >= 4 {
        return Ok(line_tax(runs[..4].iter().map(|r| r.first).collect()));
    }
    if runs.len() < 3 {
        return Ok(line_tax(runs.iter().map(|r| r.first).collect()));
    }
    let slope = line.alpha;
    let triple: Vec<usize> = runs.iter().map(|r| r.first).collect();
    if slope == T::zero() {
        return Ok(Taxonomy {
            tag: TaxonomyTag::ConstantBest,
            orientation: Orientation::IDENTITY,
            witness: triple,
        });
    }

    let orientation = Orientation::SEARCH_ORDER
        .into_iter()
        .find(|o| {
            let flip = |b: bool| if b { -T::one() } else { T::one() };
            let oriented_slope = slope * flip(o.reflect_t) * flip(o.negate);
            let first_sign = if o.negate { -runs[0].sign } else { runs[0].sign };
            oriented_slope < T::zero() && first_sign > 0
        })
        .expect("three alternating runs match one orientation");

    let oriented = orientation.apply(data);
    if let Some(w) = spade(oriented.values()) {
        return Ok(Taxonomy {
            tag: if orientation.reflect_t {
                TaxonomyTag::LimitPosInf
            } else {
                TaxonomyTag::LimitNegInf
            },
            orientation,
            witness: orientation.map_indices(&w, n),
        });
    }
    Ok(Taxonomy {
        tag: TaxonomyTag::InteriorExponential,
        orientation,
        witness: triple,
    })
}

/// First `i < j < m` with `y_i = first`, `y_j = middle`, `y_m = first`.
fn sandwich<T: Scalar>(y: &[T], first: T, middle: T) -> Option<[usize; 3]> {
    let i = y.iter().position(|&v| v == first)?;
    let j = i + 1 + y[i + 1..].iter().position(|&v| v == middle)?;
    let m = j + 1 + y[j + 1..].iter().position(|&v| v == first)?;
    Some([i, j, m])
}

/// The obstruction to an interior optimum in the canonical frame: `T_1` is
/// the maximum and the last occurrence of the largest of `T_2..T_n` comes
/// after the first occurrence of the minimum. Returns `[0, argmin, argmax]`.
fn spade<T: Scalar>(y: &[T]) -> Option<[usize; 3]> {
    let rest = &y[1..];
    let (second, lo) = max_min(rest);
    if y[0] < second {
        return None;
    }
    let last_max = 1 + rest.iter().rposition(|&v| v == second)?;
    let first_min = 1 + rest.iter().position(|&v| v == lo)?;
    (last_max > first_min).then_some([0, first_min, last_max])
}

/// Limit of the best fixed-rate approximations as `k -> -inf`.
///
/// Requires `T_1` to be the largest or the smallest ordinate.
pub fn limit_vector_neg_inf<T: Scalar>(data: &Dataset<T>) -> Result<LimitVector<T>> {
    data.require_len(3)?;
    let y = data.values();
    let (hi, lo) = max_min(&y[1..]);
    let sign = if y[0] >= hi {
        T::one()
    } else if y[0] <= lo {
        -T::one()
    } else {
        return Err(FitError::Precondition(
            "first ordinate must be the largest or the smallest".into(),
        ));
    };
    let (mid, r) = midrange(&y[1..]);
    let mut values = vec![mid; y.len()];
    values[0] = y[0] - sign * r;
    Ok(LimitVector {
        direction: LimitDirection::NegInf,
        values,
        error: r,
    })
}

/// Limit of the best fixed-rate approximations as `k -> +inf`; the mirror
/// image of [`limit_vector_neg_inf`]. Requires `T_n` to be extreme.
pub fn limit_vector_pos_inf<T: Scalar>(data: &Dataset<T>) -> Result<LimitVector<T>> {
    Ok(limit_vector_neg_inf(&data.reflect_t())?.reflect_t())
}

/// Value of the rate-only ratio `(e^{k t1} - e^{k t2}) / (e^{k t2} - e^{k t3})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValue<T> {
    pub value: T,
    /// Set when `k = 0` and the value is the limit `(t1 - t2) / (t2 - t3)`.
    pub is_limit: bool,
}

pub fn psi<T: Scalar>(k: T, t1: T, t2: T, t3: T) -> Result<PsiValue<T>> {
    if !(t1 < t2 && t2 < t3) {
        return Err(FitError::Precondition("psi needs t1 < t2 < t3".into()));
    }
    if k == T::zero() {
        return Ok(PsiValue {
            value: (t1 - t2) / (t2 - t3),
            is_limit: true,
        });
    }
    let value = (k * (t1 - t2)).exp_m1() / -(k * (t3 - t2)).exp_m1();
    Ok(PsiValue { value, is_limit: false })
}

/// `ln psi(k)` for `k < 0`, finite for arbitrarily large `|k|`.
pub(crate) fn ln_psi<T: Scalar>(k: T, t1: T, t2: T, t3: T) -> T {
    let x = k * (t1 - t2);
    let ln_num = x + (-(-x).exp()).ln_1p();
    ln_num - (-(k * (t3 - t2)).exp_m1()).ln()
}

/// The exponential `g_k` through `(t1, y1)` and `(t3, y3)`, evaluated at
/// `t`; the line through both points when `k = 0`.
pub fn two_point_exponential<T: Scalar>(k: T, (t1, y1): (T, T), (t3, y3): (T, T), t: T) -> T {
    if k == T::zero() {
        return y1 + (y3 - y1) * (t - t1) / (t3 - t1);
    }
    y1 + (y3 - y1) * (k * (t - t1)).exp_m1() / (k * (t3 - t1)).exp_m1()
}

/// Every closed-form candidate that applies to `data`.
pub(crate) fn closed_form_candidates<T: Scalar>(data: &Dataset<T>) -> Result<Vec<Alternative<T>>> {
    let mut out = Vec::new();
    let line = solve(Basis::Line, data).to_model()?;
    let line = if line.a == T::zero() {
        ExponentialModel::line(T::zero(), line.b)
    } else {
        line
    };
    out.push(candidate("line", Approximant::Model(line), data)?);
    let (b, _) = midrange(data.values());
    out.push(candidate(
        "constant",
        Approximant::Model(ExponentialModel::constant(b)),
        data,
    )?);
    if let Ok(lv) = limit_vector_neg_inf(data) {
        out.push(candidate("limit_neg_inf", Approximant::Limit(lv), data)?);
    }
    if let Ok(lv) = limit_vector_pos_inf(data) {
        out.push(candidate("limit_pos_inf", Approximant::Limit(lv), data)?);
    }
    Ok(out)
}

fn candidate<T: Scalar>(label: &str, approximant: Approximant<T>, data: &Dataset<T>) -> Result<Alternative<T>> {
    let error = certify(&approximant, data)?.error;
    Ok(Alternative {
        label: label.into(),
        approximant,
        error,
    })
}

/// Report for a non-interior taxonomy: the matching closed form, with the
/// other closed forms listed as alternatives.
pub(crate) fn closed_form<T: Scalar>(data: &Dataset<T>, taxonomy: Taxonomy) -> Result<FitReport<T>> {
    let label = match taxonomy.tag {
        TaxonomyTag::ConstantBest => "constant",
        TaxonomyTag::LineBest => "line",
        TaxonomyTag::LimitNegInf => "limit_neg_inf",
        TaxonomyTag::LimitPosInf => "limit_pos_inf",
        TaxonomyTag::InteriorExponential => {
            return Err(FitError::Precondition(
                "interior datasets have no closed form".into(),
            ))
        }
    };
    let mut alternatives = closed_form_candidates(data)?;
    let chosen = match taxonomy.tag {
        TaxonomyTag::LimitNegInf | TaxonomyTag::LimitPosInf => {
            let o = taxonomy.orientation;
            let lv = limit_vector_neg_inf(&o.apply(data))?;
            candidate(label, o.map_approximant(&Approximant::Limit(lv)), data)?
        }
        _ => {
            let pos = alternatives
                .iter()
                .position(|a| a.label == label)
                .expect("line and constant always present");
            alternatives.remove(pos)
        }
    };
    alternatives.retain(|a| a.label != label);
    let certificate = certify(&chosen.approximant, data)?;
    let mut report = FitReport::closed_form(taxonomy, chosen.approximant, certificate.error, certificate);
    report.alternatives = alternatives;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(t: &[f64], y: &[f64]) -> Dataset<f64> {
        Dataset::new(t.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn paradigm_limit() {
        let d = ds(&[1.0, 2.0, 3.0, 4.0], &[3.0, 0.0, 1.0, 2.0]);
        let tax = classify(&d).unwrap();
        assert_eq!(tax.tag, TaxonomyTag::LimitNegInf);
        let lv = limit_vector_neg_inf(&d).unwrap();
        assert_eq!(lv.values, vec![2.0, 1.0, 1.0, 1.0]);
        assert_eq!(lv.error, 1.0);
    }

    #[test]
    fn paradigm_constant() {
        for t in [[0.0, 1.0, 2.0, 3.0], [1.0, 2.5, 3.0, 10.0]] {
            let tax = classify(&ds(&t, &[1.0, 0.0, 2.0, 0.0])).unwrap();
            assert_eq!(tax.tag, TaxonomyTag::ConstantBest);
            assert_eq!(tax.witness, vec![1, 2, 3]);
        }
    }

    #[test]
    fn constructed_quartet_is_interior() {
        let t = [0.0, 1.0, 2.0, 4.0];
        let y = [5.1, 3.3261226388505336, 2.5715177646857694, 1.4413411329464507];
        let tax = classify(&ds(&t, &y)).unwrap();
        assert_eq!(tax.tag, TaxonomyTag::InteriorExponential);
        assert_eq!(tax.orientation, Orientation::IDENTITY);
    }

    #[test]
    fn orientations_of_interior_data() {
        let t = [0.0, 1.0, 2.0, 4.0];
        let y = [5.1, 3.3261226388505336, 2.5715177646857694, 1.4413411329464507];
        let d = ds(&t, &y);
        for o in Orientation::SEARCH_ORDER {
            let tax = classify(&o.apply(&d)).unwrap();
            assert_eq!(tax.tag, TaxonomyTag::InteriorExponential);
            assert_eq!(tax.orientation, o);
        }
    }

    #[test]
    fn mirrored_paradigm_is_pos_inf() {
        let d = ds(&[1.0, 2.0, 3.0, 4.0], &[3.0, 0.0, 1.0, 2.0]).reflect_t();
        let tax = classify(&d).unwrap();
        assert_eq!(tax.tag, TaxonomyTag::LimitPosInf);
        let lv = limit_vector_pos_inf(&d).unwrap();
        assert_eq!(lv.values, vec![1.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn limit_vector_examples() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let lv = limit_vector_neg_inf(&ds(&t, &[3.0, 1.0, 1.0, 1.0])).unwrap();
        assert_eq!((lv.values, lv.error), (vec![3.0, 1.0, 1.0, 1.0], 0.0));
        let lv = limit_vector_neg_inf(&ds(&t, &[5.0, 2.0, 0.0, 2.0])).unwrap();
        assert_eq!((lv.values, lv.error), (vec![4.0, 1.0, 1.0, 1.0], 1.0));
        assert!(limit_vector_neg_inf(&ds(&t, &[1.0, 2.0, 0.0, 2.0])).is_err());
    }

    #[test]
    fn four_alternations_make_line_best() {
        let d = ds(&[0.0, 1.0, 2.0, 3.0, 4.0], &[1.0, -1.0, 1.0, -1.0, 0.5].map(|v| v + 0.0));
        let tax = classify(&d).unwrap();
        assert_eq!(tax.tag, TaxonomyTag::ConstantBest);
        let d = ds(&[0.0, 1.0, 2.0, 3.0], &[0.1, 0.9, 2.1, 2.9]);
        let tax = classify(&d).unwrap();
        assert_eq!(tax.tag, TaxonomyTag::LineBest);
        assert_eq!(tax.witness, vec![0, 1, 2, 3]);
    }

    #[test]
    fn psi_limits() {
        assert!((psi(1e-8f64, 0.0, 1.0, 2.0).unwrap().value - 1.0).abs() < 1e-6);
        assert!(psi(-30.0, 0.0, 1.0, 2.0).unwrap().value > 1e10);
        assert!(psi(30.0, 0.0, 1.0, 2.0).unwrap().value < 1e-10);
        let limit = psi(0.0, 0.0, 1.0, 3.0).unwrap();
        assert!(limit.is_limit);
        assert_eq!(limit.value, 0.5);
    }

    #[test]
    fn ln_psi_matches_psi() {
        for k in [-0.01f64, -1.0, -7.5] {
            let direct = psi(k, 0.0, 0.7, 2.0).unwrap().value.ln();
            assert!((ln_psi(k, 0.0, 0.7, 2.0) - direct).abs() < 1e-12);
        }
        assert!(ln_psi(-2000.0f64, 0.0, 1.0, 2.0).is_finite());
    }

    #[test]
    fn two_point_interpolates() {
        for k in [-2.0f64, 0.0, 3.0] {
            let g = |t: f64| two_point_exponential(k, (0.0, 5.0), (2.0, 1.0), t);
            assert!((g(0.0) - 5.0).abs() < 1e-14);
            assert!((g(2.0) - 1.0).abs() < 1e-14);
        }
    }
}
