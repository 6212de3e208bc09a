//! Model families: `a*exp(k*t) + b` with its line and constant degenerations,
//! and the two-valued limit vectors reached as `k -> -inf` or `k -> +inf`.

use crate::dataset::Dataset;
use crate::error::{FitError, Result};
use crate::scalar::{max_min, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `a*exp(k*t) + b` with `a != 0`, `k != 0`.
    Exponential,
    /// `a*t + b`; `k` is unused.
    Line,
    /// `b`; `a` and `k` are unused.
    Constant,
}

/// A member of `{a*exp(k*t) + b}` or one of its degenerate limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialModel<T> {
    pub kind: ModelKind,
    pub a: T,
    pub k: T,
    pub b: T,
}

impl<T: Scalar> ExponentialModel<T> {
    pub fn exponential(a: T, k: T, b: T) -> Self {
        ExponentialModel {
            kind: ModelKind::Exponential,
            a,
            k,
            b,
        }
    }

    pub fn line(slope: T, intercept: T) -> Self {
        ExponentialModel {
            kind: ModelKind::Line,
            a: slope,
            k: T::zero(),
            b: intercept,
        }
    }

    pub fn constant(b: T) -> Self {
        ExponentialModel {
            kind: ModelKind::Constant,
            a: T::zero(),
            k: T::zero(),
            b,
        }
    }

    pub fn value_at(&self, t: T) -> Result<T> {
        match self.kind {
            ModelKind::Exponential => Ok(self.a * checked_exp(self.k, t)? + self.b),
            ModelKind::Line => Ok(self.a * t + self.b),
            ModelKind::Constant => Ok(self.b),
        }
    }

    /// Coordinatewise evaluation on `t`.
    pub fn evaluate(&self, t: &[T]) -> Result<Vec<T>> {
        t.iter().map(|&x| self.value_at(x)).collect()
    }

    /// The model `t -> f(-t)`, best for t-reflected data.
    pub fn reflect_t(&self) -> Self {
        match self.kind {
            ModelKind::Exponential => Self::exponential(self.a, -self.k, self.b),
            ModelKind::Line => Self::line(-self.a, self.b),
            ModelKind::Constant => *self,
        }
    }

    /// The model `t -> -f(t)`, best for negated data.
    pub fn negate(&self) -> Self {
        ExponentialModel {
            kind: self.kind,
            a: -self.a,
            k: self.k,
            b: -self.b,
        }
    }
}

/// `exp(k*t)` with the overflow guard `|k*t| <= exp_arg_limit`.
pub(crate) fn checked_exp<T: Scalar>(k: T, t: T) -> Result<T> {
    let arg = k * t;
    if arg.abs() > T::exp_arg_limit() || !arg.is_finite() {
        return Err(FitError::Overflow {
            k: k.to_f64().unwrap_or(f64::NAN),
            t: t.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(arg.exp())
}

/// Optimal offset for a fixed amplitude and rate.
///
/// Returns `(b, error)` where `b` is the midrange of `T - a*exp(k*t)` and
/// `error` half its range. `a = 0` or `k = 0` give the constant basis.
pub fn best_b<T: Scalar>(a: T, k: T, data: &Dataset<T>) -> Result<(T, T)> {
    let shifted = data
        .t()
        .iter()
        .zip(data.values())
        .map(|(&t, &y)| Ok(y - a * checked_exp(k, t)?))
        .collect::<Result<Vec<T>>>()?;
    Ok(midrange(&shifted))
}

/// Optimal intercept for a fixed slope: `(b, error)`.
pub fn best_b_line<T: Scalar>(slope: T, data: &Dataset<T>) -> (T, T) {
    let shifted: Vec<T> = data
        .t()
        .iter()
        .zip(data.values())
        .map(|(&t, &y)| y - slope * t)
        .collect();
    midrange(&shifted)
}

/// `((max+min)/2, (max-min)/2)`.
pub(crate) fn midrange<T: Scalar>(v: &[T]) -> (T, T) {
    let (hi, lo) = max_min(v);
    ((hi + lo) * T::half(), (hi - lo) * T::half())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitDirection {
    /// `k -> -inf`: constant from the second point on.
    NegInf,
    /// `k -> +inf`: constant up to the second to last point.
    PosInf,
}

/// Pointwise limit of best approximations as the rate diverges.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitVector<T> {
    pub direction: LimitDirection,
    pub values: Vec<T>,
    pub error: T,
}

impl<T: Scalar> LimitVector<T> {
    pub(crate) fn reflect_t(&self) -> Self {
        LimitVector {
            direction: match self.direction {
                LimitDirection::NegInf => LimitDirection::PosInf,
                LimitDirection::PosInf => LimitDirection::NegInf,
            },
            values: self.values.iter().rev().copied().collect(),
            error: self.error,
        }
    }

    pub(crate) fn negate(&self) -> Self {
        LimitVector {
            direction: self.direction,
            values: self.values.iter().map(|&v| -v).collect(),
            error: self.error,
        }
    }
}

/// What a fit returns: a model, or a limit vector when no model attains the
/// infimum.
#[derive(Debug, Clone, PartialEq)]
pub enum Approximant<T> {
    Model(ExponentialModel<T>),
    Limit(LimitVector<T>),
}

impl<T: Scalar> Approximant<T> {
    /// Values at the data abscissae.
    pub fn values_on(&self, data: &Dataset<T>) -> Result<Vec<T>> {
        match self {
            Approximant::Model(m) => m.evaluate(data.t()),
            Approximant::Limit(l) => {
                if l.values.len() != data.len() {
                    return Err(FitError::WrongSize {
                        expected: data.len(),
                        found: l.values.len(),
                    });
                }
                Ok(l.values.clone())
            }
        }
    }

    /// `T_i - f(t_i)`.
    pub fn residuals(&self, data: &Dataset<T>) -> Result<Vec<T>> {
        Ok(self
            .values_on(data)?
            .into_iter()
            .zip(data.values())
            .map(|(f, &y)| y - f)
            .collect())
    }

    pub fn model(&self) -> Option<&ExponentialModel<T>> {
        match self {
            Approximant::Model(m) => Some(m),
            Approximant::Limit(_) => None,
        }
    }

    pub(crate) fn reflect_t(&self) -> Self {
        match self {
            Approximant::Model(m) => Approximant::Model(m.reflect_t()),
            Approximant::Limit(l) => Approximant::Limit(l.reflect_t()),
        }
    }

    pub(crate) fn negate(&self) -> Self {
        match self {
            Approximant::Model(m) => Approximant::Model(m.negate()),
            Approximant::Limit(l) => Approximant::Limit(l.negate()),
        }
    }
}
