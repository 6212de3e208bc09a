//! Exponential demand curves `log10 Q = log10 Q0 + k (exp(-alpha Q0 C) - 1)`
//! fitted as `log10 Q = a exp(d C) + b`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{fit_separable, ExpDecayPattern, GridAxis, SeparableFit};
use crate::dataset::Dataset;
use crate::error::{FitError, Result};
use crate::scalar::Scalar;

/// Prices of the simulation protocol.
pub const SIMULATION_PRICES: [f64; 15] = [
    0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandParams<T> {
    /// Demand intensity: consumption at zero price.
    pub q0: T,
    /// Range of consumption in log10 units.
    pub k: T,
    /// Essential value; larger means faster decay with price.
    pub alpha: T,
}

/// Coefficients of `a exp(d C) + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandInternal<T> {
    pub a: T,
    pub b: T,
    pub d: T,
}

impl<T: Scalar> DemandParams<T> {
    pub fn to_internal(&self) -> Result<DemandInternal<T>> {
        if !(self.q0 > T::zero()) {
            return Err(FitError::Precondition("Q0 must be positive".into()));
        }
        Ok(DemandInternal {
            a: self.k,
            b: self.q0.log10() - self.k,
            d: -self.alpha * self.q0,
        })
    }

    pub fn from_internal(p: &DemandInternal<T>) -> Self {
        let q0 = T::lit(10.0).powf(p.b + p.a);
        DemandParams {
            q0,
            k: p.a,
            alpha: -p.d / q0,
        }
    }

    /// Noise-free `log10 Q` at price `c`.
    pub fn log10_demand(&self, c: T) -> T {
        self.q0.log10() + self.k * ((-self.alpha * self.q0 * c).exp() - T::one())
    }
}

/// Consumption at each price with Gaussian noise of standard deviation
/// `sd` added to `log10 Q`. Returns a dataset of `(C, Q)`.
pub fn simulate<T: Scalar>(
    params: &DemandParams<T>,
    prices: &[T],
    sd: T,
    seed: u64,
) -> Result<Dataset<T>> {
    params.to_internal()?;
    let sd = sd.to_f64().unwrap_or(0.0);
    let normal = Normal::new(0.0, sd).map_err(|e| FitError::Precondition(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = prices
        .iter()
        .map(|&c| {
            let eps = T::lit(normal.sample(&mut rng));
            T::lit(10.0).powf(params.log10_demand(c) + eps)
        })
        .collect();
    Dataset::new(prices.to_vec(), q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandFit<T> {
    pub params: DemandParams<T>,
    pub internal: DemandInternal<T>,
    /// Fit in `log10 Q`.
    pub separable: SeparableFit<T>,
}

/// Default search interval for the rate `d = -alpha Q0`.
pub fn default_axis<T: Scalar>() -> GridAxis<T> {
    GridAxis::new("d", T::lit(-5.0), T::lit(-1e-3))
}

/// Least-squares fit of a `(C, Q)` dataset on the `log10 Q` scale.
pub fn fit_demand<T: Scalar>(data: &Dataset<T>, axis: &GridAxis<T>, tol: T) -> Result<DemandFit<T>> {
    if let Some(i) = data.values().iter().position(|&q| !(q > T::zero())) {
        return Err(FitError::Precondition(format!(
            "consumption must be positive (row {})",
            i + 1
        )));
    }
    let pattern = ExpDecayPattern {
        x: data.t().to_vec(),
        y: data.values().iter().map(|q| q.log10()).collect(),
    };
    let separable = fit_separable(&pattern, std::slice::from_ref(axis), tol)?;
    let internal = DemandInternal {
        a: separable.linear[0],
        b: separable.linear[1],
        d: separable.nonlinear[0],
    };
    Ok(DemandFit {
        params: DemandParams::from_internal(&internal),
        internal,
        separable,
    })
}
