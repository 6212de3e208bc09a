//! Generalised exponential autoregressive model
//! `x_t = c0 + sum_i (c_i + pi_i exp(-gamma (x_{t-d} - z_i)^2)) x_{t-i} + eps_t`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::linalg::hadamard;
use super::{fit_separable, GridAxis, SeparableFit, SeparablePattern};
use crate::error::{FitError, Result};
use crate::scalar::Scalar;

const DIVERGENCE_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpArParams<T> {
    pub c0: T,
    /// `c_1..c_p`; the order `p` is the length.
    pub c: Vec<T>,
    /// `pi_1..pi_p`.
    pub pi: Vec<T>,
    pub gamma: T,
    /// `z_1..z_p`.
    pub z: Vec<T>,
    /// Delay `d` of the state variable in the weights.
    pub delay: usize,
}

impl<T: Scalar> ExpArParams<T> {
    pub fn order(&self) -> usize {
        self.c.len()
    }

    /// Number of leading observations needed before the recursion applies.
    pub fn lag(&self) -> usize {
        self.order().max(self.delay)
    }

    fn validate(&self) -> Result<()> {
        let p = self.order();
        if p == 0 || self.pi.len() != p || self.z.len() != p {
            return Err(FitError::Precondition(
                "c, pi and z must have the same positive length".into(),
            ));
        }
        if self.delay == 0 {
            return Err(FitError::Precondition("delay must be positive".into()));
        }
        if !(self.gamma > T::zero()) {
            return Err(FitError::Precondition("gamma must be positive".into()));
        }
        Ok(())
    }

    /// One step of the recursion given the previous values, newest last.
    pub fn step(&self, history: &[T]) -> T {
        let len = history.len();
        let state = history[len - self.delay];
        let mut x = self.c0;
        for i in 0..self.order() {
            let w = (-self.gamma * (state - self.z[i]).powi(2)).exp();
            x = x + (self.c[i] + self.pi[i] * w) * history[len - 1 - i];
        }
        x
    }
}

/// Generates `count` values starting from the given initial values, with
/// Gaussian innovations of standard deviation `noise`.
pub fn generate<T: Scalar>(
    params: &ExpArParams<T>,
    initial: &[T],
    count: usize,
    noise: T,
    seed: u64,
) -> Result<Vec<T>> {
    params.validate()?;
    let lag = params.lag();
    if initial.len() != lag {
        return Err(FitError::WrongSize {
            expected: lag,
            found: initial.len(),
        });
    }
    if count < lag + 1 {
        return Err(FitError::TooFewRows {
            found: count,
            required: lag + 1,
        });
    }
    let normal = Normal::new(0.0, noise.to_f64().unwrap_or(0.0))
        .map_err(|e| FitError::Precondition(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = initial.to_vec();
    while x.len() < count {
        let eps = if noise == T::zero() {
            T::zero()
        } else {
            T::lit(normal.sample(&mut rng))
        };
        let next = params.step(&x) + eps;
        if !next.is_finite() || next.abs() > T::lit(DIVERGENCE_LIMIT) {
            return Err(FitError::Divergence {
                index: x.len(),
                value: next.to_f64().unwrap_or(f64::NAN),
            });
        }
        x.push(next);
    }
    Ok(x)
}

/// Regression form of the model: response `x_{m+1..n}` against lagged
/// copies of the series.
#[derive(Debug, Clone)]
pub struct ExpArPattern<T> {
    order: usize,
    y: Vec<T>,
    /// `lagged[i]` holds `x_{t-1-i}` aligned with `y`.
    lagged: Vec<Vec<T>>,
    state: Vec<T>,
}

impl<T: Scalar> ExpArPattern<T> {
    pub fn new(series: &[T], order: usize, delay: usize) -> Result<Self> {
        if order == 0 || delay == 0 {
            return Err(FitError::Precondition("order and delay must be positive".into()));
        }
        let lag = order.max(delay);
        let n = series.len();
        if n < 10 || n < lag + 2 * order + 2 {
            return Err(FitError::TooFewRows {
                found: n,
                required: 10.max(lag + 2 * order + 2),
            });
        }
        let shifted = |back: usize| series[lag - back..n - back].to_vec();
        Ok(ExpArPattern {
            order,
            y: series[lag..].to_vec(),
            lagged: (1..=order).map(shifted).collect(),
            state: shifted(delay),
        })
    }
}

impl<T: Scalar> SeparablePattern<T> for ExpArPattern<T> {
    fn nonlinear_names(&self) -> Vec<String> {
        let mut v = vec!["gamma".to_string()];
        v.extend((1..=self.order).map(|i| format!("z{i}")));
        v
    }

    fn linear_names(&self) -> Vec<String> {
        let mut v = vec!["c0".to_string()];
        for i in 1..=self.order {
            v.push(format!("c{i}"));
            v.push(format!("pi{i}"));
        }
        v
    }

    fn response(&self) -> &[T] {
        &self.y
    }

    fn design(&self, theta: &[T]) -> Option<Vec<Vec<T>>> {
        let gamma = theta[0];
        let mut cols = vec![vec![T::one(); self.y.len()]];
        for i in 0..self.order {
            let z = theta[1 + i];
            let w: Vec<T> = self
                .state
                .iter()
                .map(|&s| (-gamma * (s - z).powi(2)).exp())
                .collect();
            cols.push(self.lagged[i].clone());
            cols.push(hadamard(&self.lagged[i], &w));
        }
        cols.iter().flatten().all(|v| v.is_finite()).then_some(cols)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpArFit<T> {
    pub params: ExpArParams<T>,
    pub separable: SeparableFit<T>,
}

/// Default search box: `gamma` then `z_1..z_p`.
pub fn default_axes<T: Scalar>(order: usize) -> Vec<GridAxis<T>> {
    let mut axes = vec![GridAxis::new("gamma", T::lit(0.5), T::lit(2.0))];
    for i in 0..order {
        let lo = T::lit(1.0 + i as f64);
        axes.push(GridAxis::new(format!("z{}", i + 1), lo, lo + T::lit(3.0)));
    }
    axes
}

pub fn fit_expar<T: Scalar>(
    series: &[T],
    order: usize,
    delay: usize,
    axes: &[GridAxis<T>],
    tol: T,
) -> Result<ExpArFit<T>> {
    let pattern = ExpArPattern::new(series, order, delay)?;
    if axes.len() != order + 1 {
        return Err(FitError::InvalidGrid(format!(
            "expected {} axes (gamma, z1..z{order}), found {}",
            order + 1,
            axes.len()
        )));
    }
    let separable = fit_separable(&pattern, axes, tol)?;
    let lin = &separable.linear;
    let params = ExpArParams {
        c0: lin[0],
        c: (0..order).map(|i| lin[1 + 2 * i]).collect(),
        pi: (0..order).map(|i| lin[2 + 2 * i]).collect(),
        gamma: separable.nonlinear[0],
        z: separable.nonlinear[1..].to_vec(),
        delay,
    };
    Ok(ExpArFit { params, separable })
}
