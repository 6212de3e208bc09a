//! Best uniform approximation of discrete data `(t_i, T_i)` by
//! `a*exp(k*t) + b`.
//!
//! The minimax problem is solved exactly for a fixed rate, the rate is then
//! chosen by a quasiconvex line search snapped to the exact solution of an
//! extremal quartet, and datasets whose best approximation is not an
//! exponential are classified and answered in closed form (a constant, a
//! line, or the limit vector as `k -> -inf` / `k -> +inf`).
//!
//! The [`tac`] module adds a separable least-squares fitter (grid over the
//! nonlinear parameters, exact linear solves for the rest) with adapters for
//! exponential demand curves and exponential autoregressive series.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the precision.
//!
//! ```
//! use expband::{fit, Dataset64, TaxonomyTag};
//!
//! let data = Dataset64::new(vec![1.0, 2.0, 3.0, 4.0], vec![3.0, 0.0, 1.0, 2.0]).unwrap();
//! let report = fit(&data).unwrap();
//! assert_eq!(report.taxonomy.tag, TaxonomyTag::LimitNegInf);
//! assert_eq!(report.error, 1.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod dataset;
pub mod error;
pub mod fitter;
pub mod minimax;
pub mod model;
pub mod quartet;
pub mod report;
mod roots;
pub mod scalar;
pub mod tac;

pub use classify::{
    classify, limit_vector_neg_inf, limit_vector_pos_inf, psi, two_point_exponential, Orientation,
    PsiValue, Taxonomy, TaxonomyTag,
};
pub use dataset::{load_series, parse_series, series_to_delimited, Dataset};
pub use error::{FitError, Result};
pub use fitter::{error_at, fit, fit_in_range, fit_with, FitOptions};
pub use minimax::{band, certify, fit_fixed_k, fit_line_minimax, AlternationCertificate};
pub use model::{best_b, best_b_line, Approximant, ExponentialModel, LimitDirection, LimitVector, ModelKind};
pub use quartet::{fit_quartet, solve_rate, RootProblem};
pub use report::{Alternative, FitReport};
pub use scalar::Scalar;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type Model64 = ExponentialModel<f64>;
pub type Model32 = ExponentialModel<f32>;
pub type FitReport64 = FitReport<f64>;
pub type FitReport32 = FitReport<f32>;
pub type Certificate64 = AlternationCertificate<f64>;
pub type Certificate32 = AlternationCertificate<f32>;
