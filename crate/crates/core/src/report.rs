//! The result object shared by the quartet solver and the global fitter.

use crate::classify::Taxonomy;
use crate::minimax::AlternationCertificate;
use crate::model::Approximant;

/// A competing closed-form answer kept for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Alternative<T> {
    pub label: String,
    pub approximant: Approximant<T>,
    pub error: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<T> {
    pub taxonomy: Taxonomy,
    /// Best model, or the limit vector when the infimum is not attained.
    pub approximant: Approximant<T>,
    /// Max-norm residual of `approximant` on the input data.
    pub error: T,
    pub certificate: AlternationCertificate<T>,
    /// Data indices of the extremal quartet whose exact solution was
    /// returned, in increasing order.
    pub quartet: Option<[usize; 4]>,
    /// Number of max-norm error evaluations spent in the rate search.
    pub evals: usize,
    /// Width of the final rate bracket.
    pub k_bracket: Option<T>,
    /// Rate found by the line search before the quartet refinement.
    pub search_k: Option<T>,
    pub alternatives: Vec<Alternative<T>>,
    /// `(k, error)` pairs evaluated during the search, in evaluation order.
    pub trace: Vec<(T, T)>,
    pub warnings: Vec<String>,
}

impl<T> FitReport<T> {
    pub(crate) fn closed_form(
        taxonomy: Taxonomy,
        approximant: Approximant<T>,
        error: T,
        certificate: AlternationCertificate<T>,
    ) -> Self {
        FitReport {
            taxonomy,
            approximant,
            error,
            certificate,
            quartet: None,
            evals: 0,
            k_bracket: None,
            search_k: None,
            alternatives: Vec::new(),
            trace: Vec::new(),
            warnings: Vec::new(),
        }
    }
}
