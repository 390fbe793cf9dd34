//! Benchmark problems and their exact references.
//!
//! Two families: a quadratic with additive gradient noise and a prescribed
//! condition number, and l2-regularized logistic regression over dense
//! feature vectors (from a LibSVM text file or the bundled synthetic
//! generator). Both expose exact objectives, exact gradients, and reference
//! optima so optimizer traces can report true optimality gaps.

mod libsvm;
mod logistic;
mod quadratic;

pub use libsvm::{parse_libsvm, to_libsvm_string, LibsvmData, ParseError};
pub use logistic::{
    dataset_hash, logistic_reference, logistic_reference_cached, logistic_value_grad,
    LogisticProblem,
};
pub use quadratic::{make_quadratic, NoiseSpec, QuadraticProblem};

use crate::estimators::StochasticProblem;

/// Reference optimum of a problem.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Reference {
    pub xi_star: Vec<f64>,
    pub f_star: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("dimension must be at least 2 to host both forced eigenvalues, got {0}")]
    DimensionTooSmall(usize),
    #[error("reference solve did not converge: gradient norm {grad_norm:.3e} after {iterations} iterations")]
    NotConverged { grad_norm: f64, iterations: usize },
    #[error("no reference optimum available")]
    ReferenceUnavailable,
    #[error("labels must be -1 or +1, found {0}")]
    BadLabel(f64),
    #[error("lambda must be positive for a unique optimum, got {0}")]
    NonPositiveLambda(f64),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A problem with exact objective information, used by traces and tests.
pub trait Benchmark: StochasticProblem {
    /// Exact objective `F(xi)`.
    fn objective(&self, xi: &[f64]) -> f64;

    /// Exact gradient of `F`.
    fn exact_gradient(&self, xi: &[f64]) -> Vec<f64>;

    /// Reference optimum, when known.
    fn reference(&self) -> Option<&Reference>;

    /// Strong-convexity and smoothness constants `(mu, l)`.
    fn lipschitz_constants(&self) -> (f64, f64);
}

#[derive(Debug, thiserror::Error)]
#[error("no reference optimum available for this problem")]
pub struct ReferenceUnavailable;

/// Optimality gap `F(xi) - F(xi_star)`.
///
/// Nonnegative up to floating-point noise (callers may observe values down
/// to about `-1e-10` near the optimum).
pub fn optimality_gap(
    problem: &impl Benchmark,
    xi: &[f64],
) -> Result<f64, ReferenceUnavailable> {
    let reference = problem.reference().ok_or(ReferenceUnavailable)?;
    Ok(problem.objective(xi) - reference.f_star)
}
