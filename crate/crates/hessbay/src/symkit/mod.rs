//! Dense symmetric-matrix kernel layer.
//!
//! Everything downstream manipulates `d x d` symmetric matrices: Hessian
//! approximations, Frobenius weights, precision matrices, barrier inverses.
//! This module provides the storage type [`SymMat`], Cholesky factorization
//! with log-determinant, exact eigenvalue bounds, and a conjugate-gradient
//! solver over the space of symmetric matrices with the Frobenius inner
//! product.

mod cg;
mod chol;
mod mat;

pub use cg::{cg_symmetric, CgError, CgSolution};
pub use chol::{CholeskyFactor, NotPositiveDefinite};
pub use mat::{weighted_frob_sq, EigBounds, SymEigen, SymMat};

pub(crate) use mat::{vec_dot, vec_norm};

/// Errors from the symmetric-matrix kernels.
#[derive(Debug, thiserror::Error)]
pub enum SymKitError {
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
}
