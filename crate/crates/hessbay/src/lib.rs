//! Bayesian Hessian approximation for stochastic optimization.
//!
//! This crate infers a Hessian approximation `B` from noisy curvature pairs
//! `(s, ybar)` by maximizing a constrained log posterior: a secant-equation
//! likelihood weighted by per-pair precision, a Frobenius prior anchored at
//! the previous estimate, and log-barrier terms that keep the eigenvalues of
//! `B` inside `(mu_hat, l_hat)`. The maximizer is found with a central-path
//! Newton-CG solver ([`map_solver::find_map`]), its inverse with a
//! Newton-Schulz iteration ([`inverse::invert`]), and the inverse is used to
//! precondition stochastic gradient methods ([`optimizers`]).
//!
//! Layering, bottom to top:
//!
//! * [`symkit`] — dense symmetric-matrix kernels: Cholesky, eigenvalue
//!   bounds, and a matrix-free conjugate-gradient solver over the space of
//!   symmetric matrices.
//! * [`curvature`] — curvature-pair construction and precision weighting.
//! * [`posterior`] — the negative log posterior, its gradient, and the
//!   directional derivative of the gradient.
//! * [`map_solver`] — the central-path Newton-CG maximizer.
//! * [`inverse`] — Newton-Schulz inverse iteration with the analytic restart.
//! * [`estimators`] — Monte Carlo, adaptive, SVRG and SARAH gradient
//!   estimators with replayable sample streams.
//! * [`optimizers`] — SGD loops (plain and preconditioned), step schedules,
//!   update policies, a BFGS baseline, and run traces.
//! * [`problems`] — benchmark problems: a noisy quadratic with prescribed
//!   condition number and l2-regularized logistic regression, plus a LibSVM
//!   text parser.
//! * [`experiment`] — the experiment runner behind the `hessbay` CLI.
//!
//! See the crate examples for runnable entry points into each layer.

// dense kernels index triangular loops directly, and validations use
// negated comparisons so NaN inputs fail them
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod estimators;
pub mod experiment;
pub mod inverse;
pub mod map_solver;
pub mod optimizers;
pub mod posterior;
pub mod problems;
pub mod symkit;

pub use curvature::{CurvaturePair, PairSet, PrecisionInfo};
pub use map_solver::{find_map, MapSolveReport, MapSolverConfig};
pub use posterior::PosteriorSpec;
pub use symkit::{EigBounds, SymMat};
