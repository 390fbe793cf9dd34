//! Stochastic optimization loops built around the Bayesian Hessian model.
//!
//! [`run_sgd`] is the plain loop `xi <- xi - eta_k v_k`;
//! [`run_precond_sgd`] maintains a [`HessianModel`] and steps
//! `xi <- xi - eta_k (H v_k)`, rebuilding the model from harvested
//! curvature pairs at policy-triggered iterations.
//! [`run_variance_reduced`] drives the SVRG and SARAH estimators with the
//! same optional preconditioning. [`bfgs_update`] is the classical baseline
//! the Bayesian model is compared against.

mod bfgs;
mod model;
mod policy;
mod schedule;
mod sgd;
mod trace;
mod vr;

pub use bfgs::{bfgs_update, DEFAULT_EPS_Y};
pub use model::{BayesConfig, HessianModel, UpdateReport};
pub use policy::UpdatePolicy;
pub use schedule::StepSchedule;
pub use sgd::{run_precond_sgd, run_sgd, EstimatorConfig, PrecondOutcome, SgdConfig};
pub use trace::{RunTrace, TraceEvent, TraceRecord};
pub use vr::{run_variance_reduced, VrConfig, VrKind};

pub use crate::problems::optimality_gap;
