//! Negative log posterior of the Hessian given curvature pairs.
//!
//! For a symmetric candidate `B` the posterior combines three ingredients:
//!
//! * a secant likelihood `1/(2 nu) * sum_l ||B s_l - ybar_l||^2_{P_l}`,
//!   normalized by [`compute_nu`] so its gradient has unit scale at the
//!   anchor;
//! * a Frobenius prior `rho/2 * ||B - anchor||^2_{F,W}` anchored at the
//!   previous estimate;
//! * log barriers `-beta log det(B - mu_hat I) - beta log det(l_hat I - B)`
//!   that keep the eigenvalues of `B` strictly inside `(mu_hat, l_hat)`.
//!
//! Infeasibility (a barrier argument that is not positive definite) is a
//! distinguished value, not an error: line searches probe infeasible points
//! routinely and treat them as `+inf`.
//!
//! The gradient's likelihood term is symmetrized: the optimization variable
//! lives in the symmetric subspace, and `sym(.)` is the orthogonal
//! projection of the ambient gradient onto that subspace. The
//! finite-difference tests below check the projected gradient against
//! symmetric perturbations.

use crate::curvature::{PairSet, PrecisionInfo};
use crate::symkit::{weighted_frob_sq, CholeskyFactor, SymMat};

/// Hyperparameters of the negative log posterior.
#[derive(Debug, Clone)]
pub struct PosteriorSpec {
    /// Barrier weight `beta > 0`.
    pub beta: f64,
    /// Frobenius prior weight `rho > 0`.
    pub rho: f64,
    /// Lower barrier bound `mu_hat = mu_tilde / alpha`.
    pub mu_hat: f64,
    /// Upper barrier bound `l_hat = L * alpha`.
    pub l_hat: f64,
    /// Relaxation parameter `alpha >= 1`.
    pub alpha: f64,
    /// Frobenius weight matrix, symmetric positive definite.
    pub w: SymMat,
    /// Prior anchor, the previous Hessian estimate.
    pub anchor: SymMat,
    /// Likelihood normalization `nu > 0`.
    pub nu: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum PosteriorError {
    #[error("empty pair set")]
    EmptyPairSet,
    #[error("invalid posterior spec: {0}")]
    InvalidSpec(String),
}

impl PosteriorSpec {
    pub fn validate(&self) -> Result<(), PosteriorError> {
        let fail = |msg: String| Err(PosteriorError::InvalidSpec(msg));
        if !(self.mu_hat > 0.0 && self.mu_hat < self.l_hat) {
            return fail(format!(
                "need 0 < mu_hat < l_hat, got ({}, {})",
                self.mu_hat, self.l_hat
            ));
        }
        if !(self.alpha >= 1.0) {
            return fail(format!("alpha must be >= 1, got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.rho > 0.0 && self.nu > 0.0) {
            return fail(format!(
                "beta, rho, nu must be positive, got ({}, {}, {})",
                self.beta, self.rho, self.nu
            ));
        }
        if self.w.dim() != self.anchor.dim() {
            return fail("weight and anchor dimension mismatch".into());
        }
        if self.w.cholesky().is_err() {
            return fail("weight matrix is not positive definite".into());
        }
        Ok(())
    }
}

/// Likelihood normalization `nu = sum_l ||P_l (anchor s_l - ybar_l)|| ||s_l||`,
/// floored at `1e-12 * (1 + sum_l ||ybar_l|| ||s_l||)` so the likelihood
/// stays finite when the anchor satisfies every secant exactly.
pub fn compute_nu(pairs: &PairSet, anchor: &SymMat) -> Result<f64, PosteriorError> {
    if pairs.is_empty() {
        return Err(PosteriorError::EmptyPairSet);
    }
    let mut nu = 0.0;
    let mut scale = 0.0;
    for pair in pairs.iter() {
        let bs = anchor.matvec(&pair.s);
        let r: Vec<f64> = bs.iter().zip(&pair.y_bar).map(|(a, y)| a - y).collect();
        let s_norm = norm(&pair.s);
        let weighted = match &pair.precision {
            PrecisionInfo::ScalarTrace(p) => p * norm(&r),
            PrecisionInfo::FullMatrix(p) => norm(&p.matvec(&r)),
        };
        nu += weighted * s_norm;
        scale += norm(&pair.y_bar) * s_norm;
    }
    Ok(nu.max(1e-12 * (1.0 + scale)))
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Negative log posterior at `b`, or `None` when a barrier argument is not
/// positive definite. The additive constant is fixed to zero.
pub fn neg_log_posterior(b: &SymMat, spec: &PosteriorSpec, pairs: &PairSet) -> Option<f64> {
    let (lower, upper) = barrier_factors(b, spec)?;
    Some(value_with_factors(b, spec, pairs, &lower, &upper))
}

/// Gradient of the negative log posterior; `None` when `b` is infeasible.
pub fn grad_neg_log_posterior(b: &SymMat, spec: &PosteriorSpec, pairs: &PairSet) -> Option<SymMat> {
    PosteriorEval::new(b, spec, pairs).map(|e| e.grad())
}

/// Directional derivative of the gradient along symmetric `v`; `None` when
/// `b` is infeasible.
pub fn dirderiv_grad(
    b: &SymMat,
    v: &SymMat,
    spec: &PosteriorSpec,
    pairs: &PairSet,
) -> Option<SymMat> {
    PosteriorEval::new(b, spec, pairs).map(|e| e.dirderiv(v))
}

fn barrier_factors(
    b: &SymMat,
    spec: &PosteriorSpec,
) -> Option<(CholeskyFactor, CholeskyFactor)> {
    let mut lower = b.clone();
    lower.shift_diag(-spec.mu_hat);
    let lower = lower.cholesky().ok()?;
    let mut upper = b.scale(-1.0);
    upper.shift_diag(spec.l_hat);
    let upper = upper.cholesky().ok()?;
    Some((lower, upper))
}

fn value_with_factors(
    b: &SymMat,
    spec: &PosteriorSpec,
    pairs: &PairSet,
    lower: &CholeskyFactor,
    upper: &CholeskyFactor,
) -> f64 {
    let mut likelihood = 0.0;
    for pair in pairs.iter() {
        likelihood += crate::curvature::pair_residual(pair, b);
    }
    likelihood / (2.0 * spec.nu)
        + 0.5 * spec.rho * weighted_frob_sq(b, &spec.anchor, &spec.w)
        - spec.beta * lower.log_det()
        - spec.beta * upper.log_det()
}

/// Shared evaluation state at a strictly feasible iterate.
///
/// One construction factorizes both barrier arguments and assembles their
/// dense inverses; the factors serve the value, the inverses serve the
/// gradient and the Newton operator applications.
pub struct PosteriorEval<'a> {
    b: &'a SymMat,
    spec: &'a PosteriorSpec,
    pairs: &'a PairSet,
    lower: CholeskyFactor,
    upper: CholeskyFactor,
    lower_inv: SymMat,
    upper_inv: SymMat,
    w_identity: bool,
}

impl<'a> PosteriorEval<'a> {
    /// Returns `None` when `b` violates a barrier.
    pub fn new(b: &'a SymMat, spec: &'a PosteriorSpec, pairs: &'a PairSet) -> Option<Self> {
        let (lower, upper) = barrier_factors(b, spec)?;
        let lower_inv = lower.inverse();
        let upper_inv = upper.inverse();
        Some(PosteriorEval {
            b,
            spec,
            pairs,
            lower,
            upper,
            lower_inv,
            upper_inv,
            w_identity: spec.w.is_identity(),
        })
    }

    pub fn value(&self) -> f64 {
        value_with_factors(self.b, self.spec, self.pairs, &self.lower, &self.upper)
    }

    pub fn grad(&self) -> SymMat {
        let spec = self.spec;
        let d = self.b.dim();
        let mut g = SymMat::zeros(d);

        // likelihood: (1/nu) sum_l sym(P_l (B s_l - ybar_l) (x) s_l)
        for pair in self.pairs.iter() {
            let bs = self.b.matvec(&pair.s);
            let r: Vec<f64> = bs.iter().zip(&pair.y_bar).map(|(a, y)| a - y).collect();
            match &pair.precision {
                PrecisionInfo::ScalarTrace(p) => {
                    g.axpy(*p, &SymMat::sym_outer(&r, &pair.s));
                }
                PrecisionInfo::FullMatrix(p) => {
                    let pr = p.matvec(&r);
                    g.axpy(1.0, &SymMat::sym_outer(&pr, &pair.s));
                }
            }
        }
        let mut g = g.scale(1.0 / spec.nu);

        // prior: rho W (B - anchor) W
        let delta = self.b.sub(&spec.anchor);
        if self.w_identity {
            g.axpy(spec.rho, &delta);
        } else {
            g.axpy(spec.rho, &delta.sandwich(&spec.w));
        }

        // barriers: -beta (B - mu_hat I)^{-1} + beta (l_hat I - B)^{-1}
        g.axpy(-spec.beta, &self.lower_inv);
        g.axpy(spec.beta, &self.upper_inv);
        g
    }

    /// Newton operator: the directional derivative of the gradient along
    /// symmetric `v`. Linear in `v` and self-adjoint under the Frobenius
    /// inner product.
    pub fn dirderiv(&self, v: &SymMat) -> SymMat {
        let spec = self.spec;
        let d = self.b.dim();
        let mut out = SymMat::zeros(d);

        // likelihood: (1/nu) sum_l sym(P_l V s_l (x) s_l)
        for pair in self.pairs.iter() {
            let vs = v.matvec(&pair.s);
            match &pair.precision {
                PrecisionInfo::ScalarTrace(p) => {
                    out.axpy(*p, &SymMat::sym_outer(&vs, &pair.s));
                }
                PrecisionInfo::FullMatrix(p) => {
                    let pvs = p.matvec(&vs);
                    out.axpy(1.0, &SymMat::sym_outer(&pvs, &pair.s));
                }
            }
        }
        let mut out = out.scale(1.0 / spec.nu);

        // prior: rho W V W
        if self.w_identity {
            out.axpy(spec.rho, v);
        } else {
            out.axpy(spec.rho, &v.sandwich(&spec.w));
        }

        // barriers: beta M V M for each barrier inverse M
        out.axpy(spec.beta, &v.sandwich(&self.lower_inv));
        out.axpy(spec.beta, &v.sandwich(&self.upper_inv));
        out
    }
}
