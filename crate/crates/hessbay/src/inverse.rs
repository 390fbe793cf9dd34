//! Newton-Schulz iteration for the inverse of the Hessian estimate.
//!
//! The recursion `H <- (2I - H B) H` converges quadratically to `B^{-1}`
//! whenever the spectral norm of `I - B H0` is below one. Warm starts from
//! the previous inverse usually satisfy that; when they do not (the residual
//! grows), the iterate is reset once to the analytic starting point
//! `2/(l_hat + mu_hat) I`, whose residual spectral radius is
//! `(l_hat - mu_hat)/(l_hat + mu_hat) < 1` for any `B` with spectrum inside
//! the barrier interval.

use crate::symkit::SymMat;

/// Result of a converged inverse iteration.
#[derive(Debug, Clone)]
pub struct InverseReport {
    pub h_hat: SymMat,
    pub iterations: usize,
    /// `||B h_hat - I||_F` at exit.
    pub final_residual: f64,
    pub restarted: bool,
    /// Residual after the initial guess and after every iteration.
    pub residuals: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum InverseError {
    #[error("inverse iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    NotConverged {
        best: SymMat,
        residual: f64,
        iterations: usize,
    },
}

/// The analytic restart `2/(l_hat + mu_hat) I`.
pub fn restart_matrix(mu_hat: f64, l_hat: f64, dim: usize) -> SymMat {
    assert!(
        0.0 < mu_hat && mu_hat < l_hat,
        "need 0 < mu_hat < l_hat, got ({mu_hat}, {l_hat})"
    );
    SymMat::scaled_identity(dim, 2.0 / (l_hat + mu_hat))
}

fn residual_norm(b: &SymMat, h: &SymMat) -> f64 {
    let d = b.dim();
    let bh = b.matmul_raw(h);
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            let v = bh[i * d + j] - if i == j { 1.0 } else { 0.0 };
            acc += v * v;
        }
    }
    acc.sqrt()
}

/// Iterates Newton-Schulz from `h0` until `||B H - I||_F <= tol_h`.
///
/// Each iterate is symmetrized; `(2I - HB)H` is symmetric in exact
/// arithmetic for symmetric `H`, `B`, so this only removes floating-point
/// drift. If the residual increases the iterate resets once to
/// [`restart_matrix`]; a second increase reports [`InverseError::NotConverged`],
/// since with the analytic start the contraction is guaranteed and a second
/// failure indicates invalid inputs.
pub fn invert(
    b: &SymMat,
    h0: &SymMat,
    tol_h: f64,
    max_iter: usize,
    mu_hat: f64,
    l_hat: f64,
) -> Result<InverseReport, InverseError> {
    assert_eq!(b.dim(), h0.dim(), "dimension mismatch");
    let mut h = h0.clone();
    let mut res = residual_norm(b, &h);
    let mut residuals = vec![res];
    let mut restarted = false;
    let mut iterations = 0;

    while res > tol_h {
        if iterations >= max_iter {
            return Err(InverseError::NotConverged {
                best: h,
                residual: res,
                iterations,
            });
        }
        // H_next = 2H - H B H, with sym(H B H) computed as a sandwich
        let mut next = h.scale(2.0);
        next.axpy(-1.0, &b.sandwich(&h));
        let next_res = residual_norm(b, &next);
        iterations += 1;
        if next_res > res {
            if restarted {
                return Err(InverseError::NotConverged {
                    best: h,
                    residual: res,
                    iterations,
                });
            }
            restarted = true;
            h = restart_matrix(mu_hat, l_hat, b.dim());
            res = residual_norm(b, &h);
            residuals.push(res);
            continue;
        }
        h = next;
        res = next_res;
        residuals.push(res);
    }

    Ok(InverseReport {
        h_hat: h,
        iterations,
        final_residual: res,
        restarted,
        residuals,
    })
}
