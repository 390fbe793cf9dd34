use super::mat::SymMat;

/// Converged conjugate-gradient solve.
#[derive(Debug, Clone)]
pub struct CgSolution {
    pub x: SymMat,
    pub iterations: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CgError {
    /// The iteration cap was reached; carries the best iterate found and its
    /// relative residual so callers can decide whether it is usable.
    #[error("conjugate gradient reached {iterations} iterations with relative residual {rel_residual:.3e}")]
    MaxIterExceeded {
        best: SymMat,
        iterations: usize,
        rel_residual: f64,
    },
}

/// Conjugate gradient over the space of symmetric matrices.
///
/// `op` must be self-adjoint and positive definite with respect to the
/// Frobenius inner product; the iterates then live in the Krylov space of
/// symmetric matrices and every iterate stays exactly symmetric. This is
/// plain CG in the vectorized coordinates without ever materializing the
/// `d^2 x d^2` operator.
///
/// Terminates when `||op(X) - rhs||_F <= tol * ||rhs||_F`.
pub fn cg_symmetric(
    op: impl Fn(&SymMat) -> SymMat,
    rhs: &SymMat,
    tol: f64,
    max_iter: usize,
) -> Result<CgSolution, CgError> {
    let rhs_norm = rhs.frob_norm();
    let mut x = SymMat::zeros(rhs.dim());
    if rhs_norm == 0.0 {
        return Ok(CgSolution {
            x,
            iterations: 0,
        });
    }
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rs = r.frob_inner(&r);
    let target = tol * rhs_norm;
    let mut iterations = 0;
    while rs.sqrt() > target {
        if iterations >= max_iter {
            return Err(CgError::MaxIterExceeded {
                best: x,
                iterations,
                rel_residual: rs.sqrt() / rhs_norm,
            });
        }
        let ap = op(&p);
        debug_assert!(ap.is_symmetric(), "operator broke symmetry");
        let denom = p.frob_inner(&ap);
        let alpha = rs / denom;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        debug_assert!(x.is_symmetric() && r.is_symmetric());
        let rs_new = r.frob_inner(&r);
        let beta = rs_new / rs;
        // p = r + beta * p
        let mut p_new = r.clone();
        p_new.axpy(beta, &p);
        p = p_new;
        rs = rs_new;
        iterations += 1;
    }
    Ok(CgSolution { x, iterations })
}
