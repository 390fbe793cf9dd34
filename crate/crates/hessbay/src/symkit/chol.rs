use super::mat::SymMat;

/// Cholesky factorization failed: a pivot was non-positive or non-finite.
///
/// Callers in the barrier code treat this as infeasibility, not as a fault.
#[derive(Debug, Clone, Copy, thiserror::Error)]
#[error("not positive definite: pivot {pivot:.3e} at index {index}")]
pub struct NotPositiveDefinite {
    pub index: usize,
    pub pivot: f64,
}

/// Lower-triangular Cholesky factor `L` with `A = L L^T`.
///
/// One factorization serves the log-determinant, vector solves, and the full
/// inverse needed by the barrier terms.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    dim: usize,
    l: Vec<f64>,
}

impl SymMat {
    /// Factorizes `self = L L^T`, signalling [`NotPositiveDefinite`] on the
    /// first non-positive pivot.
    pub fn cholesky(&self) -> Result<CholeskyFactor, NotPositiveDefinite> {
        let d = self.dim();
        let mut l = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l[i * d + k] * l[j * d + k];
                }
                if i == j {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return Err(NotPositiveDefinite {
                            index: i,
                            pivot: sum,
                        });
                    }
                    l[i * d + j] = sum.sqrt();
                } else {
                    l[i * d + j] = sum / l[j * d + j];
                }
            }
        }
        Ok(CholeskyFactor { dim: d, l })
    }
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solves `A x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.dim, "solve dimension mismatch");
        let d = self.dim;
        // forward: L y = rhs
        let mut y = vec![0.0; d];
        for i in 0..d {
            let mut sum = rhs[i];
            for k in 0..i {
                sum -= self.l[i * d + k] * y[k];
            }
            y[i] = sum / self.l[i * d + i];
        }
        // backward: L^T x = y
        let mut x = vec![0.0; d];
        for i in (0..d).rev() {
            let mut sum = y[i];
            for k in (i + 1)..d {
                sum -= self.l[k * d + i] * x[k];
            }
            x[i] = sum / self.l[i * d + i];
        }
        x
    }

    /// `log det A = 2 sum_i log L_ii`.
    pub fn log_det(&self) -> f64 {
        let d = self.dim;
        (0..d).map(|i| self.l[i * d + i].ln()).sum::<f64>() * 2.0
    }

    /// Dense inverse `A^{-1}`, assembled by solving against identity columns
    /// and symmetrizing the result.
    pub fn inverse(&self) -> SymMat {
        let d = self.dim;
        let mut raw = vec![0.0; d * d];
        let mut e = vec![0.0; d];
        for j in 0..d {
            e[j] = 1.0;
            let col = self.solve(&e);
            e[j] = 0.0;
            for i in 0..d {
                raw[i * d + j] = col[i];
            }
        }
        SymMat::symmetrized(d, &raw)
    }
}
