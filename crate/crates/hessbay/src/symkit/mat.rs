use nalgebra::DMatrix;

/// Dense symmetric matrix with full row-major storage.
///
/// Symmetry is an invariant: `entries[i][j] == entries[j][i]` bitwise, for
/// every constructor and every operation that returns a `SymMat`. Operations
/// panic on dimension mismatch, mirroring the convention of the dense linear
/// algebra crates.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    dim: usize,
    data: Vec<f64>,
}

/// Extreme eigenvalues of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigBounds {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl EigBounds {
    /// Spectral norm `max(|lambda_min|, |lambda_max|)`.
    pub fn spectral_norm(&self) -> f64 {
        self.lambda_min.abs().max(self.lambda_max.abs())
    }
}

/// Full symmetric eigendecomposition `A = V diag(values) V^T`.
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column-major eigenvectors; column `k` belongs to `values[k]`.
    pub vectors: DMatrix<f64>,
}

impl SymMat {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        SymMat {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    /// `c * I`.
    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = c;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * m.dim + i] = v;
        }
        m
    }

    /// Builds from a generator over `(i, j)`; the generator is only invoked
    /// on the upper triangle and mirrored.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    /// Builds from full row-major data, enforcing exact symmetry.
    ///
    /// # Panics
    /// If `data.len() != dim * dim` or any pair of mirrored entries differs.
    pub fn from_rows(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim * dim, "data length must be dim^2");
        for i in 0..dim {
            for j in (i + 1)..dim {
                assert!(
                    data[i * dim + j] == data[j * dim + i],
                    "asymmetric input at ({i}, {j})"
                );
            }
        }
        SymMat { dim, data }
    }

    /// Builds from full row-major data of a nearly-symmetric matrix by
    /// averaging mirrored entries: `(M + M^T) / 2`.
    pub fn symmetrized(dim: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), dim * dim);
        Self::from_fn(dim, |i, j| 0.5 * (data[i * dim + j] + data[j * dim + i]))
    }

    /// Symmetrized outer product `(u v^T + v u^T) / 2`.
    pub fn sym_outer(u: &[f64], v: &[f64]) -> Self {
        assert_eq!(u.len(), v.len(), "outer product dimension mismatch");
        Self::from_fn(u.len(), |i, j| 0.5 * (u[i] * v[j] + v[i] * u[j]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_diag(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.get(i, i))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_identity(&self) -> bool {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let want = if i == j { 1.0 } else { 0.0 };
                if self.get(i, j) != want {
                    return false;
                }
            }
        }
        true
    }

    /// Checks the symmetry invariant bitwise; used by debug assertions.
    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                if self.get(i, j) != self.get(j, i) {
                    return false;
                }
            }
        }
        true
    }

    pub fn add(&self, other: &SymMat) -> SymMat {
        self.check_dim(other);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        SymMat {
            dim: self.dim,
            data,
        }
    }

    pub fn sub(&self, other: &SymMat) -> SymMat {
        self.check_dim(other);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        SymMat {
            dim: self.dim,
            data,
        }
    }

    pub fn scale(&self, c: f64) -> SymMat {
        SymMat {
            dim: self.dim,
            data: self.data.iter().map(|a| c * a).collect(),
        }
    }

    /// `self += c * other`, in place.
    pub fn axpy(&mut self, c: f64, other: &SymMat) {
        self.check_dim(other);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    /// Adds `c` to the diagonal, in place.
    pub fn shift_diag(&mut self, c: f64) {
        for i in 0..self.dim {
            self.data[i * self.dim + i] += c;
        }
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "matvec dimension mismatch");
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            out[i] = acc;
        }
        out
    }

    /// General (non-symmetric) product `self * other`, raw row-major output.
    pub fn matmul_raw(&self, other: &SymMat) -> Vec<f64> {
        self.check_dim(other);
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a != 0.0 {
                    let row_b = &other.data[k * d..(k + 1) * d];
                    let row_o = &mut out[i * d..(i + 1) * d];
                    for (o, b) in row_o.iter_mut().zip(row_b) {
                        *o += a * b;
                    }
                }
            }
        }
        out
    }

    /// Symmetrized triple product `sym(w * self * w)`; exact when `w` and
    /// `self` commute, otherwise the projection onto the symmetric subspace.
    pub fn sandwich(&self, w: &SymMat) -> SymMat {
        let wv = w.matmul_raw(self);
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = wv[i * d + k];
                if a != 0.0 {
                    let row_w = &w.data[k * d..(k + 1) * d];
                    let row_o = &mut out[i * d..(i + 1) * d];
                    for (o, b) in row_o.iter_mut().zip(row_w) {
                        *o += a * b;
                    }
                }
            }
        }
        SymMat::symmetrized(d, &out)
    }

    /// Frobenius inner product `sum_ij a_ij b_ij`.
    pub fn frob_inner(&self, other: &SymMat) -> f64 {
        self.check_dim(other);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_inner(self).sqrt()
    }

    fn check_dim(&self, other: &SymMat) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// Exact extreme eigenvalues via a full symmetric eigendecomposition.
    pub fn eig_bounds(&self) -> EigBounds {
        let eig = self.to_nalgebra().symmetric_eigen();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in eig.eigenvalues.iter() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        EigBounds {
            lambda_min: lo,
            lambda_max: hi,
        }
    }

    /// Full eigendecomposition; eigenvalues are not sorted.
    pub fn sym_eigen(&self) -> SymEigen {
        let eig = self.to_nalgebra().symmetric_eigen();
        SymEigen {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    /// Reconstructs `V diag(f(lambda)) V^T`, e.g. for eigenvalue clamping or
    /// matrix square roots.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> SymMat {
        let eig = self.sym_eigen();
        let d = self.dim;
        let mut raw = vec![0.0; d * d];
        for (k, &lam) in eig.values.iter().enumerate() {
            let fl = f(lam);
            if fl != 0.0 {
                let col = eig.vectors.column(k);
                for i in 0..d {
                    let vi = fl * col[i];
                    if vi != 0.0 {
                        for j in 0..d {
                            raw[i * d + j] += vi * col[j];
                        }
                    }
                }
            }
        }
        SymMat::symmetrized(d, &raw)
    }
}

/// Squared weighted Frobenius norm `||w^{1/2} (b - anchor) w^{1/2}||_F^2`,
/// computed as `frob_inner(w (b - anchor) w, b - anchor)`, which is
/// algebraically identical and avoids matrix square roots. `w` must be
/// symmetric positive definite.
pub fn weighted_frob_sq(b: &SymMat, anchor: &SymMat, w: &SymMat) -> f64 {
    let delta = b.sub(anchor);
    if w.is_identity() {
        return delta.frob_inner(&delta);
    }
    delta.sandwich(w).frob_inner(&delta)
}

/// Euclidean norm of a vector slice.
pub(crate) fn vec_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dot product of two slices.
pub(crate) fn vec_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
