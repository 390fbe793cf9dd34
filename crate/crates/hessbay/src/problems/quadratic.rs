use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use super::{Benchmark, ProblemError, Reference};
use crate::estimators::StochasticProblem;
use crate::symkit::SymMat;

/// Gradient-noise covariance of the quadratic problem.
#[derive(Debug, Clone)]
pub enum NoiseSpec {
    /// `Sigma = sigma2 * I`; zero disables the noise entirely.
    Scalar(f64),
    /// Arbitrary symmetric positive semidefinite `Sigma`.
    Matrix(SymMat),
}

/// `F(xi) = 1/2 xi . A xi - b . xi` with sampled gradient
/// `A xi - b + sqrt(Sigma) theta`, `theta` standard normal.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    a: SymMat,
    b_vec: Vec<f64>,
    sigma_sqrt: SymMat,
    kappa: f64,
    dim: usize,
    reference: Reference,
}

/// Builds the quadratic with eigenvalues of `A` sampled uniformly in
/// `[1, kappa]`, one eigenvalue forced to `1` and another to `kappa`, and a
/// seeded random orthogonal basis (QR of a Gaussian matrix with the sign of
/// the `R` diagonal fixed).
pub fn make_quadratic(
    d: usize,
    kappa: f64,
    noise: NoiseSpec,
    seed: u64,
) -> Result<QuadraticProblem, ProblemError> {
    if d < 2 {
        return Err(ProblemError::DimensionTooSmall(d));
    }
    assert!(kappa >= 1.0, "kappa must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eigs = vec![1.0, kappa];
    for _ in 2..d {
        eigs.push(rng.random_range(1.0..kappa.max(1.0 + f64::MIN_POSITIVE)));
    }

    let gauss = DMatrix::from_fn(d, d, |_, _| {
        let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
        z
    });
    let qr = gauss.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }

    // A = Q diag(eigs) Q^T, symmetrized against rounding
    let mut raw = vec![0.0; d * d];
    for (k, &lam) in eigs.iter().enumerate() {
        for i in 0..d {
            let v = lam * q[(i, k)];
            for j in 0..d {
                raw[i * d + j] += v * q[(j, k)];
            }
        }
    }
    let a = SymMat::symmetrized(d, &raw);

    let sigma_sqrt = match noise {
        NoiseSpec::Scalar(sigma2) => {
            assert!(sigma2 >= 0.0, "noise variance must be nonnegative");
            SymMat::scaled_identity(d, sigma2.sqrt())
        }
        NoiseSpec::Matrix(sigma) => {
            assert_eq!(sigma.dim(), d, "noise covariance dimension mismatch");
            sigma.map_eigenvalues(|l| l.max(0.0).sqrt())
        }
    };

    let b_vec = vec![1.0; d];
    let xi_star = a
        .cholesky()
        .expect("A is positive definite by construction")
        .solve(&b_vec);
    // F(xi*) = 1/2 xi* . (A xi*) - b . xi* = -1/2 b . xi*
    let f_star = -0.5 * crate::symkit::vec_dot(&b_vec, &xi_star);

    Ok(QuadraticProblem {
        a,
        b_vec,
        sigma_sqrt,
        kappa,
        dim: d,
        reference: Reference { xi_star, f_star },
    })
}

impl QuadraticProblem {
    pub fn matrix(&self) -> &SymMat {
        &self.a
    }

    pub fn sigma_sqrt(&self) -> &SymMat {
        &self.sigma_sqrt
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

impl StochasticProblem for QuadraticProblem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_gradient(&self, xi: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut g = self.exact_gradient(xi);
        let theta: Vec<f64> = (0..self.dim)
            .map(|_| {
                let z: f64 = rand_distr::StandardNormal.sample(rng);
                z
            })
            .collect();
        let noise = self.sigma_sqrt.matvec(&theta);
        for (gi, ni) in g.iter_mut().zip(&noise) {
            *gi += ni;
        }
        g
    }
}

impl Benchmark for QuadraticProblem {
    fn objective(&self, xi: &[f64]) -> f64 {
        let ax = self.a.matvec(xi);
        0.5 * crate::symkit::vec_dot(xi, &ax) - crate::symkit::vec_dot(&self.b_vec, xi)
    }

    fn exact_gradient(&self, xi: &[f64]) -> Vec<f64> {
        let mut g = self.a.matvec(xi);
        for (gi, bi) in g.iter_mut().zip(&self.b_vec) {
            *gi -= bi;
        }
        g
    }

    fn reference(&self) -> Option<&Reference> {
        Some(&self.reference)
    }

    fn lipschitz_constants(&self) -> (f64, f64) {
        (1.0, self.kappa)
    }
}
