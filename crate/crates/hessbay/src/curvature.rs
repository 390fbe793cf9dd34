//! Curvature pairs `(s, ybar)` and their precision information.
//!
//! A pair records one observed secant: the iterate difference `s` and the
//! Monte Carlo mean `ybar` of per-sample gradient differences, together with
//! either the full regularized precision matrix of `ybar` or the scalar
//! trace surrogate. Pairs with a negligible step are rejected at
//! construction since they carry no usable curvature signal.

use crate::symkit::SymMat;

/// Guard for the zero-variance (deterministic gradient) limit, where the
/// regularized precision formula would divide by zero.
pub const EPS_GUARD: f64 = 1e-12;

/// Default threshold below which a step is too short to form a pair.
pub const DEFAULT_S_MIN_NORM: f64 = 1e-4;

/// Precision information attached to a gradient-difference mean.
#[derive(Debug, Clone)]
pub enum PrecisionInfo {
    /// Regularized inverse of the estimator covariance.
    FullMatrix(SymMat),
    /// Inverse of the covariance trace; the cheap surrogate used when the
    /// full matrix would be too expensive to form and store.
    ScalarTrace(f64),
}

/// Which precision representation [`make_pair`] should build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecisionKind {
    FullMatrix,
    ScalarTrace,
}

/// One curvature observation.
#[derive(Debug, Clone)]
pub struct CurvaturePair {
    pub s: Vec<f64>,
    pub y_bar: Vec<f64>,
    pub precision: PrecisionInfo,
    pub sample_count: usize,
}

/// Ordered collection of accepted pairs sharing one dimension.
///
/// Insertion order is the pair index `l = 1..k`. An optional window keeps
/// only the most recent pairs; the default is unlimited retention.
#[derive(Debug, Clone)]
pub struct PairSet {
    dim: usize,
    pairs: Vec<CurvaturePair>,
    window: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum PairError {
    #[error("no samples supplied for the gradient-difference mean")]
    EmptySamples,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Outcome of [`make_pair`]: short steps are rejected, not errors.
#[derive(Debug)]
pub enum PairOutcome {
    Accepted(CurvaturePair),
    Rejected { s_norm: f64 },
}

impl PairOutcome {
    pub fn accepted(self) -> Option<CurvaturePair> {
        match self {
            PairOutcome::Accepted(p) => Some(p),
            PairOutcome::Rejected { .. } => None,
        }
    }
}

/// Builds a curvature pair from gradient-difference samples.
///
/// `y_bar` is the sample mean. The sample covariance divided by the sample
/// count gives the estimator covariance `sigma_bar`; the precision is its
/// regularized inverse (`FullMatrix`) or the inverse of its regularized
/// trace (`ScalarTrace`). When every sampled variance is zero the guard
/// [`EPS_GUARD`] keeps the precision finite.
pub fn make_pair(
    s: &[f64],
    samples: &[Vec<f64>],
    sigma_p: f64,
    kind: PrecisionKind,
    s_min_norm: f64,
) -> Result<PairOutcome, PairError> {
    if samples.is_empty() {
        return Err(PairError::EmptySamples);
    }
    let dim = s.len();
    for sample in samples {
        if sample.len() != dim {
            return Err(PairError::DimensionMismatch {
                expected: dim,
                got: sample.len(),
            });
        }
    }
    let s_norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    if s_norm <= s_min_norm {
        return Ok(PairOutcome::Rejected { s_norm });
    }

    let m = samples.len();
    let mut y_bar = vec![0.0; dim];
    for sample in samples {
        for (acc, v) in y_bar.iter_mut().zip(sample) {
            *acc += v;
        }
    }
    for acc in y_bar.iter_mut() {
        *acc /= m as f64;
    }

    // estimator covariance sigma_bar = sample covariance / m
    let sigma_bar = if m > 1 {
        let scale = 1.0 / ((m - 1) as f64 * m as f64);
        SymMat::from_fn(dim, |i, j| {
            let mut acc = 0.0;
            for sample in samples {
                acc += (sample[i] - y_bar[i]) * (sample[j] - y_bar[j]);
            }
            acc * scale
        })
    } else {
        SymMat::zeros(dim)
    };

    let max_diag = sigma_bar.max_diag().max(0.0);
    let precision = match kind {
        PrecisionKind::ScalarTrace => {
            let denom = (sigma_bar.trace() + sigma_p * max_diag).max(EPS_GUARD);
            PrecisionInfo::ScalarTrace(1.0 / denom)
        }
        PrecisionKind::FullMatrix => {
            if max_diag <= 0.0 {
                PrecisionInfo::FullMatrix(SymMat::scaled_identity(dim, 1.0 / EPS_GUARD))
            } else {
                let mut reg = sigma_bar.clone();
                reg.shift_diag(sigma_p * max_diag);
                let inv = reg
                    .cholesky()
                    .expect("regularized covariance is positive definite")
                    .inverse();
                PrecisionInfo::FullMatrix(inv)
            }
        }
    };

    Ok(PairOutcome::Accepted(CurvaturePair {
        s: s.to_vec(),
        y_bar,
        precision,
        sample_count: m,
    }))
}

/// Secant residual of a pair under `b`, in the metric induced by the pair's
/// precision: `(Bs - ybar)^T P (Bs - ybar)`, or `p ||Bs - ybar||^2` for the
/// scalar surrogate. Always nonnegative.
pub fn pair_residual(pair: &CurvaturePair, b: &SymMat) -> f64 {
    assert_eq!(pair.s.len(), b.dim(), "dimension mismatch");
    let bs = b.matvec(&pair.s);
    let r: Vec<f64> = bs.iter().zip(&pair.y_bar).map(|(a, y)| a - y).collect();
    match &pair.precision {
        PrecisionInfo::ScalarTrace(p) => p * r.iter().map(|v| v * v).sum::<f64>(),
        PrecisionInfo::FullMatrix(p) => {
            let pr = p.matvec(&r);
            r.iter().zip(&pr).map(|(a, b)| a * b).sum()
        }
    }
}

impl PairSet {
    pub fn new(dim: usize) -> Self {
        PairSet {
            dim,
            pairs: Vec::new(),
            window: None,
        }
    }

    /// Retains only the `window` most recent pairs after each push.
    pub fn with_window(dim: usize, window: usize) -> Self {
        PairSet {
            dim,
            pairs: Vec::new(),
            window: Some(window),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, pair: CurvaturePair) {
        assert_eq!(pair.s.len(), self.dim, "dimension mismatch");
        self.pairs.push(pair);
        if let Some(w) = self.window {
            if self.pairs.len() > w {
                let drop = self.pairs.len() - w;
                self.pairs.drain(..drop);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CurvaturePair> {
        self.pairs.iter()
    }

    pub fn pairs(&self) -> &[CurvaturePair] {
        &self.pairs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_variance_guard() {
        let g = vec![1.0, -2.0];
        let samples = vec![g.clone(), g.clone(), g.clone()];
        let s = vec![1.0, 0.0];
        let out = make_pair(&s, &samples, 1e-3, PrecisionKind::ScalarTrace, 1e-4).unwrap();
        let pair = out.accepted().unwrap();
        assert_eq!(pair.y_bar, g);
        match pair.precision {
            PrecisionInfo::ScalarTrace(p) => {
                assert!(p.is_finite());
                assert_eq!(p, 1.0 / EPS_GUARD);
            }
            _ => panic!("expected scalar"),
        }
    }

    #[test]
    fn two_sample_hand_expansion() {
        let samples = vec![vec![0.0, 0.0], vec![2.0, 0.0]];
        let s = vec![1.0, 1.0];
        let out = make_pair(&s, &samples, 1e-3, PrecisionKind::FullMatrix, 1e-4).unwrap();
        let pair = out.accepted().unwrap();
        assert_eq!(pair.y_bar, vec![1.0, 0.0]);
        // sample covariance diag(2, 0); sigma_bar = diag(1, 0);
        // P = (sigma_bar + 1e-3 * I)^{-1} = diag(1/(1 + 1e-3), 1e3)
        match &pair.precision {
            PrecisionInfo::FullMatrix(p) => {
                assert!((p.get(0, 0) - 1.0 / 1.001).abs() < 1e-12);
                assert!((p.get(1, 1) - 1.0 / 1e-3).abs() < 1e-9);
                assert!(p.get(0, 1).abs() < 1e-12);
            }
            _ => panic!("expected full matrix"),
        }
    }

    #[test]
    fn short_step_rejected() {
        let samples = vec![vec![1.0, 1.0]];
        let s = vec![1e-5, 0.0];
        match make_pair(&s, &samples, 1e-3, PrecisionKind::ScalarTrace, 1e-4).unwrap() {
            PairOutcome::Rejected { s_norm } => assert!((s_norm - 1e-5).abs() < 1e-18),
            _ => panic!("expected rejection"),
        }
    }

    #[test]
    fn empty_samples_error() {
        assert!(matches!(
            make_pair(&[1.0], &[], 1e-3, PrecisionKind::ScalarTrace, 1e-4),
            Err(PairError::EmptySamples)
        ));
    }

    #[test]
    fn residual_exact_secant_is_zero() {
        let b = SymMat::from_diag(&[2.0, 3.0]);
        let s = vec![1.0, 1.0];
        let y = b.matvec(&s);
        let pair = CurvaturePair {
            s,
            y_bar: y,
            precision: PrecisionInfo::ScalarTrace(1.0),
            sample_count: 1,
        };
        assert_eq!(pair_residual(&pair, &b), 0.0);
    }

    #[test]
    fn residual_unit_case() {
        let pair = CurvaturePair {
            s: vec![1.0, 0.0],
            y_bar: vec![0.0, 0.0],
            precision: PrecisionInfo::FullMatrix(SymMat::identity(2)),
            sample_count: 1,
        };
        assert_eq!(pair_residual(&pair, &SymMat::identity(2)), 1.0);
    }

    #[test]
    fn residual_matches_quadratic_form_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let dim = 4;
        let b = SymMat::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let samples: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let s: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let pair = make_pair(&s, &samples, 1e-3, PrecisionKind::FullMatrix, 1e-6)
            .unwrap()
            .accepted()
            .unwrap();
        let p = match &pair.precision {
            PrecisionInfo::FullMatrix(p) => p.clone(),
            _ => unreachable!(),
        };
        let bs = b.matvec(&pair.s);
        let r: Vec<f64> = bs.iter().zip(&pair.y_bar).map(|(a, y)| a - y).collect();
        let mut want = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                want += r[i] * p.get(i, j) * r[j];
            }
        }
        let got = pair_residual(&pair, &b);
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
        assert!(got >= 0.0);
    }

    #[test]
    fn residual_is_convex_in_b() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let dim = 3;
        let samples: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let s: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let pair = make_pair(&s, &samples, 1e-3, PrecisionKind::FullMatrix, 1e-6)
            .unwrap()
            .accepted()
            .unwrap();
        for _ in 0..50 {
            let b1 = SymMat::from_fn(dim, |_, _| rng.random_range(-2.0..2.0));
            let b2 = SymMat::from_fn(dim, |_, _| rng.random_range(-2.0..2.0));
            let t: f64 = rng.random_range(0.0..1.0);
            let mid = b1.scale(t).add(&b2.scale(1.0 - t));
            let lhs = pair_residual(&pair, &mid);
            let rhs = t * pair_residual(&pair, &b1) + (1.0 - t) * pair_residual(&pair, &b2);
            assert!(lhs <= rhs + 1e-10);
        }
    }

    #[test]
    fn full_matrix_precision_eigenvalues_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let dim = 3;
            let samples: Vec<Vec<f64>> = (0..8)
                .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let s = vec![1.0, 0.0, 0.0];
            let sigma_p = 1e-3;
            let pair = make_pair(&s, &samples, sigma_p, PrecisionKind::FullMatrix, 1e-6)
                .unwrap()
                .accepted()
                .unwrap();
            // recompute max_diag of sigma_bar for the bound
            let m = samples.len() as f64;
            let mean: Vec<f64> = (0..dim)
                .map(|i| samples.iter().map(|s| s[i]).sum::<f64>() / m)
                .collect();
            let max_diag = (0..dim)
                .map(|i| {
                    samples
                        .iter()
                        .map(|s| (s[i] - mean[i]).powi(2))
                        .sum::<f64>()
                        / ((m - 1.0) * m)
                })
                .fold(0.0_f64, f64::max);
            if let PrecisionInfo::FullMatrix(p) = &pair.precision {
                let eb = p.eig_bounds();
                assert!(eb.lambda_min > 0.0);
                assert!(eb.lambda_max <= 1.0 / (sigma_p * max_diag) * (1.0 + 1e-10));
            }
        }
    }

    #[test]
    fn pair_window_drops_oldest() {
        let mut set = PairSet::with_window(1, 2);
        for k in 0..4 {
            set.push(CurvaturePair {
                s: vec![k as f64 + 1.0],
                y_bar: vec![0.0],
                precision: PrecisionInfo::ScalarTrace(1.0),
                sample_count: 1,
            });
        }
        assert_eq!(set.len(), 2);
        assert_eq!(set.pairs()[0].s[0], 3.0);
        assert_eq!(set.pairs()[1].s[0], 4.0);
    }

    proptest! {
        #[test]
        fn make_pair_is_permutation_invariant(perm_seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(24);
            let dim = 3;
            let mut samples: Vec<Vec<f64>> = (0..7)
                .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let s = vec![0.5, -0.5, 1.0];
            let a = make_pair(&s, &samples, 1e-3, PrecisionKind::ScalarTrace, 1e-6)
                .unwrap().accepted().unwrap();
            let mut shuffle_rng = ChaCha8Rng::seed_from_u64(perm_seed);
            for i in (1..samples.len()).rev() {
                let j = shuffle_rng.random_range(0..=i);
                samples.swap(i, j);
            }
            let b = make_pair(&s, &samples, 1e-3, PrecisionKind::ScalarTrace, 1e-6)
                .unwrap().accepted().unwrap();
            for (x, y) in a.y_bar.iter().zip(&b.y_bar) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            match (&a.precision, &b.precision) {
                (PrecisionInfo::ScalarTrace(pa), PrecisionInfo::ScalarTrace(pb)) => {
                    prop_assert!((pa - pb).abs() <= 1e-9 * pa.abs());
                }
                _ => unreachable!(),
            }
        }
    }
}
