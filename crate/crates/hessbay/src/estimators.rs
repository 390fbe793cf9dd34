//! Unbiased stochastic gradient estimators.
//!
//! All estimators expose the data needed to build curvature pairs later:
//! every estimate carries the [`DrawKey`]s of its samples, and
//! [`gradient_difference_samples`] replays those draws at two iterates with
//! common random numbers, so the sampled gradient differences match the
//! estimator's own samples `theta`-for-`theta`.
//!
//! Streams are counter-based: a draw is identified by `(purpose, iteration,
//! sample)` and deterministically derived from the run seed, so replay never
//! disturbs the estimator's own sampling sequence.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic factory of independent RNG streams for one run.
#[derive(Debug, Clone, Copy)]
pub struct RngStreams {
    run_seed: u64,
}

/// Domain separation for the stream keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    /// Per-sample noise draws of a gradient estimator.
    Theta,
    /// Minibatch index draws of finite-sum estimators.
    Minibatch,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStreams {
    pub fn new(run_seed: u64) -> Self {
        RngStreams { run_seed }
    }

    pub fn run_seed(&self) -> u64 {
        self.run_seed
    }

    /// A fresh stream for the given key; identical keys yield identical
    /// streams.
    pub fn stream(&self, purpose: StreamPurpose, iteration: u64, sample: u64) -> ChaCha8Rng {
        let tag = match purpose {
            StreamPurpose::Theta => 0x7468_6574_u64,
            StreamPurpose::Minibatch => 0x6261_7463_u64,
        };
        let mut state = self
            .run_seed
            .wrapping_mul(0xA24B_AED4_963E_E407)
            .wrapping_add(tag)
            .wrapping_add(iteration.wrapping_mul(0x9FB2_1C65_1E98_DF25))
            .wrapping_add(sample.wrapping_mul(0xD6E8_FEB8_6659_FD93));
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}

/// Identifier of one sampled gradient term, replayable at any iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrawKey {
    /// A noise draw from the stream `(Theta, iteration, sample)`.
    Theta { iteration: u64, sample: u64 },
    /// A finite-sum component index.
    Component(usize),
}

/// A problem that can be sampled for unbiased gradient draws.
pub trait StochasticProblem {
    fn dim(&self) -> usize;

    /// One unbiased draw of the gradient at `xi`.
    fn sample_gradient(&self, xi: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64>;

    /// Re-evaluates the gradient term identified by `key` at `xi`.
    ///
    /// The default handles stream draws; problems with finite-sum structure
    /// override it to also handle component keys.
    fn replay_gradient(&self, xi: &[f64], key: &DrawKey, streams: &RngStreams) -> Vec<f64> {
        match *key {
            DrawKey::Theta { iteration, sample } => {
                let mut rng = streams.stream(StreamPurpose::Theta, iteration, sample);
                self.sample_gradient(xi, &mut rng)
            }
            DrawKey::Component(_) => {
                panic!("component draw on a problem without finite-sum structure")
            }
        }
    }
}

/// Finite-sum structure `F = (1/N) sum_i f_i`.
pub trait FiniteSumProblem: StochasticProblem {
    fn component_count(&self) -> usize;

    fn component_gradient(&self, xi: &[f64], index: usize) -> Vec<f64>;

    /// Exact mean of the component gradients.
    fn full_gradient(&self, xi: &[f64]) -> Vec<f64> {
        let n = self.component_count();
        let mut acc = vec![0.0; self.dim()];
        for i in 0..n {
            let g = self.component_gradient(xi, i);
            for (a, v) in acc.iter_mut().zip(&g) {
                *a += v;
            }
        }
        for a in acc.iter_mut() {
            *a /= n as f64;
        }
        acc
    }
}

/// A gradient estimate with the replay information needed downstream.
#[derive(Debug, Clone)]
pub struct GradientEstimate {
    /// The estimator mean.
    pub mean: Vec<f64>,
    /// Trace of the estimator covariance (sample covariance over the
    /// sample count); zero by convention for a single sample.
    pub cov_trace: f64,
    pub sample_count: usize,
    /// Keys of the sampled terms, for curvature-pair replay.
    pub draws: Vec<DrawKey>,
    /// Whether the estimator met its own error target. Always true for
    /// estimators without one.
    pub bound_met: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum EstimatorError {
    #[error("snapshot dimension {snapshot} does not match problem dimension {problem}")]
    SnapshotStale { snapshot: usize, problem: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Running mean and squared-deviation accumulator over vectors.
struct Welford {
    mean: Vec<f64>,
    m2: f64,
    count: usize,
}

impl Welford {
    fn new(dim: usize) -> Self {
        Welford {
            mean: vec![0.0; dim],
            m2: 0.0,
            count: 0,
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let inv = 1.0 / self.count as f64;
        let mut delta_dot_new = 0.0;
        let mut delta_sq = 0.0;
        for (m, &v) in self.mean.iter_mut().zip(x) {
            let delta = v - *m;
            *m += delta * inv;
            delta_dot_new += delta * (v - *m);
            delta_sq += delta * delta;
        }
        let _ = delta_sq;
        self.m2 += delta_dot_new;
    }

    /// Trace of the covariance of the MEAN: sample covariance / count.
    fn cov_trace(&self) -> f64 {
        if self.count > 1 {
            self.m2 / ((self.count - 1) as f64 * self.count as f64)
        } else {
            0.0
        }
    }
}

/// Plain Monte Carlo estimator with a fixed sample count.
pub fn mc_gradient(
    problem: &impl StochasticProblem,
    xi: &[f64],
    m: usize,
    streams: &RngStreams,
    iteration: u64,
) -> GradientEstimate {
    assert!(m >= 1, "need at least one sample");
    let mut acc = Welford::new(problem.dim());
    let mut draws = Vec::with_capacity(m);
    for sample in 0..m as u64 {
        let mut rng = streams.stream(StreamPurpose::Theta, iteration, sample);
        let g = problem.sample_gradient(xi, &mut rng);
        acc.push(&g);
        draws.push(DrawKey::Theta { iteration, sample });
    }
    GradientEstimate {
        cov_trace: acc.cov_trace(),
        mean: acc.mean,
        sample_count: m,
        draws,
        bound_met: true,
    }
}

/// Relative-error-controlled Monte Carlo estimator.
///
/// Doubles the sample count until `cov_trace <= epsilon^2 ||mean||^2` or
/// `m_max` samples have been drawn; `bound_met` records whether the target
/// held at exit.
pub fn adaptive_gradient(
    problem: &impl StochasticProblem,
    xi: &[f64],
    epsilon: f64,
    m0: usize,
    m_max: usize,
    streams: &RngStreams,
    iteration: u64,
) -> GradientEstimate {
    assert!(epsilon > 0.0, "epsilon must be positive");
    assert!(m0 >= 2, "need at least two initial samples");
    let mut acc = Welford::new(problem.dim());
    let mut draws = Vec::new();
    let draw_batch = |acc: &mut Welford, draws: &mut Vec<DrawKey>, count: usize| {
        let start = draws.len() as u64;
        for sample in start..start + count as u64 {
            let mut rng = streams.stream(StreamPurpose::Theta, iteration, sample);
            let g = problem.sample_gradient(xi, &mut rng);
            acc.push(&g);
            draws.push(DrawKey::Theta { iteration, sample });
        }
    };

    draw_batch(&mut acc, &mut draws, m0.min(m_max.max(2)));
    let met = |acc: &Welford| {
        let mean_sq: f64 = acc.mean.iter().map(|v| v * v).sum();
        acc.cov_trace() <= epsilon * epsilon * mean_sq
    };
    while !met(&acc) && draws.len() < m_max {
        let more = draws.len().min(m_max - draws.len());
        draw_batch(&mut acc, &mut draws, more);
    }
    GradientEstimate {
        cov_trace: acc.cov_trace(),
        bound_met: met(&acc),
        sample_count: draws.len(),
        mean: acc.mean,
        draws,
    }
}

/// Full-gradient snapshot for the SVRG control variate.
#[derive(Debug, Clone)]
pub struct SvrgSnapshot {
    pub xi_tilde: Vec<f64>,
    pub full_grad: Vec<f64>,
}

impl SvrgSnapshot {
    /// Computes the snapshot with one full pass; costs `component_count()`
    /// gradient evaluations.
    pub fn compute(problem: &impl FiniteSumProblem, xi: &[f64]) -> Self {
        SvrgSnapshot {
            xi_tilde: xi.to_vec(),
            full_grad: problem.full_gradient(xi),
        }
    }
}

/// SVRG estimator: minibatch average of
/// `grad f_i(xi) - grad f_i(xi_tilde) + full_grad`.
pub fn svrg_gradient(
    problem: &impl FiniteSumProblem,
    xi: &[f64],
    snapshot: &SvrgSnapshot,
    minibatch: &[usize],
) -> Result<GradientEstimate, EstimatorError> {
    if snapshot.xi_tilde.len() != problem.dim() || snapshot.full_grad.len() != problem.dim() {
        return Err(EstimatorError::SnapshotStale {
            snapshot: snapshot.xi_tilde.len(),
            problem: problem.dim(),
        });
    }
    assert!(!minibatch.is_empty(), "minibatch must be nonempty");
    let mut acc = Welford::new(problem.dim());
    let mut draws = Vec::with_capacity(minibatch.len());
    for &i in minibatch {
        let g_now = problem.component_gradient(xi, i);
        let g_tilde = problem.component_gradient(&snapshot.xi_tilde, i);
        let term: Vec<f64> = g_now
            .iter()
            .zip(&g_tilde)
            .zip(&snapshot.full_grad)
            .map(|((a, b), c)| a - b + c)
            .collect();
        acc.push(&term);
        draws.push(DrawKey::Component(i));
    }
    Ok(GradientEstimate {
        cov_trace: acc.cov_trace(),
        mean: acc.mean,
        sample_count: minibatch.len(),
        draws,
        bound_met: true,
    })
}

/// SARAH estimator: minibatch average of
/// `grad f_i(xi_now) - grad f_i(xi_prev) + v_prev`.
pub fn sarah_gradient(
    problem: &impl FiniteSumProblem,
    xi_now: &[f64],
    xi_prev: &[f64],
    v_prev: &[f64],
    minibatch: &[usize],
) -> Result<GradientEstimate, EstimatorError> {
    let d = problem.dim();
    if xi_now.len() != d || xi_prev.len() != d || v_prev.len() != d {
        return Err(EstimatorError::DimensionMismatch(format!(
            "xi_now {}, xi_prev {}, v_prev {}, problem {}",
            xi_now.len(),
            xi_prev.len(),
            v_prev.len(),
            d
        )));
    }
    assert!(!minibatch.is_empty(), "minibatch must be nonempty");
    let mut acc = Welford::new(d);
    let mut draws = Vec::with_capacity(minibatch.len());
    for &i in minibatch {
        let g_now = problem.component_gradient(xi_now, i);
        let g_prev = problem.component_gradient(xi_prev, i);
        let term: Vec<f64> = g_now
            .iter()
            .zip(&g_prev)
            .zip(v_prev)
            .map(|((a, b), c)| a - b + c)
            .collect();
        acc.push(&term);
        draws.push(DrawKey::Component(i));
    }
    Ok(GradientEstimate {
        cov_trace: acc.cov_trace(),
        mean: acc.mean,
        sample_count: minibatch.len(),
        draws,
        bound_met: true,
    })
}

/// Replays up to `cap` of the given draws at both iterates and returns the
/// per-sample gradient differences `grad f(xi_now, theta) - grad f(xi_prev,
/// theta)` under common random numbers.
///
/// Costs two gradient evaluations per replayed draw.
pub fn gradient_difference_samples(
    problem: &impl StochasticProblem,
    xi_now: &[f64],
    xi_prev: &[f64],
    draws: &[DrawKey],
    streams: &RngStreams,
    cap: usize,
) -> Vec<Vec<f64>> {
    draws
        .iter()
        .take(cap)
        .map(|key| {
            let now = problem.replay_gradient(xi_now, key, streams);
            let prev = problem.replay_gradient(xi_prev, key, streams);
            now.iter().zip(&prev).map(|(a, b)| a - b).collect()
        })
        .collect()
}

/// Uniform minibatch of indices, drawn with replacement.
pub fn draw_minibatch(
    n: usize,
    size: usize,
    streams: &RngStreams,
    iteration: u64,
) -> Vec<usize> {
    use rand::Rng;
    let mut rng = streams.stream(StreamPurpose::Minibatch, iteration, 0);
    (0..size).map(|_| rng.random_range(0..n)).collect()
}
