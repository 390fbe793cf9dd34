//! Acceptance suite: one test per contract, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them all).
//!
//! The long-running comparisons use desk-scale configurations of the same
//! benchmark problems the library ships; every tolerance is pinned here.

use hessbay::curvature::{make_pair, PairSet, PrecisionKind};
use hessbay::estimators::{
    adaptive_gradient, svrg_gradient, RngStreams, StochasticProblem, SvrgSnapshot,
};
use hessbay::inverse::{invert, restart_matrix};
use hessbay::optimizers::{
    bfgs_update, optimality_gap, run_precond_sgd, run_sgd, BayesConfig, EstimatorConfig,
    SgdConfig, StepSchedule, TraceEvent, UpdatePolicy, DEFAULT_EPS_Y,
};
use hessbay::posterior::{
    compute_nu, dirderiv_grad, grad_neg_log_posterior, neg_log_posterior, PosteriorEval,
    PosteriorSpec,
};
use hessbay::problems::{
    logistic_reference, make_quadratic, Benchmark, LogisticProblem, NoiseSpec,
};
use hessbay::symkit::SymMat;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn vec_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn median(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Random symmetric matrix with entries in `(-1, 1)`.
fn random_sym(d: usize, rng: &mut ChaCha8Rng) -> SymMat {
    SymMat::from_fn(d, |_, _| rng.random_range(-1.0..1.0))
}

/// Random `B` with spectrum strictly inside `(mu_hat, l_hat)`.
fn random_feasible(d: usize, mu_hat: f64, l_hat: f64, rng: &mut ChaCha8Rng) -> SymMat {
    let raw = random_sym(d, rng);
    let eb = raw.eig_bounds();
    let span = (eb.lambda_max - eb.lambda_min).max(1e-12);
    let lo = mu_hat + 0.1 * (l_hat - mu_hat);
    let hi = l_hat - 0.1 * (l_hat - mu_hat);
    raw.map_eigenvalues(|l| lo + (l - eb.lambda_min) / span * (hi - lo))
}

fn random_instance(
    d: usize,
    n_pairs: usize,
    kind: PrecisionKind,
    rng: &mut ChaCha8Rng,
) -> (SymMat, PosteriorSpec, PairSet) {
    let (mu_hat, l_hat) = (0.2, 6.0);
    let b = random_feasible(d, mu_hat, l_hat, rng);
    let anchor = random_feasible(d, mu_hat, l_hat, rng);
    let mut pairs = PairSet::new(d);
    for _ in 0..n_pairs {
        let s: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let samples: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let pair = make_pair(&s, &samples, 1e-3, kind, 1e-6)
            .unwrap()
            .accepted()
            .expect("step is long enough");
        pairs.push(pair);
    }
    let mut spec = PosteriorSpec {
        beta: 0.05,
        rho: 0.6,
        mu_hat,
        l_hat,
        alpha: 1.05,
        w: SymMat::identity(d),
        anchor,
        nu: 1.0,
    };
    spec.nu = compute_nu(&pairs, &spec.anchor).unwrap();
    (b, spec, pairs)
}

/// Finite differences of the posterior along symmetric coordinate
/// perturbations (factor 2 on off-diagonal basis matrices).
fn fd_grad(b: &SymMat, spec: &PosteriorSpec, pairs: &PairSet, h: f64) -> SymMat {
    SymMat::from_fn(b.dim(), |i, j| {
        let mut plus = b.clone();
        plus.set(i, j, b.get(i, j) + h);
        let mut minus = b.clone();
        minus.set(i, j, b.get(i, j) - h);
        let fp = neg_log_posterior(&plus, spec, pairs).unwrap();
        let fm = neg_log_posterior(&minus, spec, pairs).unwrap();
        let dir = (fp - fm) / (2.0 * h);
        if i == j {
            dir
        } else {
            dir / 2.0
        }
    })
}

/// Criterion 1: posterior gradient and Newton operator match central finite
/// differences on random feasible instances, both precision kinds.
#[test]
fn acceptance_01_gradient_correctness() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let d = 5;
    let mut worst_grad = 0.0_f64;
    let mut worst_dir = 0.0_f64;
    for i in 0..20 {
        let kind = if i % 2 == 0 {
            PrecisionKind::ScalarTrace
        } else {
            PrecisionKind::FullMatrix
        };
        let (b, spec, pairs) = random_instance(d, 3, kind, &mut rng);
        let grad = grad_neg_log_posterior(&b, &spec, &pairs).unwrap();
        let fd = fd_grad(&b, &spec, &pairs, 1e-5);
        let rel = grad.sub(&fd).frob_norm() / grad.frob_norm();
        worst_grad = worst_grad.max(rel);
        assert!(rel <= 1e-6, "gradient FD mismatch: {rel:.3e}");

        let v = random_sym(d, &mut rng);
        let dir = dirderiv_grad(&b, &v, &spec, &pairs).unwrap();
        let h = 1e-5;
        let mut plus = b.clone();
        plus.axpy(h, &v);
        let mut minus = b.clone();
        minus.axpy(-h, &v);
        let gp = grad_neg_log_posterior(&plus, &spec, &pairs).unwrap();
        let gm = grad_neg_log_posterior(&minus, &spec, &pairs).unwrap();
        let fd2 = gp.sub(&gm).scale(1.0 / (2.0 * h));
        let rel2 = dir.sub(&fd2).frob_norm() / dir.frob_norm();
        worst_dir = worst_dir.max(rel2);
        assert!(rel2 <= 1e-5, "directional-derivative FD mismatch: {rel2:.3e}");
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 10.0, "runtime {dt:.1}s exceeds 10s");
    println!(
        "acceptance criterion 1: PASS (worst grad rel {worst_grad:.2e}, worst dirderiv rel {worst_dir:.2e}, {dt:.2}s)"
    );
}

/// Criterion 2: the Newton operator is self-adjoint and coercive with
/// modulus at least `rho`.
#[test]
fn acceptance_02_operator_self_adjoint_coercive() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let d = 5;
    let (b, spec, pairs) = random_instance(d, 3, PrecisionKind::FullMatrix, &mut rng);
    let eval = PosteriorEval::new(&b, &spec, &pairs).unwrap();
    let mut worst_sym = 0.0_f64;
    let mut worst_margin = f64::INFINITY;
    for _ in 0..50 {
        let v1 = random_sym(d, &mut rng);
        let v2 = random_sym(d, &mut rng);
        let lhs = eval.dirderiv(&v1).frob_inner(&v2);
        let rhs = eval.dirderiv(&v2).frob_inner(&v1);
        let asym = (lhs - rhs).abs() / lhs.abs().max(1.0);
        worst_sym = worst_sym.max(asym);
        assert!(asym <= 1e-10, "asymmetry {asym:.3e}");
        let quad = eval.dirderiv(&v1).frob_inner(&v1);
        let floor = spec.rho * v1.frob_inner(&v1);
        worst_margin = worst_margin.min(quad - floor);
        assert!(quad >= floor - 1e-10, "coercivity violated: {quad} < {floor}");
    }
    println!(
        "acceptance criterion 2: PASS (worst asymmetry {worst_sym:.2e}, min coercivity margin {worst_margin:.2e})"
    );
}

/// Shared configuration of the desk-scale quadratic comparison
/// (criteria 3, 4, 6, 10).
struct QuadSetup {
    problem: hessbay::problems::QuadraticProblem,
    l: f64,
}

impl QuadSetup {
    fn new(kappa: f64) -> Self {
        let problem = make_quadratic(10, kappa, NoiseSpec::Scalar(1.0), 7).unwrap();
        QuadSetup { problem, l: kappa }
    }

    fn sgd_cfg(&self, seed: u64, budget: u64) -> SgdConfig {
        SgdConfig {
            estimator: EstimatorConfig::FixedBatch { m: 1 },
            ..SgdConfig::new(
                StepSchedule::LipschitzInvSqrt { l: self.l },
                budget,
                vec![100.0; 10],
                seed,
            )
        }
    }

    fn bay_cfg(&self, seed: u64, budget: u64) -> (SgdConfig, BayesConfig) {
        let sgd = SgdConfig {
            estimator: EstimatorConfig::Adaptive {
                epsilon: 0.5,
                m0: 8,
                m_max: 1 << 22,
            },
            check_noise_compat: true,
            ..SgdConfig::new(
                StepSchedule::PrecondMice { epsilon: 0.5 },
                budget,
                vec![100.0; 10],
                seed,
            )
        };
        let mut bayes = BayesConfig::new(10, 1.0, self.l, UpdatePolicy::EveryKIters(10));
        bayes.pair_sample_cap = 16;
        bayes.pair_window = Some(40);
        (sgd, bayes)
    }
}

/// Criterion 3: every Hessian update of the desk-scale quadratic run stays
/// strictly inside the barriers and within the Newton/CG budgets.
#[test]
fn acceptance_03_find_map_feasibility_and_budget() {
    let start = std::time::Instant::now();
    let setup = QuadSetup::new(1e3);
    let (sgd, bayes) = setup.bay_cfg(0, 100_000);
    let out = run_precond_sgd(&setup.problem, &sgd, &bayes);
    let (mu_hat, l_hat) = (bayes.mu_hat(), bayes.l_hat());
    let mut updates = 0;
    let mut max_newton = 0;
    let mut max_cg = 0;
    for report in &out.updates {
        if report.event == TraceEvent::UpdateFailed {
            continue;
        }
        let eb = report.eig_bounds.expect("successful update carries bounds");
        assert!(
            eb.lambda_min > mu_hat && eb.lambda_max < l_hat,
            "eigenvalues ({}, {}) escape ({mu_hat}, {l_hat})",
            eb.lambda_min,
            eb.lambda_max
        );
        let map = report.map.as_ref().expect("successful update carries a report");
        let newton = map.total_newton_iters();
        let cg = map.max_cg_iters();
        assert!(newton <= 50, "total Newton {newton} > 50 in one update");
        assert!(cg <= 55, "CG iterations {cg} > 55 in one Newton step");
        max_newton = max_newton.max(newton);
        max_cg = max_cg.max(cg);
        updates += 1;
    }
    assert!(updates >= 3, "expected several updates, got {updates}");
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 60.0, "runtime {dt:.1}s exceeds 60s");
    println!(
        "acceptance criterion 3: PASS ({updates} updates, max Newton {max_newton} <= 50, max CG {max_cg} <= 55, {dt:.1}s)"
    );
}

/// Criterion 4: BFGS fed the same curvature pairs overshoots the true
/// largest eigenvalue; the Bayesian estimate never leaves the barriers.
#[test]
fn acceptance_04_bfgs_contrast() {
    let start = std::time::Instant::now();
    let setup = QuadSetup::new(1e3);
    let (sgd, bayes) = setup.bay_cfg(0, 100_000);
    let out = run_precond_sgd(&setup.problem, &sgd, &bayes);
    assert!(!out.pairs.is_empty());

    // Bayesian updates never exceeded l_hat (checked per update)
    for report in &out.updates {
        if let Some(eb) = report.eig_bounds {
            assert!(eb.lambda_max < bayes.l_hat());
        }
    }

    // replay the SAME pairs through BFGS from the same initialization
    let l = setup.l;
    let mut b = SymMat::scaled_identity(10, (l + 1.0) / 2.0);
    let mut max_eig: f64 = 0.0;
    for pair in out.pairs.iter() {
        b = bfgs_update(&b, pair, DEFAULT_EPS_Y);
        max_eig = max_eig.max(b.eig_bounds().lambda_max);
    }
    assert!(
        max_eig > l,
        "BFGS lambda_max {max_eig:.1} never exceeded L = {l}"
    );
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 60.0, "runtime {dt:.1}s exceeds 60s");
    println!(
        "acceptance criterion 4: PASS (BFGS lambda_max {max_eig:.1} > L = {l}; Bayesian stayed below {:.1}, {dt:.1}s)",
        bayes.l_hat()
    );
}

/// Criterion 5: the inverse iteration meets its tolerance, contracts
/// quadratically, and recovers from an adversarial start with one restart.
#[test]
fn acceptance_05_newton_schulz_inverse() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let (mu_hat, l_hat) = (0.5, 2.5);
    let d = 6;
    let sqrt_d = (d as f64).sqrt();
    for _ in 0..50 {
        let b = random_feasible(d, mu_hat, l_hat, &mut rng);
        let h0 = restart_matrix(mu_hat, l_hat, d);
        let report = invert(&b, &h0, 1e-8, 100, mu_hat, l_hat).unwrap();
        assert!(report.final_residual <= 1e-8);
        for w in report.residuals.windows(2) {
            if w[0] < 1.0 {
                assert!(
                    w[1] <= sqrt_d * w[0] * w[0] + 1e-12,
                    "quadratic convergence violated: {} -> {}",
                    w[0],
                    w[1]
                );
            }
        }
    }
    // adversarial start: exactly one restart, then convergence
    let b = random_feasible(d, mu_hat, l_hat, &mut rng);
    let h0 = SymMat::scaled_identity(d, -1.0);
    let report = invert(&b, &h0, 1e-8, 100, mu_hat, l_hat).unwrap();
    assert!(report.restarted);
    assert!(report.final_residual <= 1e-8);
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 10.0, "runtime {dt:.1}s exceeds 10s");
    println!("acceptance criterion 5: PASS (50 random solves + adversarial restart, {dt:.2}s)");
}

/// Criterion 6: at a 1e5 gradient budget the adaptive preconditioned method
/// beats vanilla SGD by at least 100x in median final gap, without
/// oscillating through the tail of the budget.
#[test]
fn acceptance_06_quadratic_comparison() {
    let start = std::time::Instant::now();
    let setup = QuadSetup::new(1e3);
    let budget = 100_000;
    let mut sgd_gaps = Vec::new();
    let mut bay_gaps = Vec::new();
    let mut tail_ratios = Vec::new();
    for seed in 0..5 {
        let sgd_trace = run_sgd(&setup.problem, &setup.sgd_cfg(seed, budget));
        sgd_gaps.push(sgd_trace.final_gap().unwrap());
        let (cfg, bayes) = setup.bay_cfg(seed, budget);
        let out = run_precond_sgd(&setup.problem, &cfg, &bayes);
        bay_gaps.push(out.trace.final_gap().unwrap());
        let tail = out.trace.tail_gaps(0.25);
        assert!(!tail.is_empty());
        let hi = tail.iter().cloned().fold(f64::MIN, f64::max);
        let lo = tail.iter().cloned().fold(f64::MAX, f64::min);
        tail_ratios.push(hi / lo.max(1e-300));
    }
    let sgd_med = median(&mut sgd_gaps);
    let bay_med = median(&mut bay_gaps);
    let tail_med = median(&mut tail_ratios);
    assert!(
        bay_med <= 1e-2 * sgd_med,
        "median gaps: bay {bay_med:.3e} vs sgd {sgd_med:.3e}"
    );
    assert!(tail_med <= 10.0, "median tail max/min ratio {tail_med:.2}");
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 300.0, "runtime {dt:.1}s exceeds 5min");
    println!(
        "acceptance criterion 6: PASS (median gaps {bay_med:.2e} vs {sgd_med:.2e}, ratio {:.1e}, tail ratio {tail_med:.2}, {dt:.1}s)",
        sgd_med / bay_med
    );
}

/// Criterion 7: on the kappa = 1e6 quadratic with a fixed unit step, the
/// tail oscillation amplitude shrinks as the eigenvalue floor mu_tilde
/// rises.
#[test]
fn acceptance_07_mu_sweep_monotone_oscillation() {
    let start = std::time::Instant::now();
    let problem = make_quadratic(10, 1e6, NoiseSpec::Scalar(1.0), 7).unwrap();
    let budget = 1_000_000;
    let mut medians = Vec::new();
    for mu_tilde in [1e2, 1e3, 1e4] {
        let mut stds = Vec::new();
        for seed in 0..5 {
            let cfg = SgdConfig {
                estimator: EstimatorConfig::FixedBatch { m: 1000 },
                ..SgdConfig::new(StepSchedule::Fixed(1.0), budget, vec![100.0; 10], seed)
            };
            let policy = UpdatePolicy::EquallySpaced {
                total_updates: 15,
                known_budget: budget,
            };
            let mut bayes = BayesConfig::new(10, mu_tilde, 1e6, policy);
            bayes.pair_sample_cap = 16;
            bayes.pair_window = Some(40);
            let out = run_precond_sgd(&problem, &cfg, &bayes);
            let n = out.trace.records.len();
            let tail: Vec<f64> = out.trace.records[n - n / 4..]
                .iter()
                .map(|r| r.optimality_gap)
                .collect();
            let mean = tail.iter().sum::<f64>() / tail.len() as f64;
            let var = tail.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>()
                / tail.len() as f64;
            stds.push(var.sqrt());
        }
        medians.push(median(&mut stds));
    }
    assert!(
        medians[0] >= medians[1] && medians[1] >= medians[2],
        "tail stds not monotone: {medians:?}"
    );
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 300.0, "runtime {dt:.1}s exceeds 5min");
    println!(
        "acceptance criterion 7: PASS (tail-gap stds {:.3e} >= {:.3e} >= {:.3e}, {dt:.1}s)",
        medians[0], medians[1], medians[2]
    );
}

/// Criterion 8: with the diagonal initialization, the preconditioned run
/// reproduces the unpreconditioned optimal-step run bitwise until the first
/// Hessian update.
#[test]
fn acceptance_08_preconditioner_recovers_baseline() {
    let start = std::time::Instant::now();
    let setup = QuadSetup::new(1e3);
    let (l, mu, eps) = (1e3, 1.0, 0.5);
    let budget = 20_000;
    let plain_cfg = SgdConfig {
        estimator: EstimatorConfig::Adaptive {
            epsilon: eps,
            m0: 8,
            m_max: 1 << 22,
        },
        record_iterates: true,
        ..SgdConfig::new(
            StepSchedule::MiceOptimal {
                l,
                mu,
                epsilon: eps,
            },
            budget,
            vec![100.0; 10],
            3,
        )
    };
    let precond_cfg = SgdConfig {
        schedule: StepSchedule::PrecondMice { epsilon: eps },
        ..plain_cfg.clone()
    };
    let bayes = BayesConfig::new(10, mu, l, UpdatePolicy::EveryKIters(5));

    let plain = run_sgd(&setup.problem, &plain_cfg);
    let precond = run_precond_sgd(&setup.problem, &precond_cfg, &bayes);
    let first_update = precond
        .trace
        .events()
        .next()
        .map(|(iter, _)| iter)
        .expect("an update fires at iteration 5");
    assert_eq!(first_update, 5);

    let plain_iterates = plain.trace_iterates();
    let precond_iterates = precond.trace.iterates.as_ref().unwrap();
    // identical up to and including the iterate at the update iteration
    for k in 0..=(first_update as usize) {
        assert_eq!(
            plain_iterates[k], precond_iterates[k],
            "iterates diverge at index {k} before the first update"
        );
    }
    // and the preconditioned run leaves the baseline afterwards
    let diverged = (first_update as usize + 1..precond_iterates.len().min(plain_iterates.len()))
        .any(|k| plain_iterates[k] != precond_iterates[k]);
    assert!(diverged, "no divergence after the first Hessian update");
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 30.0, "runtime {dt:.1}s exceeds 30s");
    println!(
        "acceptance criterion 8: PASS (bitwise identical through iteration {first_update}, {dt:.1}s)"
    );
}

trait TraceIterates {
    fn trace_iterates(&self) -> &Vec<Vec<f64>>;
}

impl TraceIterates for hessbay::optimizers::RunTrace {
    fn trace_iterates(&self) -> &Vec<Vec<f64>> {
        self.iterates.as_ref().expect("run recorded iterates")
    }
}

/// Criterion 9: on the ill-conditioned synthetic logistic problem the
/// preconditioned adaptive method reaches a gap at least ten times smaller
/// than vanilla SGD at the same budget. A local LibSVM file extends the
/// check when present.
#[test]
fn acceptance_09_logistic_comparison() {
    let start = std::time::Instant::now();
    let mut problem = LogisticProblem::synthetic_two_gaussian(2000, &[1.0, 20.0], 0.8, 1e-5, 42);
    let reference = logistic_reference(&problem, 1e-10).unwrap();
    problem.set_reference(reference);
    let (ratio, sgd_med, bay_med) = logistic_ratio(&problem, 300_000);
    assert!(
        ratio <= 0.1,
        "bay/sgd gap ratio {ratio:.3} exceeds 0.1 (bay {bay_med:.3e}, sgd {sgd_med:.3e})"
    );
    let mut extra = String::new();
    if let Ok(text) = std::fs::read_to_string("data/libsvm_local.txt") {
        let data = hessbay::problems::parse_libsvm(&text, None).unwrap();
        let mut p = LogisticProblem::from_data(data.xs, data.ys, 1e-5)
            .unwrap()
            .truncated(2000)
            .unwrap();
        let r = logistic_reference(&p, 1e-10).unwrap();
        p.set_reference(r);
        let (file_ratio, _, _) = logistic_ratio(&p, 300_000);
        assert!(file_ratio <= 0.1, "file dataset ratio {file_ratio:.3}");
        extra = format!(", local file ratio {file_ratio:.3}");
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 300.0, "runtime {dt:.1}s exceeds 5min");
    println!(
        "acceptance criterion 9: PASS (median gaps {bay_med:.2e} vs {sgd_med:.2e}, ratio {ratio:.3}{extra}, {dt:.1}s)"
    );
}

fn logistic_ratio(problem: &LogisticProblem, budget: u64) -> (f64, f64, f64) {
    let (mu, l) = problem.lipschitz_constants();
    let d = StochasticProblem::dim(problem);
    let mut sgd_gaps = Vec::new();
    let mut bay_gaps = Vec::new();
    for seed in 0..3 {
        let sgd_cfg = SgdConfig {
            estimator: EstimatorConfig::FixedBatch { m: 1 },
            ..SgdConfig::new(
                StepSchedule::LipschitzInvSqrt { l },
                budget,
                vec![0.0; d],
                seed,
            )
        };
        sgd_gaps.push(run_sgd(problem, &sgd_cfg).final_gap().unwrap());

        let bay_sgd = SgdConfig {
            estimator: EstimatorConfig::Adaptive {
                epsilon: 0.5,
                m0: 8,
                m_max: 1 << 22,
            },
            ..SgdConfig::new(
                StepSchedule::PrecondMice { epsilon: 0.5 },
                budget,
                vec![0.0; d],
                seed,
            )
        };
        let mut bayes = BayesConfig::new(d, mu, l, UpdatePolicy::EveryKIters(5));
        bayes.rho = 1e-3;
        bayes.pair_sample_cap = 256;
        let out = run_precond_sgd(problem, &bay_sgd, &bayes);
        bay_gaps.push(out.trace.final_gap().unwrap());
    }
    let sgd_med = median(&mut sgd_gaps);
    let bay_med = median(&mut bay_gaps);
    (bay_med / sgd_med, sgd_med, bay_med)
}

/// Criterion 10: estimator contracts - exact enumeration unbiasedness of
/// the variance-reduced estimators, the adaptive stopping predicate, and
/// the per-step noise-compatibility inequality (asserted inside the
/// criterion-6 runs via `check_noise_compat`).
#[test]
fn acceptance_10_estimator_contracts() {
    // enumeration unbiasedness of SVRG on an N = 20 toy
    let problem = LogisticProblem::synthetic_two_gaussian(20, &[1.0, 2.0], 0.8, 1e-3, 5);
    let xi = vec![0.3, -0.2];
    let snapshot = SvrgSnapshot::compute(&problem, &[0.1, 0.1]);
    let mut avg = [0.0; 2];
    for i in 0..20 {
        let est = svrg_gradient(&problem, &xi, &snapshot, &[i]).unwrap();
        for (a, v) in avg.iter_mut().zip(&est.mean) {
            *a += v / 20.0;
        }
    }
    let exact = problem.exact_gradient(&xi);
    for (a, b) in avg.iter().zip(&exact) {
        assert!(
            (a - b).abs() <= 1e-12 * b.abs().max(1.0),
            "SVRG enumeration mean {a} vs exact {b}"
        );
    }
    // SARAH enumeration: average over singleton minibatches equals the
    // defining identity
    let xi_prev = vec![0.1, 0.1];
    let v_prev = problem.exact_gradient(&xi_prev);
    let mut avg2 = [0.0; 2];
    for i in 0..20 {
        let est =
            hessbay::estimators::sarah_gradient(&problem, &xi, &xi_prev, &v_prev, &[i]).unwrap();
        for (a, v) in avg2.iter_mut().zip(&est.mean) {
            *a += v / 20.0;
        }
    }
    for (a, b) in avg2.iter().zip(&exact) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }

    // adaptive postcondition whenever the flag is unset
    let quad = make_quadratic(6, 100.0, NoiseSpec::Scalar(1.0), 3).unwrap();
    let streams = RngStreams::new(11);
    for iteration in 0..30 {
        let est = adaptive_gradient(&quad, &[2.0; 6], 0.5, 4, 1 << 22, &streams, iteration);
        if est.bound_met {
            let mean_sq: f64 = est.mean.iter().map(|v| v * v).sum();
            assert!(est.cov_trace <= 0.25 * mean_sq);
        }
    }

    // the noise-compatibility inequality is asserted at every step of the
    // criterion-6 preconditioned runs (check_noise_compat); re-run one
    // short configuration here so this criterion fails standalone if the
    // inequality breaks
    let setup = QuadSetup::new(1e3);
    let (mut cfg, bayes) = setup.bay_cfg(1, 20_000);
    cfg.check_noise_compat = true;
    let out = run_precond_sgd(&setup.problem, &cfg, &bayes);
    assert!(out.trace.iterations() > 0);
    println!("acceptance criterion 10: PASS (enumeration unbiasedness, adaptive postcondition, noise compatibility)");
}

/// Criterion 11: with the exact Hessian as preconditioner the zero-noise
/// quadratic converges in one unit step; with controlled noise the
/// per-step gradient-norm ratio stays below one in median.
#[test]
fn acceptance_11_contraction_check() {
    let start = std::time::Instant::now();
    // one-step convergence, zero noise
    let clean = make_quadratic(10, 1e3, NoiseSpec::Scalar(0.0), 7).unwrap();
    let mut bayes = BayesConfig::new(
        10,
        1.0,
        1e3,
        UpdatePolicy::EquallySpaced {
            total_updates: 0,
            known_budget: 10,
        },
    );
    // the Newton-Schulz residual floor is about kappa * machine epsilon,
    // so 1e-11 is the tightest honest tolerance at kappa = 1e3
    bayes.initial_hessian = Some(clean.matrix().clone());
    bayes.tol_h = 1e-11;
    let cfg = SgdConfig {
        record_iterates: true,
        ..SgdConfig::new(StepSchedule::Fixed(1.0), 3, vec![0.1; 10], 0)
    };
    let out = run_precond_sgd(&clean, &cfg, &bayes);
    let iterates = out.trace.iterates.as_ref().unwrap();
    let g1 = vec_norm(&clean.exact_gradient(&iterates[1]));
    assert!(g1 <= 1e-8, "one Newton step left gradient norm {g1:.3e}");

    // noisy case: epsilon = 0.1 relative error, exact inverse, 20 seeds
    let noisy = make_quadratic(10, 1e3, NoiseSpec::Scalar(1.0), 7).unwrap();
    let mut ratios = Vec::new();
    for seed in 0..20 {
        let mut bayes = BayesConfig::new(
            10,
            1.0,
            1e3,
            UpdatePolicy::EquallySpaced {
                total_updates: 0,
                known_budget: 10,
            },
        );
        bayes.initial_hessian = Some(noisy.matrix().clone());
        bayes.tol_h = 1e-11;
        let cfg = SgdConfig {
            estimator: EstimatorConfig::Adaptive {
                epsilon: 0.1,
                m0: 8,
                m_max: 1 << 22,
            },
            record_iterates: true,
            ..SgdConfig::new(StepSchedule::Fixed(1.0), 200_000, vec![2.0; 10], seed)
        };
        let out = run_precond_sgd(&noisy, &cfg, &bayes);
        let iterates = out.trace.iterates.as_ref().unwrap();
        let norms: Vec<f64> = iterates
            .iter()
            .map(|xi| vec_norm(&noisy.exact_gradient(xi)))
            .collect();
        for w in norms.windows(2) {
            if w[0] > 1e-9 {
                ratios.push(w[1] / w[0]);
            }
        }
    }
    let med = median(&mut ratios);
    assert!(med < 1.0, "median contraction ratio {med:.3}");
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 30.0, "runtime {dt:.1}s exceeds 30s");
    println!(
        "acceptance criterion 11: PASS (one-step gradient {g1:.1e}, median noisy contraction {med:.3}, {dt:.1}s)"
    );
}

/// The optimality gap itself is part of several criteria; pin its identity
/// on the quadratic here so failures point at the right layer.
#[test]
fn acceptance_support_gap_identity() {
    let p = make_quadratic(5, 50.0, NoiseSpec::Scalar(0.0), 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let xi: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let gap = optimality_gap(&p, &xi).unwrap();
        assert!(gap >= -1e-10);
    }
}
