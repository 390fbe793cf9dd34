//! Train l2-regularized logistic regression with SGD, SVRG, and their
//! Bayesian-preconditioned variants on synthetic two-Gaussian data, or on a
//! LibSVM file passed as the first argument.
//!
//! ```bash
//! cargo run --release --example logistic_train [path/to/data.libsvm]
//! ```

use hessbay::estimators::StochasticProblem;
use hessbay::optimizers::{
    run_precond_sgd, run_sgd, run_variance_reduced, BayesConfig, EstimatorConfig, SgdConfig,
    StepSchedule, UpdatePolicy, VrConfig, VrKind,
};
use hessbay::problems::{logistic_reference, parse_libsvm, Benchmark, LogisticProblem};

fn main() {
    let lambda = 1e-5;
    let mut problem = match std::env::args().nth(1) {
        Some(path) => {
            let text = std::fs::read_to_string(&path).expect("readable data file");
            let data = parse_libsvm(&text, None).expect("LibSVM-format data");
            println!("loaded {} rows of dimension {} from {path}", data.xs.len(), data.dim);
            LogisticProblem::from_data(data.xs, data.ys, lambda)
                .unwrap()
                .truncated(2000)
                .unwrap()
        }
        None => LogisticProblem::synthetic_two_gaussian(2000, &[1.0, 20.0], 0.8, lambda, 42),
    };
    let reference = logistic_reference(&problem, 1e-10).unwrap();
    println!("reference optimum f* = {:.8}", reference.f_star);
    problem.set_reference(reference);

    let d = StochasticProblem::dim(&problem);
    let (mu, l) = problem.lipschitz_constants();
    let budget = 300_000;
    let xi0 = vec![0.0; d];

    let sgd = run_sgd(
        &problem,
        &SgdConfig {
            estimator: EstimatorConfig::FixedBatch { m: 1 },
            ..SgdConfig::new(StepSchedule::LipschitzInvSqrt { l }, budget, xi0.clone(), 0)
        },
    );

    let mut bayes = BayesConfig::new(d, mu, l, UpdatePolicy::EveryKIters(5));
    bayes.rho = 1e-3;
    bayes.pair_sample_cap = 256;
    let adaptive_bay = run_precond_sgd(
        &problem,
        &SgdConfig {
            estimator: EstimatorConfig::Adaptive {
                epsilon: 0.5,
                m0: 8,
                m_max: 1 << 22,
            },
            ..SgdConfig::new(StepSchedule::PrecondMice { epsilon: 0.5 }, budget, xi0.clone(), 0)
        },
        &bayes,
    );

    let svrg = run_variance_reduced(
        &problem,
        &VrConfig {
            kind: VrKind::Svrg,
            schedule: StepSchedule::Fixed(0.1 / l),
            budget,
            xi0: xi0.clone(),
            seed: 0,
            minibatch: 5,
            restart_every_epochs: 2.0,
            record_iterates: false,
        },
        None,
    );

    let mut svrg_bayes = BayesConfig::new(d, mu, l, UpdatePolicy::EveryKIters(200));
    svrg_bayes.rho = 1e-3;
    svrg_bayes.pair_sample_cap = 5;
    let svrg_bay = run_variance_reduced(
        &problem,
        &VrConfig {
            kind: VrKind::Svrg,
            schedule: StepSchedule::Fixed(0.1),
            budget,
            xi0,
            seed: 0,
            minibatch: 5,
            restart_every_epochs: 2.0,
            record_iterates: false,
        },
        Some(&svrg_bayes),
    );

    println!(
        "\n{:<22} {:>10} {:>14} {:>9}",
        "method", "iters", "final gap", "updates"
    );
    for (name, trace, updates) in [
        ("sgd", &sgd, 0),
        ("sgd-adaptive-bay", &adaptive_bay.trace, adaptive_bay.updates.len()),
        ("svrg", &svrg.trace, 0),
        ("svrg-bay", &svrg_bay.trace, svrg_bay.updates.len()),
    ] {
        println!(
            "{:<22} {:>10} {:>14.3e} {:>9}",
            name,
            trace.iterations(),
            trace.final_gap().unwrap(),
            updates
        );
    }
}
