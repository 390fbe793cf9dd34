//! Vanilla SGD against the Bayesian-preconditioned adaptive method on the
//! ill-conditioned noisy quadratic, at the same gradient budget.
//!
//! ```bash
//! cargo run --release --example quadratic_compare
//! ```

use hessbay::optimizers::{
    run_precond_sgd, run_sgd, BayesConfig, EstimatorConfig, SgdConfig, StepSchedule, UpdatePolicy,
};
use hessbay::problems::{make_quadratic, NoiseSpec};

fn main() {
    let (d, kappa) = (10, 1e3);
    let budget = 100_000;
    let problem = make_quadratic(d, kappa, NoiseSpec::Scalar(1.0), 7).unwrap();
    let xi0 = vec![100.0; d];

    let sgd_cfg = SgdConfig {
        estimator: EstimatorConfig::FixedBatch { m: 1 },
        ..SgdConfig::new(
            StepSchedule::LipschitzInvSqrt { l: kappa },
            budget,
            xi0.clone(),
            0,
        )
    };
    let sgd_trace = run_sgd(&problem, &sgd_cfg);

    let bay_cfg = SgdConfig {
        estimator: EstimatorConfig::Adaptive {
            epsilon: 0.5,
            m0: 8,
            m_max: 1 << 22,
        },
        ..SgdConfig::new(StepSchedule::PrecondMice { epsilon: 0.5 }, budget, xi0, 0)
    };
    let mut bayes = BayesConfig::new(d, 1.0, kappa, UpdatePolicy::EveryKIters(d as u64));
    bayes.pair_sample_cap = 16;
    bayes.pair_window = Some(4 * d);
    let out = run_precond_sgd(&problem, &bay_cfg, &bayes);

    println!("noisy quadratic, d = {d}, kappa = {kappa:.0e}, budget = {budget} gradients\n");
    println!(
        "{:<22} {:>10} {:>14} {:>10}",
        "method", "iters", "final gap", "updates"
    );
    println!(
        "{:<22} {:>10} {:>14.3e} {:>10}",
        "sgd (1/(L sqrt k))",
        sgd_trace.iterations(),
        sgd_trace.final_gap().unwrap(),
        0
    );
    println!(
        "{:<22} {:>10} {:>14.3e} {:>10}",
        "preconditioned",
        out.trace.iterations(),
        out.trace.final_gap().unwrap(),
        out.updates.len()
    );

    println!("\npreconditioned gap trajectory at each Hessian update:");
    for r in &out.trace.records {
        if r.event != hessbay::optimizers::TraceEvent::None {
            println!(
                "  iter {:>5}  evals {:>7}  gap {:.3e}  [{}]",
                r.iter,
                r.grad_evals,
                r.optimality_gap,
                r.event.as_str()
            );
        }
    }
    let model = out.final_model.unwrap();
    let eb = model.b_hat.eig_bounds();
    println!(
        "\nfinal model: {} updates, eigenvalues [{:.2}, {:.1}] inside ({:.2}, {:.1})",
        model.update_count,
        eb.lambda_min,
        eb.lambda_max,
        model.mu_hat,
        model.l_hat
    );
}
