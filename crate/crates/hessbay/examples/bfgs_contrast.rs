//! Feed the same curvature pairs to the Bayesian estimate and to BFGS and
//! watch their extreme eigenvalues: the barrier keeps the Bayesian estimate
//! inside the true spectrum's bounds while BFGS overshoots the largest
//! eigenvalue.
//!
//! ```bash
//! cargo run --release --example bfgs_contrast
//! ```

use hessbay::optimizers::{
    bfgs_update, run_precond_sgd, BayesConfig, EstimatorConfig, SgdConfig, StepSchedule,
    TraceEvent, UpdatePolicy, DEFAULT_EPS_Y,
};
use hessbay::problems::{make_quadratic, NoiseSpec};
use hessbay::symkit::SymMat;

fn main() {
    let (d, kappa) = (10, 1e3);
    let problem = make_quadratic(d, kappa, NoiseSpec::Scalar(1.0), 7).unwrap();

    // harvest pairs from a preconditioned run
    let cfg = SgdConfig {
        estimator: EstimatorConfig::Adaptive {
            epsilon: 0.5,
            m0: 8,
            m_max: 1 << 22,
        },
        ..SgdConfig::new(
            StepSchedule::PrecondMice { epsilon: 0.5 },
            100_000,
            vec![100.0; d],
            0,
        )
    };
    let mut bayes = BayesConfig::new(d, 1.0, kappa, UpdatePolicy::EveryKIters(d as u64));
    bayes.pair_sample_cap = 16;
    bayes.pair_window = Some(4 * d);
    let out = run_precond_sgd(&problem, &cfg, &bayes);

    println!(
        "true spectrum: [1, {kappa:.0}]; barriers ({:.3}, {:.0})\n",
        bayes.mu_hat(),
        bayes.l_hat()
    );
    println!("Bayesian estimate at each update:");
    for u in &out.updates {
        if u.event == TraceEvent::UpdateFailed {
            continue;
        }
        let eb = u.eig_bounds.unwrap();
        println!(
            "  iter {:>5}: eigenvalues [{:>8.3}, {:>8.2}]",
            u.at_iter, eb.lambda_min, eb.lambda_max
        );
    }

    // replay the identical pair stream through BFGS
    let mut b = SymMat::scaled_identity(d, (kappa + 1.0) / 2.0);
    let mut overshoot = 0usize;
    let mut max_seen: f64 = 0.0;
    println!("\nBFGS on the same {} pairs (every 10th shown):", out.pairs.len());
    for (k, pair) in out.pairs.iter().enumerate() {
        b = bfgs_update(&b, pair, DEFAULT_EPS_Y);
        let eb = b.eig_bounds();
        max_seen = max_seen.max(eb.lambda_max);
        if eb.lambda_max > kappa {
            overshoot += 1;
        }
        if k % 10 == 0 {
            println!(
                "  pair {:>4}: eigenvalues [{:>8.3}, {:>8.2}]",
                k + 1,
                eb.lambda_min,
                eb.lambda_max
            );
        }
    }
    println!(
        "\nBFGS exceeded the true largest eigenvalue on {overshoot} of {} pairs (peak {max_seen:.1})",
        out.pairs.len()
    );
}
