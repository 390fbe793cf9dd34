//! Maximize the Hessian posterior on synthetic noisy curvature pairs.
//!
//! A hidden quadratic with condition number 1e3 generates pairs
//! `(s, B_true s + noise)`; the central-path Newton-CG solver recovers an
//! estimate whose eigenvalues stay inside the barrier interval.
//!
//! ```bash
//! cargo run --release --example map_demo
//! ```

use hessbay::curvature::{make_pair, PairOutcome, PairSet, PrecisionKind};
use hessbay::map_solver::{default_config, find_map};
use hessbay::posterior::PosteriorSpec;
use hessbay::problems::{make_quadratic, NoiseSpec};
use hessbay::symkit::SymMat;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

fn main() {
    let d = 10;
    let kappa = 1e3;
    let noise_sd = 1e-2;
    let hidden = make_quadratic(d, kappa, NoiseSpec::Scalar(0.0), 7).unwrap();
    let b_true = hidden.matrix();

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut pairs = PairSet::new(d);
    for _ in 0..2 * d {
        let s: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let exact = b_true.matvec(&s);
        let samples: Vec<Vec<f64>> = (0..32)
            .map(|_| {
                exact
                    .iter()
                    .map(|v| {
                        let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
                        v + noise_sd * z
                    })
                    .collect()
            })
            .collect();
        if let PairOutcome::Accepted(p) =
            make_pair(&s, &samples, 1e-3, PrecisionKind::ScalarTrace, 1e-4).unwrap()
        {
            pairs.push(p);
        }
    }

    let (mu, l) = (1.0, kappa);
    let alpha = 1.05;
    let anchor = SymMat::scaled_identity(d, (l + mu) / 2.0);
    let template = PosteriorSpec {
        beta: 1.0,
        rho: 1e-2,
        mu_hat: mu / alpha,
        l_hat: l * alpha,
        alpha,
        w: SymMat::identity(d),
        anchor: anchor.clone(),
        nu: 1.0,
    };
    let report = find_map(&pairs, &anchor, &template, &default_config(d), None);

    println!(
        "solved in {:?} with {} Newton iterations ({} pairs, {:.1} ms)",
        report.status,
        report.total_newton_iters(),
        pairs.len(),
        report.wall_time_s * 1e3
    );
    for (i, stage) in report.path_steps.iter().enumerate() {
        println!(
            "  stage {i}: beta {:.3e}  tol {:.3e}  newton {}  max cg {}  |grad| {:.3e}",
            stage.beta,
            stage.tol,
            stage.newton_iters,
            stage.cg_iters_per_newton.iter().max().unwrap_or(&0),
            stage.final_grad_norm
        );
    }
    let eb = report.b_hat.eig_bounds();
    println!(
        "estimate eigenvalues [{:.3}, {:.1}]  barriers ({:.3}, {:.1})",
        eb.lambda_min,
        eb.lambda_max,
        template.mu_hat,
        template.l_hat
    );
    let rel = report.b_hat.sub(b_true).frob_norm() / b_true.frob_norm();
    println!("relative error vs hidden Hessian: {rel:.3e}");
}
