//! Invert a Hessian estimate with the Newton-Schulz iteration, including
//! the analytic restart after an adversarial warm start.
//!
//! ```bash
//! cargo run --release --example newton_schulz
//! ```

use hessbay::inverse::{invert, restart_matrix};
use hessbay::symkit::SymMat;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let d = 8;
    let (mu_hat, l_hat) = (0.5, 2.5);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let raw = SymMat::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    let eb = raw.eig_bounds();
    let b = raw.map_eigenvalues(|v| {
        mu_hat + 0.1 + (v - eb.lambda_min) / (eb.lambda_max - eb.lambda_min) * (l_hat - mu_hat - 0.2)
    });

    // cold start from the analytic matrix
    let h0 = restart_matrix(mu_hat, l_hat, d);
    let report = invert(&b, &h0, 1e-10, 60, mu_hat, l_hat).unwrap();
    println!(
        "cold start: {} iterations, residual {:.3e}",
        report.iterations, report.final_residual
    );
    println!("  residual trajectory (quadratic once below one):");
    for (i, r) in report.residuals.iter().enumerate() {
        println!("    {i}: {r:.3e}");
    }

    // warm start from the previous inverse after a small perturbation of B
    let mut b2 = b.clone();
    b2.shift_diag(0.05);
    let warm = invert(&b2, &report.h_hat, 1e-10, 60, mu_hat, l_hat).unwrap();
    println!(
        "warm start after perturbing B: {} iterations (vs {} cold)",
        warm.iterations, report.iterations
    );

    // an adversarial start makes the residual grow; the iteration resets
    // once to 2/(l_hat + mu_hat) I and still converges
    let bad = SymMat::scaled_identity(d, -1.0);
    let rescued = invert(&b, &bad, 1e-10, 60, mu_hat, l_hat).unwrap();
    println!(
        "adversarial start: restarted = {}, {} iterations, residual {:.3e}",
        rescued.restarted, rescued.iterations, rescued.final_residual
    );
}
