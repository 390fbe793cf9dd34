//! Evaluate the negative log posterior, its gradient, and the Newton
//! operator, and cross-check both derivatives against finite differences.
//!
//! ```bash
//! cargo run --release --example posterior_gradients
//! ```

use hessbay::curvature::{CurvaturePair, PairSet, PrecisionInfo};
use hessbay::posterior::{
    compute_nu, dirderiv_grad, grad_neg_log_posterior, neg_log_posterior, PosteriorSpec,
};
use hessbay::symkit::SymMat;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let d = 5;
    let (mu_hat, l_hat) = (0.2, 6.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    // a feasible iterate: eigenvalues rescaled into the barrier interval
    let raw = SymMat::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    let eb = raw.eig_bounds();
    let b = raw.map_eigenvalues(|v| {
        1.0 + (v - eb.lambda_min) / (eb.lambda_max - eb.lambda_min) * 4.0
    });

    let mut pairs = PairSet::new(d);
    for _ in 0..3 {
        let s: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        pairs.push(CurvaturePair {
            s,
            y_bar: y,
            precision: PrecisionInfo::ScalarTrace(1.0),
            sample_count: 1,
        });
    }

    let anchor = SymMat::scaled_identity(d, 3.0);
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

    let value = neg_log_posterior(&b, &spec, &pairs).unwrap();
    let grad = grad_neg_log_posterior(&b, &spec, &pairs).unwrap();
    println!("posterior value {value:.6}  gradient norm {:.6}", grad.frob_norm());

    // finite-difference check of the gradient over all upper-triangle
    // coordinates (off-diagonal basis matrices carry two unit entries)
    let h = 1e-5;
    let fd = SymMat::from_fn(d, |i, j| {
        let mut plus = b.clone();
        plus.set(i, j, b.get(i, j) + h);
        let mut minus = b.clone();
        minus.set(i, j, b.get(i, j) - h);
        let df = (neg_log_posterior(&plus, &spec, &pairs).unwrap()
            - neg_log_posterior(&minus, &spec, &pairs).unwrap())
            / (2.0 * h);
        if i == j {
            df
        } else {
            df / 2.0
        }
    });
    println!(
        "gradient vs finite differences: rel err {:.3e}",
        grad.sub(&fd).frob_norm() / grad.frob_norm()
    );

    // the Newton operator along a random direction vs differenced gradients
    let v = SymMat::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    let dir = dirderiv_grad(&b, &v, &spec, &pairs).unwrap();
    let mut plus = b.clone();
    plus.axpy(h, &v);
    let mut minus = b.clone();
    minus.axpy(-h, &v);
    let gfd = grad_neg_log_posterior(&plus, &spec, &pairs)
        .unwrap()
        .sub(&grad_neg_log_posterior(&minus, &spec, &pairs).unwrap())
        .scale(1.0 / (2.0 * h));
    println!(
        "Newton operator vs differenced gradients: rel err {:.3e}",
        dir.sub(&gfd).frob_norm() / dir.frob_norm()
    );

    // infeasible probes are a value, not an error
    let outside = SymMat::scaled_identity(d, l_hat + 1.0);
    println!(
        "infeasible probe evaluates to {:?}",
        neg_log_posterior(&outside, &spec, &pairs)
    );
}
