//! Watch the relative-error-controlled estimator grow its sample size as
//! the gradient shrinks, and replay its draws under common random numbers
//! to form a curvature pair.
//!
//! ```bash
//! cargo run --release --example adaptive_estimator
//! ```

use hessbay::curvature::{make_pair, PairOutcome, PrecisionKind};
use hessbay::estimators::{adaptive_gradient, gradient_difference_samples, RngStreams};
use hessbay::problems::{make_quadratic, Benchmark, NoiseSpec};

fn main() {
    let d = 6;
    let problem = make_quadratic(d, 100.0, NoiseSpec::Scalar(1.0), 5).unwrap();
    let streams = RngStreams::new(0);
    let epsilon = 0.5;

    println!("adaptive sampling along a shrinking-gradient path:");
    println!(
        "{:>18} {:>12} {:>10} {:>12} {:>6}",
        "||exact grad||", "||estimate||", "samples", "cov trace", "met"
    );
    let xi_star = &problem.reference().unwrap().xi_star.clone();
    let mut previous: Option<(Vec<f64>, Vec<hessbay::estimators::DrawKey>)> = None;
    for (iteration, t) in [1.0, 0.3, 0.1, 0.03, 0.01, 0.003].into_iter().enumerate() {
        // a point at relative distance t from the optimum
        let xi: Vec<f64> = xi_star.iter().map(|v| v * (1.0 - t) + 2.0 * t).collect();
        let est = adaptive_gradient(
            &problem,
            &xi,
            epsilon,
            4,
            1 << 22,
            &streams,
            iteration as u64,
        );
        let exact = problem.exact_gradient(&xi);
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        println!(
            "{:>18.4e} {:>12.4e} {:>10} {:>12.4e} {:>6}",
            norm(&exact),
            norm(&est.mean),
            est.sample_count,
            est.cov_trace,
            est.bound_met
        );

        // form a curvature pair against the previous point by replaying the
        // same draws at both iterates; for this additive-noise problem the
        // differences are exact, so the zero-variance guard kicks in
        if let Some((prev_xi, _)) = &previous {
            let diffs =
                gradient_difference_samples(&problem, &xi, prev_xi, &est.draws, &streams, 8);
            let s: Vec<f64> = xi.iter().zip(prev_xi).map(|(a, b)| a - b).collect();
            if let PairOutcome::Accepted(pair) =
                make_pair(&s, &diffs, 1e-3, PrecisionKind::ScalarTrace, 1e-6).unwrap()
            {
                let implied = pair
                    .s
                    .iter()
                    .zip(&pair.y_bar)
                    .map(|(si, yi)| si * yi)
                    .sum::<f64>()
                    / pair.s.iter().map(|v| v * v).sum::<f64>();
                println!(
                    "        pair: {} samples, implied curvature along s = {implied:.3}",
                    pair.sample_count
                );
            }
        }
        previous = Some((xi, est.draws));
    }
}
