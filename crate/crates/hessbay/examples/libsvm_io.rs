//! Parse LibSVM-format text, densify it, and round-trip it back.
//!
//! ```bash
//! cargo run --example libsvm_io [path/to/data.libsvm]
//! ```

use hessbay::problems::{parse_libsvm, to_libsvm_string, Benchmark, LogisticProblem};

const SAMPLE: &str = "\
+1 1:0.5 3:2.0
0 2:1.0
-1 1:-0.25 2:0.75 3:1.5
+1 3:4.0
";

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable file"),
        None => SAMPLE.to_string(),
    };
    let data = match parse_libsvm(&text, None) {
        Ok(data) => data,
        Err(e) => {
            eprintln!("parse failed: {e}");
            std::process::exit(1);
        }
    };
    println!("{} rows, {} features", data.xs.len(), data.dim);
    for (x, y) in data.xs.iter().zip(&data.ys).take(5) {
        println!("  y = {y:+.0}  x = {x:?}");
    }

    let back = parse_libsvm(&to_libsvm_string(&data), Some(data.dim)).unwrap();
    println!("round-trip identical: {}", back == data);

    let problem = LogisticProblem::from_data(data.xs, data.ys, 1e-5).unwrap();
    let (mu, l) = problem.lipschitz_constants();
    println!("as a training problem: mu = {mu:.2e}, L = {l:.4}, condition {:.2e}", l / mu);
}
