use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hessbay::curvature::{make_pair, PairOutcome, PairSet, PrecisionKind};
use hessbay::estimators::{RngStreams, StreamPurpose};
use hessbay::experiment::{
    run_experiment, ConfigError, ExpError, ExperimentConfig, Method, PolicySpec, ProblemSpec,
    ScheduleSpec,
};
use hessbay::map_solver::{default_config, find_map, MapDiagRecord};
use hessbay::posterior::PosteriorSpec;
use hessbay::problems::{make_quadratic, NoiseSpec};
use hessbay::symkit::SymMat;

/// Experiment runner for Bayesian-preconditioned stochastic optimizers.
#[derive(Parser)]
#[command(name = "hessbay", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Noisy-quadratic benchmark runs.
    Quadratic(QuadraticArgs),
    /// Logistic-regression benchmark runs.
    Logreg(LogregArgs),
    /// One posterior-maximization solve on synthetic curvature pairs.
    MapDemo(MapDemoArgs),
}

#[derive(Args, Clone)]
struct SharedArgs {
    /// TOML experiment config; CLI flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Gradient-evaluation budget per run.
    #[arg(long)]
    budget: Option<u64>,
    /// Comma-separated run seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Comma-separated methods (sgd, sgd-adaptive, sgd-bay,
    /// sgd-adaptive-bay, svrg, svrg-bay, sarah, sarah-bay).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Relative-error target of the adaptive estimators.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Output directory for CSVs.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Fixed-batch size for sgd / sgd-bay.
    #[arg(long)]
    batch: Option<usize>,
    /// Initial iterate fill value (xi0 = fill * ones).
    #[arg(long)]
    xi0: Option<f64>,
    /// Final-stage barrier weight of the posterior solve.
    #[arg(long)]
    beta: Option<f64>,
    /// Frobenius prior weight.
    #[arg(long)]
    rho: Option<f64>,
    /// Barrier relaxation factor.
    #[arg(long)]
    alpha: Option<f64>,
    /// Central-path decrease factor.
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of central-path stages.
    #[arg(long)]
    path_steps: Option<usize>,
    /// Final-stage gradient tolerance of the posterior solve.
    #[arg(long)]
    tol: Option<f64>,
    /// Hessian update every N iterations.
    #[arg(long)]
    update_every: Option<u64>,
    /// Evenly spread this many Hessian updates over the budget.
    #[arg(long)]
    total_updates: Option<u64>,
    /// Barrier anchor override (defaults to the strong-convexity constant).
    #[arg(long)]
    mu_tilde: Option<f64>,
    /// Replayed gradient-difference samples per curvature pair.
    #[arg(long)]
    pair_cap: Option<usize>,
    /// Step schedule override kind (fixed, inv-sqrt, lipschitz-inv-sqrt,
    /// mice-optimal, precond-mice).
    #[arg(long)]
    schedule: Option<String>,
    /// Value for fixed / inv-sqrt schedules.
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Args, Clone)]
struct QuadraticArgs {
    #[command(flatten)]
    shared: SharedArgs,
    /// Problem dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Condition number of the quadratic.
    #[arg(long)]
    kappa: Option<f64>,
    /// Isotropic gradient-noise variance.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Seed of the problem matrix.
    #[arg(long)]
    problem_seed: Option<u64>,
}

#[derive(Args, Clone)]
struct LogregArgs {
    #[command(flatten)]
    shared: SharedArgs,
    /// LibSVM data file.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Rows of synthetic two-Gaussian data instead of a file.
    #[arg(long)]
    synthetic_n: Option<usize>,
    /// l2 regularization weight.
    #[arg(long)]
    lambda: Option<f64>,
    /// Keep only the first N rows of the loaded file.
    #[arg(long)]
    subset: Option<usize>,
    /// Seed of the synthetic generator.
    #[arg(long)]
    data_seed: Option<u64>,
    /// Comma-separated per-feature scales of the synthetic generator.
    #[arg(long, value_delimiter = ',')]
    scales: Option<Vec<f64>>,
}

#[derive(Args, Clone)]
struct MapDemoArgs {
    /// Hessian dimension.
    #[arg(long, default_value_t = 10)]
    dim: usize,
    /// Condition number of the hidden true Hessian.
    #[arg(long, default_value_t = 1e3)]
    kappa: f64,
    /// Number of synthetic curvature pairs.
    #[arg(long)]
    pairs: Option<usize>,
    /// Standard deviation of the per-sample gradient-difference noise.
    #[arg(long, default_value_t = 1e-2)]
    noise: f64,
    /// Samples per pair.
    #[arg(long, default_value_t = 32)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write per-Newton-iteration diagnostics to this CSV.
    #[arg(long)]
    diag_csv: Option<PathBuf>,
}

fn config_error(field: &str, reason: impl Into<String>) -> ExpError {
    ExpError::Config(ConfigError {
        field: field.into(),
        reason: reason.into(),
    })
}

fn load_or_default(
    shared: &SharedArgs,
    default_problem: ProblemSpec,
) -> Result<ExperimentConfig, ExpError> {
    match &shared.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str(&text).map_err(|e| config_error("config", e.to_string()))
        }
        None => Ok(ExperimentConfig {
            problem: default_problem,
            methods: vec![Method::Sgd, Method::SgdAdaptiveBay],
            seeds: vec![0],
            budget: 100_000,
            epsilon: 0.5,
            batch: None,
            minibatch: 5,
            restart_epochs: 2.0,
            schedule: None,
            solver: Default::default(),
            policy: PolicySpec::default(),
            estimator: Default::default(),
            pairs: Default::default(),
            mu_tilde: None,
            xi0_fill: 0.0,
            output: PathBuf::from("hessbay-out"),
        }),
    }
}

fn apply_shared(cfg: &mut ExperimentConfig, shared: &SharedArgs) -> Result<(), ExpError> {
    if let Some(budget) = shared.budget {
        cfg.budget = budget;
    }
    if let Some(seeds) = &shared.seeds {
        cfg.seeds = seeds.clone();
    }
    if let Some(methods) = &shared.methods {
        let mut parsed = Vec::new();
        for m in methods {
            parsed.push(
                Method::parse(m).ok_or_else(|| config_error("methods", format!("unknown method '{m}'")))?,
            );
        }
        cfg.methods = parsed;
    }
    if let Some(eps) = shared.epsilon {
        cfg.epsilon = eps;
    }
    if let Some(out) = &shared.output {
        cfg.output = out.clone();
    }
    if let Some(batch) = shared.batch {
        cfg.batch = Some(batch);
    }
    if let Some(fill) = shared.xi0 {
        cfg.xi0_fill = fill;
    }
    if let Some(beta) = shared.beta {
        cfg.solver.beta = beta;
    }
    if let Some(rho) = shared.rho {
        cfg.solver.rho = rho;
    }
    if let Some(alpha) = shared.alpha {
        cfg.solver.alpha = alpha;
    }
    if let Some(gamma) = shared.gamma {
        cfg.solver.gamma = gamma;
    }
    if let Some(steps) = shared.path_steps {
        cfg.solver.path_steps = steps;
    }
    if let Some(tol) = shared.tol {
        cfg.solver.tol = tol;
    }
    if let Some(n) = shared.update_every {
        cfg.policy.every_iters = Some(n);
        cfg.policy.total_updates = None;
    }
    if let Some(t) = shared.total_updates {
        cfg.policy.total_updates = Some(t);
        cfg.policy.every_iters = None;
    }
    if let Some(mt) = shared.mu_tilde {
        cfg.mu_tilde = Some(mt);
    }
    if let Some(cap) = shared.pair_cap {
        cfg.pairs.sample_cap = cap;
    }
    if let Some(kind) = &shared.schedule {
        cfg.schedule = Some(ScheduleSpec {
            kind: kind.clone(),
            value: shared.step,
        });
    }
    Ok(())
}

fn run_quadratic(args: &QuadraticArgs) -> Result<(), ExpError> {
    let default_problem = ProblemSpec::Quadratic {
        dim: 10,
        kappa: 1e3,
        sigma2: 1.0,
        problem_seed: 0,
    };
    let mut cfg = load_or_default(&args.shared, default_problem)?;
    if !matches!(cfg.problem, ProblemSpec::Quadratic { .. }) {
        return Err(config_error(
            "problem.kind",
            "the quadratic subcommand needs a quadratic problem config",
        ));
    }
    if let ProblemSpec::Quadratic {
        dim,
        kappa,
        sigma2,
        problem_seed,
    } = &mut cfg.problem
    {
        if let Some(v) = args.dim {
            *dim = v;
        }
        if let Some(v) = args.kappa {
            *kappa = v;
        }
        if let Some(v) = args.sigma2 {
            *sigma2 = v;
        }
        if let Some(v) = args.problem_seed {
            *problem_seed = v;
        }
    }
    apply_shared(&mut cfg, &args.shared)?;
    report(run_experiment(&cfg)?);
    Ok(())
}

fn run_logreg(args: &LogregArgs) -> Result<(), ExpError> {
    let default_problem = ProblemSpec::Logistic {
        path: None,
        synthetic_n: Some(2000),
        lambda: 1e-5,
        scales: vec![1.0, 20.0],
        separation: 0.8,
        data_seed: 0,
        subset: None,
    };
    let mut cfg = load_or_default(&args.shared, default_problem)?;
    if !matches!(cfg.problem, ProblemSpec::Logistic { .. }) {
        return Err(config_error(
            "problem.kind",
            "the logreg subcommand needs a logistic problem config",
        ));
    }
    if let ProblemSpec::Logistic {
        path,
        synthetic_n,
        lambda,
        scales,
        data_seed,
        subset,
        ..
    } = &mut cfg.problem
    {
        if let Some(p) = &args.data {
            *path = Some(p.clone());
            *synthetic_n = None;
        }
        if let Some(n) = args.synthetic_n {
            *synthetic_n = Some(n);
            *path = None;
        }
        if let Some(v) = args.lambda {
            *lambda = v;
        }
        if let Some(v) = args.subset {
            *subset = Some(v);
        }
        if let Some(v) = args.data_seed {
            *data_seed = v;
        }
        if let Some(s) = &args.scales {
            *scales = s.clone();
        }
    }
    apply_shared(&mut cfg, &args.shared)?;
    report(run_experiment(&cfg)?);
    Ok(())
}

fn report(summary: hessbay::experiment::Summary) {
    println!(
        "wrote {} runs to {}",
        summary.rows.len(),
        summary.output_dir.display()
    );
    println!(
        "{:<18} {:>6} {:>10} {:>14} {:>14} {:>8}",
        "method", "seed", "iters", "final_gap", "grad_evals", "updates"
    );
    for row in &summary.rows {
        println!(
            "{:<18} {:>6} {:>10} {:>14.6e} {:>14} {:>8}",
            row.method,
            row.seed,
            row.iterations,
            row.final_gap,
            row.final_grad_evals,
            row.hessian_updates
        );
    }
    println!("summary: {}", summary.summary_path.display());
}

/// Builds noisy synthetic pairs from a hidden quadratic and solves for the
/// posterior maximizer, printing the per-stage diagnostics.
fn run_map_demo(args: &MapDemoArgs) -> Result<(), ExpError> {
    use rand::Rng;
    use rand_distr::Distribution;

    let d = args.dim;
    if d < 2 {
        return Err(config_error("dim", "dimension must be at least 2"));
    }
    let n_pairs = args.pairs.unwrap_or(2 * d);
    let hidden = make_quadratic(d, args.kappa, NoiseSpec::Scalar(0.0), args.seed)?;
    let b_true = hidden.matrix();
    let streams = RngStreams::new(args.seed);

    let mut pairs = PairSet::new(d);
    for k in 0..n_pairs {
        let mut rng = streams.stream(StreamPurpose::Theta, k as u64, 0);
        let s: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ys = b_true.matvec(&s);
        let samples: Vec<Vec<f64>> = (0..args.samples.max(2))
            .map(|_| {
                ys.iter()
                    .map(|v| {
                        let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
                        v + args.noise * z
                    })
                    .collect()
            })
            .collect();
        match make_pair(&s, &samples, 1e-3, PrecisionKind::ScalarTrace, 1e-4)
            .expect("samples are well-formed")
        {
            PairOutcome::Accepted(p) => pairs.push(p),
            PairOutcome::Rejected { .. } => {}
        }
    }

    let (mu, l) = (1.0, args.kappa);
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
    let cfg = default_config(d);
    let mut diag: Vec<MapDiagRecord> = Vec::new();
    let mut sink = |rec: &MapDiagRecord| diag.push(rec.clone());
    let report = find_map(&pairs, &anchor, &template, &cfg, Some(&mut sink));

    println!(
        "map-demo: d = {d}, {} pairs, noise sd {}, status {:?}, {:.1} ms",
        pairs.len(),
        args.noise,
        report.status,
        report.wall_time_s * 1e3
    );
    println!(
        "{:>5} {:>12} {:>12} {:>8} {:>12} {:>10}",
        "stage", "beta", "tol", "newton", "grad_norm", "max_cg"
    );
    for (i, stage) in report.path_steps.iter().enumerate() {
        println!(
            "{:>5} {:>12.4e} {:>12.4e} {:>8} {:>12.4e} {:>10}",
            i,
            stage.beta,
            stage.tol,
            stage.newton_iters,
            stage.final_grad_norm,
            stage.cg_iters_per_newton.iter().copied().max().unwrap_or(0)
        );
    }
    let eb = report.b_hat.eig_bounds();
    let err = report.b_hat.sub(b_true).frob_norm() / b_true.frob_norm();
    println!(
        "eigenvalues of estimate: [{:.4e}, {:.4e}] inside ({:.4e}, {:.4e})",
        eb.lambda_min,
        eb.lambda_max,
        template.mu_hat,
        template.l_hat
    );
    println!("relative error vs hidden Hessian: {err:.4e}");

    if let Some(path) = &args.diag_csv {
        use std::io::Write;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "stage,newton_index,cg_iterations,grad_norm,value,step")?;
        for r in &diag {
            writeln!(
                out,
                "{},{},{},{:e},{:e},{:e}",
                r.stage, r.newton_index, r.cg_iterations, r.grad_norm, r.value, r.step
            )?;
        }
        println!("diagnostics: {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match &cli.command {
        Command::Quadratic(args) => run_quadratic(args),
        Command::Logreg(args) => run_logreg(args),
        Command::MapDemo(args) => run_map_demo(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
