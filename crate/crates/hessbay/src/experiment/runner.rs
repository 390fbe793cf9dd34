use std::path::{Path, PathBuf};

use super::config::{
    ConfigError, ExperimentConfig, Method, ProblemSpec, ScheduleSpec, SolverOverrides,
};
use super::csvio::{emit_map_diag, emit_summary, emit_trace, SummaryRow};
use crate::optimizers::{
    run_precond_sgd, run_sgd, run_variance_reduced, BayesConfig, EstimatorConfig, RunTrace,
    SgdConfig, StepSchedule, TraceEvent, UpdatePolicy, UpdateReport, VrConfig, VrKind,
};
use crate::problems::{
    logistic_reference_cached, make_quadratic, parse_libsvm, Benchmark, LogisticProblem,
    NoiseSpec, ProblemError, QuadraticProblem,
};

#[derive(Debug, thiserror::Error)]
pub enum ExpError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("problem setup failed: {0}")]
    Problem(#[from] ProblemError),
}

impl ExpError {
    /// Process exit status: 1 for configuration errors, 2 for IO and other
    /// runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Config(_) => 1,
            _ => 2,
        }
    }
}

/// Everything one `(method, seed)` run produced.
#[derive(Debug)]
pub struct RunArtifacts {
    pub method: Method,
    pub seed: u64,
    pub trace: RunTrace,
    pub updates: Vec<UpdateReport>,
}

/// Summary of a finished experiment.
#[derive(Debug)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub output_dir: PathBuf,
    pub summary_path: PathBuf,
}

enum BuiltProblem {
    Quadratic(QuadraticProblem),
    Logistic(LogisticProblem),
}

fn build_problem(cfg: &ExperimentConfig) -> Result<BuiltProblem, ExpError> {
    match &cfg.problem {
        ProblemSpec::Quadratic {
            dim,
            kappa,
            sigma2,
            problem_seed,
        } => Ok(BuiltProblem::Quadratic(make_quadratic(
            *dim,
            *kappa,
            NoiseSpec::Scalar(*sigma2),
            *problem_seed,
        )?)),
        ProblemSpec::Logistic {
            path,
            synthetic_n,
            lambda,
            scales,
            separation,
            data_seed,
            subset,
        } => {
            let mut problem = if let Some(path) = path {
                let text = std::fs::read_to_string(path)?;
                let data = parse_libsvm(&text, None).map_err(|e| {
                    ExpError::Config(ConfigError {
                        field: "problem.path".into(),
                        reason: e.to_string(),
                    })
                })?;
                let p = LogisticProblem::from_data(data.xs, data.ys, *lambda)?;
                match subset {
                    Some(n) => p.truncated(*n)?,
                    None => p,
                }
            } else {
                LogisticProblem::synthetic_two_gaussian(
                    synthetic_n.expect("validated"),
                    scales,
                    *separation,
                    *lambda,
                    *data_seed,
                )
            };
            let cache = cfg.output.join("refcache");
            let reference = logistic_reference_cached(&problem, 1e-10, &cache)?;
            problem.set_reference(reference);
            Ok(BuiltProblem::Logistic(problem))
        }
    }
}

fn schedule_for(
    method: Method,
    spec: Option<&ScheduleSpec>,
    mu: f64,
    l: f64,
    epsilon: f64,
) -> StepSchedule {
    if let Some(spec) = spec {
        return match spec.kind.as_str() {
            "fixed" => StepSchedule::Fixed(spec.value.expect("validated")),
            "inv-sqrt" => StepSchedule::InvSqrt {
                c: spec.value.expect("validated"),
            },
            "lipschitz-inv-sqrt" => StepSchedule::LipschitzInvSqrt { l },
            "mice-optimal" => StepSchedule::MiceOptimal { l, mu, epsilon },
            "precond-mice" => StepSchedule::PrecondMice { epsilon },
            other => unreachable!("validated schedule kind {other}"),
        };
    }
    match method {
        Method::Sgd => StepSchedule::LipschitzInvSqrt { l },
        Method::SgdAdaptive => StepSchedule::MiceOptimal { l, mu, epsilon },
        Method::SgdBay => StepSchedule::Fixed(1.0),
        Method::SgdAdaptiveBay => StepSchedule::PrecondMice { epsilon },
        Method::Svrg | Method::Sarah => StepSchedule::Fixed(0.1 / l),
        Method::SvrgBay | Method::SarahBay => StepSchedule::Fixed(0.1),
    }
}

fn map_config_from(solver: &SolverOverrides, d: usize) -> crate::map_solver::MapSolverConfig {
    let mut map = crate::map_solver::default_config(d);
    let lift = solver.gamma.powi(solver.path_steps as i32 - 1);
    map.beta0 = solver.beta * lift;
    map.tol0 = solver.tol * lift;
    map.gamma = solver.gamma;
    map.n_path_steps = solver.path_steps;
    map
}

fn bayes_config(cfg: &ExperimentConfig, d: usize, mu: f64, l: f64) -> BayesConfig {
    let mu_tilde = cfg.mu_tilde.unwrap_or(mu).max(f64::MIN_POSITIVE);
    let policy = match (cfg.policy.every_iters, cfg.policy.total_updates) {
        (Some(n), None) => UpdatePolicy::EveryKIters(n),
        (None, Some(t)) => UpdatePolicy::EquallySpaced {
            total_updates: t,
            known_budget: cfg.budget,
        },
        (None, None) => UpdatePolicy::EveryKIters(d as u64),
        (Some(_), Some(_)) => unreachable!("validated"),
    };
    let mut bayes = BayesConfig::new(d, mu_tilde, l, policy);
    bayes.map = map_config_from(&cfg.solver, d);
    bayes.rho = cfg.solver.rho;
    bayes.alpha = cfg.solver.alpha;
    bayes.precision = cfg.pairs.precision;
    bayes.pair_sample_cap = cfg.pairs.sample_cap;
    bayes.s_min_norm = cfg.pairs.s_min_norm;
    bayes.pair_window = cfg.pairs.window;
    bayes
}

fn run_one(problem: &BuiltProblem, cfg: &ExperimentConfig, method: Method, seed: u64) -> RunArtifacts {
    let (d, mu, l) = match problem {
        BuiltProblem::Quadratic(p) => {
            let (mu, l) = p.lipschitz_constants();
            (crate::estimators::StochasticProblem::dim(p), mu, l)
        }
        BuiltProblem::Logistic(p) => {
            let (mu, l) = p.lipschitz_constants();
            (crate::estimators::StochasticProblem::dim(p), mu, l)
        }
    };
    let schedule = schedule_for(method, cfg.schedule.as_ref(), mu, l, cfg.epsilon);
    let xi0 = vec![cfg.xi0_fill; d];
    let sgd_cfg = |estimator: EstimatorConfig| SgdConfig {
        schedule: schedule.clone(),
        budget: cfg.budget,
        xi0: xi0.clone(),
        seed,
        estimator,
        record_iterates: false,
        check_noise_compat: false,
    };
    let adaptive = EstimatorConfig::Adaptive {
        epsilon: cfg.epsilon,
        m0: cfg.estimator.m0,
        m_max: cfg.estimator.m_max,
    };

    let (trace, updates) = match method {
        Method::Sgd => {
            let est = EstimatorConfig::FixedBatch {
                m: cfg.batch.unwrap_or(1),
            };
            let trace = dispatch_sgd(problem, &sgd_cfg(est));
            (trace, Vec::new())
        }
        Method::SgdAdaptive => {
            let trace = dispatch_sgd(problem, &sgd_cfg(adaptive));
            (trace, Vec::new())
        }
        Method::SgdBay => {
            let est = EstimatorConfig::FixedBatch {
                m: cfg.batch.unwrap_or(1000),
            };
            let bayes = bayes_config(cfg, d, mu, l);
            let out = dispatch_precond(problem, &sgd_cfg(est), &bayes);
            (out.0, out.1)
        }
        Method::SgdAdaptiveBay => {
            let bayes = bayes_config(cfg, d, mu, l);
            let out = dispatch_precond(problem, &sgd_cfg(adaptive), &bayes);
            (out.0, out.1)
        }
        Method::Svrg | Method::SvrgBay | Method::Sarah | Method::SarahBay => {
            let BuiltProblem::Logistic(p) = problem else {
                unreachable!("validated: finite-sum methods need logistic data");
            };
            let kind = if matches!(method, Method::Svrg | Method::SvrgBay) {
                VrKind::Svrg
            } else {
                VrKind::Sarah
            };
            let vr_cfg = VrConfig {
                kind,
                schedule,
                budget: cfg.budget,
                xi0,
                seed,
                minibatch: cfg.minibatch,
                restart_every_epochs: cfg.restart_epochs,
                record_iterates: false,
            };
            let bayes = method
                .uses_bayes()
                .then(|| bayes_config(cfg, d, mu, l));
            let out = run_variance_reduced(p, &vr_cfg, bayes.as_ref());
            (out.trace, out.updates)
        }
    };

    RunArtifacts {
        method,
        seed,
        trace,
        updates,
    }
}

fn dispatch_sgd(problem: &BuiltProblem, cfg: &SgdConfig) -> RunTrace {
    match problem {
        BuiltProblem::Quadratic(p) => run_sgd(p, cfg),
        BuiltProblem::Logistic(p) => run_sgd(p, cfg),
    }
}

fn dispatch_precond(
    problem: &BuiltProblem,
    cfg: &SgdConfig,
    bayes: &BayesConfig,
) -> (RunTrace, Vec<UpdateReport>) {
    match problem {
        BuiltProblem::Quadratic(p) => {
            let out = run_precond_sgd(p, cfg, bayes);
            (out.trace, out.updates)
        }
        BuiltProblem::Logistic(p) => {
            let out = run_precond_sgd(p, cfg, bayes);
            (out.trace, out.updates)
        }
    }
}

fn summarize(artifacts: &RunArtifacts) -> SummaryRow {
    let trace = &artifacts.trace;
    let updates = &artifacts.updates;
    SummaryRow {
        method: artifacts.method.as_str().to_string(),
        seed: artifacts.seed,
        iterations: trace.iterations(),
        final_gap: trace.final_gap().unwrap_or(f64::NAN),
        final_grad_evals: trace.records.last().map(|r| r.grad_evals).unwrap_or(0),
        total_grad_evals: trace.total_grad_evals,
        hessian_updates: updates
            .iter()
            .filter(|u| {
                matches!(
                    u.event,
                    TraceEvent::HessianUpdate | TraceEvent::InverseRestart
                )
            })
            .count(),
        update_failures: updates
            .iter()
            .filter(|u| u.event == TraceEvent::UpdateFailed)
            .count(),
        aborted_non_finite: trace.aborted_non_finite,
    }
}

pub fn trace_path(output: &Path, method: Method, seed: u64) -> PathBuf {
    output.join(format!("{}_seed{}_trace.csv", method.file_stem(), seed))
}

pub fn map_diag_path(output: &Path, method: Method, seed: u64) -> PathBuf {
    output.join(format!("{}_seed{}_mapdiag.csv", method.file_stem(), seed))
}

/// Runs every `(method, seed)` combination of the experiment, writes one
/// trace CSV and one solver-diagnostics CSV per run plus a summary CSV, and
/// returns the summary. Runs execute in a worker pool; outputs and the
/// summary order are deterministic regardless of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary, ExpError> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output)?;
    let problem = build_problem(cfg)?;

    let runs: Vec<(Method, u64)> = cfg
        .methods
        .iter()
        .flat_map(|m| cfg.seeds.iter().map(move |s| (*m, *s)))
        .collect();

    let parallelism = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let mut artifacts: Vec<RunArtifacts> = Vec::with_capacity(runs.len());
    for chunk in runs.chunks(parallelism.max(1)) {
        let chunk_results: Vec<RunArtifacts> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|(method, seed)| {
                    let problem = &problem;
                    let method = *method;
                    let seed = *seed;
                    scope.spawn(move || run_one(problem, cfg, method, seed))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("run thread panicked"))
                .collect()
        });
        artifacts.extend(chunk_results);
    }

    let mut rows = Vec::with_capacity(artifacts.len());
    for art in &artifacts {
        emit_trace(&art.trace, &trace_path(&cfg.output, art.method, art.seed))?;
        emit_map_diag(
            &art.updates,
            &map_diag_path(&cfg.output, art.method, art.seed),
        )?;
        rows.push(summarize(art));
    }
    let summary_path = cfg.output.join("summary.csv");
    emit_summary(&rows, &summary_path)?;

    Ok(Summary {
        rows,
        output_dir: cfg.output.clone(),
        summary_path,
    })
}
