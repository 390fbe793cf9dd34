use std::time::Instant;

use crate::curvature::PairSet;
use crate::estimators::{
    adaptive_gradient, mc_gradient, GradientEstimate, RngStreams, StochasticProblem,
};
use crate::optimizers::model::{BayesConfig, BayesUpdater, HessianModel, UpdateReport};
use crate::optimizers::policy::PolicyCursor;
use crate::optimizers::trace::{RunTrace, TraceEvent, TraceRecord};
use crate::optimizers::StepSchedule;
use crate::problems::{optimality_gap, Benchmark};
use crate::symkit::vec_norm;

/// How the per-iteration gradient estimate is produced.
#[derive(Debug, Clone)]
pub enum EstimatorConfig {
    /// Monte Carlo with a fixed sample count per iteration.
    FixedBatch { m: usize },
    /// Relative-error-controlled sampling: doubling until
    /// `cov_trace <= epsilon^2 ||mean||^2`.
    Adaptive { epsilon: f64, m0: usize, m_max: usize },
}

/// Configuration shared by the plain and preconditioned SGD loops.
#[derive(Debug, Clone)]
pub struct SgdConfig {
    pub schedule: StepSchedule,
    /// Gradient-evaluation budget; the run stops when it cannot afford the
    /// next estimate.
    pub budget: u64,
    pub xi0: Vec<f64>,
    pub seed: u64,
    pub estimator: EstimatorConfig,
    /// Record the full iterate sequence in the trace.
    pub record_iterates: bool,
    /// Assert the preconditioned noise-compatibility inequality
    /// `||H (v - g)|| <= ||H||_2 ||v - g||` at every step.
    pub check_noise_compat: bool,
}

impl SgdConfig {
    pub fn new(schedule: StepSchedule, budget: u64, xi0: Vec<f64>, seed: u64) -> Self {
        SgdConfig {
            schedule,
            budget,
            xi0,
            seed,
            estimator: EstimatorConfig::FixedBatch { m: 1 },
            record_iterates: false,
            check_noise_compat: false,
        }
    }
}

/// Result of a preconditioned run: the trace plus everything the update
/// machinery produced along the way.
#[derive(Debug)]
pub struct PrecondOutcome {
    pub trace: RunTrace,
    pub updates: Vec<UpdateReport>,
    /// All curvature pairs accepted during the run, in insertion order.
    pub pairs: PairSet,
    pub final_model: Option<HessianModel>,
}

/// Outcome of requesting one estimate under the remaining budget.
enum EstimateStep {
    Take(GradientEstimate),
    OutOfBudget,
}

fn next_estimate<P: StochasticProblem>(
    problem: &P,
    xi: &[f64],
    estimator: &EstimatorConfig,
    streams: &RngStreams,
    iteration: u64,
    remaining: u64,
    total_evals: &mut u64,
) -> EstimateStep {
    match *estimator {
        EstimatorConfig::FixedBatch { m } => {
            if (remaining as u128) < m as u128 {
                return EstimateStep::OutOfBudget;
            }
            let est = mc_gradient(problem, xi, m, streams, iteration);
            *total_evals += m as u64;
            EstimateStep::Take(est)
        }
        EstimatorConfig::Adaptive { epsilon, m0, m_max } => {
            if (remaining as u128) < m0 as u128 {
                return EstimateStep::OutOfBudget;
            }
            let cap = m_max.min(remaining as usize);
            let est = adaptive_gradient(problem, xi, epsilon, m0, cap, streams, iteration);
            *total_evals += est.sample_count as u64;
            // an unmet bound under a budget-tightened cap means the run can
            // no longer control its error; stop rather than take a bad step
            if !est.bound_met && cap < m_max {
                return EstimateStep::OutOfBudget;
            }
            EstimateStep::Take(est)
        }
    }
}

fn gap_or_objective<P: Benchmark>(problem: &P, xi: &[f64]) -> f64 {
    optimality_gap(problem, xi).unwrap_or_else(|_| problem.objective(xi))
}

fn non_finite(xi: &[f64]) -> bool {
    xi.iter().any(|v| !v.is_finite())
}

/// Vanilla stochastic gradient descent `xi <- xi - eta_k v_k`.
pub fn run_sgd<P: StochasticProblem + Benchmark>(problem: &P, cfg: &SgdConfig) -> RunTrace {
    let start = Instant::now();
    let streams = RngStreams::new(cfg.seed);
    let mut xi = cfg.xi0.clone();
    let mut trace = RunTrace::default();
    if cfg.record_iterates {
        trace.iterates = Some(vec![xi.clone()]);
    }
    let mut iter = 0u64;
    loop {
        let remaining = cfg.budget.saturating_sub(trace.total_grad_evals);
        let est = match next_estimate(
            problem,
            &xi,
            &cfg.estimator,
            &streams,
            iter + 1,
            remaining,
            &mut trace.total_grad_evals,
        ) {
            EstimateStep::Take(e) => e,
            EstimateStep::OutOfBudget => break,
        };
        iter += 1;
        let step = cfg.schedule.step(iter);
        for (x, g) in xi.iter_mut().zip(&est.mean) {
            *x -= step * g;
        }
        let aborted = non_finite(&xi);
        trace.records.push(TraceRecord {
            iter,
            grad_evals: trace.total_grad_evals,
            optimality_gap: gap_or_objective(problem, &xi),
            grad_norm_est: vec_norm(&est.mean),
            step_size: step,
            event: TraceEvent::None,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
        if let Some(iterates) = trace.iterates.as_mut() {
            iterates.push(xi.clone());
        }
        if aborted {
            trace.aborted_non_finite = true;
            break;
        }
    }
    trace
}

/// Preconditioned SGD `xi <- xi - eta_k (H v_k)` with scheduled Bayesian
/// Hessian updates.
///
/// The model starts at the diagonal initialization (or the supplied
/// override). At policy-triggered iterations the recorded transitions are
/// harvested into curvature pairs, the posterior maximizer replaces
/// `b_hat`, and the Newton-Schulz iteration refreshes `h_hat`; replay
/// evaluations are charged against the budget. Subsolver failures keep the
/// previous model and surface as trace events.
pub fn run_precond_sgd<P: StochasticProblem + Benchmark>(
    problem: &P,
    cfg: &SgdConfig,
    bayes: &BayesConfig,
) -> PrecondOutcome {
    let start = Instant::now();
    let d = problem.dim();
    let streams = RngStreams::new(cfg.seed);
    let mut xi = cfg.xi0.clone();
    let mut model = HessianModel::initial(bayes, d);
    let mut updater = BayesUpdater::new(bayes.clone(), d);
    let mut cursor = PolicyCursor::new(bayes.policy);
    let mut trace = RunTrace::default();
    if cfg.record_iterates {
        trace.iterates = Some(vec![xi.clone()]);
    }
    let mut updates = Vec::new();
    let mut iter = 0u64;

    loop {
        let remaining = cfg.budget.saturating_sub(trace.total_grad_evals);
        let est = match next_estimate(
            problem,
            &xi,
            &cfg.estimator,
            &streams,
            iter + 1,
            remaining,
            &mut trace.total_grad_evals,
        ) {
            EstimateStep::Take(e) => e,
            EstimateStep::OutOfBudget => break,
        };
        iter += 1;
        let step = cfg.schedule.step(iter);

        if cfg.check_noise_compat {
            let exact = problem.exact_gradient(&xi);
            let delta: Vec<f64> = est.mean.iter().zip(&exact).map(|(a, b)| a - b).collect();
            let lhs = vec_norm(&model.h_hat.matvec(&delta));
            let rhs = model.h_spectral_norm * vec_norm(&delta);
            assert!(
                lhs <= rhs * (1.0 + 1e-10) + f64::MIN_POSITIVE,
                "noise compatibility violated: {lhs:.17e} > {rhs:.17e}"
            );
        }

        // apply the step through the scaled preconditioner
        let scaled = model.h_hat.scale(step);
        let direction = scaled.matvec(&est.mean);
        let xi_prev = xi.clone();
        for (x, w) in xi.iter_mut().zip(&direction) {
            *x -= w;
        }
        updater.record_transition(&xi_prev, &xi, &est.draws);

        let mut event = TraceEvent::None;
        if cursor.due(iter, trace.total_grad_evals) {
            let report = updater.update(&mut model, problem, &streams, iter);
            trace.total_grad_evals += report.evals_used;
            event = report.event;
            if report.event != TraceEvent::None {
                updates.push(report);
            }
        }

        let aborted = non_finite(&xi);
        trace.records.push(TraceRecord {
            iter,
            grad_evals: trace.total_grad_evals,
            optimality_gap: gap_or_objective(problem, &xi),
            grad_norm_est: vec_norm(&est.mean),
            step_size: step,
            event,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
        if let Some(iterates) = trace.iterates.as_mut() {
            iterates.push(xi.clone());
        }
        if aborted {
            trace.aborted_non_finite = true;
            break;
        }
    }

    PrecondOutcome {
        trace,
        updates,
        pairs: updater.into_pairs(),
        final_model: Some(model),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::UpdatePolicy;
    use crate::problems::{make_quadratic, NoiseSpec};

    #[test]
    fn deterministic_gradient_descent_decreases_monotonically() {
        let p = make_quadratic(4, 10.0, NoiseSpec::Scalar(0.0), 2).unwrap();
        let cfg = SgdConfig {
            estimator: EstimatorConfig::FixedBatch { m: 1 },
            ..SgdConfig::new(
                StepSchedule::Fixed(0.1),
                200,
                vec![3.0; 4],
                0,
            )
        };
        let trace = run_sgd(&p, &cfg);
        assert_eq!(trace.iterations(), 200);
        for w in trace.records.windows(2) {
            assert!(w[1].optimality_gap <= w[0].optimality_gap + 1e-12);
        }
    }

    #[test]
    fn budget_smaller_than_one_estimate_yields_empty_trace() {
        let p = make_quadratic(3, 10.0, NoiseSpec::Scalar(1.0), 2).unwrap();
        let cfg = SgdConfig {
            estimator: EstimatorConfig::FixedBatch { m: 50 },
            ..SgdConfig::new(StepSchedule::Fixed(0.01), 49, vec![1.0; 3], 0)
        };
        let trace = run_sgd(&p, &cfg);
        assert_eq!(trace.iterations(), 0);
        assert_eq!(trace.total_grad_evals, 0);
    }

    #[test]
    fn grad_evals_strictly_increase() {
        let p = make_quadratic(3, 10.0, NoiseSpec::Scalar(1.0), 2).unwrap();
        let cfg = SgdConfig {
            estimator: EstimatorConfig::Adaptive {
                epsilon: 0.7,
                m0: 2,
                m_max: 1 << 20,
            },
            ..SgdConfig::new(StepSchedule::Fixed(0.05), 5_000, vec![2.0; 3], 3)
        };
        let trace = run_sgd(&p, &cfg);
        assert!(trace.iterations() > 0);
        for w in trace.records.windows(2) {
            assert!(w[1].grad_evals > w[0].grad_evals);
            assert!(w[1].iter == w[0].iter + 1);
        }
    }

    #[test]
    fn newton_step_on_quadratic_converges_in_one_iteration() {
        let p = make_quadratic(5, 100.0, NoiseSpec::Scalar(0.0), 4).unwrap();
        let mut bayes = BayesConfig::new(
            5,
            1.0,
            100.0,
            UpdatePolicy::EquallySpaced {
                total_updates: 0,
                known_budget: 10,
            },
        );
        bayes.initial_hessian = Some(p.matrix().clone());
        bayes.tol_h = 1e-12;
        let cfg = SgdConfig {
            record_iterates: true,
            ..SgdConfig::new(StepSchedule::Fixed(1.0), 3, vec![2.0; 5], 0)
        };
        let out = run_precond_sgd(&p, &cfg, &bayes);
        let iterates = out.trace.iterates.as_ref().unwrap();
        let g1 = p.exact_gradient(&iterates[1]);
        assert!(vec_norm(&g1) <= 1e-8, "norm {}", vec_norm(&g1));
    }

    #[test]
    fn preconditioned_run_updates_model_and_counts_replay() {
        let p = make_quadratic(4, 50.0, NoiseSpec::Scalar(0.5), 5).unwrap();
        let bayes = BayesConfig::new(4, 1.0, 50.0, UpdatePolicy::EveryKIters(4));
        let cfg = SgdConfig {
            estimator: EstimatorConfig::Adaptive {
                epsilon: 0.5,
                m0: 2,
                m_max: 1 << 20,
            },
            check_noise_compat: true,
            ..SgdConfig::new(
                StepSchedule::PrecondMice { epsilon: 0.5 },
                20_000,
                vec![5.0; 4],
                1,
            )
        };
        let out = run_precond_sgd(&p, &cfg, &bayes);
        assert!(!out.updates.is_empty(), "expected at least one update");
        let model = out.final_model.as_ref().unwrap();
        assert!(model.update_count >= 1);
        assert!(model.check_invariants(bayes.tol_h).is_ok());
        assert!(!out.pairs.is_empty());
        // replay evaluations are part of the accounting
        let replay: u64 = out.updates.iter().map(|u| u.evals_used).sum();
        assert!(replay > 0);
        assert!(out.trace.total_grad_evals <= cfg.budget);
        // the final gap improves on the start
        let first = out.trace.records.first().unwrap().optimality_gap;
        let last = out.trace.records.last().unwrap().optimality_gap;
        assert!(last < first);
    }

    #[test]
    fn update_events_present_in_trace() {
        let p = make_quadratic(3, 20.0, NoiseSpec::Scalar(0.2), 6).unwrap();
        let bayes = BayesConfig::new(3, 1.0, 20.0, UpdatePolicy::EveryKIters(5));
        let cfg = SgdConfig {
            estimator: EstimatorConfig::FixedBatch { m: 8 },
            ..SgdConfig::new(StepSchedule::Fixed(0.02), 2_000, vec![2.0; 3], 2)
        };
        let out = run_precond_sgd(&p, &cfg, &bayes);
        let events: Vec<_> = out.trace.events().collect();
        assert!(!events.is_empty());
        for (iter, _) in events {
            assert_eq!(iter % 5, 0);
        }
    }
}
