use std::time::Instant;

use crate::curvature::PairSet;
use crate::estimators::{
    draw_minibatch, sarah_gradient, svrg_gradient, DrawKey, FiniteSumProblem, RngStreams,
    SvrgSnapshot,
};
use crate::optimizers::model::{BayesConfig, BayesUpdater, HessianModel};
use crate::optimizers::policy::PolicyCursor;
use crate::optimizers::sgd::PrecondOutcome;
use crate::optimizers::trace::{RunTrace, TraceEvent, TraceRecord};
use crate::optimizers::StepSchedule;
use crate::problems::{optimality_gap, Benchmark};
use crate::symkit::vec_norm;

/// Which variance-reduced recursion drives the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VrKind {
    Svrg,
    Sarah,
}

/// Configuration of an SVRG or SARAH run.
#[derive(Debug, Clone)]
pub struct VrConfig {
    pub kind: VrKind,
    pub schedule: StepSchedule,
    pub budget: u64,
    pub xi0: Vec<f64>,
    pub seed: u64,
    /// Inner minibatch size.
    pub minibatch: usize,
    /// Full-gradient restart cadence, measured in passes over the data.
    pub restart_every_epochs: f64,
    pub record_iterates: bool,
}

/// Runs SVRG or SARAH, optionally preconditioned by the Bayesian Hessian
/// model. Both start each cycle with one full-batch pass and then iterate
/// on minibatches of gradient differences; curvature pairs for the model
/// come from those same component draws.
pub fn run_variance_reduced<P: FiniteSumProblem + Benchmark>(
    problem: &P,
    cfg: &VrConfig,
    bayes: Option<&BayesConfig>,
) -> PrecondOutcome {
    assert!(cfg.minibatch >= 1);
    assert!(cfg.restart_every_epochs > 0.0);
    let start = Instant::now();
    let d = problem.dim();
    let n = problem.component_count();
    let streams = RngStreams::new(cfg.seed);
    let mut xi = cfg.xi0.clone();

    let mut model = bayes.map(|b| HessianModel::initial(b, d));
    let mut updater = bayes.map(|b| BayesUpdater::new(b.clone(), d));
    let mut cursor = bayes.map(|b| PolicyCursor::new(b.policy));

    let mut trace = RunTrace::default();
    if cfg.record_iterates {
        trace.iterates = Some(vec![xi.clone()]);
    }
    let mut updates = Vec::new();
    let mut iter = 0u64;
    let restart_evals = (cfg.restart_every_epochs * n as f64).ceil() as u64;
    let mut evals_since_restart = u64::MAX; // force an initial full pass

    // SVRG state
    let mut snapshot: Option<SvrgSnapshot> = None;
    // SARAH state
    let mut sarah_prev_xi = xi.clone();
    let mut sarah_v: Vec<f64> = vec![0.0; d];

    loop {
        let remaining = cfg.budget.saturating_sub(trace.total_grad_evals);

        // full-batch restart when due
        if evals_since_restart >= restart_evals {
            if remaining < n as u64 {
                break;
            }
            match cfg.kind {
                VrKind::Svrg => {
                    snapshot = Some(SvrgSnapshot::compute(problem, &xi));
                    trace.total_grad_evals += n as u64;
                    evals_since_restart = 0;
                    // SVRG takes no step at the restart itself
                    continue;
                }
                VrKind::Sarah => {
                    sarah_v = problem.full_gradient(&xi);
                    trace.total_grad_evals += n as u64;
                    evals_since_restart = 0;
                    // SARAH steps immediately with the full gradient
                    iter += 1;
                    let draws: Vec<DrawKey> = (0..n).map(DrawKey::Component).collect();
                    let norm_est = vec_norm(&sarah_v);
                    let mean = sarah_v.clone();
                    sarah_prev_xi = xi.clone();
                    step_and_record(
                        problem,
                        cfg,
                        &mut xi,
                        &mean,
                        norm_est,
                        iter,
                        &mut trace,
                        model.as_mut(),
                        updater.as_mut(),
                        cursor.as_mut(),
                        &streams,
                        &draws,
                        &mut updates,
                        start,
                    );
                    if trace.aborted_non_finite {
                        break;
                    }
                    continue;
                }
            }
        }

        // inner minibatch iteration costs two component gradients per index
        let inner_cost = 2 * cfg.minibatch as u64;
        if remaining < inner_cost {
            break;
        }
        iter += 1;
        let batch = draw_minibatch(n, cfg.minibatch, &streams, iter);
        let est = match cfg.kind {
            VrKind::Svrg => svrg_gradient(
                problem,
                &xi,
                snapshot.as_ref().expect("snapshot exists after restart"),
                &batch,
            )
            .expect("dimensions are consistent"),
            VrKind::Sarah => {
                let est = sarah_gradient(problem, &xi, &sarah_prev_xi, &sarah_v, &batch)
                    .expect("dimensions are consistent");
                sarah_v = est.mean.clone();
                sarah_prev_xi = xi.clone();
                est
            }
        };
        trace.total_grad_evals += inner_cost;
        evals_since_restart += inner_cost;
        let norm_est = vec_norm(&est.mean);
        step_and_record(
            problem,
            cfg,
            &mut xi,
            &est.mean,
            norm_est,
            iter,
            &mut trace,
            model.as_mut(),
            updater.as_mut(),
            cursor.as_mut(),
            &streams,
            &est.draws,
            &mut updates,
            start,
        );
        if trace.aborted_non_finite {
            break;
        }
    }

    let pairs = match updater {
        Some(u) => u.into_pairs(),
        None => PairSet::new(d),
    };
    PrecondOutcome {
        trace,
        updates,
        pairs,
        final_model: model,
    }
}

#[allow(clippy::too_many_arguments)]
fn step_and_record<P: FiniteSumProblem + Benchmark>(
    problem: &P,
    cfg: &VrConfig,
    xi: &mut [f64],
    mean: &[f64],
    grad_norm_est: f64,
    iter: u64,
    trace: &mut RunTrace,
    model: Option<&mut HessianModel>,
    updater: Option<&mut BayesUpdater>,
    cursor: Option<&mut PolicyCursor>,
    streams: &RngStreams,
    draws: &[DrawKey],
    updates: &mut Vec<crate::optimizers::model::UpdateReport>,
    start: Instant,
) {
    let step = cfg.schedule.step(iter);
    let xi_prev = xi.to_vec();
    match model {
        Some(model) => {
            let scaled = model.h_hat.scale(step);
            let direction = scaled.matvec(mean);
            for (x, w) in xi.iter_mut().zip(&direction) {
                *x -= w;
            }
            let updater = updater.expect("updater accompanies the model");
            updater.record_transition(&xi_prev, xi, draws);
            let mut event = TraceEvent::None;
            if cursor
                .expect("cursor accompanies the model")
                .due(iter, trace.total_grad_evals)
            {
                let report = updater.update(model, problem, streams, iter);
                trace.total_grad_evals += report.evals_used;
                event = report.event;
                if report.event != TraceEvent::None {
                    updates.push(report);
                }
            }
            push_record(problem, trace, xi, grad_norm_est, step, iter, event, start);
        }
        None => {
            for (x, g) in xi.iter_mut().zip(mean) {
                *x -= step * g;
            }
            push_record(
                problem,
                trace,
                xi,
                grad_norm_est,
                step,
                iter,
                TraceEvent::None,
                start,
            );
        }
    }
    if xi.iter().any(|v| !v.is_finite()) {
        trace.aborted_non_finite = true;
    }
    if let Some(iterates) = trace.iterates.as_mut() {
        iterates.push(xi.to_vec());
    }
}

#[allow(clippy::too_many_arguments)]
fn push_record<P: Benchmark>(
    problem: &P,
    trace: &mut RunTrace,
    xi: &[f64],
    grad_norm_est: f64,
    step: f64,
    iter: u64,
    event: TraceEvent,
    start: Instant,
) {
    let gap = optimality_gap(problem, xi).unwrap_or_else(|_| problem.objective(xi));
    trace.records.push(TraceRecord {
        iter,
        grad_evals: trace.total_grad_evals,
        optimality_gap: gap,
        grad_norm_est,
        step_size: step,
        event,
        wall_time_s: start.elapsed().as_secs_f64(),
    });
}
