//! Central-path Newton-CG maximizer of the Hessian posterior.
//!
//! [`find_map`] runs a fixed number of central-path stages. Each stage
//! divides the barrier weight and the gradient tolerance by `gamma`, then
//! iterates Newton steps until the posterior gradient norm falls below the
//! stage tolerance. The Newton direction solves
//! `dirderiv(B, D) = -grad(B)` by conjugate gradient over symmetric
//! matrices, and a backtracking Armijo search picks the step, treating
//! infeasible probes as `+inf`.

use std::time::Instant;

use crate::curvature::PairSet;
use crate::posterior::{compute_nu, neg_log_posterior, PosteriorEval, PosteriorSpec};
use crate::symkit::{cg_symmetric, CgError, SymMat};

/// Knobs of the central-path solver.
#[derive(Debug, Clone)]
pub struct MapSolverConfig {
    /// Barrier weight of the first stage.
    pub beta0: f64,
    /// Gradient-norm tolerance of the first stage.
    pub tol0: f64,
    /// Per-stage decrease factor for both `beta` and `tol`, `> 1`.
    pub gamma: f64,
    /// Number of central-path stages.
    pub n_path_steps: usize,
    /// Armijo sufficient-decrease constant in `(0, 1)`.
    pub c_armijo: f64,
    /// Newton iteration cap per stage.
    pub max_newton_per_step: usize,
    /// Relative tolerance of the inner CG solve.
    pub cg_tol: f64,
    /// Iteration cap of the inner CG solve.
    pub cg_max_iter: usize,
    /// Step shrink factor of the Armijo backtracking, in `(0, 1)`.
    pub armijo_shrink: f64,
    /// Backtracking cap before the solve is flagged as stalled.
    pub armijo_max_backtracks: usize,
}

/// Defaults sized for dimension `d`: six stages with `gamma = 2` ending at
/// `beta = 1e-2` and `tol = 1e-6`, and a CG cap just above the dimension of
/// the symmetric-matrix space.
pub fn default_config(d: usize) -> MapSolverConfig {
    assert!(d >= 1);
    MapSolverConfig {
        beta0: 0.32,
        tol0: 3.2e-5,
        gamma: 2.0,
        n_path_steps: 6,
        c_armijo: 1e-4,
        max_newton_per_step: 200,
        cg_tol: 1e-8,
        cg_max_iter: d * (d + 1) / 2 + 10,
        armijo_shrink: 0.5,
        armijo_max_backtracks: 60,
    }
}

/// Diagnostics of one central-path stage.
#[derive(Debug, Clone)]
pub struct PathStageReport {
    pub beta: f64,
    pub tol: f64,
    pub newton_iters: usize,
    pub cg_iters_per_newton: Vec<usize>,
    pub final_grad_norm: f64,
}

/// How the solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapStatus {
    Converged,
    /// A stage hit its Newton cap; `b_hat` is the best iterate found.
    MaxNewtonExceeded,
    /// The Armijo step underflowed the backtracking cap.
    ArmijoStalled,
}

/// Result of a [`find_map`] call.
#[derive(Debug, Clone)]
pub struct MapSolveReport {
    pub b_hat: SymMat,
    pub path_steps: Vec<PathStageReport>,
    pub wall_time_s: f64,
    pub status: MapStatus,
}

impl MapSolveReport {
    pub fn total_newton_iters(&self) -> usize {
        self.path_steps.iter().map(|s| s.newton_iters).sum()
    }

    pub fn max_cg_iters(&self) -> usize {
        self.path_steps
            .iter()
            .flat_map(|s| s.cg_iters_per_newton.iter().copied())
            .max()
            .unwrap_or(0)
    }
}

/// One per-Newton-iteration diagnostic record for a caller-supplied sink.
#[derive(Debug, Clone)]
pub struct MapDiagRecord {
    pub stage: usize,
    pub newton_index: usize,
    pub cg_iterations: usize,
    pub grad_norm: f64,
    pub value: f64,
    pub step: f64,
}

/// Maximizes the posterior for the given pairs, starting from `anchor`.
///
/// `template` supplies `rho`, `alpha`, the barrier bounds and the Frobenius
/// weight; `beta` and `nu` are managed per stage, and the template's anchor
/// is replaced by the `anchor` argument. An anchor that violates the
/// barriers (possible when the bounds changed between updates) is projected
/// onto the feasible interval by eigenvalue clamping before the first stage.
///
/// `pairs` may be empty, in which case the solve is prior-only.
pub fn find_map(
    pairs: &PairSet,
    anchor: &SymMat,
    template: &PosteriorSpec,
    cfg: &MapSolverConfig,
    mut sink: Option<&mut dyn FnMut(&MapDiagRecord)>,
) -> MapSolveReport {
    let start = Instant::now();
    let (mu_hat, l_hat) = (template.mu_hat, template.l_hat);

    // The normalization uses the fixed anchor, not the evolving iterate, so
    // the objective stays fixed within every stage.
    let nu = if pairs.is_empty() {
        1.0
    } else {
        compute_nu(pairs, anchor).expect("non-empty pair set")
    };

    let mut spec = PosteriorSpec {
        beta: cfg.beta0,
        nu,
        anchor: anchor.clone(),
        ..template.clone()
    };
    spec.validate().expect("posterior spec must validate");

    let mut b = project_feasible(anchor, mu_hat, l_hat);
    let mut stages = Vec::with_capacity(cfg.n_path_steps);
    let mut status = MapStatus::Converged;

    'path: for stage in 0..cfg.n_path_steps {
        spec.beta = cfg.beta0 / cfg.gamma.powi(stage as i32);
        let tol = cfg.tol0 / cfg.gamma.powi(stage as i32);
        let mut report = PathStageReport {
            beta: spec.beta,
            tol,
            newton_iters: 0,
            cg_iters_per_newton: Vec::new(),
            final_grad_norm: f64::NAN,
        };

        loop {
            let eval = PosteriorEval::new(&b, &spec, pairs)
                .expect("accepted iterates stay strictly feasible");
            let grad = eval.grad();
            let grad_norm = grad.frob_norm();
            if grad_norm <= tol {
                report.final_grad_norm = grad_norm;
                break;
            }
            if report.newton_iters >= cfg.max_newton_per_step {
                report.final_grad_norm = grad_norm;
                status = MapStatus::MaxNewtonExceeded;
                stages.push(report);
                break 'path;
            }

            let rhs = grad.scale(-1.0);
            let (direction, cg_iters) =
                match cg_symmetric(|v| eval.dirderiv(v), &rhs, cfg.cg_tol, cfg.cg_max_iter) {
                    Ok(sol) => (sol.x, sol.iterations),
                    // the best CG iterate is still a descent direction for
                    // an SPD operator; use it and keep going
                    Err(CgError::MaxIterExceeded {
                        best, iterations, ..
                    }) => (best, iterations),
                };

            let f0 = eval.value();
            let slope = grad.frob_inner(&direction);
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..=cfg.armijo_max_backtracks {
                let mut candidate = b.clone();
                candidate.axpy(step, &direction);
                if let Some(f1) = neg_log_posterior(&candidate, &spec, pairs) {
                    if f1 <= f0 + cfg.c_armijo * step * slope {
                        accepted = Some((candidate, f1));
                        break;
                    }
                }
                step *= cfg.armijo_shrink;
            }
            let (next, f1) = match accepted {
                Some(pair) => pair,
                None => {
                    report.final_grad_norm = grad_norm;
                    status = MapStatus::ArmijoStalled;
                    stages.push(report);
                    break 'path;
                }
            };

            b = next;
            report.newton_iters += 1;
            report.cg_iters_per_newton.push(cg_iters);
            if let Some(s) = sink.as_deref_mut() {
                s(&MapDiagRecord {
                    stage,
                    newton_index: report.newton_iters,
                    cg_iterations: cg_iters,
                    grad_norm,
                    value: f1,
                    step,
                });
            }
        }

        if status == MapStatus::Converged {
            stages.push(report);
        }
    }

    MapSolveReport {
        b_hat: b,
        path_steps: stages,
        wall_time_s: start.elapsed().as_secs_f64(),
        status,
    }
}

/// Clamps the eigenvalues of `m` onto
/// `[mu_hat + margin, l_hat - margin]` with `margin = 1e-6 (l_hat - mu_hat)`.
/// Returns `m` unchanged when it is already strictly feasible.
fn project_feasible(m: &SymMat, mu_hat: f64, l_hat: f64) -> SymMat {
    let feasible = {
        let mut lower = m.clone();
        lower.shift_diag(-mu_hat);
        let mut upper = m.scale(-1.0);
        upper.shift_diag(l_hat);
        lower.cholesky().is_ok() && upper.cholesky().is_ok()
    };
    if feasible {
        return m.clone();
    }
    let margin = 1e-6 * (l_hat - mu_hat);
    m.map_eigenvalues(|l| l.clamp(mu_hat + margin, l_hat - margin))
}
