use crate::curvature::{make_pair, PairOutcome, PairSet, PrecisionKind};
use crate::estimators::{gradient_difference_samples, DrawKey, RngStreams, StochasticProblem};
use crate::inverse::{invert, restart_matrix};
use crate::map_solver::{find_map, MapDiagRecord, MapSolveReport, MapSolverConfig, MapStatus};
use crate::optimizers::trace::TraceEvent;
use crate::optimizers::UpdatePolicy;
use crate::posterior::PosteriorSpec;
use crate::symkit::{EigBounds, SymMat};

/// Configuration of the Bayesian Hessian updates inside a preconditioned
/// run. `mu_tilde` and `l_smooth` anchor the barrier bounds
/// `mu_hat = mu_tilde / alpha` and `l_hat = l_smooth * alpha`.
#[derive(Debug, Clone)]
pub struct BayesConfig {
    pub policy: UpdatePolicy,
    pub map: MapSolverConfig,
    pub rho: f64,
    pub alpha: f64,
    pub mu_tilde: f64,
    pub l_smooth: f64,
    /// Precision regularization `sigma_p`.
    pub sigma_p: f64,
    pub precision: PrecisionKind,
    /// Steps shorter than this never become pairs.
    pub s_min_norm: f64,
    /// Cap on replayed gradient-difference samples per pair; replay costs
    /// two evaluations per sample and is charged to the budget.
    pub pair_sample_cap: usize,
    /// Cap on pairs harvested per update (the most recent ones win).
    pub pairs_per_update_cap: usize,
    /// Optional retention window of the accumulated pair set.
    pub pair_window: Option<usize>,
    /// Inverse-iteration tolerance on `||B H - I||_F`.
    pub tol_h: f64,
    pub inverse_max_iter: usize,
    /// Overrides the diagonal initialization, e.g. with a known Hessian.
    pub initial_hessian: Option<SymMat>,
}

impl BayesConfig {
    pub fn new(d: usize, mu_tilde: f64, l_smooth: f64, policy: UpdatePolicy) -> Self {
        assert!(mu_tilde > 0.0 && l_smooth > mu_tilde);
        BayesConfig {
            policy,
            map: crate::map_solver::default_config(d),
            rho: 1e-2,
            alpha: 1.05,
            mu_tilde,
            l_smooth,
            sigma_p: 1e-3,
            precision: PrecisionKind::ScalarTrace,
            s_min_norm: crate::curvature::DEFAULT_S_MIN_NORM,
            pair_sample_cap: 64,
            pairs_per_update_cap: 2 * d,
            pair_window: None,
            tol_h: 1e-8,
            inverse_max_iter: 100,
            initial_hessian: None,
        }
    }

    pub fn mu_hat(&self) -> f64 {
        self.mu_tilde / self.alpha
    }

    pub fn l_hat(&self) -> f64 {
        self.l_smooth * self.alpha
    }
}

/// The current Hessian approximation and its inverse.
#[derive(Debug, Clone)]
pub struct HessianModel {
    pub b_hat: SymMat,
    pub h_hat: SymMat,
    pub mu_hat: f64,
    pub l_hat: f64,
    pub update_count: usize,
    /// Cached spectral norm of `h_hat` for the noise-compatibility check.
    pub h_spectral_norm: f64,
}

impl HessianModel {
    /// The diagonal initialization `B = (l_smooth + mu_tilde)/2 * I` with
    /// its exact inverse `H = 2/(l_smooth + mu_tilde) * I`.
    pub fn initial(cfg: &BayesConfig, d: usize) -> Self {
        if let Some(b) = &cfg.initial_hessian {
            assert_eq!(b.dim(), d, "initial Hessian dimension mismatch");
            let h0 = restart_matrix(cfg.mu_hat(), cfg.l_hat(), d);
            let inv = invert(b, &h0, cfg.tol_h, cfg.inverse_max_iter, cfg.mu_hat(), cfg.l_hat())
                .expect("supplied initial Hessian must be invertible within the barriers");
            let h_spectral_norm = inv.h_hat.eig_bounds().spectral_norm();
            return HessianModel {
                b_hat: b.clone(),
                h_hat: inv.h_hat,
                mu_hat: cfg.mu_hat(),
                l_hat: cfg.l_hat(),
                update_count: 0,
                h_spectral_norm,
            };
        }
        let scale = (cfg.l_smooth + cfg.mu_tilde) / 2.0;
        let inv_scale = 2.0 / (cfg.l_smooth + cfg.mu_tilde);
        HessianModel {
            b_hat: SymMat::scaled_identity(d, scale),
            h_hat: SymMat::scaled_identity(d, inv_scale),
            mu_hat: cfg.mu_hat(),
            l_hat: cfg.l_hat(),
            update_count: 0,
            h_spectral_norm: inv_scale,
        }
    }

    /// Checks the barrier bounds on `b_hat` and the inverse residual.
    pub fn check_invariants(&self, tol_h: f64) -> Result<EigBounds, String> {
        let eb = self.b_hat.eig_bounds();
        if !(eb.lambda_min > self.mu_hat && eb.lambda_max < self.l_hat) {
            return Err(format!(
                "eigenvalues ({:.6e}, {:.6e}) escape ({:.6e}, {:.6e})",
                eb.lambda_min, eb.lambda_max, self.mu_hat, self.l_hat
            ));
        }
        let d = self.b_hat.dim();
        let bh = self.b_hat.matmul_raw(&self.h_hat);
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                let v = bh[i * d + j] - if i == j { 1.0 } else { 0.0 };
                acc += v * v;
            }
        }
        let residual = acc.sqrt();
        if residual > tol_h * (1.0 + 1e-9) {
            return Err(format!("inverse residual {residual:.3e} exceeds {tol_h:.3e}"));
        }
        Ok(eb)
    }
}

/// Diagnostics of one policy-triggered model rebuild.
#[derive(Debug, Clone)]
pub struct UpdateReport {
    pub at_iter: u64,
    pub event: TraceEvent,
    pub pairs_added: usize,
    /// Gradient evaluations spent replaying pair samples.
    pub evals_used: u64,
    pub map: Option<MapSolveReport>,
    pub diag: Vec<MapDiagRecord>,
    pub inverse_iterations: usize,
    pub inverse_residual: f64,
    pub inverse_restarted: bool,
    pub eig_bounds: Option<EigBounds>,
}

/// One recorded iterate-to-iterate move with replayable draws.
struct Transition {
    from: Vec<f64>,
    to: Vec<f64>,
    draws: Vec<DrawKey>,
}

/// Accumulates transitions between updates and rebuilds the model on
/// demand: harvest pairs, solve for the posterior maximizer, invert it.
pub(crate) struct BayesUpdater {
    cfg: BayesConfig,
    /// The solver's working set, possibly windowed.
    pairs: PairSet,
    /// Every accepted pair of the run, in insertion order.
    archive: PairSet,
    pending: Vec<Transition>,
}

impl BayesUpdater {
    pub fn new(cfg: BayesConfig, d: usize) -> Self {
        let pairs = match cfg.pair_window {
            Some(w) => PairSet::with_window(d, w),
            None => PairSet::new(d),
        };
        BayesUpdater {
            cfg,
            pairs,
            archive: PairSet::new(d),
            pending: Vec::new(),
        }
    }

    pub fn record_transition(&mut self, from: &[f64], to: &[f64], draws: &[DrawKey]) {
        self.pending.push(Transition {
            from: from.to_vec(),
            to: to.to_vec(),
            draws: draws.to_vec(),
        });
    }

    pub fn into_pairs(self) -> PairSet {
        self.archive
    }

    /// Harvests pending transitions into pairs and rebuilds the model.
    /// On solver failure the previous model is kept and the event says so.
    pub fn update<P: StochasticProblem>(
        &mut self,
        model: &mut HessianModel,
        problem: &P,
        streams: &RngStreams,
        at_iter: u64,
    ) -> UpdateReport {
        let mut report = UpdateReport {
            at_iter,
            event: TraceEvent::None,
            pairs_added: 0,
            evals_used: 0,
            map: None,
            diag: Vec::new(),
            inverse_iterations: 0,
            inverse_residual: f64::NAN,
            inverse_restarted: false,
            eig_bounds: None,
        };

        // keep at most the newest transitions; if older ones get dropped,
        // bridge the gap with one long endpoint pair so the interval since
        // the last harvest stays covered
        let cap = self.cfg.pairs_per_update_cap.max(1);
        if self.pending.len() > cap {
            let first_kept = self.pending.len() - cap;
            let bridge = Transition {
                from: self.pending[0].from.clone(),
                to: self.pending[first_kept].from.clone(),
                draws: self.pending[first_kept].draws.clone(),
            };
            let kept = self.pending.split_off(first_kept);
            self.pending = kept;
            self.pending.insert(0, bridge);
        }
        for t in self.pending.drain(..) {
            if t.draws.is_empty() {
                continue;
            }
            let samples = gradient_difference_samples(
                problem,
                &t.to,
                &t.from,
                &t.draws,
                streams,
                self.cfg.pair_sample_cap,
            );
            report.evals_used += 2 * samples.len() as u64;
            let s: Vec<f64> = t.to.iter().zip(&t.from).map(|(a, b)| a - b).collect();
            match make_pair(
                &s,
                &samples,
                self.cfg.sigma_p,
                self.cfg.precision,
                self.cfg.s_min_norm,
            ) {
                Ok(PairOutcome::Accepted(pair)) => {
                    self.archive.push(pair.clone());
                    self.pairs.push(pair);
                    report.pairs_added += 1;
                }
                Ok(PairOutcome::Rejected { .. }) => {}
                Err(e) => panic!("pair construction failed: {e}"),
            }
        }

        if self.pairs.is_empty() {
            return report;
        }

        let template = PosteriorSpec {
            beta: self.cfg.map.beta0,
            rho: self.cfg.rho,
            mu_hat: self.cfg.mu_hat(),
            l_hat: self.cfg.l_hat(),
            alpha: self.cfg.alpha,
            w: SymMat::identity(model.b_hat.dim()),
            anchor: model.b_hat.clone(),
            nu: 1.0,
        };
        let mut diag = Vec::new();
        let mut sink = |rec: &MapDiagRecord| diag.push(rec.clone());
        let map_report = find_map(
            &self.pairs,
            &model.b_hat,
            &template,
            &self.cfg.map,
            Some(&mut sink),
        );
        report.diag = diag;

        if map_report.status != MapStatus::Converged {
            report.event = TraceEvent::UpdateFailed;
            report.map = Some(map_report);
            return report;
        }

        let inv = match invert(
            &map_report.b_hat,
            &model.h_hat,
            self.cfg.tol_h,
            self.cfg.inverse_max_iter,
            self.cfg.mu_hat(),
            self.cfg.l_hat(),
        ) {
            Ok(inv) => inv,
            Err(_) => {
                report.event = TraceEvent::UpdateFailed;
                report.map = Some(map_report);
                return report;
            }
        };
        report.inverse_iterations = inv.iterations;
        report.inverse_residual = inv.final_residual;
        report.inverse_restarted = inv.restarted;

        let candidate = HessianModel {
            b_hat: map_report.b_hat.clone(),
            h_hat: inv.h_hat,
            mu_hat: self.cfg.mu_hat(),
            l_hat: self.cfg.l_hat(),
            update_count: model.update_count + 1,
            h_spectral_norm: 0.0,
        };
        match candidate.check_invariants(self.cfg.tol_h) {
            Ok(eb) => {
                report.eig_bounds = Some(eb);
                report.event = if inv.restarted {
                    TraceEvent::InverseRestart
                } else {
                    TraceEvent::HessianUpdate
                };
                let mut committed = candidate;
                committed.h_spectral_norm = committed.h_hat.eig_bounds().spectral_norm();
                *model = committed;
            }
            Err(_) => {
                report.event = TraceEvent::UpdateFailed;
            }
        }
        report.map = Some(map_report);
        report
    }
}
