use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::curvature::PrecisionKind;

/// Optimizer identifiers accepted by the experiment runner. The `-bay`
/// variants precondition the gradient estimates with the Bayesian Hessian
/// inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Sgd,
    SgdAdaptive,
    SgdBay,
    SgdAdaptiveBay,
    Svrg,
    SvrgBay,
    Sarah,
    SarahBay,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Sgd,
        Method::SgdAdaptive,
        Method::SgdBay,
        Method::SgdAdaptiveBay,
        Method::Svrg,
        Method::SvrgBay,
        Method::Sarah,
        Method::SarahBay,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Sgd => "sgd",
            Method::SgdAdaptive => "sgd-adaptive",
            Method::SgdBay => "sgd-bay",
            Method::SgdAdaptiveBay => "sgd-adaptive-bay",
            Method::Svrg => "svrg",
            Method::SvrgBay => "svrg-bay",
            Method::Sarah => "sarah",
            Method::SarahBay => "sarah-bay",
        }
    }

    /// Filename-safe form, with `-` replaced by `_`.
    pub fn file_stem(&self) -> String {
        self.as_str().replace('-', "_")
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.iter().copied().find(|m| m.as_str() == s)
    }

    pub fn uses_bayes(&self) -> bool {
        matches!(
            self,
            Method::SgdBay | Method::SgdAdaptiveBay | Method::SvrgBay | Method::SarahBay
        )
    }

    pub fn is_finite_sum_only(&self) -> bool {
        matches!(
            self,
            Method::Svrg | Method::SvrgBay | Method::Sarah | Method::SarahBay
        )
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::parse(s).ok_or_else(|| format!("unknown method '{s}'"))
    }
}

/// Which benchmark the experiment runs on.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    Quadratic {
        dim: usize,
        kappa: f64,
        /// Isotropic gradient-noise variance `sigma^2`.
        #[serde(default = "one")]
        sigma2: f64,
        #[serde(default)]
        problem_seed: u64,
    },
    Logistic {
        /// LibSVM text file; mutually exclusive with `synthetic_n`.
        #[serde(default)]
        path: Option<PathBuf>,
        /// Size of the bundled synthetic two-Gaussian dataset.
        #[serde(default)]
        synthetic_n: Option<usize>,
        #[serde(default = "default_lambda")]
        lambda: f64,
        /// Per-feature scales of the synthetic generator.
        #[serde(default = "default_scales")]
        scales: Vec<f64>,
        #[serde(default = "default_separation")]
        separation: f64,
        #[serde(default)]
        data_seed: u64,
        /// Keep only the first `subset` rows of a loaded file.
        #[serde(default)]
        subset: Option<usize>,
    },
}

fn one() -> f64 {
    1.0
}

fn default_lambda() -> f64 {
    1e-5
}

fn default_scales() -> Vec<f64> {
    vec![1.0, 20.0]
}

fn default_separation() -> f64 {
    0.8
}

/// Step-size schedule override; when absent each method uses its default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ScheduleSpec {
    /// One of `fixed`, `inv-sqrt`, `lipschitz-inv-sqrt`, `mice-optimal`,
    /// `precond-mice`.
    pub kind: String,
    #[serde(default)]
    pub value: Option<f64>,
}

/// Central-path solver overrides; `beta` and `tol` are the FINAL-stage
/// values (the starting values are scaled up by `gamma^(path_steps-1)`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    pub beta: f64,
    pub rho: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub path_steps: usize,
    pub tol: f64,
}

impl Default for SolverOverrides {
    fn default() -> Self {
        SolverOverrides {
            beta: 1e-2,
            rho: 1e-2,
            alpha: 1.05,
            gamma: 2.0,
            path_steps: 6,
            tol: 1e-6,
        }
    }
}

/// Hessian-update cadence. `every_iters` defaults to the problem dimension
/// when neither field is set.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    #[serde(default)]
    pub every_iters: Option<u64>,
    #[serde(default)]
    pub total_updates: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    pub m0: usize,
    pub m_max: usize,
}

impl Default for EstimatorSpec {
    fn default() -> Self {
        EstimatorSpec {
            m0: 2,
            m_max: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsSpec {
    /// Replayed gradient-difference samples per pair.
    pub sample_cap: usize,
    /// `scalar-trace` or `full-matrix`.
    pub precision: PrecisionKind,
    pub s_min_norm: f64,
    #[serde(default)]
    pub window: Option<usize>,
}

impl Default for PairsSpec {
    fn default() -> Self {
        PairsSpec {
            sample_cap: 64,
            precision: PrecisionKind::ScalarTrace,
            s_min_norm: 1e-4,
            window: None,
        }
    }
}

/// Full description of one experiment: problem, methods, seeds, budget,
/// and solver knobs. Serializable to and from TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub budget: u64,
    /// Relative statistical error target of the adaptive estimators.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Fixed-batch size override for `sgd` (default 1) and `sgd-bay`
    /// (default 1000).
    #[serde(default)]
    pub batch: Option<usize>,
    /// Minibatch size of the SVRG/SARAH inner loop.
    #[serde(default = "default_minibatch")]
    pub minibatch: usize,
    /// SVRG/SARAH full-gradient restart cadence in epochs.
    #[serde(default = "default_restart_epochs")]
    pub restart_epochs: f64,
    #[serde(default)]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub solver: SolverOverrides,
    #[serde(default)]
    pub policy: PolicySpec,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub pairs: PairsSpec,
    /// Barrier anchor override; defaults to the problem's strong-convexity
    /// constant.
    #[serde(default)]
    pub mu_tilde: Option<f64>,
    /// Initial iterate, `xi0_fill * ones`.
    #[serde(default)]
    pub xi0_fill: f64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_epsilon() -> f64 {
    0.5
}

fn default_minibatch() -> usize {
    5
}

fn default_restart_epochs() -> f64 {
    2.0
}

fn default_output() -> PathBuf {
    PathBuf::from("hessbay-out")
}

/// A pre-run configuration failure; maps to exit status 1.
#[derive(Debug, thiserror::Error)]
#[error("config error at `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

fn fail(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.into(),
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.methods.is_empty() {
            return Err(fail("methods", "at least one method is required"));
        }
        if self.seeds.is_empty() {
            return Err(fail("seeds", "at least one seed is required"));
        }
        if self.budget == 0 {
            return Err(fail("budget", "budget must be positive"));
        }
        if !(self.epsilon > 0.0) {
            return Err(fail("epsilon", "epsilon must be positive"));
        }
        if self.estimator.m0 < 2 {
            return Err(fail("estimator.m0", "need at least two initial samples"));
        }
        if self.estimator.m_max < self.estimator.m0 {
            return Err(fail("estimator.m_max", "m_max must be at least m0"));
        }
        if self.minibatch == 0 {
            return Err(fail("minibatch", "minibatch must be positive"));
        }
        if let Some(b) = self.batch {
            if b == 0 {
                return Err(fail("batch", "batch must be positive"));
            }
        }
        if self.policy.every_iters.is_some() && self.policy.total_updates.is_some() {
            return Err(fail(
                "policy",
                "set either every_iters or total_updates, not both",
            ));
        }
        if let Some(n) = self.policy.every_iters {
            if n == 0 {
                return Err(fail("policy.every_iters", "interval must be positive"));
            }
        }
        let s = &self.solver;
        if !(s.beta > 0.0 && s.rho > 0.0 && s.tol > 0.0) {
            return Err(fail("solver", "beta, rho, tol must be positive"));
        }
        if !(s.alpha >= 1.0) {
            return Err(fail("solver.alpha", "alpha must be at least 1"));
        }
        if !(s.gamma > 1.0) {
            return Err(fail("solver.gamma", "gamma must exceed 1"));
        }
        if s.path_steps == 0 {
            return Err(fail("solver.path_steps", "need at least one stage"));
        }
        if let Some(sched) = &self.schedule {
            let known = [
                "fixed",
                "inv-sqrt",
                "lipschitz-inv-sqrt",
                "mice-optimal",
                "precond-mice",
            ];
            if !known.contains(&sched.kind.as_str()) {
                return Err(fail(
                    "schedule.kind",
                    format!("unknown schedule '{}'", sched.kind),
                ));
            }
            if matches!(sched.kind.as_str(), "fixed" | "inv-sqrt") && sched.value.is_none() {
                return Err(fail("schedule.value", "this schedule needs a value"));
            }
        }
        if let Some(mt) = self.mu_tilde {
            if !(mt > 0.0) {
                return Err(fail("mu_tilde", "mu_tilde must be positive"));
            }
        }
        match &self.problem {
            ProblemSpec::Quadratic {
                dim,
                kappa,
                sigma2,
                ..
            } => {
                if *dim < 2 {
                    return Err(fail("problem.dim", "dimension must be at least 2"));
                }
                if !(*kappa >= 1.0) {
                    return Err(fail("problem.kappa", "kappa must be at least 1"));
                }
                if !(*sigma2 >= 0.0) {
                    return Err(fail("problem.sigma2", "sigma2 must be nonnegative"));
                }
                for m in &self.methods {
                    if m.is_finite_sum_only() {
                        return Err(fail(
                            "methods",
                            format!("{} requires a finite-sum problem", m.as_str()),
                        ));
                    }
                }
            }
            ProblemSpec::Logistic {
                path,
                synthetic_n,
                lambda,
                scales,
                ..
            } => {
                if path.is_none() && synthetic_n.is_none() {
                    return Err(fail(
                        "problem",
                        "set either path or synthetic_n for logistic data",
                    ));
                }
                if path.is_some() && synthetic_n.is_some() {
                    return Err(fail("problem", "path and synthetic_n are exclusive"));
                }
                if !(*lambda > 0.0) {
                    return Err(fail(
                        "problem.lambda",
                        "lambda must be positive for a unique optimum",
                    ));
                }
                if let Some(n) = synthetic_n {
                    if *n < 2 {
                        return Err(fail("problem.synthetic_n", "need at least two rows"));
                    }
                    if scales.is_empty() {
                        return Err(fail("problem.scales", "need at least one feature scale"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        toml::from_str(
            r#"
            methods = ["sgd", "sgd-adaptive-bay"]
            seeds = [0, 1]
            budget = 1000

            [problem]
            kind = "quadratic"
            dim = 10
            kappa = 1e3
            "#,
        )
        .unwrap()
    }

    #[test]
    fn toml_round_trip_with_defaults() {
        let cfg = base();
        cfg.validate().unwrap();
        assert_eq!(cfg.epsilon, 0.5);
        assert_eq!(cfg.solver.path_steps, 6);
        let text = toml::to_string(&cfg).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.methods, cfg.methods);
        assert_eq!(back.budget, cfg.budget);
    }

    #[test]
    fn empty_seeds_rejected() {
        let mut cfg = base();
        cfg.seeds.clear();
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.field, "seeds");
    }

    #[test]
    fn svrg_on_quadratic_rejected() {
        let mut cfg = base();
        cfg.methods = vec![Method::Svrg];
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.field, "methods");
    }

    #[test]
    fn every_method_string_parses_uniquely() {
        for m in Method::ALL {
            assert_eq!(Method::parse(m.as_str()), Some(m));
        }
        assert_eq!(Method::parse("sgd-bogus"), None);
    }

    #[test]
    fn unknown_schedule_rejected() {
        let mut cfg = base();
        cfg.schedule = Some(ScheduleSpec {
            kind: "warp".into(),
            value: None,
        });
        assert_eq!(cfg.validate().unwrap_err().field, "schedule.kind");
    }
}
