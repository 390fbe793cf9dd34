/// Step-size schedules; `step(k)` is defined for iterations `k >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    /// Constant `eta`.
    Fixed(f64),
    /// `c / sqrt(k)`.
    InvSqrt { c: f64 },
    /// `1 / (l sqrt(k))`.
    LipschitzInvSqrt { l: f64 },
    /// `2 / ((l + mu)(1 + epsilon^2))`, the optimal fixed step for a
    /// relative-error-controlled estimator.
    MiceOptimal { l: f64, mu: f64, epsilon: f64 },
    /// `1 / (1 + epsilon^2)`; with the diagonal initial preconditioner
    /// `2/(l + mu) I` this reproduces [`StepSchedule::MiceOptimal`] exactly.
    PrecondMice { epsilon: f64 },
}

impl StepSchedule {
    pub fn step(&self, k: u64) -> f64 {
        debug_assert!(k >= 1, "schedules are defined for k >= 1");
        match *self {
            StepSchedule::Fixed(eta) => eta,
            StepSchedule::InvSqrt { c } => c / (k as f64).sqrt(),
            StepSchedule::LipschitzInvSqrt { l } => 1.0 / (l * (k as f64).sqrt()),
            // written as the product of the PrecondMice factor and the
            // initial-preconditioner scalar so the preconditioned run at its
            // diagonal initialization reproduces this step bitwise
            StepSchedule::MiceOptimal { l, mu, epsilon } => {
                (1.0 / (1.0 + epsilon * epsilon)) * (2.0 / (l + mu))
            }
            StepSchedule::PrecondMice { epsilon } => 1.0 / (1.0 + epsilon * epsilon),
        }
    }
}
