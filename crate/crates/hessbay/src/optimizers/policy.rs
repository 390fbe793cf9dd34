/// When to rebuild the Hessian model during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdatePolicy {
    /// Update at every `n`-th iteration, `n >= 1`.
    EveryKIters(u64),
    /// `total_updates` updates spread evenly over the gradient budget;
    /// zero updates disables the model rebuilds entirely.
    EquallySpaced {
        total_updates: u64,
        known_budget: u64,
    },
}

impl UpdatePolicy {
    pub fn validate(&self) {
        match *self {
            UpdatePolicy::EveryKIters(n) => assert!(n >= 1, "interval must be at least 1"),
            UpdatePolicy::EquallySpaced { known_budget, .. } => {
                assert!(known_budget > 0, "budget must be positive")
            }
        }
    }
}

/// Tracks which update thresholds have fired during one run.
#[derive(Debug)]
pub(crate) struct PolicyCursor {
    policy: UpdatePolicy,
    fired: u64,
}

impl PolicyCursor {
    pub fn new(policy: UpdatePolicy) -> Self {
        policy.validate();
        PolicyCursor { policy, fired: 0 }
    }

    /// Whether an update is due after iteration `iter` with `grad_evals`
    /// cumulative evaluations. At most one update fires per call.
    pub fn due(&mut self, iter: u64, grad_evals: u64) -> bool {
        match self.policy {
            UpdatePolicy::EveryKIters(n) => iter.is_multiple_of(n),
            UpdatePolicy::EquallySpaced {
                total_updates,
                known_budget,
            } => {
                if self.fired >= total_updates {
                    return false;
                }
                // thresholds at i * budget / (total + 1), i = 1..=total
                let next = (self.fired + 1) * known_budget / (total_updates + 1);
                if grad_evals >= next {
                    // absorb any thresholds crossed in one sweep
                    while self.fired < total_updates
                        && grad_evals >= (self.fired + 1) * known_budget / (total_updates + 1)
                    {
                        self.fired += 1;
                    }
                    true
                } else {
                    false
                }
            }
        }
    }
}
