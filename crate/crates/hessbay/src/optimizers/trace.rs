/// What happened at an iteration beyond the plain step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    None,
    /// The Hessian model was rebuilt.
    HessianUpdate,
    /// The model was rebuilt and the inverse iteration needed its restart.
    InverseRestart,
    /// A rebuild was attempted but the previous model was kept (solver
    /// flagged, inverse did not converge, or invariants failed).
    UpdateFailed,
}

impl TraceEvent {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceEvent::None => "none",
            TraceEvent::HessianUpdate => "hessian_update",
            TraceEvent::InverseRestart => "inverse_restart",
            TraceEvent::UpdateFailed => "update_failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(TraceEvent::None),
            "hessian_update" => Some(TraceEvent::HessianUpdate),
            "inverse_restart" => Some(TraceEvent::InverseRestart),
            "update_failed" => Some(TraceEvent::UpdateFailed),
            _ => None,
        }
    }
}

/// One per-iteration record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: u64,
    /// Cumulative gradient evaluations, including curvature-pair replay.
    pub grad_evals: u64,
    /// Optimality gap when a reference optimum is known, otherwise the raw
    /// objective value.
    pub optimality_gap: f64,
    /// Norm of the gradient estimate used for the step.
    pub grad_norm_est: f64,
    pub step_size: f64,
    pub event: TraceEvent,
    pub wall_time_s: f64,
}

/// Full trace of one optimizer run.
#[derive(Debug, Clone, Default)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    /// Iterates including the start point, recorded on request;
    /// `iterates[k]` is the point after `records[k - 1]`.
    pub iterates: Option<Vec<Vec<f64>>>,
    /// All evaluations spent, including any final estimate that was
    /// discarded because the budget ran out mid-draw.
    pub total_grad_evals: u64,
    /// Set when the run stopped on a non-finite iterate.
    pub aborted_non_finite: bool,
}

impl RunTrace {
    pub fn final_gap(&self) -> Option<f64> {
        self.records.last().map(|r| r.optimality_gap)
    }

    pub fn iterations(&self) -> u64 {
        self.records.len() as u64
    }

    /// Gap records in the closing fraction of the evaluation budget, e.g.
    /// `0.25` for the last quartile of the consumed evaluations.
    pub fn tail_gaps(&self, closing_fraction: f64) -> Vec<f64> {
        let Some(last) = self.records.last() else {
            return Vec::new();
        };
        let cut = (1.0 - closing_fraction) * last.grad_evals as f64;
        self.records
            .iter()
            .filter(|r| r.grad_evals as f64 >= cut)
            .map(|r| r.optimality_gap)
            .collect()
    }

    pub fn events(&self) -> impl Iterator<Item = (u64, TraceEvent)> + '_ {
        self.records
            .iter()
            .filter(|r| r.event != TraceEvent::None)
            .map(|r| (r.iter, r.event))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(iter: u64, evals: u64, gap: f64) -> TraceRecord {
        TraceRecord {
            iter,
            grad_evals: evals,
            optimality_gap: gap,
            grad_norm_est: 1.0,
            step_size: 0.1,
            event: TraceEvent::None,
            wall_time_s: 0.0,
        }
    }

    #[test]
    fn tail_selects_by_eval_axis() {
        let trace = RunTrace {
            records: vec![
                record(1, 10, 4.0),
                record(2, 40, 3.0),
                record(3, 400, 2.0),
                record(4, 1000, 1.0),
            ],
            ..Default::default()
        };
        // last quartile of 1000 evals starts at 750
        assert_eq!(trace.tail_gaps(0.25), vec![1.0]);
        assert_eq!(trace.tail_gaps(0.7), vec![2.0, 1.0]);
    }

    #[test]
    fn event_round_trip() {
        for e in [
            TraceEvent::None,
            TraceEvent::HessianUpdate,
            TraceEvent::InverseRestart,
            TraceEvent::UpdateFailed,
        ] {
            assert_eq!(TraceEvent::parse(e.as_str()), Some(e));
        }
        assert_eq!(TraceEvent::parse("bogus"), None);
    }
}
