//! Per-iteration records of one simulated run.

use super::param::ParamPoint;

/// State after one fitting step (or the initial model at `t = 0`).
///
/// Metric fields are `None` when the metric is untracked by the run's
/// configuration, undefined for the parameter pair, or infinite (KL).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// 0 for the ground-truth starting model, `t >= 1` for the model fitted
    /// on generations `0..t`.
    pub t: usize,
    pub theta: ParamPoint,
    pub param_error: Option<f64>,
    pub tv: Option<f64>,
    pub kl: Option<f64>,
    /// Pooled dataset size the model at `t` was fitted on (0 at `t = 0`).
    pub dataset_size: usize,
}

/// A fitting failure that aborted a replication.
#[derive(Debug, Clone, PartialEq)]
pub struct MleFailure {
    /// Iteration whose fit failed; records before it are intact.
    pub at_iteration: usize,
    pub message: String,
}

/// One replication's full history: the initial record plus one record per
/// completed fit, and the failure that cut the run short, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub failure: Option<MleFailure>,
}

impl Trajectory {
    /// The record at iteration `t`, if the run got that far.
    pub fn record_at(&self, t: usize) -> Option<&TrajectoryRecord> {
        self.records.iter().find(|r| r.t == t)
    }

    /// The last fitted record (`t >= 1`), if any fit completed.
    pub fn last_fitted(&self) -> Option<&TrajectoryRecord> {
        self.records.iter().rev().find(|r| r.t >= 1)
    }

    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}
