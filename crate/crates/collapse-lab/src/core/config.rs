//! Run configuration: what to simulate and which metrics to record.

use super::param::ParamPoint;
use serde::{Deserialize, Serialize};

/// How each iteration's model is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MleMode {
    /// Closed-form or breakpoint-enumeration estimator.
    Exact,
    /// Derivative-free minimization of the negative mean log-likelihood,
    /// warm-started at the previous iterate.
    Numeric,
}

/// Which per-iteration metrics a trajectory records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MetricSet {
    pub param_error: bool,
    pub tv: bool,
    pub kl: bool,
}

impl MetricSet {
    /// Parameter error only; the cheap default for smooth-family runs.
    pub fn errors_only() -> Self {
        MetricSet {
            param_error: true,
            tv: false,
            kl: false,
        }
    }

    pub fn all() -> Self {
        MetricSet {
            param_error: true,
            tv: true,
            kl: true,
        }
    }
}

impl Default for MetricSet {
    fn default() -> Self {
        MetricSet::errors_only()
    }
}

/// Default collapse threshold: the total-variation level treated as a
/// collapsed fit.
pub const DEFAULT_COLLAPSE_THRESHOLD: f64 = 0.375;

/// Full description of one simulated experiment.
///
/// A `(RunConfig, replication)` pair determines every random draw, so reruns
/// are bitwise reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Ground-truth parameter the run starts from and is measured against.
    pub theta_star: ParamPoint,
    /// Samples drawn per iteration.
    pub n: usize,
    /// Number of sampling iterations `T`; fits happen after each, so a run
    /// produces `T + 1` fitted records.
    pub iterations: usize,
    pub master_seed: u64,
    pub mle_mode: MleMode,
    pub metrics: MetricSet,
    /// Total-variation level at which `detect_collapse` fires.
    pub collapse_threshold: f64,
}

impl RunConfig {
    pub fn new(theta_star: ParamPoint, n: usize, iterations: usize, master_seed: u64) -> Self {
        RunConfig {
            theta_star,
            n,
            iterations,
            master_seed,
            mle_mode: MleMode::Exact,
            metrics: MetricSet::default(),
            collapse_threshold: DEFAULT_COLLAPSE_THRESHOLD,
        }
    }

    pub fn with_mode(mut self, mode: MleMode) -> Self {
        self.mle_mode = mode;
        self
    }

    pub fn with_metrics(mut self, metrics: MetricSet) -> Self {
        self.metrics = metrics;
        self
    }

    pub fn with_collapse_threshold(mut self, threshold: f64) -> Self {
        self.collapse_threshold = threshold;
        self
    }
}
