//! The iterative fitting loop and replicated experiments built on it.
//!
//! One run starts at the ground truth, and each iteration `t` draws `n`
//! fresh samples from the current fitted model (stream keyed by
//! `(master_seed, replication, t)`), appends them to the pooled dataset,
//! and refits on the union. Replications are embarrassingly parallel;
//! results are collected in replication order and aggregated with
//! order-independent statistics, so the thread count never changes an
//! output bit.

use crate::constructions::SpikeMixtureFamily;
use crate::core::{
    CoreError, Dataset, Family, FamilyId, MleFailure, MleMode, RandomStream, RunConfig,
    Trajectory, TrajectoryRecord,
};
use crate::optimizer::{numeric_mle, Bounds};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("all {0} replications failed to fit")]
    AllReplicationsFailed(u32),
    #[error("trajectory does not track total variation")]
    MissingTvMetric,
    #[error("thread pool construction failed: {0}")]
    ThreadPool(String),
}

/// Order-independent summary of one metric across replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricStats {
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Number of finite observations the statistics are over.
    pub count: usize,
}

/// Cross-replication statistics for one iteration index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationStats {
    pub t: usize,
    pub dataset_size: usize,
    pub param_error: Option<MetricStats>,
    pub tv: Option<MetricStats>,
    pub kl: Option<MetricStats>,
}

/// Aggregated result of a replicated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationSummary {
    pub replications: u32,
    /// Replications whose fit failed partway; their completed records
    /// still exist in the trajectories but are excluded from statistics.
    pub failures: u32,
    /// Mean parameter error at the final sampling iteration `T` divided
    /// by its value at iteration 1; absent when errors are untracked or
    /// the denominator vanishes.
    #[serde(rename = "ratio_T_over_1")]
    pub ratio_final_over_first: Option<f64>,
    pub per_iteration: Vec<IterationStats>,
    /// Per-replication first collapse iteration (replication order, `None`
    /// for replications that never crossed the threshold or failed before
    /// doing so); absent when total variation is untracked.
    pub collapse_times: Option<Vec<Option<usize>>>,
}

/// Trajectories in replication order plus their aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub trajectories: Vec<Trajectory>,
    pub summary: ReplicationSummary,
}

/// Runs one replication of the iterative fitting loop.
///
/// The trajectory starts with the ground truth at `t = 0` (all tracked
/// distances 0) and gains one record per completed fit. A failed fit ends
/// the run early with the failure flagged; earlier records are kept.
pub fn run_iterative_mle(
    family: &dyn Family,
    config: &RunConfig,
    replication: u32,
) -> Result<Trajectory, EngineError> {
    family
        .validate(&config.theta_star)
        .map_err(|e| EngineError::InvalidConfig(e.to_string()))?;
    let bounds = match config.mle_mode {
        MleMode::Exact => None,
        MleMode::Numeric => Some(
            Bounds::default_for(family).map_err(|e| EngineError::InvalidConfig(e.to_string()))?,
        ),
    };
    let mut data = Dataset::new(config.n)?;
    let theta_star = &config.theta_star;
    let mut records = Vec::with_capacity(config.iterations + 2);
    records.push(TrajectoryRecord {
        t: 0,
        theta: theta_star.clone(),
        param_error: config.metrics.param_error.then_some(0.0),
        tv: config.metrics.tv.then_some(0.0),
        kl: config.metrics.kl.then_some(0.0),
        dataset_size: 0,
    });
    let mut failure = None;
    let mut theta = theta_star.clone();
    for t in 0..=config.iterations {
        let mut stream = RandomStream::derive(config.master_seed, replication, t as u32);
        let draws = family.sample(&theta, &mut stream, config.n);
        data = data.accumulate(&draws, t)?;
        let fitted = match config.mle_mode {
            MleMode::Exact => family.exact_mle(&data).map_err(|e| e.to_string()),
            MleMode::Numeric => numeric_mle(
                family,
                &data,
                &theta,
                bounds.as_ref().expect("numeric mode always builds bounds"),
            )
            .map_err(|e| e.to_string()),
        };
        match fitted {
            Ok(next) => {
                records.push(TrajectoryRecord {
                    t: t + 1,
                    theta: next.clone(),
                    param_error: if config.metrics.param_error {
                        family.param_error(theta_star, &next)
                    } else {
                        None
                    },
                    tv: config.metrics.tv.then(|| family.tv(theta_star, &next)),
                    kl: config
                        .metrics
                        .kl
                        .then(|| family.kl(theta_star, &next))
                        .filter(|v| v.is_finite()),
                    dataset_size: data.len(),
                });
                theta = next;
            }
            Err(message) => {
                failure = Some(MleFailure {
                    at_iteration: t + 1,
                    message,
                });
                break;
            }
        }
    }
    Ok(Trajectory { records, failure })
}

fn stats_over(values: &[f64]) -> Option<MetricStats> {
    if values.is_empty() {
        return None;
    }
    let count = values.len();
    let mean = values.iter().sum::<f64>() / count as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if count % 2 == 1 {
        sorted[count / 2]
    } else {
        (sorted[count / 2 - 1] + sorted[count / 2]) / 2.0
    };
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count as f64;
    Some(MetricStats {
        mean,
        median,
        std: variance.sqrt(),
        count,
    })
}

/// Runs `replications` independent copies of the loop on a dedicated
/// thread pool (`parallelism` threads; 0 means one per logical CPU) and
/// aggregates them. Statistics cover non-failed replications only; the
/// run errors only if every replication failed.
pub fn run_replications(
    family: &dyn Family,
    config: &RunConfig,
    replications: u32,
    parallelism: usize,
) -> Result<ReplicationOutcome, EngineError> {
    if replications == 0 {
        return Err(EngineError::InvalidConfig(
            "replication count must be positive".to_string(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| EngineError::ThreadPool(e.to_string()))?;
    let results: Vec<Result<Trajectory, EngineError>> = pool.install(|| {
        (0..replications)
            .into_par_iter()
            .map(|rep| run_iterative_mle(family, config, rep))
            .collect()
    });
    let mut trajectories = Vec::with_capacity(results.len());
    for result in results {
        trajectories.push(result?);
    }
    let failures = trajectories.iter().filter(|t| t.failed()).count() as u32;
    if failures == replications {
        return Err(EngineError::AllReplicationsFailed(replications));
    }

    let mut per_iteration = Vec::with_capacity(config.iterations + 2);
    for t in 0..=config.iterations + 1 {
        let mut errors = Vec::new();
        let mut tvs = Vec::new();
        let mut kls = Vec::new();
        for trajectory in trajectories.iter().filter(|t| !t.failed()) {
            let Some(record) = trajectory.record_at(t) else {
                continue;
            };
            errors.extend(record.param_error);
            tvs.extend(record.tv);
            kls.extend(record.kl);
        }
        per_iteration.push(IterationStats {
            t,
            dataset_size: t * config.n,
            param_error: stats_over(&errors),
            tv: stats_over(&tvs),
            kl: stats_over(&kls),
        });
    }
    let ratio_final_over_first = match (
        per_iteration.get(config.iterations).and_then(|row| row.param_error),
        per_iteration.get(1).and_then(|row| row.param_error),
    ) {
        (Some(last), Some(first)) if first.mean != 0.0 => Some(last.mean / first.mean),
        _ => None,
    };
    let collapse_times = if config.metrics.tv {
        Some(
            trajectories
                .iter()
                .map(|trajectory| {
                    detect_collapse(trajectory, config.collapse_threshold)
                        .expect("tv is tracked by every record of this run")
                })
                .collect(),
        )
    } else {
        None
    };
    let summary = ReplicationSummary {
        replications,
        failures,
        ratio_final_over_first,
        per_iteration,
        collapse_times,
    };
    Ok(ReplicationOutcome {
        trajectories,
        summary,
    })
}

/// First iteration whose recorded total variation reaches `threshold`.
///
/// Errors when the threshold is out of `(0, 1]` or no record of the
/// trajectory carries a total-variation value.
pub fn detect_collapse(
    trajectory: &Trajectory,
    threshold: f64,
) -> Result<Option<usize>, EngineError> {
    if !threshold.is_finite() || !(0.0..=1.0).contains(&threshold) || threshold == 0.0 {
        return Err(EngineError::InvalidConfig(format!(
            "collapse threshold must lie in (0, 1], got {threshold}"
        )));
    }
    if trajectory.records.iter().all(|r| r.tv.is_none()) {
        return Err(EngineError::MissingTvMetric);
    }
    Ok(trajectory
        .records
        .iter()
        .find(|r| r.tv.is_some_and(|tv| tv >= threshold))
        .map(|r| r.t))
}

/// First fitted iteration whose parameters selected the spiked route of
/// the tail-chain family.
pub fn first_spiked_selection(trajectory: &Trajectory) -> Option<usize> {
    trajectory
        .records
        .iter()
        .find(|r| r.t >= 1 && r.theta.family() == FamilyId::TailChain && r.theta.coord(0) == 1.0)
        .map(|r| r.t)
}

/// Coverage report for the maximum of `n` standard uniforms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxUniformReport {
    pub n: usize,
    pub delta: f64,
    pub reps: usize,
    /// `1 − log(2/delta)/n`.
    pub lower_edge: f64,
    /// `1 − delta/(2n)`.
    pub upper_edge: f64,
    /// Fraction of repetitions whose maximum fell inside the band.
    pub frequency: f64,
    /// `1 − delta` minus three binomial standard errors.
    pub required_frequency: f64,
    pub pass: bool,
}

/// Checks that `max` of `n` uniforms lands in
/// `[1 − log(2/delta)/n, 1 − delta/(2n)]` with frequency at least
/// `1 − delta` up to three binomial standard errors.
pub fn check_max_uniform(
    n: usize,
    delta: f64,
    reps: usize,
    stream: &mut RandomStream,
) -> Result<MaxUniformReport, EngineError> {
    if n == 0 {
        return Err(EngineError::InvalidConfig(
            "uniform sample count must be positive".to_string(),
        ));
    }
    if !delta.is_finite() || !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(EngineError::InvalidConfig(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if reps < 100 {
        return Err(EngineError::InvalidConfig(format!(
            "coverage estimate needs at least 100 repetitions, got {reps}"
        )));
    }
    let nf = n as f64;
    let lower_edge = 1.0 - (2.0 / delta).ln() / nf;
    let upper_edge = 1.0 - delta / (2.0 * nf);
    let mut hits = 0usize;
    for _ in 0..reps {
        let mut max = 0.0f64;
        for _ in 0..n {
            max = max.max(stream.next_f64());
        }
        if max >= lower_edge && max <= upper_edge {
            hits += 1;
        }
    }
    let frequency = hits as f64 / reps as f64;
    let required_frequency = 1.0 - delta - 3.0 * (delta * (1.0 - delta) / reps as f64).sqrt();
    Ok(MaxUniformReport {
        n,
        delta,
        reps,
        lower_edge,
        upper_edge,
        frequency,
        required_frequency,
        pass: frequency >= required_frequency,
    })
}

/// Outcome frequencies of the two-round spike-mixture experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikeCollapseReport {
    pub replications: u32,
    /// Fraction of replications with `TV(truth, first fit) <= log(n)/n`.
    pub close_frequency: f64,
    pub close_threshold: f64,
    /// Fraction of replications with `TV(truth, second fit) >= 1/16`.
    pub collapse_frequency: f64,
    pub collapse_threshold: f64,
}

/// Runs the two-round spike-mixture experiment from the uniform ground
/// truth `(alpha, mu) = (0, 2)`: one fit stays within `log(n)/n` of the
/// truth with high frequency, yet the second fit is at least `1/16` away
/// with non-negligible frequency.
///
/// The construction scale must equal the per-iteration sample count.
pub fn spike_collapse_experiment(
    scale: u32,
    n: usize,
    replications: u32,
    master_seed: u64,
    parallelism: usize,
) -> Result<SpikeCollapseReport, EngineError> {
    if scale as u64 != n as u64 {
        return Err(EngineError::InvalidConfig(format!(
            "construction scale {scale} must equal the per-iteration sample count {n}"
        )));
    }
    if replications < 100 {
        return Err(EngineError::InvalidConfig(format!(
            "frequency estimates need at least 100 replications, got {replications}"
        )));
    }
    let family =
        SpikeMixtureFamily::new(scale).map_err(|e| EngineError::InvalidConfig(e.to_string()))?;
    let truth = family.encode(
        &family
            .make_params(0.0, 2.0)
            .expect("uniform corner is always admissible"),
    );
    let config = RunConfig::new(truth, n, 1, master_seed).with_metrics(crate::core::MetricSet {
        param_error: false,
        tv: true,
        kl: false,
    });
    let outcome = run_replications(&family, &config, replications, parallelism)?;
    let close_threshold = (n as f64).ln() / n as f64;
    let collapse_threshold = 1.0 / 16.0;
    let tv_at = |trajectory: &Trajectory, t: usize| {
        trajectory.record_at(t).and_then(|r| r.tv)
    };
    let close = outcome
        .trajectories
        .iter()
        .filter(|tr| tv_at(tr, 1).is_some_and(|tv| tv <= close_threshold))
        .count();
    let collapsed = outcome
        .trajectories
        .iter()
        .filter(|tr| tv_at(tr, 2).is_some_and(|tv| tv >= collapse_threshold))
        .count();
    Ok(SpikeCollapseReport {
        replications,
        close_frequency: close as f64 / f64::from(replications),
        close_threshold,
        collapse_frequency: collapsed as f64 / f64::from(replications),
        collapse_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{TailChainFamily, TailChainParams, WidthSchedule};
    use crate::core::MetricSet;
    use crate::families::Gaussian;

    fn gaussian_config(n: usize, iterations: usize, seed: u64) -> RunConfig {
        RunConfig::new(Gaussian::params(0.0, 1.0).unwrap(), n, iterations, seed)
    }

    #[test]
    fn initial_record_is_zeroed_ground_truth() {
        let trajectory = run_iterative_mle(&Gaussian, &gaussian_config(20, 2, 11), 0).unwrap();
        assert_eq!(trajectory.records.len(), 4);
        let first = &trajectory.records[0];
        assert_eq!(first.t, 0);
        assert_eq!(first.param_error, Some(0.0));
        assert_eq!(first.tv, None);
        assert_eq!(first.dataset_size, 0);
        assert_eq!(trajectory.records[3].dataset_size, 60);
        assert!(!trajectory.failed());
    }

    #[test]
    fn exact_and_numeric_modes_agree_on_location_scale() {
        let exact = run_iterative_mle(&Gaussian, &gaussian_config(50, 3, 21), 0).unwrap();
        let numeric = run_iterative_mle(
            &Gaussian,
            &gaussian_config(50, 3, 21).with_mode(MleMode::Numeric),
            0,
        )
        .unwrap();
        for (a, b) in exact.records.iter().zip(&numeric.records).skip(1) {
            for i in 0..2 {
                let gap = (a.theta.coord(i) - b.theta.coord(i)).abs();
                assert!(gap < 1e-5, "t {}: coord {i} gap {gap}", a.t);
            }
        }
    }

    #[test]
    fn replications_are_deterministic_and_thread_invariant() {
        let config = gaussian_config(25, 3, 33);
        let serial = run_replications(&Gaussian, &config, 6, 1).unwrap();
        let rerun = run_replications(&Gaussian, &config, 6, 1).unwrap();
        let wide = run_replications(&Gaussian, &config, 6, 8).unwrap();
        assert_eq!(serial, rerun);
        assert_eq!(serial, wide);
    }

    #[test]
    fn ratio_compares_final_to_first_iteration() {
        let outcome = run_replications(&Gaussian, &gaussian_config(30, 5, 44), 10, 0).unwrap();
        let summary = &outcome.summary;
        assert_eq!(summary.failures, 0);
        let first = summary.per_iteration[1].param_error.unwrap().mean;
        let last = summary.per_iteration[5].param_error.unwrap().mean;
        let ratio = summary.ratio_final_over_first.unwrap();
        assert!((ratio - last / first).abs() < 1e-15);
        assert_eq!(summary.per_iteration[0].param_error.unwrap().mean, 0.0);
        assert_eq!(summary.per_iteration.len(), 7);
    }

    #[test]
    fn single_sample_fits_fail_and_are_flagged() {
        let trajectory = run_iterative_mle(&Gaussian, &gaussian_config(1, 2, 55), 0).unwrap();
        assert!(trajectory.failed());
        assert_eq!(trajectory.records.len(), 1);
        assert_eq!(trajectory.failure.as_ref().unwrap().at_iteration, 1);
        let all_failed = run_replications(&Gaussian, &gaussian_config(1, 2, 55), 4, 1);
        assert!(matches!(all_failed, Err(EngineError::AllReplicationsFailed(4))));
    }

    #[test]
    fn numeric_mode_rejects_enumerated_families() {
        let family = SpikeMixtureFamily::new(10).unwrap();
        let truth = family.encode(&family.make_params(0.0, 2.0).unwrap());
        let config = RunConfig::new(truth, 10, 1, 7).with_mode(MleMode::Numeric);
        assert!(matches!(
            run_iterative_mle(&family, &config, 0),
            Err(EngineError::InvalidConfig(_))
        ));
    }

    #[test]
    fn collapse_detection_finds_first_crossing() {
        let theta = Gaussian::params(0.0, 1.0).unwrap();
        let record = |t: usize, tv: Option<f64>| TrajectoryRecord {
            t,
            theta: theta.clone(),
            param_error: None,
            tv,
            kl: None,
            dataset_size: t,
        };
        let trajectory = Trajectory {
            records: vec![
                record(0, Some(0.0)),
                record(1, Some(0.1)),
                record(2, Some(0.5)),
                record(3, Some(0.6)),
            ],
            failure: None,
        };
        assert_eq!(detect_collapse(&trajectory, 0.375).unwrap(), Some(2));
        assert_eq!(detect_collapse(&trajectory, 0.7).unwrap(), None);
        assert!(detect_collapse(&trajectory, 0.0).is_err());
        let untracked = Trajectory {
            records: vec![record(0, None)],
            failure: None,
        };
        assert!(matches!(
            detect_collapse(&untracked, 0.375),
            Err(EngineError::MissingTvMetric)
        ));
    }

    #[test]
    fn chain_escape_masses_shrink_monotonically() {
        let family = TailChainFamily::new(WidthSchedule::Demo { budget_exponent: 0.5 }).unwrap();
        let truth = family.encode(&family.make_chain(vec![0.2]).unwrap());
        let config = RunConfig::new(truth, 20, 4, 66).with_metrics(MetricSet::all());
        let trajectory = run_iterative_mle(&family, &config, 0).unwrap();
        assert!(!trajectory.failed());
        let mut previous: Option<Vec<f64>> = None;
        let mut chain_records = 0;
        for record in trajectory.records.iter().skip(1) {
            assert_eq!(record.param_error, None);
            assert!(record.tv.is_some());
            let TailChainParams::Chain { alphas } = family.decode(&record.theta).unwrap() else {
                break;
            };
            chain_records += 1;
            assert_eq!(record.kl, None, "uncovered truth mass must drop the record");
            if let Some(prev) = &previous {
                assert!(alphas.len() >= prev.len());
                for (level, (now, before)) in alphas.iter().zip(prev).enumerate() {
                    assert!(
                        now <= before,
                        "t {}: escape mass at level {level} grew from {before} to {now}",
                        record.t
                    );
                }
            }
            previous = Some(alphas);
        }
        assert!(chain_records >= 3, "expected a mostly chain-route run");
    }

    #[test]
    fn max_of_uniforms_band_has_expected_coverage() {
        let mut stream = RandomStream::derive(77, 0, 0);
        let report = check_max_uniform(100, 0.1, 10_000, &mut stream).unwrap();
        assert!(report.pass, "frequency {}", report.frequency);
        assert!((report.frequency - 0.9).abs() < 0.02);
        let small = check_max_uniform(10, 0.2, 10_000, &mut stream).unwrap();
        assert!(small.pass, "frequency {}", small.frequency);
        assert!(check_max_uniform(100, 0.1, 50, &mut stream).is_err());
        assert!(check_max_uniform(100, 1.5, 10_000, &mut stream).is_err());
        assert!(check_max_uniform(0, 0.1, 10_000, &mut stream).is_err());
    }

    #[test]
    fn spike_two_round_frequencies_split_as_expected() {
        let report = spike_collapse_experiment(50, 50, 200, 88, 0).unwrap();
        assert!(
            report.close_frequency >= 0.95,
            "close frequency {}",
            report.close_frequency
        );
        assert!(
            report.collapse_frequency > 0.02 && report.collapse_frequency < 0.7,
            "collapse frequency {}",
            report.collapse_frequency
        );
        assert!(matches!(
            spike_collapse_experiment(49, 50, 200, 88, 0),
            Err(EngineError::InvalidConfig(_))
        ));
    }

    #[test]
    fn spiked_selection_is_reported_from_fitted_records() {
        let family = TailChainFamily::new(WidthSchedule::Demo { budget_exponent: 1e4 }).unwrap();
        let truth = family.encode(&family.make_chain(vec![]).unwrap());
        let config = RunConfig::new(truth, 10, 30, 99).with_metrics(MetricSet {
            param_error: false,
            tv: true,
            kl: false,
        });
        let outcome = run_replications(&family, &config, 8, 0).unwrap();
        let mut selections = 0;
        for trajectory in &outcome.trajectories {
            if let Some(t) = first_spiked_selection(trajectory) {
                selections += 1;
                let collapse = detect_collapse(trajectory, 0.375).unwrap();
                assert_eq!(collapse, Some(t), "collapse must coincide with selection");
            }
        }
        assert!(selections > 0, "30 iterations at n=10 should see an escape");
    }
}
