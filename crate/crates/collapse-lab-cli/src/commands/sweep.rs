//! The `sweep` subcommand: reruns one experiment across a list of
//! ground-truth values and reports the final-over-first error ratio per
//! value with a seeded bootstrap confidence interval.

use crate::config::{self, FamilyChoice};
use crate::output::{self, float_cell};
use crate::plot::{self, ChartSpec, Series};
use crate::{engine_error, CliError};
use anyhow::{anyhow, Context};
use collapse_lab::engine::run_replications;
use collapse_lab::{RandomStream, Trajectory};
use std::fmt::Write;
use std::path::{Path, PathBuf};

/// Bootstrap resamples behind each confidence interval.
const BOOTSTRAP_RESAMPLES: usize = 200;

pub fn run(config_path: &Path, theta0: &[f64], seed_override: Option<u64>) -> Result<(), CliError> {
    let mut cfg = config::load(config_path).map_err(CliError::config)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    let choice = FamilyChoice::from_config(&cfg).map_err(CliError::config)?;
    if !matches!(
        choice,
        FamilyChoice::Exponential(_) | FamilyChoice::PowerBeta(_)
    ) {
        return Err(CliError::config(anyhow!(
            "sweep requires a one-parameter family (exponential or power_beta)"
        )));
    }
    let counts = cfg.n.as_list();
    let [n] = counts[..] else {
        return Err(CliError::config(anyhow!("sweep uses a single n")));
    };
    if !config::metric_set(&cfg).map_err(CliError::config)?.param_error {
        return Err(CliError::config(anyhow!(
            "sweep requires the param_error metric"
        )));
    }
    let threads = config::parallelism().map_err(CliError::config)?;
    let out_dir = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("."));

    let mut csv = String::from("theta0,ratio,ci_low,ci_high\n");
    for (i, &t0) in theta0.iter().enumerate() {
        let mut point_cfg = cfg.clone();
        point_cfg.theta_star = vec![t0];
        let run_config = config::run_config(&point_cfg, &choice, n).map_err(CliError::config)?;
        let outcome = run_replications(choice.family(), &run_config, cfg.replications, threads)
            .map_err(engine_error)?;
        let ratio = outcome
            .summary
            .ratio_final_over_first
            .ok_or_else(|| CliError::runtime(anyhow!("ratio undefined at theta0={t0}")))?;
        let pairs = error_pairs(&outcome.trajectories, cfg.iterations).map_err(CliError::runtime)?;
        let mut stream = RandomStream::derive(cfg.seed, i as u32, 910_001);
        let (ci_low, ci_high) = bootstrap_interval(&pairs, &mut stream);
        println!("theta0={t0}: ratio {ratio} [{ci_low}, {ci_high}]");
        let _ = writeln!(
            csv,
            "{t0},{},{},{}",
            float_cell(Some(ratio)),
            float_cell(Some(ci_low)),
            float_cell(Some(ci_high))
        );
    }
    let csv_path = out_dir.join("sweep.csv");
    output::write_text(&csv_path, &csv).map_err(CliError::runtime)?;
    println!("wrote {}", csv_path.display());

    if cfg.svg.unwrap_or(false) {
        let chart = sweep_chart(&csv).map_err(CliError::runtime)?;
        let svg_path = out_dir.join("sweep.svg");
        output::write_text(&svg_path, &plot::render(&chart)).map_err(CliError::runtime)?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

/// Per-replication `(error at t=1, error at t=T)` over completed runs.
fn error_pairs(trajectories: &[Trajectory], final_t: usize) -> anyhow::Result<Vec<(f64, f64)>> {
    let mut pairs = Vec::new();
    for trajectory in trajectories.iter().filter(|t| !t.failed()) {
        let at = |t: usize| {
            trajectory
                .record_at(t)
                .and_then(|r| r.param_error)
                .ok_or_else(|| anyhow!("no parameter error recorded at iteration {t}"))
        };
        pairs.push((at(1)?, at(final_t)?));
    }
    Ok(pairs)
}

fn ratio_of(pairs: &[(f64, f64)]) -> f64 {
    let first: f64 = pairs.iter().map(|p| p.0).sum::<f64>() / pairs.len() as f64;
    let last: f64 = pairs.iter().map(|p| p.1).sum::<f64>() / pairs.len() as f64;
    last / first
}

/// Percentile interval from resampling replications with replacement.
fn bootstrap_interval(pairs: &[(f64, f64)], stream: &mut RandomStream) -> (f64, f64) {
    let mut ratios = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut resample = Vec::with_capacity(pairs.len());
    for _ in 0..BOOTSTRAP_RESAMPLES {
        resample.clear();
        for _ in 0..pairs.len() {
            let index = ((stream.next_f64() * pairs.len() as f64) as usize).min(pairs.len() - 1);
            resample.push(pairs[index]);
        }
        ratios.push(ratio_of(&resample));
    }
    ratios.sort_by(f64::total_cmp);
    let low_index = (0.025 * BOOTSTRAP_RESAMPLES as f64).floor() as usize;
    let high_index = (0.975 * BOOTSTRAP_RESAMPLES as f64).ceil() as usize - 1;
    (ratios[low_index], ratios[high_index])
}

/// Builds the ratio-versus-theta0 chart from the emitted CSV text.
fn sweep_chart(csv: &str) -> anyhow::Result<ChartSpec> {
    let mut points = Vec::new();
    let mut whiskers = Vec::new();
    for line in csv.lines().skip(1) {
        let columns: Vec<&str> = line.split(',').collect();
        if columns.len() != 4 {
            continue;
        }
        let theta0: f64 = columns[0].parse().context("bad theta0 column")?;
        let ratio: f64 = columns[1].parse().context("bad ratio column")?;
        let low: f64 = columns[2].parse().context("bad ci_low column")?;
        let high: f64 = columns[3].parse().context("bad ci_high column")?;
        points.push((theta0, ratio));
        whiskers.push((theta0, low, high));
    }
    Ok(ChartSpec {
        x_label: "theta0".to_string(),
        y_label: "error ratio (final over first)".to_string(),
        series: vec![Series {
            label: "ratio".to_string(),
            points,
        }],
        whiskers,
    })
}
