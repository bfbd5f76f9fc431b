//! The `simulate` subcommand: one replicated run per configured sample
//! count, emitting a trajectory CSV, per-count summary JSON, and an
//! optional mean-error plot derived from the already-written CSV.

use crate::config::{self, FamilyChoice, SampleCounts};
use crate::output::{self, SummaryDocument, TRAJECTORY_HEADER};
use crate::plot::{self, ChartSpec, Series};
use crate::{engine_error, CliError};
use anyhow::{anyhow, Context};
use collapse_lab::engine::run_replications;
use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};

pub fn run(config_path: &Path, seed_override: Option<u64>) -> Result<(), CliError> {
    let mut cfg = config::load(config_path).map_err(CliError::config)?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    let choice = FamilyChoice::from_config(&cfg).map_err(CliError::config)?;
    let counts = cfg.n.as_list();
    if counts.is_empty() {
        return Err(CliError::config(anyhow!("n list must not be empty")));
    }
    let threads = config::parallelism().map_err(CliError::config)?;
    let out_dir = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("."));

    let single = cfg.n.is_single();
    let mut csv = String::with_capacity(1 << 16);
    csv.push_str(TRAJECTORY_HEADER);
    csv.push('\n');
    for &n in &counts {
        let run_config = config::run_config(&cfg, &choice, n).map_err(CliError::config)?;
        let outcome = run_replications(choice.family(), &run_config, cfg.replications, threads)
            .map_err(engine_error)?;
        for (rep, trajectory) in outcome.trajectories.iter().enumerate() {
            let run_id = if single {
                format!("r{rep}")
            } else {
                format!("n{n}-r{rep}")
            };
            for record in &trajectory.records {
                let theta_1 = record.theta.coords().get(1).copied();
                let _ = writeln!(
                    csv,
                    "{run_id},{},{},{},{},{},{},{}",
                    record.t,
                    output::float_cell(Some(record.theta.coord(0))),
                    output::float_cell(theta_1),
                    output::float_cell(record.param_error),
                    output::float_cell(record.tv),
                    output::float_cell(record.kl),
                    record.dataset_size
                );
            }
        }
        let mut echo = cfg.clone();
        echo.n = SampleCounts::One(n);
        let summary = SummaryDocument {
            config_echo: &echo,
            ratio_final_over_first: outcome.summary.ratio_final_over_first,
            per_iteration: &outcome.summary.per_iteration,
            collapse_times: &outcome.summary.collapse_times,
            failures: outcome.summary.failures,
        };
        let name = if single {
            "summary.json".to_string()
        } else {
            format!("summary_n{n}.json")
        };
        output::write_text(&out_dir.join(name), &output::to_json(&summary)?)
            .map_err(CliError::runtime)?;
    }
    let csv_path = out_dir.join("trajectories.csv");
    output::write_text(&csv_path, &csv).map_err(CliError::runtime)?;
    println!("wrote {}", csv_path.display());

    if cfg.svg.unwrap_or(false) {
        let series = mean_error_series(&csv, if single { Some(counts[0]) } else { None })
            .map_err(CliError::runtime)?;
        if series.is_empty() {
            println!("no finite parameter errors to plot; skipping SVG");
        } else {
            let chart = ChartSpec {
                x_label: "iteration".to_string(),
                y_label: "mean error".to_string(),
                series,
                whiskers: Vec::new(),
            };
            let svg_path = out_dir.join("mean_error.svg");
            output::write_text(&svg_path, &plot::render(&chart)).map_err(CliError::runtime)?;
            println!("wrote {}", svg_path.display());
        }
    }
    Ok(())
}

/// Recovers per-`n` mean parameter error by iteration from CSV text, so
/// the plot is a pure function of the emitted artifact.
fn mean_error_series(csv: &str, single_n: Option<usize>) -> anyhow::Result<Vec<Series>> {
    let mut cells: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    for line in csv.lines().skip(1) {
        let columns: Vec<&str> = line.split(',').collect();
        if columns.len() != 8 || columns[4].is_empty() {
            continue;
        }
        let n = match single_n {
            Some(n) => n,
            None => columns[0]
                .strip_prefix('n')
                .and_then(|rest| rest.split('-').next())
                .ok_or_else(|| anyhow!("run id {:?} lacks an n prefix", columns[0]))?
                .parse()
                .context("bad n in run id")?,
        };
        let t: usize = columns[1].parse().context("bad iteration column")?;
        let error: f64 = columns[4].parse().context("bad param_error column")?;
        let slot = cells.entry((n, t)).or_insert((0.0, 0));
        slot.0 += error;
        slot.1 += 1;
    }
    let mut series: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for ((n, t), (sum, count)) in cells {
        series
            .entry(n)
            .or_default()
            .push((t as f64, sum / count as f64));
    }
    Ok(series
        .into_iter()
        .map(|(n, points)| Series {
            label: format!("n={n}"),
            points,
        })
        .collect())
}
