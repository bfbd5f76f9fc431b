//! The `collapse-demo` subcommand: canned runs of the two adversarial
//! constructions with their characteristic outputs.

use crate::config::{self, phi_kind};
use crate::output::{self, count_cell, float_cell};
use crate::{engine_error, CliError};
use clap::Args;
use collapse_lab::constructions::{TailChainFamily, WidthSchedule};
use collapse_lab::engine::{
    first_spiked_selection, run_replications, spike_collapse_experiment,
};
use collapse_lab::{MetricSet, RunConfig};
use std::fmt::Write;
use std::path::PathBuf;

#[derive(Args)]
pub struct SpikeDemoArgs {
    /// Construction scale (must equal n).
    #[arg(long, default_value_t = 100)]
    pub scale: u32,
    /// Samples drawn per iteration.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub replications: u32,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct TailDemoArgs {
    /// Samples drawn per iteration.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub replications: u32,
    /// Fitting iterations to wait for a collapse.
    #[arg(long, default_value_t = 200)]
    pub t_max: usize,
    /// Spike width mode: demo or phi.
    #[arg(long, default_value = "demo")]
    pub log_f: String,
    /// Demo-mode budget exponent.
    #[arg(long = "e", default_value_t = 1e4)]
    pub budget_exponent: f64,
    /// Phi-mode growth inverse: log_log or identity.
    #[arg(long, default_value = "log_log")]
    pub phi: String,
    /// Phi-mode growth constant.
    #[arg(long = "c", default_value_t = 8.0)]
    pub growth_c: f64,
    /// Phi-mode failure budget.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Smallest admissible spiked-route span.
    #[arg(long, default_value_t = 2)]
    pub min_j: u32,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

pub fn run_spike(args: &SpikeDemoArgs, seed: u64) -> Result<(), CliError> {
    let threads = config::parallelism().map_err(CliError::config)?;
    let report = spike_collapse_experiment(args.scale, args.n, args.replications, seed, threads)
        .map_err(engine_error)?;
    println!(
        "iteration 1: frequency of tv <= {} was {}",
        report.close_threshold, report.close_frequency
    );
    println!(
        "iteration 2: frequency of tv >= {} was {}",
        report.collapse_threshold, report.collapse_frequency
    );
    if let Some(dir) = &args.output_dir {
        let path = dir.join("spike_report.json");
        output::write_text(&path, &output::to_json(&report)?).map_err(CliError::runtime)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn run_tail(args: &TailDemoArgs, seed: u64) -> Result<(), CliError> {
    if args.n == 0 || args.replications == 0 {
        return Err(CliError::config(anyhow::anyhow!(
            "n and replications must be positive"
        )));
    }
    let schedule = match args.log_f.as_str() {
        "demo" => WidthSchedule::Demo {
            budget_exponent: args.budget_exponent,
        },
        "phi" => WidthSchedule::PhiComposed {
            phi: phi_kind(&args.phi).map_err(CliError::config)?,
            growth_c: args.growth_c,
            delta: args.delta,
        },
        other => {
            return Err(CliError::config(anyhow::anyhow!(
                "unknown log_f mode {other:?}; expected demo or phi"
            )))
        }
    };
    let family = TailChainFamily::new(schedule)
        .and_then(|f| f.with_min_span(args.min_j))
        .map_err(CliError::config)?;

    let mut replication_rows: Vec<(u32, Option<usize>, Option<f64>, Option<usize>)> = Vec::new();
    if args.t_max == 0 {
        for rep in 0..args.replications {
            replication_rows.push((rep, None, None, None));
        }
        println!("no fitting iterations requested; no collapse possible");
    } else {
        let truth = family.encode(&family.make_chain(vec![]).map_err(CliError::config)?);
        let run_config = RunConfig::new(truth, args.n, args.t_max - 1, seed).with_metrics(
            MetricSet {
                param_error: false,
                tv: true,
                kl: false,
            },
        );
        let threads = config::parallelism().map_err(CliError::config)?;
        let outcome = run_replications(&family, &run_config, args.replications, threads)
            .map_err(engine_error)?;
        let collapse_times = outcome
            .summary
            .collapse_times
            .as_ref()
            .expect("tv is tracked for the whole demo");
        for (rep, trajectory) in outcome.trajectories.iter().enumerate() {
            let collapse_t = collapse_times[rep];
            let tv_at_collapse =
                collapse_t.and_then(|t| trajectory.record_at(t)).and_then(|r| r.tv);
            replication_rows.push((
                rep as u32,
                collapse_t,
                tv_at_collapse,
                first_spiked_selection(trajectory),
            ));
        }
        let mut collapsed: Vec<usize> = replication_rows.iter().filter_map(|r| r.1).collect();
        collapsed.sort_unstable();
        let reached_g = replication_rows.iter().filter(|r| r.3.is_some()).count();
        println!(
            "collapsed {}/{} replications; {} reached the spiked route",
            collapsed.len(),
            args.replications,
            reached_g
        );
        if !collapsed.is_empty() {
            let mid = collapsed.len() / 2;
            let median = if collapsed.len() % 2 == 1 {
                collapsed[mid] as f64
            } else {
                (collapsed[mid - 1] + collapsed[mid]) as f64 / 2.0
            };
            println!("median collapse iteration: {median}");
        }
    }

    let mut replications_csv = String::from("replication,collapse_t,tv_at_collapse,g_selection_t\n");
    for (rep, collapse_t, tv, g_t) in &replication_rows {
        let _ = writeln!(
            replications_csv,
            "{rep},{},{},{}",
            count_cell(*collapse_t),
            float_cell(*tv),
            count_cell(*g_t)
        );
    }
    let mut survival_csv = String::from("t,surviving_fraction\n");
    for t in 0..=args.t_max {
        let surviving = replication_rows
            .iter()
            .filter(|r| r.1.is_none_or(|ct| ct > t))
            .count();
        let _ = writeln!(
            survival_csv,
            "{t},{}",
            surviving as f64 / args.replications as f64
        );
    }
    if let Some(dir) = &args.output_dir {
        let replications_path = dir.join("tail_replications.csv");
        output::write_text(&replications_path, &replications_csv).map_err(CliError::runtime)?;
        let survival_path = dir.join("tail_survival.csv");
        output::write_text(&survival_path, &survival_csv).map_err(CliError::runtime)?;
        println!(
            "wrote {} and {}",
            replications_path.display(),
            survival_path.display()
        );
    }
    Ok(())
}
