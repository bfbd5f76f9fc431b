//! The `verify` subcommand: a self-check suite covering the Monte-Carlo
//! audits, the total-variation/divergence inequality, max-of-uniforms
//! coverage, and agreement between fast fitters and their slow oracles.
//!
//! Every check draws from streams keyed by a fixed tag, so the report is
//! a deterministic function of the seed and the sweep sizes.

use crate::{CliError};
use anyhow::{anyhow, bail, Result};
use clap::Args;
use collapse_lab::constructions::{
    interval_max, SpikeMixtureFamily, TailChainFamily, TailChainParams, WidthSchedule,
};
use collapse_lab::engine::check_max_uniform;
use collapse_lab::families::{
    audit_fisher_hessian, audit_score_mean, AuditReport, Exponential, Gaussian, PowerBeta,
    ScaledFisherInfo, SmoothFamily, MIN_AUDIT_DRAWS,
};
use collapse_lab::metrics::pinsker_inequality;
use collapse_lab::optimizer::{numeric_mle, Bounds};
use collapse_lab::{Dataset, Family, ParamPoint, RandomStream, Sample};
use serde::Serialize;

/// Largest allowed fast-versus-oracle coordinate gap.
const ORACLE_TOL: f64 = 1e-5;
/// Additive slack granted to the inequality checks.
const PINSKER_SLACK: f64 = 1e-9;

#[derive(Args)]
pub struct VerifyArgs {
    /// Emit the report as JSON on stdout.
    #[arg(long)]
    pub json: bool,
    /// Monte-Carlo draws per audited parameter point.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Random pairs per inequality sweep and datasets per oracle check.
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    /// Corrupt one information matrix to prove the audit can fail.
    #[arg(long, hide = true)]
    pub inject_fisher_error: bool,
}

#[derive(Serialize)]
struct CheckResult {
    name: String,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct VerifyReport {
    all_pass: bool,
    checks: Vec<CheckResult>,
}

pub fn run(args: &VerifyArgs, seed: u64) -> Result<(), CliError> {
    if args.samples < MIN_AUDIT_DRAWS {
        return Err(CliError::config(anyhow!(
            "--samples must be at least {MIN_AUDIT_DRAWS}"
        )));
    }
    if args.pairs == 0 {
        return Err(CliError::config(anyhow!("--pairs must be positive")));
    }
    let mut checks = Vec::new();
    audit_checks(args, seed, &mut checks).map_err(CliError::runtime)?;
    checks.push(pinsker_smooth(args.pairs, seed));
    checks.push(pinsker_constructions(args.pairs, seed).map_err(CliError::runtime)?);
    max_uniform_checks(seed, &mut checks).map_err(CliError::runtime)?;
    checks.push(spike_oracle(args.pairs, seed).map_err(CliError::runtime)?);
    checks.push(chain_formula(args.pairs, seed).map_err(CliError::runtime)?);
    numeric_oracle(args.pairs, seed, &mut checks).map_err(CliError::runtime)?;

    let all_pass = checks.iter().all(|c| c.pass);
    if args.json {
        let report = VerifyReport { all_pass, checks };
        print!("{}", crate::output::to_json(&report)?);
        if !all_pass {
            let failed = failed_names(&report.checks);
            return Err(CliError::runtime(anyhow!("failed checks: {failed}")));
        }
    } else {
        for check in &checks {
            let verdict = if check.pass { "PASS" } else { "FAIL" };
            println!("{verdict} {} ({})", check.name, check.detail);
        }
        if !all_pass {
            let failed = failed_names(&checks);
            return Err(CliError::runtime(anyhow!("failed checks: {failed}")));
        }
        println!("all checks passed");
    }
    Ok(())
}

fn failed_names(checks: &[CheckResult]) -> String {
    checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

const SMOOTH_NAMES: [&str; 3] = ["gaussian", "exponential", "power_beta"];

fn smooth_family(name: &str) -> &'static dyn SmoothFamily {
    match name {
        "gaussian" => &Gaussian,
        "exponential" => &Exponential,
        "power_beta" => &PowerBeta,
        other => unreachable!("not a smooth family: {other}"),
    }
}

fn audit_points(name: &str) -> Vec<ParamPoint> {
    match name {
        "gaussian" => [
            (0.0, 1.0),
            (1.5, 0.7),
            (-2.0, 2.5),
            (10.0, 0.3),
            (-0.5, 5.0),
        ]
        .iter()
        .map(|&(mu, sigma)| Gaussian::params(mu, sigma).expect("in-domain audit point"))
        .collect(),
        "exponential" => [0.3, 1.0, 2.5, 5.0, 0.05]
            .iter()
            .map(|&l| Exponential::params(l).expect("in-domain audit point"))
            .collect(),
        "power_beta" => [0.1, 0.5, 1.0, 2.0, 8.0]
            .iter()
            .map(|&t| PowerBeta::params(t).expect("in-domain audit point"))
            .collect(),
        other => unreachable!("not a smooth family: {other}"),
    }
}

fn worst_gap(reports: &[AuditReport]) -> f64 {
    reports
        .iter()
        .flat_map(|r| r.entries.iter())
        .map(|e| (e.estimate - e.target).abs())
        .fold(0.0, f64::max)
}

fn audit_checks(args: &VerifyArgs, seed: u64, checks: &mut Vec<CheckResult>) -> Result<()> {
    for (fi, name) in SMOOTH_NAMES.iter().enumerate() {
        let family = smooth_family(name);
        let points = audit_points(name);
        let mut score_reports = Vec::new();
        let mut fisher_reports = Vec::new();
        for (ti, theta) in points.iter().enumerate() {
            let tag = (fi * 10 + ti) as u32;
            let mut stream = RandomStream::derive(seed, tag, 0);
            score_reports.push(audit_score_mean(family, theta, args.samples, &mut stream)?);
            let mut stream = RandomStream::derive(seed, tag, 1);
            if args.inject_fisher_error && *name == "gaussian" {
                let corrupted = ScaledFisherInfo {
                    inner: Gaussian,
                    scale: 1.5,
                };
                fisher_reports.push(audit_fisher_hessian(
                    &corrupted,
                    theta,
                    args.samples,
                    &mut stream,
                )?);
            } else {
                fisher_reports.push(audit_fisher_hessian(
                    family,
                    theta,
                    args.samples,
                    &mut stream,
                )?);
            }
        }
        checks.push(CheckResult {
            name: format!("audit_score_mean {name}"),
            pass: score_reports.iter().all(AuditReport::pass),
            detail: format!(
                "{} points at m={}, worst |estimate-target| {:.3e}",
                points.len(),
                args.samples,
                worst_gap(&score_reports)
            ),
        });
        checks.push(CheckResult {
            name: format!("audit_fisher_hessian {name}"),
            pass: fisher_reports.iter().all(AuditReport::pass),
            detail: format!(
                "{} points at m={}, worst |estimate-target| {:.3e}",
                points.len(),
                args.samples,
                worst_gap(&fisher_reports)
            ),
        });
    }
    Ok(())
}

fn uniform_in(stream: &mut RandomStream, lo: f64, hi: f64) -> f64 {
    lo + stream.next_f64() * (hi - lo)
}

fn random_smooth_point(name: &str, stream: &mut RandomStream) -> ParamPoint {
    match name {
        "gaussian" => Gaussian::params(uniform_in(stream, -3.0, 3.0), uniform_in(stream, 0.3, 3.0)),
        "exponential" => Exponential::params(uniform_in(stream, 0.1, 5.0)),
        "power_beta" => PowerBeta::params(uniform_in(stream, 0.1, 5.0)),
        other => unreachable!("not a smooth family: {other}"),
    }
    .expect("sampled point is in-domain")
}

fn pinsker_smooth(pairs: usize, seed: u64) -> CheckResult {
    let mut stream = RandomStream::derive(seed, 100, 0);
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for i in 0..pairs {
        let name = SMOOTH_NAMES[i % SMOOTH_NAMES.len()];
        let family = smooth_family(name);
        let a = random_smooth_point(name, &mut stream);
        let b = random_smooth_point(name, &mut stream);
        let tv = family.tv(&a, &b);
        let kl = family.kl(&a, &b);
        if !pinsker_inequality(tv, kl, PINSKER_SLACK) {
            violations += 1;
        }
        let margin = (kl.max(0.0) / 2.0).sqrt() + PINSKER_SLACK - tv;
        min_margin = min_margin.min(margin);
    }
    CheckResult {
        name: "pinsker smooth_pairs".to_string(),
        pass: violations == 0,
        detail: format!("{pairs} pairs, min margin {min_margin:.3e}, {violations} violations"),
    }
}

fn random_spike_point(family: &SpikeMixtureFamily, stream: &mut RandomStream) -> Result<ParamPoint> {
    let alpha = stream.next_f64() * 0.25;
    let mu = 2.0 + stream.next_f64() * (1.0 - family.f_linear(alpha));
    Ok(family.encode(&family.make_params(alpha, mu)?))
}

fn random_tail_point(family: &TailChainFamily, stream: &mut RandomStream) -> Result<ParamPoint> {
    let params = if stream.next_f64() < 0.5 {
        let len = 1 + (stream.next_f64() * 3.0) as usize;
        let alphas = (0..len).map(|_| stream.next_f64() * 0.25).collect();
        family.make_chain(alphas)?
    } else {
        let span = 2 + (stream.next_f64() * 3.0) as u32;
        let beta = 0.05 + 0.9 * stream.next_f64();
        family.make_spiked(beta, span)?
    };
    Ok(family.encode(&params))
}

fn pinsker_constructions(pairs: usize, seed: u64) -> Result<CheckResult> {
    let spike = SpikeMixtureFamily::new(100)?;
    let tail = TailChainFamily::new(WidthSchedule::Demo {
        budget_exponent: 1.0,
    })?;
    let mut stream = RandomStream::derive(seed, 101, 0);
    let mut violations = 0;
    let mut finite_kl = 0;
    for i in 0..pairs {
        let (family, a, b): (&dyn Family, ParamPoint, ParamPoint) = if i % 2 == 0 {
            let a = random_spike_point(&spike, &mut stream)?;
            let b = random_spike_point(&spike, &mut stream)?;
            (&spike, a, b)
        } else {
            let a = random_tail_point(&tail, &mut stream)?;
            let b = random_tail_point(&tail, &mut stream)?;
            (&tail, a, b)
        };
        let tv = family.tv(&a, &b);
        let kl = family.kl(&a, &b);
        if kl.is_finite() {
            finite_kl += 1;
        }
        if !pinsker_inequality(tv, kl, PINSKER_SLACK) {
            violations += 1;
        }
    }
    Ok(CheckResult {
        name: "pinsker construction_pairs".to_string(),
        pass: violations == 0,
        detail: format!("{pairs} pairs ({finite_kl} with finite divergence), {violations} violations"),
    })
}

fn max_uniform_checks(seed: u64, checks: &mut Vec<CheckResult>) -> Result<()> {
    for (k, (n, delta)) in [(10, 0.2), (100, 0.1), (1000, 0.05)].into_iter().enumerate() {
        let mut stream = RandomStream::derive(seed, 200 + k as u32, 0);
        let report = check_max_uniform(n, delta, 10_000, &mut stream)?;
        checks.push(CheckResult {
            name: format!("max_uniform n={n} delta={delta}"),
            pass: report.pass,
            detail: format!(
                "frequency {:.4} vs required {:.4}",
                report.frequency, report.required_frequency
            ),
        });
    }
    Ok(())
}

fn random_mixed_dataset(stream: &mut RandomStream, max_size: usize) -> Result<Dataset> {
    let size = 1 + (stream.next_f64() * max_size as f64) as usize;
    let size = size.min(max_size);
    let mut samples = Vec::with_capacity(size);
    for _ in 0..size {
        let value = if stream.next_f64() < 0.7 {
            stream.next_f64()
        } else {
            2.0 + stream.next_f64()
        };
        samples.push(Sample::new(value)?);
    }
    Ok(Dataset::new(size)?.accumulate(&samples, 0)?)
}

fn spike_oracle(pairs: usize, seed: u64) -> Result<CheckResult> {
    let family = SpikeMixtureFamily::new(100)?;
    let mut stream = RandomStream::derive(seed, 300, 0);
    let mut mismatches = 0;
    for _ in 0..pairs {
        let data = random_mixed_dataset(&mut stream, 50)?;
        let fast = family.fit(&data)?;
        let slow = family.brute_force_fit(&data)?;
        if fast.alpha != slow.alpha || fast.mu != slow.mu {
            mismatches += 1;
        }
    }
    Ok(CheckResult {
        name: "spike_mle_equals_brute_force".to_string(),
        pass: mismatches == 0,
        detail: format!("{pairs} datasets of size 1..=50, {mismatches} mismatches"),
    })
}

fn chain_formula(pairs: usize, seed: u64) -> Result<CheckResult> {
    let family = TailChainFamily::new(WidthSchedule::Demo {
        budget_exponent: 1.0,
    })?;
    let mut stream = RandomStream::derive(seed, 301, 0);
    let mut mismatches = 0;
    for _ in 0..pairs {
        let size = 1 + (stream.next_f64() * 40.0) as usize;
        let mut samples = Vec::with_capacity(size);
        for _ in 0..size {
            let level = (stream.next_f64() * 4.0) as usize;
            samples.push(Sample::new(level as f64 + stream.next_f64())?);
        }
        let data = Dataset::new(samples.len())?.accumulate(&samples, 0)?;
        let (params, _) = family.best_h_fit(&data)?;
        let TailChainParams::Chain { alphas } = params else {
            bail!("chain fit returned a spiked route");
        };
        let table = interval_max(&data)?;
        let last = table.last_occupied().expect("dataset is non-empty");
        let expected: Vec<f64> = (0..=last)
            .map(|j| match table.get(j) {
                Some(m) => 0.25f64.min((1.0 - m) / 2.0),
                None => 0.25,
            })
            .collect();
        if alphas != expected {
            mismatches += 1;
        }
    }
    Ok(CheckResult {
        name: "chain_fit_matches_interval_formula".to_string(),
        pass: mismatches == 0,
        detail: format!("{pairs} datasets over levels 0..=3, {mismatches} mismatches"),
    })
}

fn numeric_oracle(pairs: usize, seed: u64, checks: &mut Vec<CheckResult>) -> Result<()> {
    for (fi, name) in SMOOTH_NAMES.iter().enumerate() {
        let family = smooth_family(name);
        let bounds = Bounds::default_for(family)?;
        let mut stream = RandomStream::derive(seed, 310 + fi as u32, 0);
        let mut worst = 0.0f64;
        for _ in 0..pairs {
            let theta = random_smooth_point(name, &mut stream);
            let draws = family.sample(&theta, &mut stream, 60);
            let data = Dataset::new(60)?.accumulate(&draws, 0)?;
            let exact = family.exact_mle(&data)?;
            let numeric = numeric_mle(family, &data, &theta, &bounds)?;
            for (a, b) in exact.coords().iter().zip(numeric.coords()) {
                worst = worst.max((a - b).abs());
            }
        }
        checks.push(CheckResult {
            name: format!("exact_mle_matches_numeric {name}"),
            pass: worst <= ORACLE_TOL,
            detail: format!("{pairs} datasets of size 60, worst coordinate gap {worst:.3e}"),
        });
    }
    Ok(())
}
