//! Declarative experiment descriptions loaded from TOML or JSON files.
//!
//! A config file mirrors one replicated run: the family and its ground
//! truth, the per-iteration sample count (or a list of counts swept in
//! order), the iteration and replication budget, and output toggles.
//! Unknown keys are rejected so a typo cannot silently fall back to a
//! default.

use anyhow::{anyhow, bail, Context, Result};
use collapse_lab::constructions::{
    PhiKind, SpikeMixtureFamily, TailChainFamily, WidthSchedule, DEFAULT_GROWTH_C,
};
use collapse_lab::families::{Exponential, Gaussian, PowerBeta};
use collapse_lab::{Family, MetricSet, MleMode, ParamPoint, RunConfig};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// Per-iteration sample counts: a single `n` or a list run back to back.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleCounts {
    One(usize),
    Many(Vec<usize>),
}

impl SampleCounts {
    pub fn as_list(&self) -> Vec<usize> {
        match self {
            SampleCounts::One(n) => vec![*n],
            SampleCounts::Many(ns) => ns.clone(),
        }
    }

    pub fn is_single(&self) -> bool {
        matches!(self, SampleCounts::One(_))
    }
}

/// One experiment as written by the user.
///
/// Field names follow the config-file vocabulary (`T` for the iteration
/// count, `N` for the spike scale, `E` for the demo budget exponent,
/// `C` for the width-schedule growth constant).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfigFile {
    /// One of `gaussian`, `exponential`, `power_beta`, `spike`, `tail`.
    pub family: String,
    /// Ground-truth coordinates; for `tail` this is the list of escape
    /// masses of a chain truth (empty for the standard uniform).
    pub theta_star: Vec<f64>,
    pub n: SampleCounts,
    #[serde(rename = "T")]
    pub iterations: usize,
    pub seed: u64,
    pub replications: u32,
    pub mle_mode: MleMode,
    /// Metrics to record, from `param_error`, `tv`, `kl`; defaults to
    /// `param_error` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collapse_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Spike-mixture scale.
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<u32>,
    /// Tail-chain width mode: `demo` or `phi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_f: Option<String>,
    /// Demo-mode budget exponent.
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub budget_exponent: Option<f64>,
    /// Phi-mode growth inverse: `log_log` or `identity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    /// Phi-mode growth constant.
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub growth_c: Option<f64>,
    /// Phi-mode failure budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Smallest admissible spiked-route span for the tail chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_j: Option<u32>,
    /// Emit an SVG plot next to the CSV artifacts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<bool>,
}

/// Parses a config file, auto-detecting TOML or JSON by extension.
pub fn load(path: &Path) -> Result<ExperimentConfigFile> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let extension = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let parsed = match extension {
        "toml" => toml::from_str(&text).map_err(anyhow::Error::from),
        "json" => serde_json::from_str(&text).map_err(anyhow::Error::from),
        other => Err(anyhow!("unsupported config extension {other:?}")),
    };
    parsed.with_context(|| format!("invalid config file {}", path.display()))
}

/// A family instance built from a config, owning any construction state.
pub enum FamilyChoice {
    Gaussian(Gaussian),
    Exponential(Exponential),
    PowerBeta(PowerBeta),
    Spike(SpikeMixtureFamily),
    Tail(TailChainFamily),
}

impl FamilyChoice {
    /// Instantiates the configured family, validating that the
    /// construction-specific keys present are the ones it needs.
    pub fn from_config(cfg: &ExperimentConfigFile) -> Result<Self> {
        let choice = match cfg.family.as_str() {
            "gaussian" => FamilyChoice::Gaussian(Gaussian),
            "exponential" => FamilyChoice::Exponential(Exponential),
            "power_beta" => FamilyChoice::PowerBeta(PowerBeta),
            "spike" => {
                let scale = cfg
                    .scale
                    .ok_or_else(|| anyhow!("family \"spike\" requires key N"))?;
                FamilyChoice::Spike(SpikeMixtureFamily::new(scale)?)
            }
            "tail" => {
                let mut family = TailChainFamily::new(tail_schedule(cfg)?)?;
                if let Some(min_j) = cfg.min_j {
                    family = family.with_min_span(min_j)?;
                }
                FamilyChoice::Tail(family)
            }
            other => bail!(
                "unknown family {other:?}; expected gaussian, exponential, power_beta, spike, or tail"
            ),
        };
        let allowed: &[&str] = match choice {
            FamilyChoice::Spike(_) => &["N"],
            FamilyChoice::Tail(_) => &["log_f", "E", "phi", "C", "delta", "min_j"],
            _ => &[],
        };
        for (key, present) in [
            ("N", cfg.scale.is_some()),
            ("log_f", cfg.log_f.is_some()),
            ("E", cfg.budget_exponent.is_some()),
            ("phi", cfg.phi.is_some()),
            ("C", cfg.growth_c.is_some()),
            ("delta", cfg.delta.is_some()),
            ("min_j", cfg.min_j.is_some()),
        ] {
            if present && !allowed.contains(&key) {
                bail!("key {key} does not apply to family {:?}", cfg.family);
            }
        }
        Ok(choice)
    }

    pub fn family(&self) -> &dyn Family {
        match self {
            FamilyChoice::Gaussian(f) => f,
            FamilyChoice::Exponential(f) => f,
            FamilyChoice::PowerBeta(f) => f,
            FamilyChoice::Spike(f) => f,
            FamilyChoice::Tail(f) => f,
        }
    }

    /// Turns raw config coordinates into a validated parameter point.
    pub fn theta_star(&self, coords: &[f64]) -> Result<ParamPoint> {
        let point = match self {
            FamilyChoice::Gaussian(_) => {
                let [mu, sigma] = expect_coords::<2>("gaussian", coords)?;
                Gaussian::params(mu, sigma)?
            }
            FamilyChoice::Exponential(_) => {
                let [lambda] = expect_coords::<1>("exponential", coords)?;
                Exponential::params(lambda)?
            }
            FamilyChoice::PowerBeta(_) => {
                let [theta] = expect_coords::<1>("power_beta", coords)?;
                PowerBeta::params(theta)?
            }
            FamilyChoice::Spike(family) => {
                let [alpha, mu] = expect_coords::<2>("spike", coords)?;
                family.encode(&family.make_params(alpha, mu)?)
            }
            FamilyChoice::Tail(family) => {
                family.encode(&family.make_chain(coords.to_vec())?)
            }
        };
        Ok(point)
    }
}

fn expect_coords<const K: usize>(family: &str, coords: &[f64]) -> Result<[f64; K]> {
    <[f64; K]>::try_from(coords)
        .map_err(|_| anyhow!("family {family:?} takes {K} theta_star coordinates, got {}", coords.len()))
}

fn tail_schedule(cfg: &ExperimentConfigFile) -> Result<WidthSchedule> {
    match cfg.log_f.as_deref().unwrap_or("demo") {
        "demo" => {
            let budget_exponent = cfg
                .budget_exponent
                .ok_or_else(|| anyhow!("log_f mode \"demo\" requires key E"))?;
            Ok(WidthSchedule::Demo { budget_exponent })
        }
        "phi" => Ok(WidthSchedule::PhiComposed {
            phi: phi_kind(cfg.phi.as_deref().unwrap_or("log_log"))?,
            growth_c: cfg.growth_c.unwrap_or(DEFAULT_GROWTH_C),
            delta: cfg
                .delta
                .ok_or_else(|| anyhow!("log_f mode \"phi\" requires key delta"))?,
        }),
        other => bail!("unknown log_f mode {other:?}; expected demo or phi"),
    }
}

pub fn phi_kind(name: &str) -> Result<PhiKind> {
    match name {
        "log_log" => Ok(PhiKind::LogLog),
        "identity" => Ok(PhiKind::Identity),
        other => bail!("unknown phi {other:?}; expected log_log or identity"),
    }
}

/// Resolves the metric selection, defaulting to parameter error only.
pub fn metric_set(cfg: &ExperimentConfigFile) -> Result<MetricSet> {
    let Some(names) = &cfg.metrics else {
        return Ok(MetricSet::default());
    };
    let mut set = MetricSet {
        param_error: false,
        tv: false,
        kl: false,
    };
    for name in names {
        match name.as_str() {
            "param_error" => set.param_error = true,
            "tv" => set.tv = true,
            "kl" => set.kl = true,
            other => bail!("unknown metric {other:?}; expected param_error, tv, or kl"),
        }
    }
    Ok(set)
}

/// Assembles the engine configuration for one sample count.
pub fn run_config(
    cfg: &ExperimentConfigFile,
    choice: &FamilyChoice,
    n: usize,
) -> Result<RunConfig> {
    if n == 0 {
        bail!("n must be positive");
    }
    let theta_star = choice.theta_star(&cfg.theta_star)?;
    let mut run = RunConfig::new(theta_star, n, cfg.iterations, cfg.seed)
        .with_mode(cfg.mle_mode)
        .with_metrics(metric_set(cfg)?);
    if let Some(threshold) = cfg.collapse_threshold {
        if !threshold.is_finite() || !(0.0..=1.0).contains(&threshold) || threshold == 0.0 {
            bail!("collapse_threshold must lie in (0, 1], got {threshold}");
        }
        run = run.with_collapse_threshold(threshold);
    }
    Ok(run)
}

/// Reads the thread-count override from `COLLAPSE_LAB_THREADS`.
///
/// Absent means one thread per logical CPU (returned as 0 for the pool
/// builder); present it must parse as a positive integer.
pub fn parallelism() -> Result<usize> {
    match std::env::var("COLLAPSE_LAB_THREADS") {
        Ok(raw) => {
            let threads: usize = raw
                .parse()
                .map_err(|_| anyhow!("COLLAPSE_LAB_THREADS must be a positive integer, got {raw:?}"))?;
            if threads == 0 {
                bail!("COLLAPSE_LAB_THREADS must be positive");
            }
            Ok(threads)
        }
        Err(_) => Ok(0),
    }
}
