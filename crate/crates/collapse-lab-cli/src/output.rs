//! CSV and JSON emission helpers shared by the subcommands.
//!
//! Every cell goes through the same formatting rules so reruns of the
//! same config are byte-identical: floats print through `Display`
//! (shortest round-trip form) and absent or non-finite values print as
//! empty cells.

use anyhow::{Context, Result};
use collapse_lab::engine::IterationStats;
use serde::Serialize;
use std::fs;
use std::path::Path;

/// Exact column contract of the trajectory CSV.
pub const TRAJECTORY_HEADER: &str = "run_id,t,theta_0,theta_1,param_error,tv,kl,dataset_size";

/// One float cell: empty when absent or non-finite.
pub fn float_cell(value: Option<f64>) -> String {
    match value {
        Some(v) if v.is_finite() => format!("{v}"),
        _ => String::new(),
    }
}

/// One integer cell: empty when absent.
pub fn count_cell(value: Option<usize>) -> String {
    match value {
        Some(v) => format!("{v}"),
        None => String::new(),
    }
}

/// Writes text to a path, creating parent directories as needed.
pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .with_context(|| format!("cannot create directory {}", parent.display()))?;
    }
    fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
}

/// The summary document for one sample count, in fixed key order.
#[derive(Serialize)]
pub struct SummaryDocument<'a, C: Serialize> {
    pub config_echo: &'a C,
    #[serde(rename = "ratio_T_over_1")]
    pub ratio_final_over_first: Option<f64>,
    pub per_iteration: &'a [IterationStats],
    pub collapse_times: &'a Option<Vec<Option<usize>>>,
    pub failures: u32,
}

/// Serializes any document as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(document: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(document).context("cannot serialize report")?;
    text.push('\n');
    Ok(text)
}
