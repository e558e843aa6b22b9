//! JSON run summaries and per-run series files.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Value};

use crate::duhamel::{verdict_json, write_trajectory_csv, Trajectory};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const TOOL_NAME: &str = "mixdiff";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A named trajectory to be written as `<name>.csv`.
pub struct RunRecord<'a, S> {
    pub name: String,
    pub trajectory: &'a Trajectory<S>,
    /// Parameters specific to this run, echoed next to its verdict.
    pub config: Value,
}

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmittedFiles {
    pub report: PathBuf,
    pub series: Vec<PathBuf>,
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes one series CSV per run and `report.json` holding the resolved
/// configuration, tool version, wall-clock time, every verdict and any
/// extra sections.
pub fn emit_report<S: Scalar>(
    out_dir: &Path,
    command: &str,
    resolved_config: &Value,
    runs: &[RunRecord<'_, S>],
    extra: Value,
    wall_clock: Duration,
) -> Result<EmittedFiles> {
    ensure_dir(out_dir)?;
    let mut series = Vec::with_capacity(runs.len());
    let mut verdicts = Vec::with_capacity(runs.len());
    for run in runs {
        let path = out_dir.join(format!("{}.csv", run.name));
        write_trajectory_csv(run.trajectory, &path)?;
        let mut v = verdict_json(run.trajectory, run.config.clone());
        v["name"] = json!(run.name);
        v["series"] = json!(path.file_name().map(|f| f.to_string_lossy().into_owned()));
        verdicts.push(v);
        series.push(path);
    }
    let report = json!({
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "command": command,
        "wall_clock_seconds": wall_clock.as_secs_f64(),
        "config": resolved_config,
        "runs": verdicts,
        "results": extra,
    });
    let path = out_dir.join("report.json");
    write_json(&path, &report)?;
    Ok(EmittedFiles { report: path, series })
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
