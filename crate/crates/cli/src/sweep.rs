//! Runs the pipeline once per depth and tabulates KD and diversity.

use std::path::Path;

use serde::Serialize;

use crate::evaluate::EvalReport;
use crate::pipeline::{self, RunStatus, EVAL_REPORT};
use crate::settings::Settings;
use crate::wiring::Wired;
use crate::{exit, Failure};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub depth: u32,
    pub kd: Option<f64>,
    pub diversity: Option<f64>,
    pub sources: usize,
    /// `ok`, or the failing stage and message.
    pub status: String,
}

/// One full run per entry of `depths`, sharing `wired`. A failed depth is
/// recorded in its row and the sweep moves on.
pub fn depth_sweep(settings: &Settings, wired: &Wired, depths: &[u32]) -> Result<Vec<SweepRow>, Failure> {
    let mut rows = Vec::with_capacity(depths.len());
    for &depth in depths {
        let mut config = settings.config.clone();
        config.max_depth = depth;
        if let Err(e) = config.validate() {
            rows.push(SweepRow {
                depth,
                kd: None,
                diversity: None,
                sources: 0,
                status: format!("config: {e}"),
            });
            continue;
        }
        let outcome = pipeline::run_with_config(settings, config, wired)?;
        let report: Option<EvalReport> = std::fs::read_to_string(outcome.dir.join(EVAL_REPORT))
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok());
        let status = match (&outcome.manifest.status, &outcome.manifest.failure) {
            (RunStatus::Ok, _) => "ok".to_string(),
            (RunStatus::Failed, Some(f)) => format!("{}: {}", f.stage, f.message),
            (RunStatus::Failed, None) => "failed".to_string(),
        };
        log::info!("depth {depth}: {status} ({})", outcome.dir.display());
        rows.push(SweepRow {
            depth,
            kd: report.as_ref().map(|r| r.kd.kd),
            diversity: report.as_ref().and_then(|r| r.diversity.as_ref()).map(|d| d.diversity),
            sources: report.as_ref().map_or(0, |r| r.sources),
            status,
        });
    }
    Ok(rows)
}

/// CSV with a header row. Missing values are empty cells.
pub fn to_csv(rows: &[SweepRow]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Failure::new(exit::IO, e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record(["depth", "kd", "diversity", "sources", "status"])
            .map_err(|e| Failure::new(exit::IO, e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::new(exit::IO, e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::new(exit::IO, e.to_string()))
}

pub fn write_csv(path: &Path, rows: &[SweepRow]) -> Result<(), Failure> {
    crate::write_text(path, &to_csv(rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_blank_missing_values() {
        let rows = vec![
            SweepRow {
                depth: 1,
                kd: Some(12.5),
                diversity: Some(0.25),
                sources: 4,
                status: "ok".into(),
            },
            SweepRow {
                depth: 2,
                kd: None,
                diversity: None,
                sources: 0,
                status: "outline: empty, retry".into(),
            },
        ];
        let text = to_csv(&rows).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "depth,kd,diversity,sources,status");
        assert_eq!(lines[1], "1,12.5,0.25,4,ok");
        assert_eq!(lines[2], "2,,,0,\"outline: empty, retry\"");
        assert_eq!(to_csv(&[]).unwrap(), "depth,kd,diversity,sources,status\n");
    }
}
