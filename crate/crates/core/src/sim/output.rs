use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::aggregate::{SummaryRow, METRICS};
use crate::sim::scenario::ScenarioConfig;
use crate::sim::slot::SlotMetrics;

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const META_FILE: &str = "run_meta.json";

pub fn write_metrics(path: &Path, rows: &[SlotMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![
        "strategy".to_string(),
        "warm_start".into(),
        "sweep_param".into(),
        "sweep_value".into(),
        "count".into(),
    ];
    for (name, _) in METRICS {
        header.push(format!("{name}_mean"));
        header.push(format!("{name}_std"));
    }
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![
            row.strategy.to_string(),
            row.warm_start.to_string(),
            row.sweep_param.clone(),
            row.sweep_value.to_string(),
            row.count.to_string(),
        ];
        for s in &row.stats {
            rec.push(s.mean.to_string());
            rec.push(s.std.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct RunMeta<'a, E: Serialize> {
    package: &'static str,
    version: &'static str,
    config: &'a ScenarioConfig,
    extra: E,
}

/// Resolved configuration plus version info, and whatever the caller adds
/// (seeds, sweep definition).
pub fn write_meta<E: Serialize>(path: &Path, config: &ScenarioConfig, extra: E) -> Result<()> {
    let meta = RunMeta {
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        extra,
    };
    let text = serde_json::to_string_pretty(&meta)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Writes the three output files into `dir`, creating it if needed.
pub fn write_outputs<E: Serialize>(
    dir: &Path,
    config: &ScenarioConfig,
    rows: &[SlotMetrics],
    extra: E,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_metrics(&dir.join(METRICS_FILE), rows)?;
    let summary = crate::sim::aggregate::aggregate(rows)?;
    write_summary(&dir.join(SUMMARY_FILE), &summary)?;
    write_meta(&dir.join(META_FILE), config, extra)
}
