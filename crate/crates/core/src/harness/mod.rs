//! CLI-facing orchestration: configuration, suites, reports, persistence.

pub mod config;
pub mod container;
pub mod report;
pub mod suites;

use std::path::Path;

use crate::error::Result;

pub use config::ExperimentConfig;
pub use report::{CheckRecord, RawRun, RunReport};
pub use suites::{run, Series};

/// Persist a finished run: report.txt (body + trailer), raw.json (the
/// re-renderable payload), CSV series, and the configured ensemble's
/// equilibrium raw data.
pub fn persist_run(
    out_dir: &Path,
    report: &RunReport,
    series: &[Series],
    equilibrium: Option<&crate::covariant::CovariantEnsemble>,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("report.txt"), report.render_text())?;
    let raw = serde_json::to_string_pretty(&report.raw).expect("raw serializes");
    std::fs::write(out_dir.join("raw.json"), raw)?;
    if !series.is_empty() {
        let series_dir = out_dir.join("series");
        std::fs::create_dir_all(&series_dir)?;
        for s in series {
            let header: Vec<&str> = s.header.iter().map(String::as_str).collect();
            report::write_csv(&series_dir.join(format!("{}.csv", s.name)), &header, &s.rows)?;
        }
    }
    if let Some(ens) = equilibrium {
        let data_dir = out_dir.join("ensembles");
        std::fs::create_dir_all(&data_dir)?;
        container::save_ensemble(&data_dir.join("equilibrium.ergo"), ens)?;
    }
    Ok(())
}

/// Re-render a report from the raw payload in `raw_dir`, recomputing every
/// pass flag from the stored values and bounds.
pub fn rerender(raw_dir: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(raw_dir.join("raw.json"))?;
    let mut raw: RawRun = serde_json::from_str(&text).map_err(|e| {
        crate::error::Error::Container(format!("raw.json does not parse: {e}"))
    })?;
    raw.records = raw.records.iter().map(|r| r.reevaluated()).collect();
    Ok(RunReport {
        raw,
        elapsed_seconds: 0.0,
    })
}
