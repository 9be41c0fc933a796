//! Report files: `report.json`, `timing.json` and the CSV tables.

use std::fs;
use std::path::Path;

use amalgam_core::report::{EstimateReport, ReportRow};
use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;
use crate::experiments::Table;

pub const TOOLKIT: &str = "amalgam";

#[derive(Serialize)]
struct ReportFile<'a> {
    toolkit: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    report: &'a EstimateReport,
}

#[derive(Serialize)]
pub struct Timing {
    pub experiment: String,
    pub seconds: f64,
}

/// Flat CSV shape of a report row.
#[derive(Serialize)]
struct CsvRow<'a> {
    experiment: &'a str,
    case: &'a str,
    inputs: &'a str,
    predicted: f64,
    measured: f64,
    tolerance: f64,
    criterion: &'a str,
    pass: bool,
    r_squared: Option<f64>,
    estimate_holds: Option<bool>,
}

fn criterion_name(row: &ReportRow) -> &'static str {
    use amalgam_core::report::Criterion::*;
    match row.criterion {
        Absolute => "absolute",
        Relative => "relative",
        AtMost => "at-most",
        AtLeast => "at-least",
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"").with_context(|| format!("{} is not writable", dir.display()))?;
    fs::remove_file(&probe).ok();
    Ok(())
}

pub fn write_rows(dir: &Path, experiment: &str, rows: &[&ReportRow]) -> Result<()> {
    let path = dir.join(format!("{experiment}.csv"));
    let mut w =
        csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(CsvRow {
            experiment: &r.experiment,
            case: &r.case,
            inputs: &r.inputs,
            predicted: r.predicted,
            measured: r.measured,
            tolerance: r.tolerance,
            criterion: criterion_name(r),
            pass: r.pass,
            r_squared: r.r_squared,
            estimate_holds: r.estimate_holds,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table(dir: &Path, t: &Table) -> Result<()> {
    let path = dir.join(format!("{}.csv", t.name));
    fs::write(&path, &t.bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn write_report(dir: &Path, cfg: &RunConfig, report: &EstimateReport) -> Result<()> {
    let file = ReportFile {
        toolkit: TOOLKIT,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        report,
    };
    let json = serde_json::to_string_pretty(&file)?;
    fs::write(dir.join("report.json"), json + "\n").context("writing report.json")
}

pub fn write_timing(dir: &Path, timing: &[Timing]) -> Result<()> {
    let json = serde_json::to_string_pretty(timing)?;
    fs::write(dir.join("timing.json"), json + "\n").context("writing timing.json")
}
