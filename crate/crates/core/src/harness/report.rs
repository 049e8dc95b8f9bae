//! JSON and CSV emission for runs, comparisons and sweeps.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::SimReport;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {msg}")]
    Write { path: String, msg: String },
}

fn write_err(path: &Path, e: impl ToString) -> ReportError {
    ReportError::Write {
        path: path.display().to_string(),
        msg: e.to_string(),
    }
}

/// One line of a comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub label: String,
    pub riders: usize,
    pub matched: usize,
    pub matching_rate: Option<f64>,
    pub overhead_sum: f64,
    pub overhead_mean: f64,
    pub delay_mean: f64,
    pub delay_max: f64,
    pub cost: Option<f64>,
    pub base_driver_distance: f64,
    pub base_rider_distance: f64,
    pub matched_trip_distance: f64,
}

impl Summary {
    pub fn of(label: impl Into<String>, r: &SimReport) -> Self {
        let c = &r.cumulative;
        Self {
            label: label.into(),
            riders: c.total_riders,
            matched: c.matched_count,
            matching_rate: r.matching_rate,
            overhead_sum: c.overhead_sum,
            overhead_mean: r.overhead_mean,
            delay_mean: r.delay_mean,
            delay_max: r.delay_max,
            cost: r.cost,
            base_driver_distance: c.base_driver_distance,
            base_rider_distance: c.base_rider_distance,
            matched_trip_distance: c.matched_trip_distance,
        }
    }
}

#[derive(Serialize)]
struct BatchRow {
    index: u64,
    clock: f64,
    rider_arrivals: usize,
    driver_arrivals: usize,
    active_drivers: usize,
    pool: usize,
    matched: usize,
    expired: usize,
    added_distance: f64,
    pool_msp_sum: f64,
    cost: f64,
}

/// Per-batch table of a run.
pub fn batches_csv(r: &SimReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for b in &r.batches {
        w.serialize(BatchRow {
            index: b.index,
            clock: b.clock,
            rider_arrivals: b.rider_arrivals,
            driver_arrivals: b.driver_arrivals,
            active_drivers: b.active_drivers,
            pool: b.snapshot.total_riders,
            matched: b.snapshot.matched_count,
            expired: b.expired,
            added_distance: b.snapshot.overhead_sum,
            pool_msp_sum: b.snapshot.rider_msp_sum,
            cost: b.cost,
        })
        .expect("in-memory csv");
    }
    into_string(w)
}

pub fn rows_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    into_string(w)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv output is utf-8")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialise")
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| write_err(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| write_err(path, e))
}

/// Writes `<stem>.json`, `<stem>_batches.csv`, `<stem>_events.log` and
/// `<stem>_timing.csv` into `dir`. Only the timing file varies between
/// identical runs.
pub fn write_run(r: &SimReport, dir: &Path, stem: &str) -> Result<Vec<PathBuf>, ReportError> {
    let timing: String = std::iter::once("batch,wall_ms\n".to_string())
        .chain(r.batch_wall_ms.iter().enumerate().map(|(i, ms)| format!("{},{ms:.3}\n", i + 1)))
        .collect();
    let files = [
        (format!("{stem}.json"), to_json(r)),
        (format!("{stem}_batches.csv"), batches_csv(r)),
        (format!("{stem}_events.log"), r.event_log()),
        (format!("{stem}_timing.csv"), timing),
    ];
    let mut out = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        write_file(&path, &body)?;
        out.push(path);
    }
    Ok(out)
}
