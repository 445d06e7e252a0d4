//! CSV tables, JSON sidecars and SVG charts.

use std::fs;
use std::path::{Path, PathBuf};

use idnc_core::simulator::{ExperimentSummary, ScenarioConfig, TrialResult};
use plotters::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::sweep::SweepTable;

pub const SWEEP_HEADER: [&str; 7] = ["variable", "value", "policy", "mean_delay", "std_delay", "trials", "seconds"];
pub const RUN_HEADER: [&str; 5] = ["trial", "total_delay", "mean_delay", "rounds", "completed"];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {}: {message}", path.display())]
    Write { path: PathBuf, message: String },
    #[error("nothing to write: the table is empty")]
    Empty,
}

fn write_error(path: &Path, e: impl ToString) -> OutputError {
    OutputError::Write {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OutputOptions {
    /// Fill the CSV `seconds` column with wall time. Off by default so
    /// reruns produce identical files.
    pub record_timing: bool,
}

/// Files written for one sweep or run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub chart: Option<PathBuf>,
}

fn prepare(out_dir: &Path) -> Result<(), OutputError> {
    fs::create_dir_all(out_dir).map_err(|e| write_error(out_dir, e))
}

pub fn sweep_csv(table: &SweepTable, options: OutputOptions) -> Result<Vec<u8>, csv::Error> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(SWEEP_HEADER)?;
    let variable = table.variable().name();
    for row in &table.rows {
        let seconds = if options.record_timing { row.seconds } else { 0.0 };
        writer.write_record([
            variable.to_string(),
            row.value.to_string(),
            row.policy.to_string(),
            row.summary.mean_delay.mean.to_string(),
            row.summary.mean_delay.std.to_string(),
            row.summary.trials.to_string(),
            seconds.to_string(),
        ])?;
    }
    Ok(writer.into_inner().expect("in-memory writer"))
}

#[derive(Serialize)]
struct Provenance<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

fn write_json<T: Serialize>(path: &Path, body: &T) -> Result<(), OutputError> {
    let doc = Provenance {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        body,
    };
    let text = serde_json::to_string_pretty(&doc).map_err(|e| write_error(path, e))?;
    fs::write(path, text + "\n").map_err(|e| write_error(path, e))
}

/// Writes `<stem>.csv`, `<stem>.json` and `<stem>.svg` into `out_dir`.
pub fn emit_outputs(
    table: &SweepTable,
    out_dir: &Path,
    stem: &str,
    options: OutputOptions,
) -> Result<Written, OutputError> {
    if table.rows.is_empty() {
        return Err(OutputError::Empty);
    }
    prepare(out_dir)?;
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let bytes = sweep_csv(table, options).map_err(|e| write_error(&csv_path, e))?;
    fs::write(&csv_path, bytes).map_err(|e| write_error(&csv_path, e))?;

    let json_path = out_dir.join(format!("{stem}.json"));
    write_json(&json_path, table)?;

    let chart_path = out_dir.join(format!("{stem}.svg"));
    draw_chart(table, &chart_path).map_err(|e| write_error(&chart_path, e))?;
    Ok(Written {
        csv: csv_path,
        json: json_path,
        chart: Some(chart_path),
    })
}

const PALETTE: [RGBColor; 5] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
];

fn draw_chart(table: &SweepTable, path: &Path) -> Result<(), Box<dyn std::error::Error>> {
    let xs = &table.spec.values;
    let (x_lo, x_hi) = (xs[0], xs[xs.len() - 1]);
    let pad = if x_hi > x_lo { 0.0 } else { 0.5 };
    let y_hi = table
        .rows
        .iter()
        .map(|r| r.summary.mean_delay.mean)
        .fold(0.0_f64, f64::max);
    let y_hi = if y_hi > 0.0 { y_hi * 1.1 } else { 1.0 };

    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(45)
        .y_label_area_size(60)
        .build_cartesian_2d((x_lo - pad)..(x_hi + pad), 0.0..y_hi)?;
    chart
        .configure_mesh()
        .x_desc(table.variable().axis_label())
        .y_desc("mean decoding delay")
        .axis_desc_style(("sans-serif", 16))
        .label_style(("sans-serif", 13))
        .draw()?;
    for (k, &policy) in table.spec.policies.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let points: Vec<(f64, f64)> = table
            .series(policy)
            .map(|r| (r.value, r.summary.mean_delay.mean))
            .collect();
        chart
            .draw_series(LineSeries::new(points.clone(), colour.stroke_width(2)))?
            .label(policy.name())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], colour.stroke_width(2)));
        chart.draw_series(points.into_iter().map(|p| Circle::new(p, 3, colour.filled())))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .label_font(("sans-serif", 13))
        .draw()?;
    root.present()?;
    Ok(())
}

#[derive(Serialize)]
struct RunRecord<'a> {
    config: &'a ScenarioConfig,
    summary: &'a ExperimentSummary,
    trials: &'a [TrialResult],
}

/// Per-trial records of a single scenario: `<stem>.csv` and `<stem>.json`.
pub fn emit_run(
    config: &ScenarioConfig,
    trials: &[TrialResult],
    out_dir: &Path,
    stem: &str,
) -> Result<Written, OutputError> {
    if trials.is_empty() {
        return Err(OutputError::Empty);
    }
    prepare(out_dir)?;
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut rows = vec![RUN_HEADER.map(String::from).to_vec()];
    for (k, t) in trials.iter().enumerate() {
        rows.push(vec![
            k.to_string(),
            t.total_delay.to_string(),
            (t.total_delay as f64 / config.devices as f64).to_string(),
            t.rounds_used.to_string(),
            t.completed.to_string(),
        ]);
    }
    for row in rows {
        writer.write_record(row).map_err(|e| write_error(&csv_path, e))?;
    }
    let bytes = writer.into_inner().map_err(|e| write_error(&csv_path, e))?;
    fs::write(&csv_path, bytes).map_err(|e| write_error(&csv_path, e))?;

    let json_path = out_dir.join(format!("{stem}.json"));
    let summary = ExperimentSummary::from_trials(config.devices, trials);
    write_json(
        &json_path,
        &RunRecord {
            config,
            summary: &summary,
            trials,
        },
    )?;
    Ok(Written {
        csv: csv_path,
        json: json_path,
        chart: None,
    })
}
