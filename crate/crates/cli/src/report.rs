use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::run::RunReport;
use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Full structured report as pretty JSON.
    Json,
    /// One row per observable pair and index `i`, ready for plotting.
    CsvDecay,
}

#[derive(Serialize)]
struct DecayRow<'a> {
    pair: &'a str,
    i: usize,
    corr_real: f64,
    corr_imag: f64,
    target: f64,
    abs_deviation: f64,
    cesaro_mean: f64,
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn emit_report(report: &RunReport, format: ReportFormat, path: &Path) -> Result<(), RunError> {
    match format {
        ReportFormat::Json => {
            let mut out = BufWriter::new(File::create(path).map_err(io_error(path))?);
            serde_json::to_writer_pretty(&mut out, report).map_err(|e| RunError::Io {
                path: path.to_path_buf(),
                source: e.into(),
            })?;
            out.write_all(b"\n").map_err(io_error(path))?;
            out.flush().map_err(io_error(path))
        }
        ReportFormat::CsvDecay => write_decay_csv(report, path),
    }
}

fn write_decay_csv(report: &RunReport, path: &Path) -> Result<(), RunError> {
    let csv_error = |e: csv::Error| RunError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let m = report.config.m;
    if report.pairs.is_empty() {
        w.write_record([
            "pair",
            "i",
            "corr_real",
            "corr_imag",
            "target",
            "abs_deviation",
            "cesaro_mean",
        ])
        .map_err(csv_error)?;
    }
    for pair in &report.pairs {
        let mut sum = 0.0;
        for (k, z) in pair.correlations.iter().enumerate() {
            sum += z.re;
            w.serialize(DecayRow {
                pair: &pair.label,
                i: m + k,
                corr_real: z.re,
                corr_imag: z.im,
                target: pair.target,
                abs_deviation: (z.re - pair.target).abs(),
                cesaro_mean: sum / (k + 1) as f64,
            })
            .map_err(csv_error)?;
        }
    }
    w.flush().map_err(io_error(path))
}

/// Wall time and thread count, kept apart from the deterministic report.
pub fn write_timing(report: &RunReport, threads: usize, path: &Path) -> Result<(), RunError> {
    let body = serde_json::json!({
        "wall_time_seconds": report.wall_time.as_secs_f64(),
        "threads": threads,
    });
    std::fs::write(path, format!("{body:#}\n")).map_err(io_error(path))
}
