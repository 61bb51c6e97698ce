use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use nnls_core::experiments::{ExperimentReport, TimeSeries};

use crate::config::OutputFormat;

pub const REPORT_FILE: &str = "report.txt";
pub const SERIES_FILE: &str = "timeseries.csv";

/// Exponent form with 17 significant digits, enough to round-trip any double.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn write_series(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(&series.columns)?;
    for row in &series.rows {
        w.write_record(row.iter().map(|&v| format_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let columns = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| {
            rec?.iter()
                .map(|f| f.parse::<f64>().with_context(|| format!("bad number `{f}`")))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(TimeSeries { columns, rows })
}

/// Writes the report and, when present, its time series. Returns the files written.
pub fn write_outputs(
    dir: &Path,
    report: &ExperimentReport,
    formats: &std::collections::BTreeSet<OutputFormat>,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    if formats.contains(&OutputFormat::Record) {
        let path = dir.join(REPORT_FILE);
        fs::write(&path, report.to_record()).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    if let (true, Some(series)) = (formats.contains(&OutputFormat::Csv), &report.series) {
        let path = dir.join(SERIES_FILE);
        write_series(&path, series)?;
        written.push(path);
    }
    Ok(written)
}
