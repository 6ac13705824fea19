//! CSV result tables.
//!
//! Every table starts with a `schema_version` column. Floats are written in
//! their shortest round-trip form, so parsing a cell gives back the exact
//! value that was computed.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use freqatt_core::metrics::{DeletionCurve, DeletionSpace, DeletionSteps, MetricConfig, MetricKind, MetricReport};
use freqatt_core::Method;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const REPORT_HEADER: [&str; 12] = [
    "schema_version",
    "dataset",
    "sample_id",
    "method",
    "metric",
    "value",
    "sigma",
    "n_perturb",
    "radius",
    "steps",
    "space",
    "seed",
];

pub const CURVE_HEADER: [&str; 8] = [
    "schema_version",
    "dataset",
    "sample_id",
    "method",
    "space",
    "point",
    "fraction",
    "score",
];

/// Per-sample distances after filtering toward each class.
pub const SIMILARITY_HEADER: [&str; 8] = [
    "schema_version",
    "dataset",
    "sample_id",
    "truth",
    "toward",
    "l2",
    "cosine",
    "cross_correlation",
];

/// Class-by-class means of [`SIMILARITY_HEADER`] rows.
pub const SIMILARITY_MATRIX_HEADER: [&str; 8] = [
    "schema_version",
    "dataset",
    "truth",
    "toward",
    "count",
    "l2",
    "cosine",
    "cross_correlation",
];

pub const RANK_HEADER: [&str; 6] = ["schema_version", "metric", "dataset", "method", "mean", "rank"];

pub const AVERAGE_RANK_HEADER: [&str; 5] = ["schema_version", "metric", "method", "average_rank", "datasets"];

pub const CURVE_MEANS_HEADER: [&str; 8] = [
    "schema_version",
    "dataset",
    "method",
    "space",
    "point",
    "fraction",
    "mean_score",
    "count",
];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn steps_label(steps: DeletionSteps) -> String {
    match steps {
        DeletionSteps::Even(n) => n.to_string(),
        DeletionSteps::PerUnit => "per-unit".into(),
    }
}

pub fn parse_steps(s: &str) -> Result<DeletionSteps, String> {
    if s == "per-unit" {
        return Ok(DeletionSteps::PerUnit);
    }
    match s.parse::<usize>() {
        Ok(n) if n >= 2 => Ok(DeletionSteps::Even(n)),
        _ => Err(format!("steps must be an integer >= 2 or `per-unit`, got `{s}`")),
    }
}

pub fn parse_space(s: &str) -> Result<DeletionSpace, String> {
    match s {
        "input" => Ok(DeletionSpace::Input),
        "frequency" => Ok(DeletionSpace::Frequency),
        other => Err(format!("unknown deletion space `{other}`")),
    }
}

/// One metric value of one sample and method.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    pub sample_id: usize,
    pub method: Method,
    pub metric: MetricKind,
    pub value: f64,
    pub config: MetricConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub dataset: String,
    pub sample_id: usize,
    pub method: Method,
    pub space: DeletionSpace,
    pub point: usize,
    pub fraction: f64,
    pub score: f64,
}

/// Rows of `reports` in report order, one per computed metric.
pub fn report_rows(dataset: &str, reports: &[MetricReport]) -> Vec<ReportRow> {
    reports
        .iter()
        .flat_map(|r| {
            MetricKind::ALL.into_iter().filter_map(move |metric| {
                r.get(metric).map(|value| ReportRow {
                    dataset: dataset.to_string(),
                    sample_id: r.sample_id,
                    method: r.method,
                    metric,
                    value,
                    config: r.config.clone(),
                })
            })
        })
        .collect()
}

pub fn curve_rows(dataset: &str, curves: &[(usize, Method, DeletionCurve)]) -> Vec<CurveRow> {
    curves
        .iter()
        .flat_map(|(sample_id, method, curve)| {
            curve
                .fractions
                .iter()
                .zip(&curve.scores)
                .enumerate()
                .map(move |(point, (&fraction, &score))| CurveRow {
                    dataset: dataset.to_string(),
                    sample_id: *sample_id,
                    method: *method,
                    space: curve.space,
                    point,
                    fraction,
                    score,
                })
        })
        .collect()
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::format(path, e))
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    csv::Reader::from_path(path).map_err(|e| CliError::format(path, e))
}

/// Writes `rows` (header first) and flushes.
pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    let err = |e: csv::Error| CliError::format(path, e);
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_report(path: &Path, rows: &[ReportRow]) -> Result<()> {
    write_table(
        path,
        &REPORT_HEADER,
        rows.iter().map(|r| {
            vec![
                SCHEMA_VERSION.to_string(),
                r.dataset.clone(),
                r.sample_id.to_string(),
                r.method.to_string(),
                r.metric.as_str().to_string(),
                fmt_f64(r.value),
                fmt_f64(r.config.sigma),
                r.config.n_perturb.to_string(),
                fmt_f64(r.config.radius),
                steps_label(r.config.steps),
                r.config.space.as_str().to_string(),
                r.config.seed.to_string(),
            ]
        }),
    )
}

pub fn write_curves(path: &Path, rows: &[CurveRow]) -> Result<()> {
    write_table(
        path,
        &CURVE_HEADER,
        rows.iter().map(|r| {
            vec![
                SCHEMA_VERSION.to_string(),
                r.dataset.clone(),
                r.sample_id.to_string(),
                r.method.to_string(),
                r.space.as_str().to_string(),
                r.point.to_string(),
                fmt_f64(r.fraction),
                fmt_f64(r.score),
            ]
        }),
    )
}

/// Checks the header and returns the records of a table.
pub fn read_table(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = reader(path)?;
    let found = r.headers().map_err(|e| CliError::format(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(CliError::format(path, format!("unexpected header {found:?}")));
    }
    let records = r
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CliError::format(path, e))?;
    for (i, rec) in records.iter().enumerate() {
        if rec.get(0) != Some(&SCHEMA_VERSION.to_string()) {
            return Err(CliError::format(path, format!("row {}: unsupported schema version", i + 2)));
        }
    }
    Ok(records)
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    rec.get(i)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| CliError::format(path, format!("bad `{name}` in {rec:?}")))
}

fn method_field(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<Method> {
    rec.get(i)
        .and_then(Method::parse)
        .ok_or_else(|| CliError::format(path, format!("bad method in {rec:?}")))
}

fn text_field<T>(path: &Path, rec: &csv::StringRecord, i: usize, parse: impl Fn(&str) -> Result<T, String>) -> Result<T> {
    parse(rec.get(i).unwrap_or("")).map_err(|e| CliError::format(path, e))
}

pub fn read_report(path: &Path) -> Result<Vec<ReportRow>> {
    read_table(path, &REPORT_HEADER)?
        .iter()
        .map(|rec| {
            Ok(ReportRow {
                dataset: rec[1].to_string(),
                sample_id: field(path, rec, 2, "sample_id")?,
                method: method_field(path, rec, 3)?,
                metric: MetricKind::parse(&rec[4])
                    .ok_or_else(|| CliError::format(path, format!("bad metric in {rec:?}")))?,
                value: field(path, rec, 5, "value")?,
                config: MetricConfig {
                    sigma: field(path, rec, 6, "sigma")?,
                    n_perturb: field(path, rec, 7, "n_perturb")?,
                    radius: field(path, rec, 8, "radius")?,
                    steps: text_field(path, rec, 9, parse_steps)?,
                    space: text_field(path, rec, 10, parse_space)?,
                    seed: field(path, rec, 11, "seed")?,
                },
            })
        })
        .collect()
}

pub fn read_curves(path: &Path) -> Result<Vec<CurveRow>> {
    read_table(path, &CURVE_HEADER)?
        .iter()
        .map(|rec| {
            Ok(CurveRow {
                dataset: rec[1].to_string(),
                sample_id: field(path, rec, 2, "sample_id")?,
                method: method_field(path, rec, 3)?,
                space: text_field(path, rec, 4, parse_space)?,
                point: field(path, rec, 5, "point")?,
                fraction: field(path, rec, 6, "fraction")?,
                score: field(path, rec, 7, "score")?,
            })
        })
        .collect()
}

/// Mean and count per `(dataset, method, metric)`.
pub fn method_means(rows: &[ReportRow]) -> BTreeMap<(String, Method, &'static str), (f64, usize)> {
    let mut sums: BTreeMap<(String, Method, &'static str), (f64, usize)> = BTreeMap::new();
    for r in rows {
        let entry = sums.entry((r.dataset.clone(), r.method, r.metric.as_str())).or_default();
        entry.0 += r.value;
        entry.1 += 1;
    }
    sums.into_iter()
        .map(|(k, (sum, n))| (k, (sum / n as f64, n)))
        .collect()
}

pub const SUMMARY_HEADER: [&str; 6] = ["schema_version", "dataset", "method", "metric", "mean", "count"];

pub fn write_summary(path: &Path, rows: &[ReportRow]) -> Result<()> {
    write_table(
        path,
        &SUMMARY_HEADER,
        method_means(rows).into_iter().map(|((dataset, method, metric), (mean, n))| {
            vec![
                SCHEMA_VERSION.to_string(),
                dataset,
                method.to_string(),
                metric.to_string(),
                fmt_f64(mean),
                n.to_string(),
            ]
        }),
    )
}
