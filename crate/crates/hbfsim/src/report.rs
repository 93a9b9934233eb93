//! Report emission: per-scheme CDF tables, percentile summaries, and mean
//! power splits, written as CSV or JSON with a versioned schema.
//!
//! Emission is byte-stable: identical results produce identical files.
//! Floats are rendered with the shortest round-trip representation, record
//! grouping follows first appearance, and JSON field order is fixed.

use crate::harness::{cdf, CdfSeries};
use crate::metrics::UserResult;
use crate::{Error, Result};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Schema tag written into every artifact.
pub const SCHEMA_VERSION: &str = "v1";

/// Table serialization format. The percentile summary is always JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!(
                "unknown report format '{other}' (expected csv or json)"
            ))),
        }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    schema: String,
    record_count: usize,
    schemes: Vec<SchemeSummary<'a>>,
}

#[derive(Serialize)]
struct SchemeSummary<'a> {
    scheme: &'a str,
    records: usize,
    p10: f64,
    p50: f64,
    p90: f64,
    p95: f64,
    mean_spectral_efficiency: f64,
    mean_signal_watts: f64,
    mean_interference_watts: f64,
    regularized_records: usize,
}

#[derive(Serialize)]
struct CdfTable<'a> {
    schema: String,
    scheme: &'a str,
    spectral_efficiency_bits_per_hz: &'a [f64],
    probability: &'a [f64],
}

#[derive(Serialize)]
struct PowersTable<'a> {
    schema: String,
    rows: Vec<PowersRow<'a>>,
}

#[derive(Serialize)]
struct PowersRow<'a> {
    scheme: &'a str,
    mean_signal_watts: f64,
    mean_interference_watts: f64,
}

struct SchemeGroup<'a> {
    scheme: &'a str,
    records: Vec<&'a UserResult>,
    series: CdfSeries,
}

/// Writes the campaign artifacts into `out_dir` (created if missing) and
/// returns the paths written.
///
/// Artifacts: one `cdf_<scheme>` table per scheme and one `powers` table,
/// in the requested format; plus `summary.json` with interpolated
/// percentiles and mean powers per scheme. Schemes appear in first-record
/// order. Empty input is a configuration error.
pub fn emit_report(
    results: &[UserResult],
    format: ReportFormat,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let groups = group_by_scheme(results)?;
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    for group in &groups {
        let path = out_dir.join(format!("cdf_{}.{}", group.scheme, format.extension()));
        let body = match format {
            ReportFormat::Csv => cdf_csv(group),
            ReportFormat::Json => to_json_pretty(&CdfTable {
                schema: format!("cdf.{SCHEMA_VERSION}"),
                scheme: group.scheme,
                spectral_efficiency_bits_per_hz: group.series.values(),
                probability: group.series.probabilities(),
            })?,
        };
        std::fs::write(&path, body)?;
        written.push(path);
    }

    let path = out_dir.join(format!("powers.{}", format.extension()));
    let body = match format {
        ReportFormat::Csv => powers_csv(&groups),
        ReportFormat::Json => to_json_pretty(&PowersTable {
            schema: format!("powers.{SCHEMA_VERSION}"),
            rows: groups
                .iter()
                .map(|g| {
                    let (signal, interference) = mean_powers(&g.records);
                    PowersRow {
                        scheme: g.scheme,
                        mean_signal_watts: signal,
                        mean_interference_watts: interference,
                    }
                })
                .collect(),
        })?,
    };
    std::fs::write(&path, body)?;
    written.push(path);

    let summary = Summary {
        schema: format!("summary.{SCHEMA_VERSION}"),
        record_count: results.len(),
        schemes: groups
            .iter()
            .map(|g| {
                let (signal, interference) = mean_powers(&g.records);
                let mean_se = g.records.iter().map(|r| r.spectral_efficiency).sum::<f64>()
                    / g.records.len() as f64;
                SchemeSummary {
                    scheme: g.scheme,
                    records: g.records.len(),
                    p10: g.series.percentile(10.0),
                    p50: g.series.percentile(50.0),
                    p90: g.series.percentile(90.0),
                    p95: g.series.percentile(95.0),
                    mean_spectral_efficiency: mean_se,
                    mean_signal_watts: signal,
                    mean_interference_watts: interference,
                    regularized_records: g
                        .records
                        .iter()
                        .filter(|r| r.whitening_regularized)
                        .count(),
                }
            })
            .collect(),
    };
    let path = out_dir.join("summary.json");
    std::fs::write(&path, to_json_pretty(&summary)?)?;
    written.push(path);

    Ok(written)
}

fn group_by_scheme(results: &[UserResult]) -> Result<Vec<SchemeGroup<'_>>> {
    if results.is_empty() {
        return Err(Error::Config(
            "nothing to report: no records, so the scheme list is empty".into(),
        ));
    }
    let mut buckets: Vec<(&str, Vec<&UserResult>)> = Vec::new();
    for record in results {
        match buckets
            .iter_mut()
            .find(|(scheme, _)| *scheme == record.scheme)
        {
            Some((_, records)) => records.push(record),
            None => buckets.push((&record.scheme, vec![record])),
        }
    }
    buckets
        .into_iter()
        .map(|(scheme, records)| {
            let values: Vec<f64> = records.iter().map(|r| r.spectral_efficiency).collect();
            Ok(SchemeGroup {
                scheme,
                records,
                series: cdf(&values)?,
            })
        })
        .collect()
}

fn mean_powers(records: &[&UserResult]) -> (f64, f64) {
    let n = records.len() as f64;
    let signal = records.iter().map(|r| r.signal_power).sum::<f64>() / n;
    let interference = records.iter().map(|r| r.interference_power).sum::<f64>() / n;
    (signal, interference)
}

fn cdf_csv(group: &SchemeGroup<'_>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema: cdf.{SCHEMA_VERSION}");
    let _ = writeln!(out, "# scheme: {}", group.scheme);
    out.push_str("spectral_efficiency_bits_per_hz,probability\n");
    for (v, p) in group
        .series
        .values()
        .iter()
        .zip(group.series.probabilities())
    {
        let _ = writeln!(out, "{v},{p}");
    }
    out
}

fn powers_csv(groups: &[SchemeGroup<'_>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# schema: powers.{SCHEMA_VERSION}");
    out.push_str("scheme,mean_signal_watts,mean_interference_watts\n");
    for group in groups {
        let (signal, interference) = mean_powers(&group.records);
        let _ = writeln!(out, "{},{signal},{interference}", group.scheme);
    }
    out
}

fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Serialize(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(scheme: &str, se: f64, signal: f64, interference: f64) -> UserResult {
        UserResult {
            scheme: scheme.to_string(),
            drop_index: 0,
            cell: 0,
            user_in_cell: 0,
            seed: 1,
            spectral_efficiency: se,
            signal_power: signal,
            interference_power: interference,
            los: true,
            whitening_regularized: false,
        }
    }

    fn sample_results() -> Vec<UserResult> {
        vec![
            record("baseline", 1.0, 1e-9, 1e-11),
            record("baseline", 2.0, 2e-9, 2e-11),
            record("baseline", 3.0, 3e-9, 3e-11),
            record("baseline", 4.0, 4e-9, 4e-11),
            record("slnr", 2.5, 2e-9, 1e-13),
            record("slnr", 3.5, 3e-9, 2e-13),
        ]
    }

    #[test]
    fn empty_results_are_a_configuration_error() {
        let dir = tempfile::tempdir().unwrap();
        match emit_report(&[], ReportFormat::Csv, dir.path()) {
            Err(Error::Config(_)) => {}
            other => panic!("expected a configuration error, got {other:?}"),
        }
    }

    #[test]
    fn csv_emission_names_and_fills_the_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let written = emit_report(&sample_results(), ReportFormat::Csv, dir.path()).unwrap();
        let names: Vec<String> = written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            names,
            [
                "cdf_baseline.csv",
                "cdf_slnr.csv",
                "powers.csv",
                "summary.json"
            ]
        );

        let cdf_text = std::fs::read_to_string(&written[0]).unwrap();
        assert!(cdf_text.contains("spectral_efficiency_bits_per_hz,probability"));
        assert!(cdf_text.contains("1,0.25"));
        assert!(cdf_text.contains("4,1"));

        let powers = std::fs::read_to_string(&written[2]).unwrap();
        let first_row = powers.lines().nth(2).unwrap();
        let fields: Vec<&str> = first_row.split(',').collect();
        assert_eq!(fields[0], "baseline");
        let signal: f64 = fields[1].parse().unwrap();
        let interference: f64 = fields[2].parse().unwrap();
        assert!((signal - 2.5e-9).abs() < 1e-15 * 2.5e-9);
        assert!((interference - 2.5e-11).abs() < 1e-15 * 2.5e-11);

        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&written[3]).unwrap()).unwrap();
        assert_eq!(summary["schema"], "summary.v1");
        assert_eq!(summary["record_count"], 6);
        assert_eq!(summary["schemes"][0]["p50"], 2.5);
        assert_eq!(summary["schemes"][0]["records"], 4);
    }

    #[test]
    fn identical_results_produce_byte_identical_files() {
        let results = sample_results();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let a = emit_report(&results, ReportFormat::Csv, dir_a.path()).unwrap();
        let b = emit_report(&results, ReportFormat::Csv, dir_b.path()).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            assert_eq!(
                std::fs::read(pa).unwrap(),
                std::fs::read(pb).unwrap(),
                "{pa:?} differs from {pb:?}"
            );
        }
    }

    #[test]
    fn json_and_csv_carry_identical_values() {
        let results = sample_results();
        let dir_csv = tempfile::tempdir().unwrap();
        let dir_json = tempfile::tempdir().unwrap();
        let from_csv = emit_report(&results, ReportFormat::Csv, dir_csv.path()).unwrap();
        let from_json = emit_report(&results, ReportFormat::Json, dir_json.path()).unwrap();

        // The percentile summary is identical bytes regardless of format.
        assert_eq!(
            std::fs::read(from_csv.last().unwrap()).unwrap(),
            std::fs::read(from_json.last().unwrap()).unwrap()
        );

        // The CDF tables hold the same values row for row.
        let csv_text = std::fs::read_to_string(&from_csv[0]).unwrap();
        let parsed_csv: Vec<(f64, f64)> = csv_text
            .lines()
            .skip(3)
            .map(|line| {
                let (v, p) = line.split_once(',').unwrap();
                (v.parse().unwrap(), p.parse().unwrap())
            })
            .collect();
        let json_value: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&from_json[0]).unwrap()).unwrap();
        let values = json_value["spectral_efficiency_bits_per_hz"]
            .as_array()
            .unwrap();
        let probs = json_value["probability"].as_array().unwrap();
        assert_eq!(parsed_csv.len(), values.len());
        for (i, (v, p)) in parsed_csv.iter().enumerate() {
            assert_eq!(*v, values[i].as_f64().unwrap());
            assert_eq!(*p, probs[i].as_f64().unwrap());
        }
    }

    #[test]
    fn unwritable_destination_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("blocker");
        std::fs::write(&blocker, "plain file").unwrap();
        match emit_report(&sample_results(), ReportFormat::Csv, &blocker.join("sub")) {
            Err(Error::Io(_)) => {}
            other => panic!("expected an i/o error, got {other:?}"),
        }
    }
}
