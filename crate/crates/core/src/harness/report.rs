//! Experiment reports and their JSON and CSV encodings.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::campaign::CampaignConfig;
use crate::error::{Error, Result};
use crate::solvers::Method;

/// One (trial, method) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub method: Option<Method>,
    pub budget: Option<usize>,
    pub spectral_err_sq: Option<f64>,
    pub frobenius_err_sq: Option<f64>,
    /// `None` when the angle is unbounded.
    pub tan_theta_init: Option<f64>,
    pub bound: f64,
    pub frobenius_bound: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub total: usize,
    pub passed: usize,
    pub pass_rate: f64,
    pub guaranteed_rate: f64,
    pub required_rate: f64,
    pub overall_pass: bool,
}

impl Aggregate {
    pub fn from_records(records: &[TrialRecord], guaranteed_rate: f64, required_rate: f64) -> Self {
        let total = records.len();
        let passed = records.iter().filter(|r| r.passed).count();
        let pass_rate = if total == 0 { 0.0 } else { passed as f64 / total as f64 };
        Self {
            total,
            passed,
            pass_rate,
            guaranteed_rate,
            required_rate,
            overall_pass: total > 0 && pass_rate >= required_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: CampaignConfig,
    pub trials: Vec<TrialRecord>,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidParameter(format!("unknown format `{other}`"))),
        }
    }
}

/// Compact JSON formatter printing every float with 17 significant digits.
struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.8e}")
    }
}

/// Writes any serializable value as JSON with 17-digit floats.
pub fn write_json<T: Serialize, W: Write>(value: &T, writer: W) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(writer, SignificantDigits);
    value.serialize(&mut ser)?;
    Ok(())
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    write_json(value, &mut buf)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn from_json_str(text: &str) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(text)?)
}

/// One row per record after a header row.
pub fn write_csv<W: Write>(report: &ExperimentReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if report.trials.is_empty() {
        w.write_record([
            "trial", "seed", "method", "budget", "spectral_err_sq", "frobenius_err_sq",
            "tan_theta_init", "bound", "frobenius_bound", "passed",
        ])?;
    }
    for r in &report.trials {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(report: &ExperimentReport) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(report, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv writer emits UTF-8"))
}

/// Writes the report to `path`, or to standard output when `path` is `None`.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: Option<&Path>) -> Result<()> {
    let text = match format {
        ReportFormat::Json => to_json_string(report)? + "\n",
        ReportFormat::Csv => to_csv_string(report)?,
    };
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::campaign::{CampaignConfig, Claim};

    fn empty() -> ExperimentReport {
        ExperimentReport {
            config: CampaignConfig::new(Claim::LanczosRandom, 2, 8, 0.25),
            trials: Vec::new(),
            aggregate: Aggregate::from_records(&[], 0.7, 0.6),
        }
    }

    #[test]
    fn empty_report_is_valid_json() {
        let text = to_json_string(&empty()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["trials"], serde_json::json!([]));
        assert!(!v["aggregate"]["overall_pass"].as_bool().unwrap());
        assert_eq!(from_json_str(&text).unwrap(), empty());
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let text = to_json_string(&vec![0.1f64, 1.0 / 3.0]).unwrap();
        assert_eq!(text, "[1.0000000000000001e-1,3.3333333333333331e-1]");
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vec![0.1, 1.0 / 3.0]);
    }

    #[test]
    fn keys_follow_declaration_order() {
        let text = to_json_string(&empty()).unwrap();
        let c = text.find("\"config\"").unwrap();
        let t = text.find("\"trials\"").unwrap();
        let a = text.find("\"aggregate\"").unwrap();
        assert!(c < t && t < a);
    }

    #[test]
    fn csv_header_and_rows() {
        let mut r = empty();
        assert_eq!(to_csv_string(&r).unwrap().lines().count(), 1);
        let rec = TrialRecord {
            trial: 0,
            seed: 1,
            method: Some(Method::Power),
            budget: Some(3),
            spectral_err_sq: Some(0.5),
            frobenius_err_sq: Some(1.5),
            tan_theta_init: None,
            bound: 1.0,
            frobenius_bound: None,
            passed: true,
        };
        r.trials = vec![rec.clone(), TrialRecord { trial: 1, ..rec }];
        let text = to_csv_string(&r).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("trial,seed,method,budget"));
        assert!(lines[1].starts_with("0,1,power,3,0.5,1.5,,1.0,,true"));
    }
}
