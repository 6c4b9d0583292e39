//! CSV surfaces: per-step reports and aggregated results tables.

use super::HarnessError;
use crate::metrics::Summary;
use crate::ssl::{Method, StepReport};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const STEP_HEADER: &str = "repetition,step,pool_labeled,pool_pseudo,accepted,acc_time,acc_tf,acc_fused";

/// One line of the step-report CSV (test-set accuracies).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub repetition: usize,
    pub step: usize,
    pub pool_labeled: usize,
    pub pool_pseudo: usize,
    pub accepted: usize,
    pub acc_time: f64,
    pub acc_tf: Option<f64>,
    pub acc_fused: f64,
}

impl From<&StepReport> for StepRow {
    fn from(r: &StepReport) -> Self {
        Self {
            repetition: r.repetition,
            step: r.step,
            pool_labeled: r.pool_labeled,
            pool_pseudo: r.pool_pseudo,
            accepted: r.accepted,
            acc_time: r.test.time,
            acc_tf: r.test.tf,
            acc_fused: r.test.fused,
        }
    }
}

fn to_csv<T: Serialize>(rows: &[T], header: &str) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8");
    format!("{header}\n{body}")
}

fn from_csv<T: for<'de> Deserialize<'de>>(text: &str, header: &str) -> Result<Vec<T>, HarnessError> {
    let first = text.lines().next().unwrap_or_default();
    if first != header {
        return Err(HarnessError::Data(format!("unexpected csv header {first:?}")));
    }
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| HarnessError::Data(format!("csv: {e}")))
}

pub fn step_csv(rows: &[StepRow]) -> String {
    to_csv(rows, STEP_HEADER)
}

pub fn parse_step_csv(text: &str) -> Result<Vec<StepRow>, HarnessError> {
    from_csv(text, STEP_HEADER)
}

pub fn step_rows(reports: &[Vec<StepReport>]) -> Vec<StepRow> {
    reports.iter().flatten().map(StepRow::from).collect()
}

pub const RESULTS_HEADER: &str =
    "method,noise,training_pct,xi,split,repetitions,mean,std,ci95_low,ci95_high,selected";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalSplit {
    Validation,
    Test,
}

/// Accuracy aggregated over repetitions for one
/// (method, noise, training-data %, ξ, split) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsRow {
    pub method: Method,
    /// `clean` or the SNR in dB.
    pub noise: String,
    pub training_pct: u32,
    pub xi: f64,
    pub split: EvalSplit,
    pub repetitions: usize,
    pub mean: f64,
    pub std: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub selected: bool,
}

impl ResultsRow {
    pub fn new(method: Method, noise: &str, training_pct: u32, xi: f64, split: EvalSplit, values: &[f64]) -> Self {
        let s = Summary::of(values);
        Self {
            method,
            noise: noise.to_string(),
            training_pct,
            xi,
            split,
            repetitions: s.count,
            mean: s.mean,
            std: s.std,
            ci95_low: s.ci95_low,
            ci95_high: s.ci95_high,
            selected: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultsTable {
    pub rows: Vec<ResultsRow>,
}

impl ResultsTable {
    pub fn to_csv(&self) -> String {
        to_csv(&self.rows, RESULTS_HEADER)
    }

    pub fn from_csv(text: &str) -> Result<Self, HarnessError> {
        Ok(Self { rows: from_csv(text, RESULTS_HEADER)? })
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_csv(&text)
    }

    pub fn extend(&mut self, other: ResultsTable) {
        self.rows.extend(other.rows);
    }
}

/// Percentage of the segments available for training at `step`: the
/// labelled tenth plus one more tenth per step.
pub fn training_pct(step: usize) -> u32 {
    10 * step as u32
}

/// One row per step and split, aggregating the system accuracy over
/// repetitions.
pub fn summarize_steps(method: Method, noise: &str, xi: f64, reports: &[Vec<StepReport>]) -> ResultsTable {
    let steps = reports.iter().map(Vec::len).max().unwrap_or(0);
    let mut rows = Vec::new();
    for split in [EvalSplit::Validation, EvalSplit::Test] {
        for step in 0..steps {
            let values: Vec<f64> = reports
                .iter()
                .filter_map(|rep| rep.get(step))
                .map(|r| match split {
                    EvalSplit::Validation => r.validation.fused,
                    EvalSplit::Test => r.test.fused,
                })
                .collect();
            rows.push(ResultsRow::new(method, noise, training_pct(step + 1), xi, split, &values));
        }
    }
    ResultsTable { rows }
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| HarnessError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}
