use super::dataset::{preprocess, Corpus, PreprocessSpec, Segments};
use super::splits::{make_temporal_splits, SplitPlan};
use super::synth::{synth_dataset, SynthSpec};
use super::table::{self, summarize_steps, write_atomic, EvalSplit, ResultsRow, ResultsTable, StepRow};
use super::HarnessError;
use crate::classifier::{persist, FeatureMatrix, View};
use crate::metrics::accuracy;
use crate::ssl::{run, DataViews, Method, RunOutcome, SslConfig, StepReport};
use crate::tfr::{compute_ckd_tfr, TfrConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_MIN_GAIN: f64 = 0.01;

/// One experiment, read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Directory written by `synth`/`preprocess`; relative paths resolve
    /// against the config file.
    pub dataset: Option<PathBuf>,
    /// Generate the data in memory instead; the default spec is used when
    /// neither source is given.
    pub synth: Option<SynthSpec>,
    pub preprocess: PreprocessSpec,
    pub tfr: TfrConfig,
    pub ssl: SslConfig,
    pub min_gain: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            synth: None,
            preprocess: PreprocessSpec::default(),
            tfr: TfrConfig::default(),
            ssl: SslConfig::default(),
            min_gain: DEFAULT_MIN_GAIN,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        match (&self.dataset, &self.synth) {
            (Some(_), Some(_)) => return Err(HarnessError::Config("set only one of `dataset` and `synth`".into())),
            (Some(_), None) => {}
            (None, s) => {
                s.clone().unwrap_or_default().validate()?;
            }
        }
        self.tfr.ckd.validate()?;
        self.ssl.validate()?;
        if !(self.min_gain >= 0.0) {
            return Err(HarnessError::Config(format!("min_gain must be >= 0, got {}", self.min_gain)));
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg: Self =
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        if let (Some(dir), Some(base)) = (&cfg.dataset, path.parent()) {
            if dir.is_relative() {
                cfg.dataset = Some(base.join(dir));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// `clean` or the SNR in dB of whichever stage adds noise.
    pub fn noise_label(&self) -> String {
        let snr = self.preprocess.snr_db.or(self.synth.as_ref().and_then(|s| s.snr_db));
        snr.map_or_else(|| "clean".to_string(), |v| format!("{v}"))
    }

    pub fn load_corpus(&self) -> Result<Corpus, HarnessError> {
        let corpus = match (&self.dataset, &self.synth) {
            (Some(dir), _) => Corpus::read_dir(dir)?,
            (None, spec) => synth_dataset(&spec.clone().unwrap_or_default())?,
        };
        if self.preprocess == PreprocessSpec::default() {
            Ok(corpus)
        } else {
            preprocess(&corpus, &self.preprocess)
        }
    }
}

/// Time features are the flattened `channels × samples` segment; TF
/// features the flattened downsampled CKD of every channel.
pub fn extract_features(segs: &Segments, tfr: &TfrConfig, with_tf: bool) -> Result<DataViews, HarnessError> {
    let rows: Vec<Vec<f64>> = segs.segments.iter().map(|s| s.iter().copied().collect()).collect();
    let time = FeatureMatrix::from_rows(&rows, View::Time)?;
    let tf = if with_tf {
        let rows = segs
            .segments
            .par_iter()
            .map(|s| compute_ckd_tfr(s.view(), segs.sample_rate_hz, tfr).map(|t| t.flatten()))
            .collect::<Result<Vec<_>, _>>()?;
        Some(FeatureMatrix::from_rows(&rows, View::Tf)?)
    } else {
        None
    };
    Ok(DataViews { time, tf, labels: segs.labels.clone(), class_count: segs.class_count() })
}

/// Everything an experiment needs in memory.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub data: DataViews,
    pub plan: SplitPlan,
    pub class_names: Vec<String>,
}

pub fn prepare(cfg: &ExperimentConfig, with_tf: bool) -> Result<Prepared, HarnessError> {
    let segs = cfg.load_corpus()?.segments()?;
    let plan = make_temporal_splits(&segs.ids_by_class())?;
    let data = extract_features(&segs, &cfg.tfr, with_tf)?;
    Ok(Prepared { data, plan, class_names: segs.class_names })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateDecision {
    Replace,
    Keep,
}

/// Replace the deployed model iff the retrained one gains at least
/// `min_gain` accuracy.
pub fn deployment_gate(original_acc: f64, updated_acc: f64, min_gain: f64) -> GateDecision {
    if updated_acc - original_acc >= min_gain {
        GateDecision::Replace
    } else {
        GateDecision::Keep
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRow {
    pub repetition: usize,
    pub original_acc: f64,
    pub updated_acc: f64,
    pub decision: GateDecision,
}

/// Test accuracy of the supervised time model against the final one.
pub fn gate_outcomes(outcomes: &[RunOutcome], data: &DataViews, test: &[usize], min_gain: f64) -> Result<Vec<GateRow>, HarnessError> {
    let x = data.time.select(test);
    let truth: Vec<usize> = test.iter().map(|&i| data.labels[i]).collect();
    outcomes
        .iter()
        .enumerate()
        .map(|(repetition, o)| {
            let acc = |m| -> Result<f64, HarnessError> {
                Ok(accuracy(&crate::classifier::predict(m, &x)?.argmax(), &truth)?)
            };
            let original_acc = acc(&o.original_time_model)?;
            let final_model = &o.final_state.models.as_ref().expect("a finished run has models").time;
            let updated_acc = acc(final_model)?;
            Ok(GateRow { repetition, original_acc, updated_acc, decision: deployment_gate(original_acc, updated_acc, min_gain) })
        })
        .collect()
}

/// Output of one `run`.
#[derive(Debug, Clone)]
pub struct RunResults {
    pub method: Method,
    pub outcomes: Vec<RunOutcome>,
    pub table: ResultsTable,
    pub gate: Vec<GateRow>,
}

impl RunResults {
    pub fn reports(&self) -> Vec<Vec<StepReport>> {
        self.outcomes.iter().map(|o| o.reports.clone()).collect()
    }

    pub fn step_rows(&self) -> Vec<StepRow> {
        table::step_rows(&self.reports())
    }
}

pub fn run_experiment(method: Method, cfg: &ExperimentConfig, prepared: &Prepared) -> Result<RunResults, HarnessError> {
    let ids = prepared.plan.to_split_ids();
    let outcomes = run(method, &cfg.ssl, &prepared.data, &ids)?;
    let reports: Vec<Vec<StepReport>> = outcomes.iter().map(|o| o.reports.clone()).collect();
    let table = summarize_steps(method, &cfg.noise_label(), cfg.ssl.xi, &reports);
    let gate = gate_outcomes(&outcomes, &prepared.data, &ids.test, cfg.min_gain)?;
    Ok(RunResults { method, outcomes, table, gate })
}

/// Writes `steps.csv`, `results.csv`, `deployment.csv` and the final models
/// of every repetition under `models/`.
pub fn write_run(dir: &Path, results: &RunResults) -> Result<(), HarnessError> {
    let models = dir.join("models");
    std::fs::create_dir_all(&models).map_err(|e| HarnessError::io(&models, e))?;
    let prefix = results.method.as_str();
    write_atomic(&dir.join(format!("{prefix}_steps.csv")), table::step_csv(&results.step_rows()).as_bytes())?;
    results.table.write(&dir.join(format!("{prefix}_results.csv")))?;

    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &results.gate {
        w.serialize(row).map_err(|e| HarnessError::Data(e.to_string()))?;
    }
    let gate = w.into_inner().map_err(|e| HarnessError::Data(e.to_string()))?;
    write_atomic(&dir.join(format!("{prefix}_deployment.csv")), &gate)?;

    for (rep, o) in results.outcomes.iter().enumerate() {
        let m = o.final_state.models.as_ref().expect("a finished run has models");
        write_atomic(&models.join(format!("{prefix}_rep{rep}_time.ddfm")), &persist::to_bytes(&m.time))?;
        if let Some(tf) = &m.tf {
            write_atomic(&models.join(format!("{prefix}_rep{rep}_tf.ddfm")), &persist::to_bytes(tf))?;
        }
        if let Some(weights) = &m.weights {
            write_atomic(&models.join(format!("{prefix}_rep{rep}_weights.json")), weights.to_json().as_bytes())?;
        }
    }
    Ok(())
}

/// `start:end:step`, inclusive of `end` up to round-off.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, HarnessError> {
    let bad = || HarnessError::Config(format!("grid must look like start:end:step, got {text:?}"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [start, end, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || !(end >= start) || !start.is_finite() || !end.is_finite() {
        return Err(bad());
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect())
}

pub fn default_grid() -> Vec<f64> {
    (0..10).map(|i| i as f64 / 10.0).collect()
}

/// Final-step validation accuracy of DDF per ξ. The selected row has the
/// highest mean; ties go to the smaller ξ.
pub fn sweep_threshold(grid: &[f64], cfg: &ExperimentConfig, prepared: &Prepared) -> Result<ResultsTable, HarnessError> {
    if grid.is_empty() {
        return Err(HarnessError::Config("empty threshold grid".into()));
    }
    let ids = prepared.plan.to_split_ids();
    let noise = cfg.noise_label();
    let pct = table::training_pct(cfg.ssl.steps);
    let mut rows = grid
        .par_iter()
        .map(|&xi| {
            let ssl = SslConfig { xi, ..cfg.ssl.clone() };
            let outcomes = run(Method::Ddf, &ssl, &prepared.data, &ids)?;
            let values: Vec<f64> = outcomes
                .iter()
                .map(|o| o.reports.last().expect("steps >= 1").validation.fused)
                .collect();
            Ok(ResultsRow::new(Method::Ddf, &noise, pct, xi, EvalSplit::Validation, &values))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let best = rows
        .iter()
        .enumerate()
        .fold(None::<(usize, f64, f64)>, |best, (i, r)| match best {
            Some((_, m, x)) if m > r.mean || (m == r.mean && x <= r.xi) => best,
            _ => Some((i, r.mean, r.xi)),
        })
        .map(|b| b.0)
        .expect("grid is nonempty");
    rows[best].selected = true;
    Ok(ResultsTable { rows })
}
