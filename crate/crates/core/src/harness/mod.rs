//! Experiment orchestration: synthetic corpora, temporal splits, runs,
//! threshold sweeps, deployment gating and result files.

mod dataset;
mod experiment;
mod plot;
mod splits;
mod synth;
mod table;

pub use dataset::{preprocess, Corpus, PreprocessSpec, Segments, MANIFEST};
pub use experiment::{
    default_grid, deployment_gate, extract_features, gate_outcomes, parse_grid, prepare, run_experiment,
    sweep_threshold, write_run, ExperimentConfig, GateDecision, GateRow, Prepared, RunResults, DEFAULT_MIN_GAIN,
};
pub use plot::{line_chart, XAxis};
pub use splits::{make_temporal_splits, SplitPlan, SPLIT_COUNT};
pub use synth::{segment_noise_seed, synth_dataset, ClassDef, SynthSpec};
pub use table::{
    parse_step_csv, step_csv, step_rows, summarize_steps, training_pct, write_atomic, EvalSplit, ResultsRow,
    ResultsTable, StepRow, RESULTS_HEADER, STEP_HEADER,
};

use crate::classifier::ClassifierError;
use crate::fusion::FusionError;
use crate::metrics::MetricsError;
use crate::signal::SignalError;
use crate::ssl::PipelineError;
use crate::tfr::TfrError;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("class {class} has {count} segments, at least 10 are needed")]
    TooFewSegments { class: usize, count: usize },
    #[error("configuration: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Tfr(#[from] TfrError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl HarnessError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        HarnessError::Io(format!("{}: {e}", path.display()))
    }

    pub fn kind(&self) -> ErrorKind {
        use ErrorKind::*;
        match self {
            HarnessError::InvalidSpec(_) | HarnessError::Config(_) => Config,
            HarnessError::TooFewSegments { .. } | HarnessError::Data(_) | HarnessError::Io(_) => Data,
            HarnessError::Signal(e) => signal_kind(e),
            HarnessError::Tfr(e) => tfr_kind(e),
            HarnessError::Classifier(e) => classifier_kind(e),
            HarnessError::Fusion(e) => fusion_kind(e),
            HarnessError::Metrics(_) => Data,
            HarnessError::Pipeline(e) => match e {
                PipelineError::InvalidConfig(_) => Config,
                PipelineError::EmptyLabeledPool | PipelineError::SplitOverlap(_) | PipelineError::UnknownId(_) => Data,
                PipelineError::Classifier(e) => classifier_kind(e),
                PipelineError::Fusion(e) => fusion_kind(e),
                PipelineError::Metrics(_) => Data,
            },
        }
    }
}

/// Failure category, mapped onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 1,
            ErrorKind::Data => 2,
            ErrorKind::Numerical => 3,
        }
    }
}

fn signal_kind(e: &SignalError) -> ErrorKind {
    match e {
        SignalError::ZeroSignalEnergy(_) | SignalError::ZeroNoiseEnergy(_) => ErrorKind::Numerical,
        SignalError::SignalTooShort { .. }
        | SignalError::SegmentTooLong { .. }
        | SignalError::InvalidRecording(_)
        | SignalError::Ingest(_) => ErrorKind::Data,
        _ => ErrorKind::Config,
    }
}

fn tfr_kind(e: &TfrError) -> ErrorKind {
    match e {
        TfrError::InvalidParams(_) | TfrError::FactorTooSmall { .. } => ErrorKind::Config,
        TfrError::DegenerateLength(_) | TfrError::ShapeMismatch => ErrorKind::Data,
    }
}

fn classifier_kind(e: &ClassifierError) -> ErrorKind {
    match e {
        ClassifierError::NonFiniteFeatures | ClassifierError::DivergedLoss(_) => ErrorKind::Numerical,
        ClassifierError::InvalidSpec(_) => ErrorKind::Config,
        _ => ErrorKind::Data,
    }
}

fn fusion_kind(e: &FusionError) -> ErrorKind {
    match e {
        FusionError::NonFinite | FusionError::DegenerateColumn(_) => ErrorKind::Numerical,
        _ => ErrorKind::Data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(HarnessError::Config("x".into()).kind().exit_code(), 1);
        assert_eq!(HarnessError::TooFewSegments { class: 0, count: 3 }.kind().exit_code(), 2);
        let diverged = HarnessError::Pipeline(PipelineError::Classifier(ClassifierError::DivergedLoss(4)));
        assert_eq!(diverged.kind().exit_code(), 3);
        assert_eq!(HarnessError::Tfr(TfrError::InvalidParams("c".into())).kind(), ErrorKind::Config);
    }
}
