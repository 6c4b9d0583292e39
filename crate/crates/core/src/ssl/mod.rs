//! Iterative pseudo-labelling with dual-domain fusion, and the single-model
//! self-training baseline.
//!
//! Step 1 trains on the labelled split only. Every later step first offers
//! the next unlabelled split (plus anything rejected earlier) to the models
//! of the previous step, accepts confident class-balanced pseudo-labels, and
//! then retrains everything on the enlarged pool. Accepted pseudo-labels are
//! never revisited.

mod pipeline;
mod select;

pub use pipeline::{
    ddf_step, run, run_ddf, run_repetition, run_self_training, DataViews, Holdout, RunOutcome, SslState, TrainedModels,
};
pub use select::{balance_classes, threshold_select, Candidate, Candidates, SelectionSet};

use crate::classifier::{ClassifierError, ClassifierKind, ClassifierSpec};
use crate::fusion::{FusionError, FusionWeights};
use crate::metrics::MetricsError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("the labelled pool is empty")]
    EmptyLabeledPool,
    #[error("segment {0} is already in a pool")]
    SplitOverlap(usize),
    #[error("segment id {0} is out of range")]
    UnknownId(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ddf,
    SelfTraining,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ddf => "ddf",
            Method::SelfTraining => "self-training",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ddf" => Ok(Method::Ddf),
            "self-training" | "self_training" => Ok(Method::SelfTraining),
            other => Err(format!("unknown method {other:?} (expected ddf or self-training)")),
        }
    }
}

/// Which samples the fusion weights are fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionPool {
    /// Labelled plus accepted pseudo-labelled samples.
    #[default]
    TrainingPool,
    LabeledOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SslConfig {
    /// Confidence threshold in `[0, 1)`; acceptance needs a strictly larger score.
    pub xi: f64,
    pub steps: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub time_classifier: ClassifierSpec,
    pub tf_classifier: ClassifierSpec,
    pub fusion_pool: FusionPool,
}

impl Default for SslConfig {
    fn default() -> Self {
        Self {
            xi: 0.5,
            steps: 7,
            repetitions: 3,
            seed: 0,
            time_classifier: ClassifierSpec { kind: ClassifierKind::Mlp, ..Default::default() },
            tf_classifier: ClassifierSpec { init_scale: 0.01, ..Default::default() },
            fusion_pool: FusionPool::default(),
        }
    }
}

impl SslConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(0.0..1.0).contains(&self.xi) {
            return Err(PipelineError::InvalidConfig(format!("xi must lie in [0, 1), got {}", self.xi)));
        }
        if self.steps == 0 {
            return Err(PipelineError::InvalidConfig("steps must be >= 1".into()));
        }
        if self.repetitions == 0 {
            return Err(PipelineError::InvalidConfig("repetitions must be >= 1".into()));
        }
        self.time_classifier.validate()?;
        self.tf_classifier.validate()?;
        Ok(())
    }
}

/// Ids of the labelled split, the unlabelled splits in offering order, and
/// the held-out validation and test ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitIds {
    pub labeled: Vec<usize>,
    pub unlabeled: Vec<Vec<usize>>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabel {
    pub id: usize,
    pub label: usize,
    pub confidence: f64,
    pub step: usize,
}

/// Disjoint partition of the training ids.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Pool {
    /// `(id, true label)`
    pub labeled: Vec<(usize, usize)>,
    pub pseudo: Vec<PseudoLabel>,
    /// Splits not yet offered to the selector, in order.
    pub unlabeled_splits: Vec<Vec<usize>>,
    /// Offered but not yet accepted.
    pub pending: Vec<usize>,
}

impl Pool {
    /// Training ids and labels: labelled first, then pseudo in acceptance order.
    pub fn training_set(&self) -> (Vec<usize>, Vec<usize>) {
        self.labeled
            .iter()
            .copied()
            .chain(self.pseudo.iter().map(|p| (p.id, p.label)))
            .unzip()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.labeled.iter().any(|&(i, _)| i == id)
            || self.pseudo.iter().any(|p| p.id == id)
            || self.pending.contains(&id)
            || self.unlabeled_splits.iter().any(|s| s.contains(&id))
    }
}

/// Accuracy of each branch on one held-out set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracies {
    pub time: f64,
    /// Absent for self-training.
    pub tf: Option<f64>,
    /// The system decision; equals `time` for self-training.
    pub fused: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub repetition: usize,
    pub step: usize,
    pub pool_labeled: usize,
    pub pool_pseudo: usize,
    /// Pseudo-labels accepted at this step.
    pub accepted: usize,
    /// Samples offered to the selector at this step.
    pub offered: usize,
    pub validation: Accuracies,
    pub test: Accuracies,
    pub weights: Option<FusionWeights>,
}
