use super::{
    balance_classes, threshold_select, Accuracies, FusionPool, Method, PipelineError, Pool, PseudoLabel,
    SplitIds, SslConfig, StepReport,
};
use crate::classifier::{fit, predict, ClassifierSpec, FeatureMatrix, LogitsMatrix, Model};
use crate::fusion::{decide, fit_fusion_weights, fused_predictions, standardize, FusionWeights, OneHotLabels};
use crate::metrics::accuracy;
use rayon::prelude::*;
use std::collections::HashSet;

/// Both feature views of every segment, indexed by segment id, with the
/// true labels (consulted only for the labelled split and for evaluation).
#[derive(Debug, Clone)]
pub struct DataViews {
    pub time: FeatureMatrix,
    pub tf: Option<FeatureMatrix>,
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl DataViews {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn labels_of(&self, ids: &[usize]) -> Vec<usize> {
        ids.iter().map(|&i| self.labels[i]).collect()
    }

    fn tf(&self) -> Result<&FeatureMatrix, PipelineError> {
        self.tf
            .as_ref()
            .ok_or_else(|| PipelineError::InvalidConfig("dual-domain fusion needs time-frequency features".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModels {
    pub time: Model,
    pub tf: Option<Model>,
    pub weights: Option<FusionWeights>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SslState {
    pub method: Method,
    pub repetition: usize,
    /// Completed steps.
    pub step: usize,
    pub pool: Pool,
    pub models: Option<TrainedModels>,
}

impl SslState {
    pub fn new(method: Method, repetition: usize, splits: &SplitIds, data: &DataViews) -> Result<Self, PipelineError> {
        let mut seen = HashSet::new();
        let all = splits
            .labeled
            .iter()
            .chain(splits.unlabeled.iter().flatten())
            .chain(&splits.validation)
            .chain(&splits.test);
        for &id in all {
            if id >= data.len() {
                return Err(PipelineError::UnknownId(id));
            }
            if !seen.insert(id) {
                return Err(PipelineError::SplitOverlap(id));
            }
        }
        Ok(Self {
            method,
            repetition,
            step: 0,
            pool: Pool {
                labeled: splits.labeled.iter().map(|&i| (i, data.labels[i])).collect(),
                pseudo: Vec::new(),
                unlabeled_splits: splits.unlabeled.clone(),
                pending: Vec::new(),
            },
            models: None,
        })
    }
}

/// SplitMix64 finalizer over the combined inputs.
fn derive_seed(base: u64, repetition: usize, step: usize, salt: u64) -> u64 {
    let mut z = base
        ^ (repetition as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (step as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ salt.wrapping_mul(0x1656_67B1_9E37_79F9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn seeded(spec: &ClassifierSpec, base: u64, repetition: usize, step: usize, salt: u64) -> ClassifierSpec {
    ClassifierSpec {
        seed: derive_seed(base ^ spec.seed, repetition, step, salt),
        ..spec.clone()
    }
}

/// Standardized system scores: fused for DDF, the time model's own for
/// self-training.
fn system_scores(
    method: Method,
    models: &TrainedModels,
    data: &DataViews,
    ids: &[usize],
) -> Result<(LogitsMatrix, Option<LogitsMatrix>, LogitsMatrix), PipelineError> {
    let yt = predict(&models.time, &data.time.select(ids))?;
    match method {
        Method::SelfTraining => {
            let system = standardize(&yt.values().to_owned())?;
            Ok((yt, None, system))
        }
        Method::Ddf => {
            let tf_model = models.tf.as_ref().expect("ddf trains a tf model");
            let weights = models.weights.as_ref().expect("ddf fits weights");
            let ytf = predict(tf_model, &data.tf()?.select(ids))?;
            let fused = fused_predictions(&yt, &ytf, weights)?;
            Ok((yt, Some(ytf), fused))
        }
    }
}

fn evaluate(method: Method, models: &TrainedModels, data: &DataViews, ids: &[usize]) -> Result<Accuracies, PipelineError> {
    let truth = data.labels_of(ids);
    if ids.is_empty() {
        return Ok(Accuracies { time: 0.0, tf: models.tf.as_ref().map(|_| 0.0), fused: 0.0 });
    }
    let (yt, ytf, system) = system_scores(method, models, data, ids)?;
    Ok(Accuracies {
        time: accuracy(&yt.argmax(), &truth)?,
        tf: ytf.map(|m| accuracy(&m.argmax(), &truth)).transpose()?,
        fused: accuracy(&decide(&system), &truth)?,
    })
}

/// Held-out ids used for reporting only.
#[derive(Debug, Clone, Copy)]
pub struct Holdout<'a> {
    pub validation: &'a [usize],
    pub test: &'a [usize],
}

/// One training step.
///
/// With `next_split`, the previous step's models first score the pending
/// residue plus the new split; confident, class-balanced samples join the
/// pseudo pool with their argmax labels. Then the classifiers (and, for
/// DDF, the fusion weights) are refitted on labelled ∪ pseudo.
pub fn ddf_step(
    mut state: SslState,
    next_split: Option<Vec<usize>>,
    data: &DataViews,
    cfg: &SslConfig,
    holdout: Holdout<'_>,
) -> Result<(SslState, StepReport), PipelineError> {
    let step = state.step + 1;
    let method = state.method;
    let mut accepted = 0;
    let mut offered = 0;

    if let Some(split) = next_split {
        let taken: HashSet<usize> = state
            .pool
            .labeled
            .iter()
            .map(|&(i, _)| i)
            .chain(state.pool.pseudo.iter().map(|p| p.id))
            .chain(state.pool.pending.iter().copied())
            .collect();
        if let Some(&dup) = split.iter().find(|id| taken.contains(id)) {
            return Err(PipelineError::SplitOverlap(dup));
        }
        if let Some(&bad) = split.iter().find(|&&id| id >= data.len()) {
            return Err(PipelineError::UnknownId(bad));
        }
        let models = state
            .models
            .as_ref()
            .ok_or_else(|| PipelineError::InvalidConfig("a split was offered before any model was trained".into()))?;

        let mut ids = std::mem::take(&mut state.pool.pending);
        ids.extend(split);
        offered = ids.len();
        if !ids.is_empty() {
            let (_, _, scores) = system_scores(method, models, data, &ids)?;
            let selection = balance_classes(&threshold_select(&scores, &ids, cfg.xi));
            let chosen: HashSet<usize> = selection.iter().map(|(id, _, _)| id).collect();
            for (id, label, confidence) in selection.iter() {
                state.pool.pseudo.push(PseudoLabel { id, label, confidence, step });
            }
            accepted = chosen.len();
            state.pool.pending = ids.into_iter().filter(|id| !chosen.contains(id)).collect();
        }
    }

    if state.pool.labeled.is_empty() {
        return Err(PipelineError::EmptyLabeledPool);
    }
    let (train_ids, train_labels) = state.pool.training_set();
    let n = data.class_count;
    let time_spec = seeded(&cfg.time_classifier, cfg.seed, state.repetition, step, 1);

    let models = match method {
        Method::SelfTraining => {
            let time = fit(&time_spec, &data.time.select(&train_ids), &train_labels, n)?;
            TrainedModels { time, tf: None, weights: None }
        }
        Method::Ddf => {
            let tf_features = data.tf()?.select(&train_ids);
            let tf_spec = seeded(&cfg.tf_classifier, cfg.seed, state.repetition, step, 2);
            let time_features = data.time.select(&train_ids);
            let (time, tf) = rayon::join(
                || fit(&time_spec, &time_features, &train_labels, n),
                || fit(&tf_spec, &tf_features, &train_labels, n),
            );
            let (time, tf) = (time?, tf?);
            let (fusion_ids, fusion_labels) = match cfg.fusion_pool {
                FusionPool::TrainingPool => (train_ids.clone(), train_labels.clone()),
                FusionPool::LabeledOnly => state.pool.labeled.iter().copied().unzip(),
            };
            let yt = predict(&time, &data.time.select(&fusion_ids))?;
            let ytf = predict(&tf, &data.tf()?.select(&fusion_ids))?;
            let truth = OneHotLabels::from_labels(&fusion_labels, n)?;
            let weights = fit_fusion_weights(&yt, &ytf, &truth)?;
            TrainedModels { time, tf: Some(tf), weights: Some(weights) }
        }
    };

    let report = StepReport {
        repetition: state.repetition,
        step,
        pool_labeled: state.pool.labeled.len(),
        pool_pseudo: state.pool.pseudo.len(),
        accepted,
        offered,
        validation: evaluate(method, &models, data, holdout.validation)?,
        test: evaluate(method, &models, data, holdout.test)?,
        weights: models.weights.clone(),
    };
    log::debug!(
        "{} rep {} step {step}: pool {}+{}, accepted {accepted}/{offered}, test fused {:.4}",
        method.as_str(),
        state.repetition,
        report.pool_labeled,
        report.pool_pseudo,
        report.test.fused
    );
    state.models = Some(models);
    state.step = step;
    Ok((state, report))
}

/// Everything one repetition produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub reports: Vec<StepReport>,
    /// Time model after the supervised first step.
    pub original_time_model: Model,
    pub final_state: SslState,
}

pub fn run_repetition(
    method: Method,
    cfg: &SslConfig,
    data: &DataViews,
    splits: &SplitIds,
    repetition: usize,
) -> Result<RunOutcome, PipelineError> {
    let holdout = Holdout { validation: &splits.validation, test: &splits.test };
    let mut state = SslState::new(method, repetition, splits, data)?;
    let mut reports = Vec::with_capacity(cfg.steps);
    let mut original = None;
    for step in 1..=cfg.steps {
        let next = if step == 1 {
            None
        } else {
            Some(state.pool.unlabeled_splits.remove(0))
        };
        let (next_state, report) = ddf_step(state, next, data, cfg, holdout)?;
        state = next_state;
        if step == 1 {
            original = state.models.as_ref().map(|m| m.time.clone());
        }
        reports.push(report);
    }
    Ok(RunOutcome {
        reports,
        original_time_model: original.expect("at least one step"),
        final_state: state,
    })
}

/// All repetitions of one method; repetitions run in parallel and differ
/// only in the classifier seeds.
pub fn run(method: Method, cfg: &SslConfig, data: &DataViews, splits: &SplitIds) -> Result<Vec<RunOutcome>, PipelineError> {
    cfg.validate()?;
    if cfg.steps > 1 + splits.unlabeled.len() {
        return Err(PipelineError::InvalidConfig(format!(
            "{} steps need {} unlabelled splits, only {} given",
            cfg.steps,
            cfg.steps - 1,
            splits.unlabeled.len()
        )));
    }
    if method == Method::Ddf {
        data.tf()?;
    }
    (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(method, cfg, data, splits, rep))
        .collect()
}

pub fn run_ddf(cfg: &SslConfig, data: &DataViews, splits: &SplitIds) -> Result<Vec<Vec<StepReport>>, PipelineError> {
    Ok(run(Method::Ddf, cfg, data, splits)?.into_iter().map(|o| o.reports).collect())
}

pub fn run_self_training(cfg: &SslConfig, data: &DataViews, splits: &SplitIds) -> Result<Vec<Vec<StepReport>>, PipelineError> {
    Ok(run(Method::SelfTraining, cfg, data, splits)?.into_iter().map(|o| o.reports).collect())
}
