//! Classifiers over either data view.
//!
//! Every model maps a `P × d` feature matrix to an `N × P` column-stochastic
//! matrix of class scores. Three built-ins are provided: multinomial logistic
//! regression, a one-hidden-layer perceptron (both trained by full-batch
//! gradient descent on softmax cross-entropy plus L2), and distance-weighted
//! k-nearest neighbours.
//!
//! Training rows are put in a canonical order before fitting, so the result
//! does not depend on how the caller ordered them.

mod gradcheck;
mod knn;
mod linear;
mod mlp;
pub mod persist;

pub use gradcheck::gradient_check;
pub use knn::KnnModel;
pub use linear::LinearModel;
pub use mlp::MlpModel;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("class {0} has no training samples")]
    MissingClass(usize),
    #[error("label {label} is out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("features contain NaN or infinite values")]
    NonFiniteFeatures,
    #[error("training loss became non-finite at epoch {0}")]
    DivergedLoss(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid hyperparameters: {0}")]
    InvalidSpec(String),
    #[error("model file: {0}")]
    Persist(String),
}

/// Which data view a feature matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    Time,
    Tf,
}

/// `P × d` samples-by-features matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Array2<f64>,
    view: View,
}

impl FeatureMatrix {
    pub fn new(data: Array2<f64>, view: View) -> Result<Self, ClassifierError> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ClassifierError::NonFiniteFeatures);
        }
        Ok(Self { data, view })
    }

    pub fn from_rows(rows: &[Vec<f64>], view: View) -> Result<Self, ClassifierError> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(ClassifierError::ShapeMismatch("ragged feature rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let data = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| ClassifierError::ShapeMismatch(e.to_string()))?;
        Self::new(data, view)
    }

    pub fn data(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn view(&self) -> View {
        self.view
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    /// Rows at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            data: self.data.select(Axis(0), idx),
            view: self.view,
        }
    }
}

/// `N × P` matrix whose columns are per-sample class distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitsMatrix {
    values: Array2<f64>,
}

impl LogitsMatrix {
    pub const COLUMN_TOLERANCE: f64 = 1e-9;

    /// Checks finiteness, non-negativity and unit column sums.
    pub fn new(values: Array2<f64>) -> Result<Self, ClassifierError> {
        for (p, col) in values.columns().into_iter().enumerate() {
            if col.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(ClassifierError::ShapeMismatch(format!(
                    "column {p} has negative or non-finite entries"
                )));
            }
            if (col.sum() - 1.0).abs() > Self::COLUMN_TOLERANCE {
                return Err(ClassifierError::ShapeMismatch(format!(
                    "column {p} sums to {}",
                    col.sum()
                )));
            }
        }
        Ok(Self { values })
    }

    pub(crate) fn new_unchecked(values: Array2<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn class_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn sample_count(&self) -> usize {
        self.values.ncols()
    }

    /// Columns at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            values: self.values.select(Axis(1), idx),
        }
    }

    /// Per-column argmax, ties to the lowest class index.
    pub fn argmax(&self) -> Vec<usize> {
        self.values
            .columns()
            .into_iter()
            .map(|col| argmax_lowest(col.iter().copied()).0)
            .collect()
    }
}

pub(crate) fn argmax_lowest(values: impl Iterator<Item = f64>) -> (usize, f64) {
    values
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    SoftmaxRegression,
    Mlp,
    Knn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Heavy-ball momentum for the full-batch updates, in `[0, 1)`.
    pub momentum: f64,
    pub hidden_units: usize,
    pub l2: f64,
    pub k_neighbors: usize,
    /// Std-dev of the Gaussian initialization of weights; zero gives an
    /// all-zero start for softmax regression.
    pub init_scale: f64,
    /// Z-score features with statistics of the training set.
    pub standardize: bool,
    pub seed: u64,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self {
            kind: ClassifierKind::SoftmaxRegression,
            learning_rate: 0.1,
            epochs: 200,
            momentum: 0.9,
            hidden_units: 32,
            l2: 1e-4,
            k_neighbors: 5,
            init_scale: 0.0,
            standardize: true,
            seed: 0,
        }
    }
}

impl ClassifierSpec {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |m: String| Err(ClassifierError::InvalidSpec(m));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum must lie in [0, 1), got {}", self.momentum));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return bad(format!("l2 must be >= 0, got {}", self.l2));
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return bad(format!("init_scale must be >= 0, got {}", self.init_scale));
        }
        if self.kind == ClassifierKind::Mlp && self.hidden_units == 0 {
            return bad("hidden_units must be >= 1".into());
        }
        if self.kind == ClassifierKind::Knn && self.k_neighbors == 0 {
            return bad("k_neighbors must be >= 1".into());
        }
        Ok(())
    }
}

/// Per-feature affine map `(x - mean) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Array1<f64>,
    pub scale: Array1<f64>,
}

impl Standardizer {
    fn identity(d: usize) -> Self {
        Self {
            mean: Array1::zeros(d),
            scale: Array1::ones(d),
        }
    }

    fn fit(x: ArrayView2<'_, f64>) -> Self {
        let p = x.nrows() as f64;
        let mean = x.sum_axis(Axis(0)) / p;
        let mut var = Array1::zeros(x.ncols());
        for row in x.rows() {
            for ((v, &m), &xi) in var.iter_mut().zip(&mean).zip(&row) {
                let d: f64 = xi - m;
                *v += d * d;
            }
        }
        let scale = var.mapv(|v: f64| {
            let s = (v / p).sqrt();
            if s > 1e-12 { s } else { 1.0 }
        });
        Self { mean, scale }
    }

    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        (&x - &self.mean) / &self.scale
    }

    fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.mean.iter().chain(self.scale.iter()).copied()
    }

    fn from_params(d: usize, p: &[f64]) -> Self {
        Self {
            mean: Array1::from(p[..d].to_vec()),
            scale: Array1::from(p[d..2 * d].to_vec()),
        }
    }
}

/// A fitted classifier. Immutable after `fit`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub(crate) spec: ClassifierSpec,
    pub(crate) class_count: usize,
    pub(crate) standardizer: Standardizer,
    pub(crate) body: ModelBody,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ModelBody {
    Linear(LinearModel),
    Mlp(MlpModel),
    Knn(KnnModel),
}

impl Model {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn input_dim(&self) -> usize {
        self.standardizer.mean.len()
    }
}

/// Sort key putting training rows in a fixed order independent of input order.
fn canonical_order(x: ArrayView2<'_, f64>, y: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.nrows()).collect();
    idx.sort_by(|&a, &b| {
        x.row(a)
            .iter()
            .zip(x.row(b).iter())
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then(y[a].cmp(&y[b]))
    });
    idx
}

pub(crate) fn one_hot(y: &[usize], classes: usize) -> Array2<f64> {
    let mut out = Array2::zeros((y.len(), classes));
    for (i, &c) in y.iter().enumerate() {
        out[[i, c]] = 1.0;
    }
    out
}

/// Row-wise softmax of a `P × N` score matrix, in place.
pub(crate) fn softmax_rows(scores: &mut Array2<f64>) {
    for mut row in scores.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}

/// Mean cross-entropy of row-stochastic `probs` against labels.
pub(crate) fn cross_entropy(probs: &Array2<f64>, y: &[usize]) -> f64 {
    let total: f64 = y
        .iter()
        .enumerate()
        .map(|(i, &c)| -(probs[[i, c]].max(f64::MIN_POSITIVE)).ln())
        .sum();
    total / y.len() as f64
}

/// Trains a classifier on labelled rows. `class_count` fixes `N`; every
/// class must appear at least once.
pub fn fit(
    spec: &ClassifierSpec,
    x: &FeatureMatrix,
    y: &[usize],
    class_count: usize,
) -> Result<Model, ClassifierError> {
    spec.validate()?;
    if x.rows() != y.len() {
        return Err(ClassifierError::ShapeMismatch(format!(
            "{} feature rows but {} labels",
            x.rows(),
            y.len()
        )));
    }
    let mut seen = vec![false; class_count];
    for &label in y {
        if label >= class_count {
            return Err(ClassifierError::LabelOutOfRange {
                label,
                classes: class_count,
            });
        }
        seen[label] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(ClassifierError::MissingClass(missing));
    }

    let order = canonical_order(x.data(), y);
    let xs = x.data().select(Axis(0), &order);
    let ys: Vec<usize> = order.iter().map(|&i| y[i]).collect();

    let standardizer = if spec.standardize {
        Standardizer::fit(xs.view())
    } else {
        Standardizer::identity(xs.ncols())
    };
    let z = standardizer.apply(xs.view());

    let body = match spec.kind {
        ClassifierKind::SoftmaxRegression => {
            let mut m = LinearModel::init(z.ncols(), class_count, spec);
            m.train(z.view(), &ys, spec)?;
            ModelBody::Linear(m)
        }
        ClassifierKind::Mlp => {
            let mut m = MlpModel::init(z.ncols(), spec.hidden_units, class_count, spec);
            m.train(z.view(), &ys, spec)?;
            ModelBody::Mlp(m)
        }
        ClassifierKind::Knn => ModelBody::Knn(KnnModel::new(z, ys, spec.k_neighbors)),
    };
    Ok(Model {
        spec: spec.clone(),
        class_count,
        standardizer,
        body,
    })
}

/// Class distributions for every row of `x`, as an `N × P` matrix.
pub fn predict(model: &Model, x: &FeatureMatrix) -> Result<LogitsMatrix, ClassifierError> {
    if x.cols() != model.input_dim() {
        return Err(ClassifierError::ShapeMismatch(format!(
            "model expects {} features, got {}",
            model.input_dim(),
            x.cols()
        )));
    }
    let z = model.standardizer.apply(x.data());
    let probs = match &model.body {
        ModelBody::Linear(m) => m.probabilities(z.view()),
        ModelBody::Mlp(m) => m.probabilities(z.view()),
        ModelBody::Knn(m) => m.probabilities(z.view(), model.class_count),
    };
    Ok(LogitsMatrix::new_unchecked(probs.reversed_axes()))
}

/// Full-batch gradient descent with heavy-ball momentum over a flat
/// parameter vector.
pub(crate) fn descend<F>(
    params: &mut [f64],
    spec: &ClassifierSpec,
    mut loss_and_grad: F,
) -> Result<(), ClassifierError>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut velocity = vec![0.0; params.len()];
    for epoch in 0..spec.epochs {
        let (loss, grad) = loss_and_grad(params);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(ClassifierError::DivergedLoss(epoch));
        }
        for ((p, v), g) in params.iter_mut().zip(&mut velocity).zip(&grad) {
            *v = spec.momentum * *v - spec.learning_rate * g;
            *p += *v;
        }
    }
    Ok(())
}
