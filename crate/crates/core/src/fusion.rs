//! Decision-level fusion of the time and time-frequency classifiers.
//!
//! Each class `n` gets one weight per model, fitted by least squares so that
//! `β_t,n · Ŷ_t[n, :] + β_tf,n · Ŷ_tf[n, :]` best matches the one-hot row of
//! the true labels. Weights are unconstrained in sign.

use crate::classifier::{argmax_lowest, LogitsMatrix};
use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Added after shifting a column so its minimum becomes strictly positive.
pub const STANDARDIZE_EPSILON: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("at least two samples are needed to fit fusion weights, got {0}")]
    TooFewSamples(usize),
    #[error("fused matrix has non-finite entries")]
    NonFinite,
    #[error("column {0} cannot be normalized")]
    DegenerateColumn(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    pub beta_time: Vec<f64>,
    pub beta_tf: Vec<f64>,
}

impl FusionWeights {
    /// Passes the time model through unchanged.
    pub fn time_only(classes: usize) -> Self {
        Self {
            beta_time: vec![1.0; classes],
            beta_tf: vec![0.0; classes],
        }
    }

    pub fn class_count(&self) -> usize {
        self.beta_time.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("weights serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// `N × P` binary matrix with one 1 per column.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHotLabels {
    values: Array2<f64>,
}

impl OneHotLabels {
    pub fn from_labels(labels: &[usize], classes: usize) -> Result<Self, FusionError> {
        let mut values = Array2::zeros((classes, labels.len()));
        for (p, &c) in labels.iter().enumerate() {
            if c >= classes {
                return Err(FusionError::ShapeMismatch(format!("label {c} >= {classes} classes")));
            }
            values[[c, p]] = 1.0;
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn row(&self, n: usize) -> ArrayView1<'_, f64> {
        self.values.row(n)
    }
}

/// Least-squares solution of the 2-regressor system with Gram matrix
/// `[[p, q], [q, r]]` and right-hand side `rhs`. Rank-deficient systems get
/// the minimum-norm solution through the eigen-decomposition pseudo-inverse.
fn solve_gram(p: f64, q: f64, r: f64, rhs: [f64; 2]) -> [f64; 2] {
    let mean = 0.5 * (p + r);
    let radius = (0.25 * (p - r) * (p - r) + q * q).sqrt();
    let (l1, l2) = (mean + radius, mean - radius);
    if l1 <= 0.0 {
        return [0.0, 0.0];
    }
    let tol = 1e-12 * l1;
    if l2 > tol {
        let det = p * r - q * q;
        return [(r * rhs[0] - q * rhs[1]) / det, (p * rhs[1] - q * rhs[0]) / det];
    }
    // Eigenvector of the dominant eigenvalue.
    let (vx, vy) = if q != 0.0 {
        let (a, b) = (l1 - r, q);
        let norm = (a * a + b * b).sqrt();
        (a / norm, b / norm)
    } else if p >= r {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let proj = (vx * rhs[0] + vy * rhs[1]) / l1;
    [vx * proj, vy * proj]
}

fn check_pair(yt: &LogitsMatrix, ytf: &LogitsMatrix) -> Result<(), FusionError> {
    if yt.values().dim() != ytf.values().dim() {
        return Err(FusionError::ShapeMismatch(format!(
            "time {:?} vs tf {:?}",
            yt.values().dim(),
            ytf.values().dim()
        )));
    }
    Ok(())
}

/// Per-class least-squares fusion weights against the true labels.
///
/// A class for which both models output all zeros gets `[0, 0]` and a warning.
pub fn fit_fusion_weights(
    yt: &LogitsMatrix,
    ytf: &LogitsMatrix,
    truth: &OneHotLabels,
) -> Result<FusionWeights, FusionError> {
    check_pair(yt, ytf)?;
    if truth.values().dim() != yt.values().dim() {
        return Err(FusionError::ShapeMismatch("labels do not match predictions".into()));
    }
    let (classes, samples) = yt.values().dim();
    if samples < 2 {
        return Err(FusionError::TooFewSamples(samples));
    }
    let mut weights = FusionWeights {
        beta_time: Vec::with_capacity(classes),
        beta_tf: Vec::with_capacity(classes),
    };
    let (vt, vtf) = (yt.values(), ytf.values());
    for n in 0..classes {
        let a = vt.row(n);
        let b = vtf.row(n);
        let t = truth.row(n);
        let [bt, btf] = solve_gram(a.dot(&a), a.dot(&b), b.dot(&b), [a.dot(&t), b.dot(&t)]);
        if a.iter().chain(b.iter()).all(|&v| v == 0.0) {
            log::warn!("class {n}: both models output zero for every sample; fusion weights set to 0");
        }
        weights.beta_time.push(bt);
        weights.beta_tf.push(btf);
    }
    Ok(weights)
}

/// Sum of squared errors of one class row under the given pair of weights.
pub fn class_sse(yt: &LogitsMatrix, ytf: &LogitsMatrix, truth: &OneHotLabels, class: usize, beta: [f64; 2]) -> f64 {
    let (vt, vtf) = (yt.values(), ytf.values());
    let a = vt.row(class);
    let b = vtf.row(class);
    a.iter()
        .zip(b.iter())
        .zip(truth.row(class).iter())
        .map(|((x, y), t)| {
            let e = beta[0] * x + beta[1] * y - t;
            e * e
        })
        .sum()
}

/// Row `n` of the output is `β_t,n · Ŷ_t[n, :] + β_tf,n · Ŷ_tf[n, :]`.
pub fn fuse(yt: &LogitsMatrix, ytf: &LogitsMatrix, w: &FusionWeights) -> Result<Array2<f64>, FusionError> {
    check_pair(yt, ytf)?;
    let classes = yt.class_count();
    if w.beta_time.len() != classes || w.beta_tf.len() != classes {
        return Err(FusionError::ShapeMismatch(format!(
            "{} classes but {} / {} weights",
            classes,
            w.beta_time.len(),
            w.beta_tf.len()
        )));
    }
    let mut out = Array2::zeros(yt.values().dim());
    for (n, mut row) in out.rows_mut().into_iter().enumerate() {
        let (bt, btf) = (w.beta_time[n], w.beta_tf[n]);
        for ((o, a), b) in row.iter_mut().zip(yt.values().row(n)).zip(ytf.values().row(n)) {
            *o = bt * a + btf * b;
        }
    }
    Ok(out)
}

/// Makes each column strictly positive and unit-sum: a column whose minimum
/// is `<= 0` is first shifted by `-min + ε`.
pub fn standardize(raw: &Array2<f64>) -> Result<LogitsMatrix, FusionError> {
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(FusionError::NonFinite);
    }
    let mut out = raw.clone();
    for (p, mut col) in out.columns_mut().into_iter().enumerate() {
        let min = col.iter().copied().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            let shift = -min + STANDARDIZE_EPSILON;
            col.mapv_inplace(|v| v + shift);
        }
        let sum = col.sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(FusionError::DegenerateColumn(p));
        }
        col.mapv_inplace(|v| v / sum);
    }
    Ok(LogitsMatrix::new_unchecked(out))
}

/// Per-column argmax; ties go to the lowest class index.
pub fn decide(fused: &LogitsMatrix) -> Vec<usize> {
    fused
        .values()
        .columns()
        .into_iter()
        .map(|c| argmax_lowest(c.iter().copied()).0)
        .collect()
}

/// Fuse, standardize and decide in one go.
pub fn fused_predictions(
    yt: &LogitsMatrix,
    ytf: &LogitsMatrix,
    w: &FusionWeights,
) -> Result<LogitsMatrix, FusionError> {
    standardize(&fuse(yt, ytf, w)?)
}
