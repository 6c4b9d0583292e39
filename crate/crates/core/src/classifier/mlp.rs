use super::{cross_entropy, descend, one_hot, softmax_rows, ClassifierError, ClassifierSpec};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// One hidden `tanh` layer followed by a softmax output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

struct Forward {
    hidden: Array2<f64>,
    probs: Array2<f64>,
}

impl MlpModel {
    /// Gaussian weights with std `init_scale`, or Glorot scaling when zero.
    pub(crate) fn init(d: usize, hidden: usize, classes: usize, spec: &ClassifierSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut layer = |fan_in: usize, fan_out: usize| {
            let std = if spec.init_scale > 0.0 {
                spec.init_scale
            } else {
                (2.0 / (fan_in + fan_out) as f64).sqrt()
            };
            let dist = Normal::new(0.0, std).expect("finite std");
            Array2::from_shape_simple_fn((fan_in, fan_out), || dist.sample(&mut rng))
        };
        let w1 = layer(d, hidden);
        let w2 = layer(hidden, classes);
        Self {
            w1,
            b1: Array1::zeros(hidden),
            w2,
            b2: Array1::zeros(classes),
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.w1.nrows(), self.w1.ncols(), self.w2.ncols())
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn params(&self) -> Vec<f64> {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .copied()
            .collect()
    }

    pub fn from_params(d: usize, hidden: usize, classes: usize, p: &[f64]) -> Self {
        let mut at = 0;
        let mut take = |n: usize| {
            let s = p[at..at + n].to_vec();
            at += n;
            s
        };
        let w1 = Array2::from_shape_vec((d, hidden), take(d * hidden)).expect("param length");
        let b1 = Array1::from(take(hidden));
        let w2 = Array2::from_shape_vec((hidden, classes), take(hidden * classes)).expect("param length");
        let b2 = Array1::from(take(classes));
        Self { w1, b1, w2, b2 }
    }

    fn forward(&self, x: ArrayView2<'_, f64>) -> Forward {
        let hidden = (x.dot(&self.w1) + &self.b1).mapv(f64::tanh);
        let mut probs = hidden.dot(&self.w2) + &self.b2;
        softmax_rows(&mut probs);
        Forward { hidden, probs }
    }

    pub(crate) fn probabilities(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        self.forward(x).probs
    }

    /// Mean cross-entropy plus `l2/2 · (‖W1‖² + ‖W2‖²)`, gradient in `params()` order.
    pub fn loss_and_grad(&self, x: ArrayView2<'_, f64>, targets: &Array2<f64>, y: &[usize], l2: f64) -> (f64, Vec<f64>) {
        let Forward { hidden, probs } = self.forward(x);
        let sq = |m: &Array2<f64>| m.iter().map(|w| w * w).sum::<f64>();
        let loss = cross_entropy(&probs, y) + 0.5 * l2 * (sq(&self.w1) + sq(&self.w2));

        let delta_out = (probs - targets) / y.len() as f64;
        let gw2 = hidden.t().dot(&delta_out) + l2 * &self.w2;
        let gb2 = delta_out.sum_axis(Axis(0));
        let delta_hidden = delta_out.dot(&self.w2.t()) * hidden.mapv(|h| 1.0 - h * h);
        let gw1 = x.t().dot(&delta_hidden) + l2 * &self.w1;
        let gb1 = delta_hidden.sum_axis(Axis(0));
        let grad = gw1
            .iter()
            .chain(&gb1)
            .chain(&gw2)
            .chain(&gb2)
            .copied()
            .collect();
        (loss, grad)
    }

    pub(crate) fn train(
        &mut self,
        x: ArrayView2<'_, f64>,
        y: &[usize],
        spec: &ClassifierSpec,
    ) -> Result<(), ClassifierError> {
        let (d, hidden, classes) = self.shape();
        let targets = one_hot(y, classes);
        let mut params = self.params();
        descend(&mut params, spec, |p| {
            Self::from_params(d, hidden, classes, p).loss_and_grad(x, &targets, y, spec.l2)
        })?;
        *self = Self::from_params(d, hidden, classes, &params);
        Ok(())
    }
}
