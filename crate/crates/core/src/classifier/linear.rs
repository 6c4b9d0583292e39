use super::{cross_entropy, descend, one_hot, softmax_rows, ClassifierError, ClassifierSpec};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Multinomial logistic regression: `softmax(x·W + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl LinearModel {
    pub(crate) fn init(d: usize, classes: usize, spec: &ClassifierSpec) -> Self {
        let weights = if spec.init_scale > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let dist = Normal::new(0.0, spec.init_scale).expect("validated scale");
            Array2::from_shape_simple_fn((d, classes), || dist.sample(&mut rng))
        } else {
            Array2::zeros((d, classes))
        };
        Self {
            weights,
            bias: Array1::zeros(classes),
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn params(&self) -> Vec<f64> {
        self.weights.iter().chain(self.bias.iter()).copied().collect()
    }

    pub fn from_params(d: usize, classes: usize, p: &[f64]) -> Self {
        let w = d * classes;
        Self {
            weights: Array2::from_shape_vec((d, classes), p[..w].to_vec()).expect("param length"),
            bias: Array1::from(p[w..w + classes].to_vec()),
        }
    }

    /// `P × N` row-stochastic probabilities.
    pub(crate) fn probabilities(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut s = x.dot(&self.weights) + &self.bias;
        softmax_rows(&mut s);
        s
    }

    /// Mean cross-entropy plus `l2/2 · ‖W‖²`, and its gradient in `params()` order.
    pub fn loss_and_grad(&self, x: ArrayView2<'_, f64>, targets: &Array2<f64>, y: &[usize], l2: f64) -> (f64, Vec<f64>) {
        let probs = self.probabilities(x);
        let reg = 0.5 * l2 * self.weights.iter().map(|w| w * w).sum::<f64>();
        let loss = cross_entropy(&probs, y) + reg;
        let delta = (probs - targets) / y.len() as f64;
        let gw = x.t().dot(&delta) + l2 * &self.weights;
        let gb = delta.sum_axis(Axis(0));
        (loss, gw.iter().chain(gb.iter()).copied().collect())
    }

    pub(crate) fn train(
        &mut self,
        x: ArrayView2<'_, f64>,
        y: &[usize],
        spec: &ClassifierSpec,
    ) -> Result<(), ClassifierError> {
        let (d, classes) = self.weights.dim();
        let targets = one_hot(y, classes);
        let mut params = self.params();
        descend(&mut params, spec, |p| {
            Self::from_params(d, classes, p).loss_and_grad(x, &targets, y, spec.l2)
        })?;
        *self = Self::from_params(d, classes, &params);
        Ok(())
    }
}
