use super::{one_hot, ClassifierError, ClassifierKind, ClassifierSpec, FeatureMatrix, LinearModel, MlpModel};

const STEP: f64 = 1e-5;
/// Below this magnitude gradients are compared in absolute terms.
const MAGNITUDE_FLOOR: f64 = 1e-6;
/// Weight std used when the spec leaves `init_scale` at zero, so that the
/// check runs away from the symmetric all-zero point.
const CHECK_INIT_SCALE: f64 = 0.1;

/// Largest relative discrepancy between the analytic gradient of the
/// training loss and a central finite difference, over all parameters,
/// evaluated at the seeded initial parameters. `N` is taken as `max(y) + 1`.
pub fn gradient_check(spec: &ClassifierSpec, x: &FeatureMatrix, y: &[usize]) -> Result<f64, ClassifierError> {
    spec.validate()?;
    if x.rows() != y.len() || y.is_empty() {
        return Err(ClassifierError::ShapeMismatch("labels must match feature rows".into()));
    }
    let classes = y.iter().max().map_or(0, |m| m + 1).max(2);
    let targets = one_hot(y, classes);
    let d = x.cols();
    let mut init = spec.clone();
    if init.init_scale == 0.0 {
        init.init_scale = CHECK_INIT_SCALE;
    }
    let z = x.data();

    let eval: Box<dyn Fn(&[f64]) -> (f64, Vec<f64>)> = match spec.kind {
        ClassifierKind::SoftmaxRegression => Box::new(move |p: &[f64]| {
            LinearModel::from_params(d, classes, p).loss_and_grad(z, &targets, y, spec.l2)
        }),
        ClassifierKind::Mlp => {
            let h = spec.hidden_units;
            Box::new(move |p: &[f64]| {
                MlpModel::from_params(d, h, classes, p).loss_and_grad(z, &targets, y, spec.l2)
            })
        }
        ClassifierKind::Knn => {
            return Err(ClassifierError::InvalidSpec("knn has no trainable parameters".into()))
        }
    };
    let params = match spec.kind {
        ClassifierKind::SoftmaxRegression => LinearModel::init(d, classes, &init).params(),
        _ => MlpModel::init(d, spec.hidden_units, classes, &init).params(),
    };
    Ok(compare(&params, eval.as_ref()))
}

fn compare(params: &[f64], eval: &dyn Fn(&[f64]) -> (f64, Vec<f64>)) -> f64 {
    let (_, analytic) = eval(params);
    let mut probe = params.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..params.len() {
        probe[i] = params[i] + STEP;
        let up = eval(&probe).0;
        probe[i] = params[i] - STEP;
        let down = eval(&probe).0;
        probe[i] = params[i];
        let numeric = (up - down) / (2.0 * STEP);
        let scale = analytic[i].abs().max(numeric.abs()).max(MAGNITUDE_FLOOR);
        worst = worst.max((analytic[i] - numeric).abs() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array2, ArrayView2};

    /// Gradient of the L2 penalty alone, `l2 · W`.
    fn l2_gradient(weights: ArrayView2<'_, f64>, l2: f64) -> Array2<f64> {
        weights.mapv(|w| l2 * w)
    }
    use crate::classifier::View;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(p: usize, d: usize, classes: usize, seed: u64) -> (FeatureMatrix, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..p).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y = (0..p).map(|i| i % classes).collect();
        (FeatureMatrix::from_rows(&rows, View::Time).unwrap(), y)
    }

    #[test]
    fn softmax_regression_gradient() {
        for seed in 0..3 {
            let (x, y) = instance(20, 30, 3, seed);
            let spec = ClassifierSpec { l2: 0.01, seed, ..Default::default() };
            let err = gradient_check(&spec, &x, &y).unwrap();
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn mlp_gradient() {
        for seed in 0..3 {
            let (x, y) = instance(15, 12, 4, seed + 10);
            let spec = ClassifierSpec { kind: ClassifierKind::Mlp, hidden_units: 6, l2: 0.01, seed, ..Default::default() };
            let err = gradient_check(&spec, &x, &y).unwrap();
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn zero_weights_have_zero_penalty_gradient() {
        let w = Array2::<f64>::zeros((5, 3));
        assert!(l2_gradient(w.view(), 0.5).iter().all(|&g| g == 0.0));
        // Whole-model gradient at zero weights on zero input: the weight part is exactly zero.
        let x = FeatureMatrix::from_rows(&vec![vec![0.0; 4]; 6], View::Time).unwrap();
        let y: Vec<usize> = (0..6).map(|i| i % 2).collect();
        let model = LinearModel::from_params(4, 2, &[0.0; 10]);
        let (_, g) = model.loss_and_grad(x.data(), &one_hot(&y, 2), &y, 0.7);
        assert!(g[..8].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn knn_is_not_checkable() {
        let (x, y) = instance(4, 2, 2, 0);
        let spec = ClassifierSpec { kind: ClassifierKind::Knn, ..Default::default() };
        assert!(gradient_check(&spec, &x, &y).is_err());
    }
}
