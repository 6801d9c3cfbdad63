//! Classifier training: feature standardization, minibatch SGD/Adam,
//! cross-entropy loss.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

use super::mlp::{Gradients, Mlp, Mode};
use super::{LabeledDataset, NeuralError, OptimizerKind, TrainConfig};

/// Per-feature standardization fitted on the training set and stored with
/// the model, so prediction-time inputs go through the same transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

impl Normalizer {
    pub fn fit(features: &Array2<f64>) -> Self {
        let n = features.nrows() as f64;
        let mean = features.sum_axis(ndarray::Axis(0)) / n;
        let mut var = Array1::<f64>::zeros(features.ncols());
        for row in features.rows() {
            for (j, &v) in row.iter().enumerate() {
                let d = v - mean[j];
                var[j] += d * d;
            }
        }
        let std = var.mapv(|v| (v / n).sqrt().max(1e-8));
        Self { mean, std }
    }

    pub fn apply(&self, features: &Array2<f64>) -> Array2<f64> {
        let mut out = features.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
        out
    }
}

/// Adam moment estimates for one model.
pub struct AdamState {
    m_w: Vec<Array2<f64>>,
    v_w: Vec<Array2<f64>>,
    m_b: Vec<Array1<f64>>,
    v_b: Vec<Array1<f64>>,
    t: u64,
    kind: OptimizerKind,
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl AdamState {
    pub fn new(model: &Mlp, kind: OptimizerKind, learning_rate: f64) -> Self {
        Self::with_betas(model, kind, learning_rate, ADAM_BETA1, ADAM_BETA2)
    }

    /// Adam with custom moment decays. GAN updates use (0.5, 0.9), which
    /// damps the generator/discriminator oscillation.
    pub fn with_betas(
        model: &Mlp,
        kind: OptimizerKind,
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
    ) -> Self {
        Self {
            m_w: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            v_w: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            m_b: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            v_b: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            t: 0,
            kind,
            learning_rate,
            beta1,
            beta2,
        }
    }

    pub fn step(&mut self, model: &mut Mlp, grads: &Gradients) {
        match self.kind {
            OptimizerKind::Sgd => {
                for (w, dw) in model.weights.iter_mut().zip(&grads.d_weights) {
                    w.zip_mut_with(dw, |w, &g| *w -= self.learning_rate * g);
                }
                for (b, db) in model.biases.iter_mut().zip(&grads.d_biases) {
                    b.zip_mut_with(db, |b, &g| *b -= self.learning_rate * g);
                }
            }
            OptimizerKind::Adam => {
                self.t += 1;
                let (beta1, beta2) = (self.beta1, self.beta2);
                let bias1 = 1.0 - beta1.powi(self.t as i32);
                let bias2 = 1.0 - beta2.powi(self.t as i32);
                let lr = self.learning_rate * bias2.sqrt() / bias1;
                for layer in 0..model.weights.len() {
                    let (m, v) = (&mut self.m_w[layer], &mut self.v_w[layer]);
                    let dw = &grads.d_weights[layer];
                    m.zip_mut_with(dw, |m, &g| *m = beta1 * *m + (1.0 - beta1) * g);
                    v.zip_mut_with(dw, |v, &g| *v = beta2 * *v + (1.0 - beta2) * g * g);
                    ndarray::Zip::from(&mut model.weights[layer])
                        .and(&*m)
                        .and(&*v)
                        .for_each(|w, &m, &v| *w -= lr * m / (v.sqrt() + ADAM_EPS));

                    let (mb, vb) = (&mut self.m_b[layer], &mut self.v_b[layer]);
                    let db = &grads.d_biases[layer];
                    mb.zip_mut_with(db, |m, &g| *m = beta1 * *m + (1.0 - beta1) * g);
                    vb.zip_mut_with(db, |v, &g| *v = beta2 * *v + (1.0 - beta2) * g * g);
                    ndarray::Zip::from(&mut model.biases[layer])
                        .and(&*mb)
                        .and(&*vb)
                        .for_each(|b, &m, &v| *b -= lr * m / (v.sqrt() + ADAM_EPS));
                }
            }
        }
    }
}

/// Training outcome: per-step losses and the final accuracy on the
/// training set itself.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub losses: Vec<f64>,
    pub final_train_accuracy: f64,
}

/// Trains a classifier with minibatch updates and the cross-entropy loss.
///
/// Features are standardized per column using training-set statistics; the
/// fitted normalizer is stored in the returned model.
pub fn train_classifier(
    model: Mlp,
    data: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<(Mlp, TrainReport), NeuralError> {
    cfg.validate()?;
    if data.len() < 2 {
        return Err(NeuralError::InsufficientData(format!(
            "need at least 2 samples, got {}",
            data.len()
        )));
    }
    if !data.has_both_classes() {
        return Err(NeuralError::ClassMissing);
    }
    if data.dim() != model.input_dim() {
        return Err(NeuralError::ShapeMismatch {
            expected: model.input_dim(),
            got: data.dim(),
            context: "training feature width",
        });
    }

    let mut model = model;
    let normalizer = Normalizer::fit(&data.features);
    let features = normalizer.apply(&data.features);
    model.normalizer = Some(normalizer);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut optimizer = AdamState::new(&model, cfg.optimizer, cfg.learning_rate);
    let mut losses = Vec::with_capacity(cfg.n_steps);
    let n = data.len();

    let mut batch = Array2::zeros((cfg.batch_size, data.dim()));
    let mut batch_labels = vec![0u8; cfg.batch_size];
    for step in 0..cfg.n_steps {
        for row in 0..cfg.batch_size {
            let idx = rng.gen_range(0..n);
            batch.row_mut(row).assign(&features.row(idx));
            batch_labels[row] = data.labels[idx];
        }
        let (probs, cache) = model.forward(&batch, Mode::Train, &mut rng)?;
        let loss = Mlp::cross_entropy(&probs, &batch_labels);
        if !loss.is_finite() {
            return Err(NeuralError::NonFiniteLoss { step });
        }
        losses.push(loss);
        let grads = model.backward_ce(&cache, &batch_labels, false);
        optimizer.step(&mut model, &grads);
    }

    let accuracy = classification_accuracy(&model, data)?;
    Ok((
        model,
        TrainReport {
            losses,
            final_train_accuracy: accuracy,
        },
    ))
}

/// Fraction of dataset rows the model labels correctly.
pub fn classification_accuracy(model: &Mlp, data: &LabeledDataset) -> Result<f64, NeuralError> {
    let predictions = model.predict_batch(&data.features)?;
    let correct = predictions
        .iter()
        .zip(&data.labels)
        .filter(|((label, _), &truth)| *label == truth)
        .count();
    Ok(correct as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{mlp_init, LabelSemantics, MlpSpec, Role};
    use crate::StreamFactory;
    use ndarray::Array2;
    use rand_distr::{Distribution, Normal};

    /// Two well-separated Gaussian blobs in 2-D.
    pub(crate) fn blobs(n: usize, seed: u64) -> LabeledDataset {
        let mut rng = StreamFactory::new(seed).stream("blobs");
        let normal = Normal::new(0.0, 0.5).unwrap();
        let mut features = Array2::zeros((n, 2));
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let label = (i % 2) as u8;
            let center = if label == 0 { -2.0 } else { 2.0 };
            features[[i, 0]] = center + normal.sample(&mut rng);
            features[[i, 1]] = center + normal.sample(&mut rng);
            labels.push(label);
        }
        LabeledDataset::new(features, labels, LabelSemantics::IdleBusy).unwrap()
    }

    /// Logistic-regression oracle: plain gradient descent on the same data.
    fn logistic_regression_accuracy(data: &LabeledDataset) -> f64 {
        let mut w = [0.0f64; 2];
        let mut b = 0.0f64;
        let n = data.len() as f64;
        for _ in 0..2000 {
            let (mut gw0, mut gw1, mut gb) = (0.0, 0.0, 0.0);
            for (row, &y) in data.features.rows().into_iter().zip(&data.labels) {
                let z = w[0] * row[0] + w[1] * row[1] + b;
                let p = 1.0 / (1.0 + (-z).exp());
                let err = p - y as f64;
                gw0 += err * row[0];
                gw1 += err * row[1];
                gb += err;
            }
            w[0] -= 0.5 * gw0 / n;
            w[1] -= 0.5 * gw1 / n;
            b -= 0.5 * gb / n;
        }
        let correct = data
            .features
            .rows()
            .into_iter()
            .zip(&data.labels)
            .filter(|(row, &y)| {
                let z = w[0] * row[0] + w[1] * row[1] + b;
                (z > 0.0) as u8 == y
            })
            .count();
        correct as f64 / n
    }

    #[test]
    fn separable_blobs_reach_99_percent() {
        let train = blobs(400, 1);
        let test = blobs(400, 2);
        // The oracle must fully separate this data; if it does not, the
        // dataset (not the network) is at fault.
        assert_eq!(logistic_regression_accuracy(&train), 1.0);

        let spec = MlpSpec {
            layer_sizes: vec![2, 32, 32, 2],
            hidden_activation: crate::neural::HiddenActivation::Relu,
            output_activation: crate::neural::OutputActivation::Softmax,
            dropout_after: Default::default(),
        };
        let mut rng = StreamFactory::new(3).stream("init");
        let model = mlp_init(&spec, Role::Other, &mut rng).unwrap();
        let cfg = TrainConfig {
            seed: 4,
            ..TrainConfig::default()
        };
        let (trained, report) = train_classifier(model, &train, &cfg).unwrap();
        assert_eq!(report.losses.len(), cfg.n_steps);
        assert!(report.losses.last().unwrap() < report.losses.first().unwrap());
        let acc = classification_accuracy(&trained, &test).unwrap();
        assert!(acc >= 0.99, "test accuracy {acc}");
    }

    #[test]
    fn loss_decreases_for_every_seed() {
        for seed in 0..5 {
            let data = blobs(200, 10 + seed);
            let spec = MlpSpec {
                layer_sizes: vec![2, 16, 2],
                hidden_activation: crate::neural::HiddenActivation::Relu,
                output_activation: crate::neural::OutputActivation::Softmax,
                dropout_after: Default::default(),
            };
            let mut rng = StreamFactory::new(20 + seed).stream("init");
            let model = mlp_init(&spec, Role::Other, &mut rng).unwrap();
            let cfg = TrainConfig {
                n_steps: 300,
                seed,
                ..TrainConfig::default()
            };
            let (_, report) = train_classifier(model, &data, &cfg).unwrap();
            assert!(
                report.losses.last().unwrap() < report.losses.first().unwrap(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn training_is_bit_deterministic() {
        let data = blobs(200, 30);
        let spec = MlpSpec::classifier(2);
        let make = || {
            let mut rng = StreamFactory::new(31).stream("init");
            let model = mlp_init(&spec, Role::Other, &mut rng).unwrap();
            let cfg = TrainConfig {
                n_steps: 50,
                seed: 32,
                ..TrainConfig::default()
            };
            train_classifier(model, &data, &cfg).unwrap()
        };
        let (a, ra) = make();
        let (b, rb) = make();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.biases, b.biases);
        assert_eq!(ra.losses, rb.losses);
    }

    #[test]
    fn missing_class_is_rejected() {
        let features = Array2::zeros((4, 2));
        let data =
            LabeledDataset::new(features, vec![1, 1, 1, 1], LabelSemantics::IdleBusy).unwrap();
        let spec = MlpSpec {
            layer_sizes: vec![2, 4, 2],
            hidden_activation: crate::neural::HiddenActivation::Relu,
            output_activation: crate::neural::OutputActivation::Softmax,
            dropout_after: Default::default(),
        };
        let mut rng = StreamFactory::new(33).stream("init");
        let model = mlp_init(&spec, Role::Other, &mut rng).unwrap();
        assert!(matches!(
            train_classifier(model, &data, &TrainConfig::default()),
            Err(NeuralError::ClassMissing)
        ));
    }
}
