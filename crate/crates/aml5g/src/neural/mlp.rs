//! Network storage, forward pass, and backpropagation.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::train::Normalizer;
use super::{MlpSpec, NeuralError, OutputActivation, Role};

/// Forward-pass mode. `Train` applies inverted dropout; `Eval` does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// A feedforward network with its weights, biases, role tag, and the
/// feature normalizer fitted at training time (if any).
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub spec: MlpSpec,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub role: Role,
    pub normalizer: Option<Normalizer>,
}

/// Activation record kept by the forward pass for backpropagation.
pub struct ForwardCache {
    /// Input to each dense layer (index 0 is the network input).
    pub layer_inputs: Vec<Array2<f64>>,
    /// ReLU derivative (0/1) per hidden layer.
    pub relu_masks: Vec<Array2<f64>>,
    /// Inverted-dropout scale masks (0 or 1/(1-p)) per hidden layer.
    pub dropout_masks: Vec<Option<Array2<f64>>>,
    /// Activated network output.
    pub output: Array2<f64>,
}

/// Parameter gradients plus (optionally) the gradient at the input.
pub struct Gradients {
    pub d_weights: Vec<Array2<f64>>,
    pub d_biases: Vec<Array1<f64>>,
    pub d_input: Option<Array2<f64>>,
}

/// He-uniform weight initialization with zero biases.
pub fn mlp_init(spec: &MlpSpec, role: Role, rng: &mut ChaCha8Rng) -> Result<Mlp, NeuralError> {
    spec.validate()?;
    let mut weights = Vec::with_capacity(spec.n_dense_layers());
    let mut biases = Vec::with_capacity(spec.n_dense_layers());
    for w in spec.layer_sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let limit = (6.0 / fan_in as f64).sqrt();
        let weight =
            Array2::from_shape_fn((fan_out, fan_in), |_| rng.gen_range(-limit..limit));
        weights.push(weight);
        biases.push(Array1::zeros(fan_out));
    }
    Ok(Mlp {
        spec: spec.clone(),
        weights,
        biases,
        role,
        normalizer: None,
    })
}

fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}

impl Mlp {
    pub fn input_dim(&self) -> usize {
        self.spec.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.spec.output_dim()
    }

    /// Runs a batch through the network. Rows are samples.
    ///
    /// `rng` is consumed only by dropout masks in `Train` mode.
    pub fn forward(
        &self,
        batch: &Array2<f64>,
        mode: Mode,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Array2<f64>, ForwardCache), NeuralError> {
        if batch.ncols() != self.input_dim() {
            return Err(NeuralError::ShapeMismatch {
                expected: self.input_dim(),
                got: batch.ncols(),
                context: "forward input width",
            });
        }
        let n_layers = self.spec.n_dense_layers();
        let mut layer_inputs = Vec::with_capacity(n_layers);
        let mut relu_masks = Vec::with_capacity(n_layers.saturating_sub(1));
        let mut dropout_masks = Vec::with_capacity(n_layers.saturating_sub(1));

        let mut activation = batch.clone();
        for layer in 0..n_layers {
            layer_inputs.push(activation.clone());
            let mut z = activation.dot(&self.weights[layer].t());
            z += &self.biases[layer];
            if layer + 1 < n_layers {
                let mask = z.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
                z.zip_mut_with(&mask, |v, &m| *v *= m);
                relu_masks.push(mask);
                let dropout = self.spec.dropout_after.get(&layer).copied().and_then(|p| {
                    if p == 0.0 || mode == Mode::Eval {
                        None
                    } else {
                        Some(p)
                    }
                });
                let drop_mask = dropout.map(|p| {
                    let keep_scale = 1.0 / (1.0 - p);
                    let mask = Array2::from_shape_fn(z.dim(), |_| {
                        if rng.gen::<f64>() < p {
                            0.0
                        } else {
                            keep_scale
                        }
                    });
                    z.zip_mut_with(&mask, |v, &m| *v *= m);
                    mask
                });
                dropout_masks.push(drop_mask);
                activation = z;
            } else {
                match self.spec.output_activation {
                    OutputActivation::Softmax => softmax_rows(&mut z),
                    OutputActivation::Linear => {}
                    OutputActivation::Tanh => z.mapv_inplace(f64::tanh),
                }
                activation = z;
            }
        }
        let cache = ForwardCache {
            layer_inputs,
            relu_masks,
            dropout_masks,
            output: activation.clone(),
        };
        Ok((activation, cache))
    }

    /// Mean cross-entropy of softmax outputs against binary labels.
    pub fn cross_entropy(probs: &Array2<f64>, labels: &[u8]) -> f64 {
        let n = labels.len() as f64;
        probs
            .rows()
            .into_iter()
            .zip(labels)
            .map(|(row, &y)| -(row[y as usize].max(1e-300)).ln())
            .sum::<f64>()
            / n
    }

    /// Backpropagation from the softmax + cross-entropy loss.
    pub fn backward_ce(
        &self,
        cache: &ForwardCache,
        labels: &[u8],
        compute_input_grad: bool,
    ) -> Gradients {
        assert_eq!(
            self.spec.output_activation,
            OutputActivation::Softmax,
            "cross-entropy backward requires a softmax output"
        );
        let batch = labels.len() as f64;
        let mut delta = cache.output.clone();
        for (mut row, &y) in delta.rows_mut().into_iter().zip(labels) {
            row[y as usize] -= 1.0;
        }
        delta.mapv_inplace(|v| v / batch);
        self.backward_from_delta(cache, delta, compute_input_grad)
    }

    /// Backpropagation from an upstream gradient at the network output.
    ///
    /// Supports linear and tanh outputs (the ones the GAN generator uses);
    /// softmax outputs must go through [`Mlp::backward_ce`].
    pub fn backward_from(
        &self,
        cache: &ForwardCache,
        grad_output: &Array2<f64>,
        compute_input_grad: bool,
    ) -> Gradients {
        let delta = match self.spec.output_activation {
            OutputActivation::Linear => grad_output.clone(),
            OutputActivation::Tanh => {
                let mut d = grad_output.clone();
                d.zip_mut_with(&cache.output, |g, &y| *g *= 1.0 - y * y);
                d
            }
            OutputActivation::Softmax => {
                panic!("use backward_ce for softmax outputs")
            }
        };
        self.backward_from_delta(cache, delta, compute_input_grad)
    }

    fn backward_from_delta(
        &self,
        cache: &ForwardCache,
        mut delta: Array2<f64>,
        compute_input_grad: bool,
    ) -> Gradients {
        let n_layers = self.spec.n_dense_layers();
        let mut d_weights = vec![Array2::zeros((0, 0)); n_layers];
        let mut d_biases = vec![Array1::zeros(0); n_layers];
        let mut d_input = None;
        for layer in (0..n_layers).rev() {
            d_weights[layer] = delta.t().dot(&cache.layer_inputs[layer]);
            d_biases[layer] = delta.sum_axis(Axis(0));
            if layer > 0 {
                let mut prev = delta.dot(&self.weights[layer]);
                if let Some(mask) = &cache.dropout_masks[layer - 1] {
                    prev.zip_mut_with(mask, |v, &m| *v *= m);
                }
                prev.zip_mut_with(&cache.relu_masks[layer - 1], |v, &m| *v *= m);
                delta = prev;
            } else if compute_input_grad {
                d_input = Some(delta.dot(&self.weights[0]));
            }
        }
        Gradients {
            d_weights,
            d_biases,
            d_input,
        }
    }

    /// Single-sample prediction: argmax label (ties to the lower index) and
    /// the max softmax probability as confidence.
    pub fn predict(&self, x: &[f64]) -> Result<(u8, f64), NeuralError> {
        let batch = Array2::from_shape_vec((1, x.len()), x.to_vec())
            .map_err(|_| NeuralError::InvalidSpec("bad input row".into()))?;
        Ok(self.predict_batch(&batch)?[0])
    }

    /// Batched prediction; applies the stored normalizer when present.
    pub fn predict_batch(&self, x: &Array2<f64>) -> Result<Vec<(u8, f64)>, NeuralError> {
        let normalized = match &self.normalizer {
            Some(n) => n.apply(x),
            None => x.clone(),
        };
        let mut dummy_rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        let (probs, _) = self.forward(&normalized, Mode::Eval, &mut dummy_rng)?;
        Ok(probs
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0usize;
                for (i, &p) in row.iter().enumerate() {
                    if p > row[best] {
                        best = i;
                    }
                }
                (best as u8, row[best])
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::StreamFactory;
    use ndarray::Array2;

    fn small_spec() -> MlpSpec {
        MlpSpec {
            layer_sizes: vec![4, 8, 2],
            hidden_activation: super::super::HiddenActivation::Relu,
            output_activation: OutputActivation::Softmax,
            dropout_after: Default::default(),
        }
    }

    #[test]
    fn init_is_deterministic() {
        let spec = small_spec();
        let mut r1 = StreamFactory::new(1).stream("init");
        let mut r2 = StreamFactory::new(1).stream("init");
        let a = mlp_init(&spec, Role::Other, &mut r1).unwrap();
        let b = mlp_init(&spec, Role::Other, &mut r2).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.biases, b.biases);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let spec = small_spec();
        let mut rng = StreamFactory::new(2).stream("init");
        let m = mlp_init(&spec, Role::Other, &mut rng).unwrap();
        let x = Array2::from_shape_fn((7, 4), |(i, j)| (i as f64 - 3.0) * (j as f64 + 0.5));
        let (probs, _) = m.forward(&x, Mode::Eval, &mut rng).unwrap();
        for row in probs.rows() {
            let sum: f64 = row.sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }

    #[test]
    fn zero_network_is_uniform_and_ties_to_label_zero() {
        let spec = small_spec();
        let mut rng = StreamFactory::new(3).stream("init");
        let mut m = mlp_init(&spec, Role::Other, &mut rng).unwrap();
        for w in &mut m.weights {
            w.fill(0.0);
        }
        let (label, confidence) = m.predict(&[1.0, -2.0, 3.0, 0.5]).unwrap();
        assert_eq!(label, 0);
        assert!((confidence - 0.5).abs() < 1e-12);
    }

    #[test]
    fn eval_equals_train_without_dropout() {
        let spec = small_spec();
        let mut rng = StreamFactory::new(4).stream("init");
        let m = mlp_init(&spec, Role::Other, &mut rng).unwrap();
        let x = Array2::from_shape_fn((5, 4), |(i, j)| i as f64 * 0.3 - j as f64 * 0.7);
        let mut r1 = StreamFactory::new(5).stream("d");
        let mut r2 = StreamFactory::new(6).stream("d");
        let (train_out, _) = m.forward(&x, Mode::Train, &mut r1).unwrap();
        let (eval_out, _) = m.forward(&x, Mode::Eval, &mut r2).unwrap();
        assert_eq!(train_out, eval_out);
    }

    #[test]
    fn prediction_is_deterministic() {
        let spec = MlpSpec::classifier(16);
        let mut rng = StreamFactory::new(7).stream("init");
        let m = mlp_init(&spec, Role::Other, &mut rng).unwrap();
        let x: Vec<f64> = (0..16).map(|i| (i as f64).sin()).collect();
        let first = m.predict(&x).unwrap();
        for _ in 0..5 {
            assert_eq!(m.predict(&x).unwrap(), first);
        }
    }

    #[test]
    fn zero_input_zeroes_first_layer_weight_grads() {
        let spec = small_spec();
        let mut rng = StreamFactory::new(8).stream("init");
        let m = mlp_init(&spec, Role::Other, &mut rng).unwrap();
        let x = Array2::zeros((1, 4));
        let (_, cache) = m.forward(&x, Mode::Eval, &mut rng).unwrap();
        let grads = m.backward_ce(&cache, &[1], false);
        assert!(grads.d_weights[0].iter().all(|&g| g == 0.0));
        // Bias gradients are generally nonzero for a zero input.
        assert!(grads.d_biases[1].iter().any(|&g| g != 0.0));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let spec = small_spec();
        let mut rng = StreamFactory::new(9).stream("init");
        let m = mlp_init(&spec, Role::Other, &mut rng).unwrap();
        let x = Array2::zeros((1, 3));
        assert!(matches!(
            m.forward(&x, Mode::Eval, &mut rng),
            Err(NeuralError::ShapeMismatch { .. })
        ));
    }
}
