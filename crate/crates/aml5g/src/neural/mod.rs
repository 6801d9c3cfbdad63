//! Minimal feedforward neural network engine.
//!
//! Dense layers with ReLU hidden activations, inverted dropout, softmax /
//! linear / tanh outputs, cross-entropy loss, backpropagation, and
//! minibatch training with SGD or Adam. Also houses the GAN training loop
//! used by the spoofing adversary. Everything is f64 and deterministic
//! under a fixed seed.

mod gan;
mod gradcheck;
mod io;
mod mlp;
mod train;

pub use gan::{generate_spoof, train_gan, train_gan_with_negatives, GanHistory, GanPair};
pub use gradcheck::grad_check;
pub use io::{load_model, save_model, MODEL_MAGIC};
pub use mlp::{mlp_init, ForwardCache, Gradients, Mlp, Mode};
pub use train::{classification_accuracy, train_classifier, AdamState, Normalizer, TrainReport};

use std::collections::BTreeMap;

use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: expected {expected}, got {got} ({context})")]
    ShapeMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },
    #[error("training data must contain both classes")]
    ClassMissing,
    #[error("non-finite loss at step {step}")]
    NonFiniteLoss { step: usize },
    #[error("model role mismatch: expected {expected:?}, got {got:?}")]
    RoleMismatch { expected: Role, got: Role },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed model file: {0}")]
    MalformedModel(String),
}

/// Hidden-layer activation (only ReLU is used by the experiments).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenActivation {
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Softmax,
    Linear,
    Tanh,
}

/// What a trained network is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// The defender's spectrum sensing classifier (idle/busy).
    SensingClassifier,
    /// The adversary's surrogate ACK predictor.
    SurrogateClassifier,
    /// The base station's signal authentication classifier.
    AuthClassifier,
    Generator,
    Discriminator,
    Other,
}

/// Layer-size specification of a feedforward network.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
    /// Dropout ratio applied after the activated output of hidden dense
    /// layer `i` (0-based).
    pub dropout_after: BTreeMap<usize, f64>,
}

impl MlpSpec {
    /// The canonical binary classifier: [d, 512, 512, 2] with dropout 0.2
    /// after each hidden dense layer and a softmax output.
    pub fn classifier(input_dim: usize) -> Self {
        let mut dropout_after = BTreeMap::new();
        dropout_after.insert(0, 0.2);
        dropout_after.insert(1, 0.2);
        Self {
            layer_sizes: vec![input_dim, 512, 512, 2],
            hidden_activation: HiddenActivation::Relu,
            output_activation: OutputActivation::Softmax,
            dropout_after,
        }
    }

    /// GAN generator: [400, 128, 128, 128, 400], linear output.
    pub fn generator() -> Self {
        Self {
            layer_sizes: vec![400, 128, 128, 128, 400],
            hidden_activation: HiddenActivation::Relu,
            output_activation: OutputActivation::Linear,
            dropout_after: BTreeMap::new(),
        }
    }

    /// GAN discriminator: same as the generator but with a two-neuron
    /// softmax output.
    pub fn discriminator() -> Self {
        Self {
            layer_sizes: vec![400, 128, 128, 128, 2],
            hidden_activation: HiddenActivation::Relu,
            output_activation: OutputActivation::Softmax,
            dropout_after: BTreeMap::new(),
        }
    }

    pub fn n_dense_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().expect("validated spec")
    }

    /// Total weight and bias count.
    pub fn n_params(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.layer_sizes.len() < 2 {
            return Err(NeuralError::InvalidSpec(format!(
                "need at least 2 layers, got {}",
                self.layer_sizes.len()
            )));
        }
        if self.layer_sizes.iter().any(|&s| s == 0) {
            return Err(NeuralError::InvalidSpec("layer sizes must be >= 1".into()));
        }
        for (&idx, &ratio) in &self.dropout_after {
            if idx + 1 >= self.n_dense_layers() {
                return Err(NeuralError::InvalidSpec(format!(
                    "dropout after layer {idx} but the network has only {} hidden layers",
                    self.n_dense_layers() - 1
                )));
            }
            if !(0.0..1.0).contains(&ratio) {
                return Err(NeuralError::InvalidSpec(format!(
                    "dropout ratio must lie in [0, 1), got {ratio}"
                )));
            }
        }
        Ok(())
    }
}

/// Semantics of the binary labels in a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelSemantics {
    /// 0 = idle, 1 = busy.
    IdleBusy,
    /// 0 = no ACK, 1 = ACK.
    AckNoAck,
    /// 0 = other, 1 = intended UE.
    IntendedOther,
    /// 0 = spoofed, 1 = real.
    RealSpoof,
}

/// Feature matrix plus binary labels.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub features: Array2<f64>,
    pub labels: Vec<u8>,
    pub label_semantics: LabelSemantics,
}

impl LabeledDataset {
    pub fn new(
        features: Array2<f64>,
        labels: Vec<u8>,
        label_semantics: LabelSemantics,
    ) -> Result<Self, NeuralError> {
        if features.nrows() != labels.len() {
            return Err(NeuralError::ShapeMismatch {
                expected: features.nrows(),
                got: labels.len(),
                context: "labels per feature row",
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(NeuralError::InvalidSpec(
                "dataset contains non-finite features".into(),
            ));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(NeuralError::InvalidSpec("labels must be 0 or 1".into()));
        }
        Ok(Self {
            features,
            labels,
            label_semantics,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.iter().any(|&l| l == 0) && self.labels.iter().any(|&l| l == 1)
    }

    /// Splits into (first half, second half) for train/test.
    pub fn split_half(&self) -> (LabeledDataset, LabeledDataset) {
        let mid = self.len() / 2;
        let take = |range: std::ops::Range<usize>| LabeledDataset {
            features: self
                .features
                .slice(ndarray::s![range.start..range.end, ..])
                .to_owned(),
            labels: self.labels[range].to_vec(),
            label_semantics: self.label_semantics,
        };
        (take(0..mid), take(mid..self.len()))
    }
}

/// Optimizer selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

/// Minibatch training configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub n_steps: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 100,
            n_steps: 1000,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.batch_size == 0 {
            return Err(NeuralError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.n_steps == 0 {
            return Err(NeuralError::InvalidConfig("n_steps must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(NeuralError::InvalidConfig(
                "learning_rate must be positive".into(),
            ));
        }
        Ok(())
    }
}
