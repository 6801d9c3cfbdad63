//! Versioned binary model serialization.
//!
//! Layout: magic bytes, layer spec, role, dropout map, row-major f64
//! little-endian parameters, then the optional normalizer vectors.
//! Round-trips are bit-exact.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::mlp::Mlp;
use super::train::Normalizer;
use super::{HiddenActivation, MlpSpec, NeuralError, OutputActivation, Role};

pub const MODEL_MAGIC: &[u8; 8] = b"AML5GNN1";

fn role_tag(role: Role) -> u8 {
    match role {
        Role::SensingClassifier => 0,
        Role::SurrogateClassifier => 1,
        Role::AuthClassifier => 2,
        Role::Generator => 3,
        Role::Discriminator => 4,
        Role::Other => 5,
    }
}

fn role_from_tag(tag: u8) -> Result<Role, NeuralError> {
    Ok(match tag {
        0 => Role::SensingClassifier,
        1 => Role::SurrogateClassifier,
        2 => Role::AuthClassifier,
        3 => Role::Generator,
        4 => Role::Discriminator,
        5 => Role::Other,
        other => {
            return Err(NeuralError::MalformedModel(format!(
                "unknown role tag {other}"
            )))
        }
    })
}

fn output_tag(a: OutputActivation) -> u8 {
    match a {
        OutputActivation::Softmax => 0,
        OutputActivation::Linear => 1,
        OutputActivation::Tanh => 2,
    }
}

fn output_from_tag(tag: u8) -> Result<OutputActivation, NeuralError> {
    Ok(match tag {
        0 => OutputActivation::Softmax,
        1 => OutputActivation::Linear,
        2 => OutputActivation::Tanh,
        other => {
            return Err(NeuralError::MalformedModel(format!(
                "unknown output activation tag {other}"
            )))
        }
    })
}

pub fn save_model(model: &Mlp, path: &Path) -> Result<(), NeuralError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(MODEL_MAGIC)?;
    w.write_all(&(model.spec.layer_sizes.len() as u32).to_le_bytes())?;
    for &size in &model.spec.layer_sizes {
        w.write_all(&(size as u64).to_le_bytes())?;
    }
    w.write_all(&[0u8])?; // hidden activation: ReLU
    w.write_all(&[output_tag(model.spec.output_activation)])?;
    w.write_all(&[role_tag(model.role)])?;
    w.write_all(&(model.spec.dropout_after.len() as u32).to_le_bytes())?;
    for (&idx, &ratio) in &model.spec.dropout_after {
        w.write_all(&(idx as u64).to_le_bytes())?;
        w.write_all(&ratio.to_le_bytes())?;
    }
    for (weight, bias) in model.weights.iter().zip(&model.biases) {
        for v in weight.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in bias.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    match &model.normalizer {
        None => w.write_all(&[0u8])?,
        Some(n) => {
            w.write_all(&[1u8])?;
            for v in n.mean.iter().chain(n.std.iter()) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

struct Reader {
    bytes: Vec<u8>,
    pos: usize,
}

impl Reader {
    fn take(&mut self, n: usize) -> Result<&[u8], NeuralError> {
        if self.pos + n > self.bytes.len() {
            return Err(NeuralError::MalformedModel("unexpected end of file".into()));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, NeuralError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, NeuralError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64(&mut self) -> Result<u64, NeuralError> {
        let b = self.take(8)?;
        Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64, NeuralError> {
        let b = self.take(8)?;
        Ok(f64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>, NeuralError> {
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn load_model(path: &Path) -> Result<Mlp, NeuralError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut r = Reader { bytes, pos: 0 };

    if r.take(8)? != MODEL_MAGIC {
        return Err(NeuralError::MalformedModel("bad magic bytes".into()));
    }
    let n_sizes = r.u32()? as usize;
    if !(2..=64).contains(&n_sizes) {
        return Err(NeuralError::MalformedModel(format!(
            "implausible layer count {n_sizes}"
        )));
    }
    let layer_sizes: Vec<usize> = (0..n_sizes)
        .map(|_| r.u64().map(|v| v as usize))
        .collect::<Result<_, _>>()?;
    let hidden_tag = r.u8()?;
    if hidden_tag != 0 {
        return Err(NeuralError::MalformedModel(format!(
            "unknown hidden activation tag {hidden_tag}"
        )));
    }
    let output_activation = output_from_tag(r.u8()?)?;
    let role = role_from_tag(r.u8()?)?;
    let n_dropout = r.u32()? as usize;
    let mut dropout_after = BTreeMap::new();
    for _ in 0..n_dropout {
        let idx = r.u64()? as usize;
        let ratio = r.f64()?;
        dropout_after.insert(idx, ratio);
    }
    let spec = MlpSpec {
        layer_sizes: layer_sizes.clone(),
        hidden_activation: HiddenActivation::Relu,
        output_activation,
        dropout_after,
    };
    spec.validate()
        .map_err(|e| NeuralError::MalformedModel(e.to_string()))?;

    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for pair in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let w = Array2::from_shape_vec((fan_out, fan_in), r.f64_vec(fan_out * fan_in)?)
            .expect("shape from sizes");
        weights.push(w);
        biases.push(Array1::from_vec(r.f64_vec(fan_out)?));
    }
    let normalizer = match r.u8()? {
        0 => None,
        1 => {
            let d = layer_sizes[0];
            let mean = Array1::from_vec(r.f64_vec(d)?);
            let std = Array1::from_vec(r.f64_vec(d)?);
            Some(Normalizer { mean, std })
        }
        other => {
            return Err(NeuralError::MalformedModel(format!(
                "bad normalizer flag {other}"
            )))
        }
    };
    if r.pos != r.bytes.len() {
        return Err(NeuralError::MalformedModel("trailing bytes".into()));
    }
    Ok(Mlp {
        spec,
        weights,
        biases,
        role,
        normalizer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{mlp_init, LabelSemantics, LabeledDataset, TrainConfig};
    use crate::StreamFactory;

    #[test]
    fn round_trip_is_bit_exact() {
        let spec = MlpSpec::classifier(8);
        let mut rng = StreamFactory::new(60).stream("init");
        let model = mlp_init(&spec, Role::SensingClassifier, &mut rng).unwrap();

        // Train briefly so a normalizer is attached and weights are
        // arbitrary post-optimizer values.
        let features = Array2::from_shape_fn((32, 8), |(i, j)| ((i * 7 + j) as f64).sin() * 3.7);
        let labels: Vec<u8> = (0..32).map(|i| (i % 2) as u8).collect();
        let data = LabeledDataset::new(features, labels, LabelSemantics::IdleBusy).unwrap();
        let cfg = TrainConfig {
            n_steps: 20,
            batch_size: 8,
            seed: 61,
            ..TrainConfig::default()
        };
        let (trained, _) = crate::neural::train_classifier(model, &data, &cfg).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        save_model(&trained, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded.spec, trained.spec);
        assert_eq!(loaded.role, trained.role);
        assert_eq!(loaded.weights, trained.weights);
        assert_eq!(loaded.biases, trained.biases);
        assert_eq!(loaded.normalizer, trained.normalizer);

        // Saving the loaded model reproduces the file byte for byte.
        let path2 = dir.path().join("model2.bin");
        save_model(&loaded, &path2).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
    }

    #[test]
    fn bad_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        fs::write(&path, b"NOTMAGIC0000").unwrap();
        assert!(matches!(
            load_model(&path),
            Err(NeuralError::MalformedModel(_))
        ));
    }
}
