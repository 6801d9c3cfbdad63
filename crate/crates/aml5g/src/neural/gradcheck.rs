//! Finite-difference validation of backpropagation.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::mlp::{Mlp, Mode};
use super::NeuralError;

const FD_STEP: f64 = 1e-5;
const MAX_CHECKED_PARAMS: usize = 100;

#[derive(Clone, Copy)]
enum ParamLoc {
    Weight { layer: usize, flat: usize },
    Bias { layer: usize, idx: usize },
}

fn loss_of(model: &Mlp, x: &Array2<f64>, label: u8, rng: &mut ChaCha8Rng) -> f64 {
    let (probs, _) = model.forward(x, Mode::Eval, rng).expect("shape checked");
    Mlp::cross_entropy(&probs, &[label])
}

/// Compares analytic cross-entropy gradients against central finite
/// differences (step 1e-5, double precision) over a random subsample of at
/// most 100 parameters. Dropout is disabled for the check. Returns the
/// maximum relative error.
pub fn grad_check(
    model: &Mlp,
    x: &[f64],
    label: u8,
    rng: &mut ChaCha8Rng,
) -> Result<f64, NeuralError> {
    if x.len() != model.input_dim() {
        return Err(NeuralError::ShapeMismatch {
            expected: model.input_dim(),
            got: x.len(),
            context: "grad_check input width",
        });
    }
    let mut model = model.clone();
    model.spec.dropout_after.clear();
    model.normalizer = None;

    let input = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("row shape");
    let (_, cache) = model.forward(&input, Mode::Eval, rng)?;
    let grads = model.backward_ce(&cache, &[label], false);

    let mut locations = Vec::new();
    for layer in 0..model.weights.len() {
        for flat in 0..model.weights[layer].len() {
            locations.push(ParamLoc::Weight { layer, flat });
        }
        for idx in 0..model.biases[layer].len() {
            locations.push(ParamLoc::Bias { layer, idx });
        }
    }
    let checked: Vec<ParamLoc> = if locations.len() <= MAX_CHECKED_PARAMS {
        locations
    } else {
        (0..MAX_CHECKED_PARAMS)
            .map(|_| locations[rng.gen_range(0..locations.len())])
            .collect()
    };

    let mut max_rel = 0.0f64;
    for loc in checked {
        let analytic = match loc {
            ParamLoc::Weight { layer, flat } => grads.d_weights[layer].as_slice().unwrap()[flat],
            ParamLoc::Bias { layer, idx } => grads.d_biases[layer][idx],
        };
        let mut eval_at = |delta: f64, model: &mut Mlp| {
            match loc {
                ParamLoc::Weight { layer, flat } => {
                    model.weights[layer].as_slice_mut().unwrap()[flat] += delta
                }
                ParamLoc::Bias { layer, idx } => model.biases[layer][idx] += delta,
            }
            let loss = loss_of(model, &input, label, rng);
            match loc {
                ParamLoc::Weight { layer, flat } => {
                    model.weights[layer].as_slice_mut().unwrap()[flat] -= delta
                }
                ParamLoc::Bias { layer, idx } => model.biases[layer][idx] -= delta,
            }
            loss
        };
        let plus = eval_at(FD_STEP, &mut model);
        let minus = eval_at(-FD_STEP, &mut model);
        let numeric = (plus - minus) / (2.0 * FD_STEP);
        let rel = (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-6);
        max_rel = max_rel.max(rel);
    }
    Ok(max_rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{mlp_init, MlpSpec, Role};
    use crate::StreamFactory;

    fn random_input(dim: usize, seed: u64) -> Vec<f64> {
        let mut rng = StreamFactory::new(seed).stream("x");
        (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn small_net_passes_grad_check() {
        let spec = MlpSpec {
            layer_sizes: vec![4, 8, 2],
            hidden_activation: crate::neural::HiddenActivation::Relu,
            output_activation: crate::neural::OutputActivation::Softmax,
            dropout_after: Default::default(),
        };
        let mut rng = StreamFactory::new(40).stream("init");
        let model = mlp_init(&spec, Role::Other, &mut rng).unwrap();
        let x = random_input(4, 41);
        let mut check_rng = StreamFactory::new(42).stream("check");
        let err = grad_check(&model, &x, 1, &mut check_rng).unwrap();
        assert!(err <= 1e-4, "max relative error {err}");
    }

    #[test]
    fn grad_check_is_reproducible() {
        let spec = MlpSpec::classifier(16);
        let mut rng = StreamFactory::new(43).stream("init");
        let model = mlp_init(&spec, Role::Other, &mut rng).unwrap();
        let x = random_input(16, 44);
        let run = || {
            let mut check_rng = StreamFactory::new(45).stream("check");
            grad_check(&model, &x, 0, &mut check_rng).unwrap()
        };
        assert_eq!(run(), run());
    }
}
