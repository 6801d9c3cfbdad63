//! Distributed-GAN training loop: a generator at the adversary transmitter
//! and a discriminator at the adversary receiver, alternating one update
//! each. The discriminator learns real-vs-spoofed on balanced batches; the
//! generator trains through the discriminator's input gradient with the
//! non-saturating loss.

use ndarray::{s, Array2, Axis};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mlp::{mlp_init, Mlp, Mode};
use super::train::AdamState;
use super::{MlpSpec, NeuralError, Role, TrainConfig};

pub const GAN_FEATURE_DIM: usize = 400;

/// Adam moment decays for GAN updates ((0.5, 0.9) damps the
/// generator/discriminator oscillation; classifier training keeps the
/// (0.9, 0.999) defaults).
const GAN_ADAM_BETA1: f64 = 0.5;
const GAN_ADAM_BETA2: f64 = 0.9;

/// Generator/discriminator pair with a 400-dimensional noise input.
#[derive(Debug, Clone)]
pub struct GanPair {
    pub generator: Mlp,
    pub discriminator: Mlp,
    pub noise_dim: usize,
}

impl GanPair {
    pub fn new(rng: &mut ChaCha8Rng) -> Result<Self, NeuralError> {
        let generator = mlp_init(&MlpSpec::generator(), Role::Generator, rng)?;
        let discriminator = mlp_init(&MlpSpec::discriminator(), Role::Discriminator, rng)?;
        let pair = Self {
            generator,
            discriminator,
            noise_dim: GAN_FEATURE_DIM,
        };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.generator.output_dim() != self.discriminator.input_dim() {
            return Err(NeuralError::InvalidSpec(format!(
                "generator output {} must match discriminator input {}",
                self.generator.output_dim(),
                self.discriminator.input_dim()
            )));
        }
        if self.generator.output_dim() != GAN_FEATURE_DIM {
            return Err(NeuralError::InvalidSpec(format!(
                "generator output must be {GAN_FEATURE_DIM} wide"
            )));
        }
        Ok(())
    }
}

/// Per-step discriminator accuracy plus a mode-collapse flag.
#[derive(Debug, Clone, Default)]
pub struct GanHistory {
    pub d_accuracy: Vec<f64>,
    pub mode_collapse: bool,
}

fn sample_rows(source: &Array2<f64>, n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut out = Array2::zeros((n, source.ncols()));
    for row in 0..n {
        let idx = rng.gen_range(0..source.nrows());
        out.row_mut(row).assign(&source.row(idx));
    }
    out
}

fn standard_normal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    use rand_distr::{Distribution, Normal};
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    Array2::from_shape_fn((rows, cols), |_| normal.sample(rng))
}

/// Projects every row to unit average complex power, returning the scaled
/// rows plus what is needed to backpropagate through the projection.
///
/// The adversary transmits unit-power rows (see [`generate_spoof`]), so the
/// discriminator is always trained on the transmitted equivalent. This also
/// removes the row norm as a degenerate escape direction for the generator.
fn project_unit_power(rows: &Array2<f64>) -> (Array2<f64>, Vec<f64>) {
    let pairs = (rows.ncols() / 2) as f64;
    let mut projected = rows.clone();
    let mut powers = Vec::with_capacity(rows.nrows());
    for mut row in projected.rows_mut() {
        let power = (row.iter().map(|v| v * v).sum::<f64>() / pairs).max(1e-300);
        powers.push(power);
        let scale = 1.0 / power.sqrt();
        row.mapv_inplace(|v| v * scale);
    }
    (projected, powers)
}

/// Gradient of the unit-power projection: with y = x / sqrt(p(x)),
/// dL/dx = (g - y (g . y) / pairs) / sqrt(p) for upstream g = dL/dy.
fn project_unit_power_backward(
    raw: &Array2<f64>,
    powers: &[f64],
    upstream: &Array2<f64>,
) -> Array2<f64> {
    let pairs = (raw.ncols() / 2) as f64;
    let mut out = Array2::zeros(raw.dim());
    for (i, ((raw_row, up_row), &power)) in raw
        .rows()
        .into_iter()
        .zip(upstream.rows())
        .zip(powers)
        .enumerate()
    {
        let sqrt_p = power.sqrt();
        let dot: f64 = up_row
            .iter()
            .zip(raw_row.iter())
            .map(|(g, x)| g * x)
            .sum::<f64>()
            / power;
        for (j, o) in out.row_mut(i).iter_mut().enumerate() {
            *o = (up_row[j] - raw_row[j] / sqrt_p * dot / pairs / sqrt_p) / sqrt_p;
        }
    }
    out
}

/// Trains the pair on observed feature rows (label semantics real = 1,
/// spoofed = 0).
pub fn train_gan(
    pair: GanPair,
    real_rows: &Array2<f64>,
    cfg: &TrainConfig,
) -> Result<(GanPair, GanHistory), NeuralError> {
    train_gan_with_negatives(pair, real_rows, None, cfg)
}

/// GAN training with an optional pool of extra known-negative rows that are
/// mixed into the discriminator's spoofed-side batches. The defender's flipped
/// decisions reach the adversary through this pool: observations the defender
/// labeled as non-intended become discriminator negatives.
pub fn train_gan_with_negatives(
    pair: GanPair,
    real_rows: &Array2<f64>,
    extra_negatives: Option<&Array2<f64>>,
    cfg: &TrainConfig,
) -> Result<(GanPair, GanHistory), NeuralError> {
    pair.validate()?;
    if cfg.n_steps == 0 {
        return Ok((pair, GanHistory::default()));
    }
    if cfg.batch_size == 0 || !(cfg.learning_rate > 0.0) {
        return Err(NeuralError::InvalidConfig(
            "batch_size and learning_rate must be positive".into(),
        ));
    }
    if real_rows.nrows() < 2 * cfg.batch_size {
        return Err(NeuralError::InsufficientData(format!(
            "GAN training needs at least {} real rows, got {}",
            2 * cfg.batch_size,
            real_rows.nrows()
        )));
    }
    if real_rows.ncols() != pair.discriminator.input_dim() {
        return Err(NeuralError::ShapeMismatch {
            expected: pair.discriminator.input_dim(),
            got: real_rows.ncols(),
            context: "GAN real-data width",
        });
    }

    let mut pair = pair;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut opt_d = AdamState::with_betas(
        &pair.discriminator,
        cfg.optimizer,
        cfg.learning_rate,
        GAN_ADAM_BETA1,
        GAN_ADAM_BETA2,
    );
    let mut opt_g = AdamState::with_betas(
        &pair.generator,
        cfg.optimizer,
        cfg.learning_rate,
        GAN_ADAM_BETA1,
        GAN_ADAM_BETA2,
    );
    let mut history = GanHistory::default();
    let batch = cfg.batch_size;
    let negatives = extra_negatives.filter(|n| n.nrows() > 0);

    for step in 0..cfg.n_steps {
        // Discriminator update on a balanced real/spoof batch.
        let real_batch = sample_rows(real_rows, batch, &mut rng);
        let n_generated = if negatives.is_some() {
            batch - batch / 2
        } else {
            batch
        };
        let z = standard_normal(n_generated, pair.noise_dim, &mut rng);
        let (generated_raw, _) = pair.generator.forward(&z, Mode::Train, &mut rng)?;
        let (generated, _) = project_unit_power(&generated_raw);
        let mut fake = Array2::zeros((batch, real_rows.ncols()));
        fake.slice_mut(s![..n_generated, ..]).assign(&generated);
        if let Some(pool) = negatives {
            let extra = sample_rows(pool, batch - n_generated, &mut rng);
            fake.slice_mut(s![n_generated.., ..]).assign(&extra);
        }

        let mut d_input = Array2::zeros((2 * batch, real_rows.ncols()));
        d_input.slice_mut(s![..batch, ..]).assign(&real_batch);
        d_input.slice_mut(s![batch.., ..]).assign(&fake);
        let mut labels = vec![1u8; batch];
        labels.extend(std::iter::repeat(0u8).take(batch));

        let (probs, cache) = pair.discriminator.forward(&d_input, Mode::Train, &mut rng)?;
        let loss = Mlp::cross_entropy(&probs, &labels);
        if !loss.is_finite() {
            return Err(NeuralError::NonFiniteLoss { step });
        }
        let correct = probs
            .rows()
            .into_iter()
            .zip(&labels)
            .filter(|(row, &y)| (row[1] > row[0]) as u8 == y)
            .count();
        history.d_accuracy.push(correct as f64 / labels.len() as f64);
        let grads = pair.discriminator.backward_ce(&cache, &labels, false);
        opt_d.step(&mut pair.discriminator, &grads);

        // Generator update: non-saturating loss, i.e. make the (frozen)
        // discriminator call generated rows real.
        let z = standard_normal(batch, pair.noise_dim, &mut rng);
        let (generated_raw, g_cache) = pair.generator.forward(&z, Mode::Train, &mut rng)?;
        let (generated, powers) = project_unit_power(&generated_raw);
        let (g_probs, d_cache) = pair
            .discriminator
            .forward(&generated, Mode::Train, &mut rng)?;
        let g_loss = Mlp::cross_entropy(&g_probs, &vec![1u8; batch]);
        if !g_loss.is_finite() {
            return Err(NeuralError::NonFiniteLoss { step });
        }
        let d_grads = pair
            .discriminator
            .backward_ce(&d_cache, &vec![1u8; batch], true);
        let upstream = d_grads.d_input.expect("input grad requested");
        let upstream = project_unit_power_backward(&generated_raw, &powers, &upstream);
        let g_grads = pair.generator.backward_from(&g_cache, &upstream, false);
        opt_g.step(&mut pair.generator, &g_grads);

        if !history.mode_collapse {
            let var = generated.var_axis(Axis(0), 0.0);
            if var.mean().unwrap_or(0.0) < 1e-6 {
                history.mode_collapse = true;
            }
        }
    }
    Ok((pair, history))
}

/// Draws `n` feature rows from the generator (standard-normal noise, eval
/// mode) and renormalizes each row to unit average complex power, matching
/// the I/Q feature convention used on the receive side.
pub fn generate_spoof(
    generator: &Mlp,
    rng: &mut ChaCha8Rng,
    n: usize,
) -> Result<Array2<f64>, NeuralError> {
    if generator.role != Role::Generator {
        return Err(NeuralError::RoleMismatch {
            expected: Role::Generator,
            got: generator.role,
        });
    }
    if n == 0 {
        return Ok(Array2::zeros((0, generator.output_dim())));
    }
    let z = standard_normal(n, generator.input_dim(), rng);
    let (mut rows, _) = generator.forward(&z, Mode::Eval, rng)?;
    for mut row in rows.rows_mut() {
        let pairs = row.len() / 2;
        let power: f64 = row.iter().map(|v| v * v).sum::<f64>() / pairs as f64;
        if power > 0.0 {
            let scale = 1.0 / power.sqrt();
            row.mapv_inplace(|v| v * scale);
        }
    }
    Ok(rows)
}
