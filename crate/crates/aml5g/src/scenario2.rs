//! Scenario 2: physical-layer authentication at the base station and the
//! adversary pair's over-the-air GAN spoofing attack.
//!
//! The base station classifies 400-wide I/Q feature rows (200 complex
//! samples) as "intended UE" or "other". The UE waveform carries a pilot
//! grid, so an intended frame has deterministic structure the classifier
//! can anchor on at any of the studied SNRs. The adversary receiver sits
//! next to the base station (same channel from the UE, its own noise), the
//! adversary transmitter next to it as well (clean path in), which is the
//! placement that lets the GAN learn exactly the distribution the
//! classifier authenticates.
//!
//! Channels are quasi-static: one tap-gain draw per world, shared by every
//! frame in that world.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::neural::{
    generate_spoof, mlp_init, train_classifier, GanPair, LabelSemantics, LabeledDataset, Mlp,
    MlpSpec, Role, TrainConfig,
};
use crate::rng::StreamFactory;
use crate::scenario1::ScenarioError;
use crate::signal::{
    add_awgn, apply_realization, deinterleave_iq, draw_realization, gen_noise_frame,
    gen_ofdm_frame, iq_features, ChannelRealization, IqFrame, OfdmConfig, TdlProfile,
};

/// Number of complex samples per authentication instance.
pub const AUTH_COMPLEX_SAMPLES: usize = 200;
/// Width of an authentication feature row.
pub const AUTH_FEATURE_LEN: usize = 2 * AUTH_COMPLEX_SAMPLES;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario2Config {
    /// SNR of the UE signal at the base station (and at the co-located
    /// adversary receiver), in dB.
    pub gamma_db: f64,
    /// Authentication dataset size (half train, half test).
    pub n_samples: usize,
    pub ofdm: OfdmConfig,
    pub tdl: TdlProfile,
    /// Rows the adversary collects for GAN training.
    pub n_adversary_obs: usize,
    /// Spoof transmissions per attack evaluation.
    pub n_trials: usize,
    /// GAN training hyperparameters (seed is overridden per run).
    pub gan: TrainConfig,
    /// Classifier training hyperparameters (seed overridden per run).
    pub classifier: TrainConfig,
    /// When true (default) the adversary receiver shares the UE-to-base
    ///-station channel draw, modeling co-location.
    pub adversary_colocated: bool,
}

impl Default for Scenario2Config {
    fn default() -> Self {
        Self {
            gamma_db: -3.0,
            n_samples: 1000,
            ofdm: OfdmConfig {
                // Dense pilot grid: authentication leans on the waveform's
                // deterministic reference structure.
                pilot_spacing: 2,
                ..OfdmConfig::default()
            },
            tdl: TdlProfile::default(),
            n_adversary_obs: 1000,
            n_trials: 500,
            gan: TrainConfig {
                batch_size: 100,
                n_steps: 600,
                learning_rate: 1e-3,
                ..TrainConfig::default()
            },
            classifier: TrainConfig::default(),
            adversary_colocated: true,
        }
    }
}

impl Scenario2Config {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.ofdm.validate()?;
        self.tdl.validate()?;
        if self.n_samples < 2 || self.n_samples % 2 != 0 {
            return Err(ScenarioError::InvalidConfig(format!(
                "n_samples must be even and >= 2 for the half/half split, got {}",
                self.n_samples
            )));
        }
        if !self.gamma_db.is_finite() && self.gamma_db != f64::INFINITY {
            return Err(ScenarioError::InvalidConfig(format!(
                "gamma_db must be finite or the +inf sentinel, got {}",
                self.gamma_db
            )));
        }
        if self.n_trials == 0 {
            return Err(ScenarioError::InvalidConfig("n_trials must be >= 1".into()));
        }
        if self.ofdm.symbol_len() < AUTH_COMPLEX_SAMPLES {
            return Err(ScenarioError::InvalidConfig(
                "an OFDM symbol must cover the authentication window".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a spoofing (or replay) evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpoofResult {
    pub n_trials: usize,
    pub n_accepted: usize,
    pub success_probability: f64,
}

impl SpoofResult {
    pub fn new(n_trials: usize, n_accepted: usize) -> Self {
        Self {
            n_trials,
            n_accepted,
            success_probability: n_accepted as f64 / n_trials as f64,
        }
    }
}

/// Accuracy report for the authentication classifier.
#[derive(Debug, Clone, Copy)]
pub struct AuthReport {
    pub test_accuracy: f64,
    pub final_train_accuracy: f64,
}

/// A scenario-2 world: validated config, quasi-static channel draws, and
/// the stream factory for everything else.
pub struct AuthWorld {
    pub cfg: Scenario2Config,
    streams: StreamFactory,
    ue_to_gnb: ChannelRealization,
    ue_to_adv: ChannelRealization,
    adv_to_gnb: ChannelRealization,
}

impl AuthWorld {
    pub fn new(cfg: Scenario2Config, streams: StreamFactory) -> Result<Self, ScenarioError> {
        cfg.validate()?;
        let fs = cfg.ofdm.sample_rate_hz();
        let mut channel_rng = streams.stream("world.channel.ue_gnb");
        let ue_to_gnb = draw_realization(&cfg.tdl, fs, &mut channel_rng);
        let ue_to_adv = if cfg.adversary_colocated {
            ue_to_gnb.clone()
        } else {
            let mut rng = streams.stream("world.channel.ue_adv");
            draw_realization(&cfg.tdl, fs, &mut rng)
        };
        // The adversary transmitter stands next to the base station: its
        // path in is a clean single tap.
        let adv_to_gnb = draw_realization(&TdlProfile::identity(), fs, &mut channel_rng);
        Ok(Self {
            cfg,
            streams,
            ue_to_gnb,
            ue_to_adv,
            adv_to_gnb,
        })
    }

    pub fn streams(&self) -> &StreamFactory {
        &self.streams
    }

    /// One fresh UE transmit frame (a single pilot-bearing OFDM symbol with
    /// random payload bits).
    fn ue_tx_frame(&self, family: &str, index: u64) -> Result<IqFrame, ScenarioError> {
        let mut rng = self.streams.indexed_stream(&format!("{family}.tx"), index);
        let n_bits = self.cfg.ofdm.bits_per_ofdm_symbol();
        let bits: Vec<bool> = (0..n_bits).map(|_| rng.gen::<bool>()).collect();
        Ok(gen_ofdm_frame(&self.cfg.ofdm, &bits)?.0)
    }

    /// Receives a frame over a channel realization at the given SNR and
    /// extracts the authentication features.
    fn receive_features(
        &self,
        tx: &IqFrame,
        channel: &ChannelRealization,
        noise_rng: &mut ChaCha8Rng,
    ) -> Result<Vec<f64>, ScenarioError> {
        let faded = apply_realization(tx, channel);
        let received = add_awgn(&faded, self.cfg.gamma_db, noise_rng)?;
        Ok(iq_features(&received, AUTH_COMPLEX_SAMPLES)?)
    }

    /// The UE frame as the base station receives it.
    pub fn ue_frame_at_gnb(&self, family: &str, index: u64) -> Result<Vec<f64>, ScenarioError> {
        let tx = self.ue_tx_frame(family, index)?;
        let mut noise_rng = self
            .streams
            .indexed_stream(&format!("{family}.noise.gnb"), index);
        self.receive_features(&tx, &self.ue_to_gnb, &mut noise_rng)
    }

    /// The same UE frame as the adversary receiver and the base station
    /// each observe it (shared transmit frame, independent noise).
    pub fn ue_frame_at_both(
        &self,
        family: &str,
        index: u64,
    ) -> Result<(Vec<f64>, Vec<f64>), ScenarioError> {
        let tx = self.ue_tx_frame(family, index)?;
        let mut gnb_rng = self
            .streams
            .indexed_stream(&format!("{family}.noise.gnb"), index);
        let mut adv_rng = self
            .streams
            .indexed_stream(&format!("{family}.noise.adv"), index);
        let at_gnb = self.receive_features(&tx, &self.ue_to_gnb, &mut gnb_rng)?;
        let at_adv = self.receive_features(&tx, &self.ue_to_adv, &mut adv_rng)?;
        Ok((at_gnb, at_adv))
    }

    /// A non-UE frame: pure complex Gaussian noise at matched power.
    pub fn noise_frame_features(&self, family: &str, index: u64) -> Result<Vec<f64>, ScenarioError> {
        let mut rng = self
            .streams
            .indexed_stream(&format!("{family}.negative"), index);
        let frame = gen_noise_frame(
            AUTH_COMPLEX_SAMPLES,
            1.0,
            self.cfg.ofdm.sample_rate_hz(),
            &mut rng,
        );
        Ok(iq_features(&frame, AUTH_COMPLEX_SAMPLES)?)
    }

    /// Transmits an adversary feature row to the base station: back to
    /// complex samples, through the adversary's path, plus receiver noise
    /// at the configured SNR, and re-extracted as features.
    pub fn spoof_row_at_gnb(
        &self,
        row: &[f64],
        noise_rng: &mut ChaCha8Rng,
    ) -> Result<Vec<f64>, ScenarioError> {
        let frame = deinterleave_iq(row, self.cfg.ofdm.sample_rate_hz())?;
        let faded = apply_realization(&frame, &self.adv_to_gnb);
        let received = add_awgn(&faded, self.cfg.gamma_db, noise_rng)?;
        Ok(iq_features(&received, AUTH_COMPLEX_SAMPLES)?)
    }
}

/// Balanced authentication dataset: label 1 = intended UE frame (through
/// the quasi-static channel plus AWGN at gamma), label 0 = random noise.
pub fn build_auth_dataset(world: &AuthWorld) -> Result<LabeledDataset, ScenarioError> {
    let n = world.cfg.n_samples;
    let mut features = Array2::zeros((n, AUTH_FEATURE_LEN));
    let mut labels = Vec::with_capacity(n);
    for k in 0..n {
        let intended = k % 2 == 0;
        let row = if intended {
            world.ue_frame_at_gnb("auth", k as u64)?
        } else {
            world.noise_frame_features("auth", k as u64)?
        };
        for (j, &v) in row.iter().enumerate() {
            features[[k, j]] = v;
        }
        labels.push(intended as u8);
    }
    Ok(LabeledDataset::new(
        features,
        labels,
        LabelSemantics::IntendedOther,
    )?)
}

/// Trains the authentication classifier on the first half of the dataset
/// and reports accuracy on the second half.
pub fn train_auth_classifier(
    data: &LabeledDataset,
    cfg: &TrainConfig,
    init_rng: &mut ChaCha8Rng,
) -> Result<(Mlp, AuthReport), ScenarioError> {
    let (train, test) = data.split_half();
    let model = mlp_init(
        &MlpSpec::classifier(AUTH_FEATURE_LEN),
        Role::AuthClassifier,
        init_rng,
    )?;
    let (trained, report) = train_classifier(model, &train, cfg)?;
    let test_accuracy = crate::neural::classification_accuracy(&trained, &test)?;
    Ok((
        trained,
        AuthReport {
            test_accuracy,
            final_train_accuracy: report.final_train_accuracy,
        },
    ))
}

/// The adversary's GAN training set: UE frames as received at the
/// adversary receiver.
pub fn collect_adversary_observations(
    world: &AuthWorld,
    n_samples: usize,
) -> Result<Array2<f64>, ScenarioError> {
    if n_samples < 2 {
        return Err(ScenarioError::InvalidConfig(
            "need at least 2 adversary observations".into(),
        ));
    }
    let mut rows = Array2::zeros((n_samples, AUTH_FEATURE_LEN));
    for k in 0..n_samples {
        let tx = world.ue_tx_frame("collect", k as u64)?;
        let mut noise_rng = world
            .streams
            .indexed_stream("collect.noise.adv", k as u64);
        let row = world.receive_features(&tx, &world.ue_to_adv, &mut noise_rng)?;
        for (j, &v) in row.iter().enumerate() {
            rows[[k, j]] = v;
        }
    }
    Ok(rows)
}

/// Runs the spoofing attack: draw generator rows, put each on the air
/// through the adversary-to-base-station path, and count how many the
/// authentication classifier accepts as the intended UE.
pub fn run_spoofing_attack(
    auth_classifier: &Mlp,
    gan: &GanPair,
    world: &AuthWorld,
    n_trials: usize,
    family: &str,
) -> Result<SpoofResult, ScenarioError> {
    let mut draw_rng = world.streams.stream(&format!("{family}.generator"));
    let rows = generate_spoof(&gan.generator, &mut draw_rng, n_trials)?;
    let mut accepted = 0usize;
    for (k, row) in rows.rows().into_iter().enumerate() {
        let mut noise_rng = world
            .streams
            .indexed_stream(&format!("{family}.noise"), k as u64);
        let received = world.spoof_row_at_gnb(row.as_slice().unwrap(), &mut noise_rng)?;
        let (label, _) = auth_classifier.predict(&received)?;
        if label == 1 {
            accepted += 1;
        }
    }
    Ok(SpoofResult::new(n_trials, accepted))
}

/// Replay baseline: the adversary amplifies and forwards its own noisy,
/// channel-distorted recordings of UE frames instead of synthesizing new
/// ones.
pub fn replay_attack_baseline(
    auth_classifier: &Mlp,
    world: &AuthWorld,
    n_trials: usize,
    family: &str,
) -> Result<SpoofResult, ScenarioError> {
    let mut accepted = 0usize;
    for k in 0..n_trials {
        let tx = world.ue_tx_frame(&format!("{family}.replay"), k as u64)?;
        let mut record_rng = world
            .streams
            .indexed_stream(&format!("{family}.replay.noise.adv"), k as u64);
        let recorded = world.receive_features(&tx, &world.ue_to_adv, &mut record_rng)?;
        let mut noise_rng = world
            .streams
            .indexed_stream(&format!("{family}.replay.noise.gnb"), k as u64);
        let received = world.spoof_row_at_gnb(&recorded, &mut noise_rng)?;
        let (label, _) = auth_classifier.predict(&received)?;
        if label == 1 {
            accepted += 1;
        }
    }
    Ok(SpoofResult::new(n_trials, accepted))
}
