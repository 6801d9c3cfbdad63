//! Experiment configuration: a sectioned TOML document with every field
//! optional and defaulted, validated with field-level error messages.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::neural::{OptimizerKind, TrainConfig};
use crate::scenario1::{OccupancyModel, Scenario1Config, SlotTiming, SuccessRule};
use crate::scenario2::Scenario2Config;
use crate::signal::{Fading, OfdmConfig, TdlProfile};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Baseline1,
    Attack1,
    Defense1,
    Auth2,
    Spoof2,
    Defense2,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Baseline1 => "baseline1",
            Scenario::Attack1 => "attack1",
            Scenario::Defense1 => "defense1",
            Scenario::Auth2 => "auth2",
            Scenario::Spoof2 => "spoof2",
            Scenario::Defense2 => "defense2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainBlock {
    pub batch_size: usize,
    pub n_steps: usize,
    pub learning_rate: f64,
    pub optimizer: String,
}

impl Default for TrainBlock {
    fn default() -> Self {
        Self {
            batch_size: 100,
            n_steps: 1000,
            learning_rate: 1e-3,
            optimizer: "adam".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfdmBlock {
    pub subcarrier_spacing_hz: f64,
    pub n_resource_blocks: usize,
    pub fft_size: usize,
    pub cp_len: usize,
    pub bits_per_symbol: usize,
    pub carrier_hz: f64,
}

impl Default for OfdmBlock {
    fn default() -> Self {
        let d = OfdmConfig::default();
        Self {
            subcarrier_spacing_hz: d.subcarrier_spacing_hz,
            n_resource_blocks: d.n_resource_blocks,
            fft_size: d.fft_size,
            cp_len: d.cp_len,
            bits_per_symbol: d.bits_per_symbol,
            carrier_hz: d.carrier_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OccupancyBlock {
    pub kind: String,
    pub p_busy: f64,
    pub p_idle_to_busy: f64,
    pub p_busy_to_idle: f64,
}

impl Default for OccupancyBlock {
    fn default() -> Self {
        Self {
            kind: "iid".into(),
            p_busy: 0.1,
            p_idle_to_busy: 0.1,
            p_busy_to_idle: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingBlock {
    pub sensing_units: f64,
    pub data_units: f64,
}

impl Default for TimingBlock {
    fn default() -> Self {
        Self {
            sensing_units: 1.0,
            data_units: 9.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario1Block {
    pub n_slots: usize,
    pub n_defender_samples: usize,
    pub n_adversary_samples: usize,
    pub radar_snr_at_bs_db: f64,
    pub data_snr_at_ue_db: f64,
    pub jam_sensing_inr_at_bs_db: f64,
    pub jam_data_inr_at_ue_db: f64,
    pub sinr_threshold_db: f64,
    pub success_rule: String,
    pub ack_miss_probability: f64,
    /// Jamming energy; 0 means the default 0.2 * n_slots * data_units.
    pub budget_units: f64,
}

impl Default for Scenario1Block {
    fn default() -> Self {
        Self {
            n_slots: 2000,
            n_defender_samples: 1000,
            n_adversary_samples: 1000,
            radar_snr_at_bs_db: 12.0,
            data_snr_at_ue_db: 20.0,
            jam_sensing_inr_at_bs_db: 10.0,
            jam_data_inr_at_ue_db: 15.0,
            sinr_threshold_db: 10.0,
            success_rule: "sinr".into(),
            ack_miss_probability: 0.0,
            budget_units: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuthBlock {
    pub gamma_db: f64,
    /// SNR sweep for the auth2/spoof2 tables.
    pub gammas: Vec<f64>,
    pub n_samples: usize,
    pub n_trials: usize,
    pub n_adversary_obs: usize,
    pub pilot_spacing: usize,
    pub gan_steps: usize,
    pub gan_batch_size: usize,
    pub gan_learning_rate: f64,
}

impl Default for AuthBlock {
    fn default() -> Self {
        let d = Scenario2Config::default();
        Self {
            gamma_db: -3.0,
            gammas: vec![-3.0, 0.0, 3.0],
            n_samples: d.n_samples,
            n_trials: d.n_trials,
            n_adversary_obs: d.n_adversary_obs,
            pilot_spacing: d.ofdm.pilot_spacing,
            gan_steps: d.gan.n_steps,
            gan_batch_size: d.gan.batch_size,
            gan_learning_rate: d.gan.learning_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefenseBlock {
    pub p_d: f64,
    pub pd_values: Vec<f64>,
}

impl Default for DefenseBlock {
    fn default() -> Self {
        Self {
            p_d: 0.05,
            pd_values: vec![0.0, 0.01, 0.02, 0.05, 0.1, 0.2],
        }
    }
}

/// A fully materialized experiment configuration. Every field has a
/// default, so an empty document is a valid all-defaults `baseline1` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub n_seeds: u32,
    pub train: TrainBlock,
    pub ofdm: OfdmBlock,
    pub occupancy: OccupancyBlock,
    pub timing: TimingBlock,
    pub scenario1: Scenario1Block,
    pub auth: AuthBlock,
    pub defense: DefenseBlock,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Baseline1,
            seed: 1,
            n_seeds: 1,
            train: TrainBlock::default(),
            ofdm: OfdmBlock::default(),
            occupancy: OccupancyBlock::default(),
            timing: TimingBlock::default(),
            scenario1: Scenario1Block::default(),
            auth: AuthBlock::default(),
            defense: DefenseBlock::default(),
        }
    }
}

/// Parses a TOML configuration document, materializing defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let in_unit = |field: &str, v: f64| -> Result<(), HarnessError> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(HarnessError::validation(
                    field,
                    format!("{v} outside [0, 1]"),
                ))
            }
        };
        if self.n_seeds == 0 {
            return Err(HarnessError::validation("n_seeds", "must be >= 1"));
        }
        if self.train.batch_size == 0 {
            return Err(HarnessError::validation("train.batch_size", "must be >= 1"));
        }
        if self.train.n_steps == 0 {
            return Err(HarnessError::validation("train.n_steps", "must be >= 1"));
        }
        if !(self.train.learning_rate > 0.0) {
            return Err(HarnessError::validation(
                "train.learning_rate",
                "must be positive",
            ));
        }
        if !matches!(self.train.optimizer.as_str(), "adam" | "sgd") {
            return Err(HarnessError::validation(
                "train.optimizer",
                format!("unknown optimizer '{}'", self.train.optimizer),
            ));
        }
        if !matches!(self.occupancy.kind.as_str(), "iid" | "markov") {
            return Err(HarnessError::validation(
                "occupancy.kind",
                format!("unknown occupancy kind '{}'", self.occupancy.kind),
            ));
        }
        in_unit("occupancy.p_busy", self.occupancy.p_busy)?;
        in_unit("occupancy.p_idle_to_busy", self.occupancy.p_idle_to_busy)?;
        in_unit("occupancy.p_busy_to_idle", self.occupancy.p_busy_to_idle)?;
        if !(self.timing.sensing_units > 0.0 && self.timing.data_units > 0.0) {
            return Err(HarnessError::validation(
                "timing",
                "sensing_units and data_units must be positive",
            ));
        }
        if !matches!(self.scenario1.success_rule.as_str(), "sinr" | "bit_error_free") {
            return Err(HarnessError::validation(
                "scenario1.success_rule",
                format!("unknown success rule '{}'", self.scenario1.success_rule),
            ));
        }
        in_unit(
            "scenario1.ack_miss_probability",
            self.scenario1.ack_miss_probability,
        )?;
        if self.scenario1.n_slots == 0 {
            return Err(HarnessError::validation("scenario1.n_slots", "must be >= 1"));
        }
        if self.auth.n_samples < 2 || self.auth.n_samples % 2 != 0 {
            return Err(HarnessError::validation(
                "auth.n_samples",
                "must be even and >= 2",
            ));
        }
        if self.auth.n_trials == 0 {
            return Err(HarnessError::validation("auth.n_trials", "must be >= 1"));
        }
        if self.auth.pilot_spacing == 1 {
            return Err(HarnessError::validation(
                "auth.pilot_spacing",
                "1 leaves no payload subcarriers (use 0 to disable pilots)",
            ));
        }
        if self.auth.gammas.is_empty() {
            return Err(HarnessError::validation("auth.gammas", "must be non-empty"));
        }
        in_unit("defense.p_d", self.defense.p_d)?;
        if self.defense.pd_values.is_empty() {
            return Err(HarnessError::validation(
                "defense.pd_values",
                "must be non-empty",
            ));
        }
        for &p in &self.defense.pd_values {
            in_unit("defense.pd_values", p)?;
        }
        // Structural validation of the derived configs.
        self.scenario1_config()
            .map_err(|e| HarnessError::validation("scenario1", e.to_string()))?;
        self.scenario2_config(self.auth.gamma_db)
            .map_err(|e| HarnessError::validation("auth", e.to_string()))?;
        Ok(())
    }

    /// The canonical echo of this config: a TOML document with every
    /// default materialized.
    pub fn echo(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// First 16 hex characters of the SHA-256 of the canonical echo.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.echo().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            batch_size: self.train.batch_size,
            n_steps: self.train.n_steps,
            learning_rate: self.train.learning_rate,
            optimizer: if self.train.optimizer == "sgd" {
                OptimizerKind::Sgd
            } else {
                OptimizerKind::Adam
            },
            seed,
        }
    }

    fn ofdm_config(&self, pilot_spacing: usize) -> OfdmConfig {
        OfdmConfig {
            subcarrier_spacing_hz: self.ofdm.subcarrier_spacing_hz,
            n_resource_blocks: self.ofdm.n_resource_blocks,
            fft_size: self.ofdm.fft_size,
            cp_len: self.ofdm.cp_len,
            bits_per_symbol: self.ofdm.bits_per_symbol,
            carrier_hz: self.ofdm.carrier_hz,
            pilot_spacing,
        }
    }

    pub fn occupancy_model(&self) -> OccupancyModel {
        if self.occupancy.kind == "markov" {
            OccupancyModel::Markov {
                p_idle_to_busy: self.occupancy.p_idle_to_busy,
                p_busy_to_idle: self.occupancy.p_busy_to_idle,
            }
        } else {
            OccupancyModel::Iid {
                p_busy: self.occupancy.p_busy,
            }
        }
    }

    pub fn scenario1_config(&self) -> Result<Scenario1Config, crate::scenario1::ScenarioError> {
        let cfg = Scenario1Config {
            occupancy: self.occupancy_model(),
            timing: SlotTiming {
                sensing_units: self.timing.sensing_units,
                data_units: self.timing.data_units,
            },
            ofdm: self.ofdm_config(0),
            power: crate::scenario1::PowerConfig {
                radar_snr_at_bs_db: self.scenario1.radar_snr_at_bs_db,
                data_snr_at_ue_db: self.scenario1.data_snr_at_ue_db,
                jam_sensing_inr_at_bs_db: self.scenario1.jam_sensing_inr_at_bs_db,
                jam_data_inr_at_ue_db: self.scenario1.jam_data_inr_at_ue_db,
            },
            success_rule: if self.scenario1.success_rule == "bit_error_free" {
                SuccessRule::BitErrorFree
            } else {
                SuccessRule::SinrThreshold(self.scenario1.sinr_threshold_db)
            },
            ack_miss_probability: self.scenario1.ack_miss_probability,
            n_slots: self.scenario1.n_slots,
            n_defender_samples: self.scenario1.n_defender_samples,
            n_adversary_samples: self.scenario1.n_adversary_samples,
            ..Scenario1Config::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn scenario2_config(
        &self,
        gamma_db: f64,
    ) -> Result<Scenario2Config, crate::scenario1::ScenarioError> {
        let cfg = Scenario2Config {
            gamma_db,
            n_samples: self.auth.n_samples,
            ofdm: self.ofdm_config(self.auth.pilot_spacing),
            tdl: TdlProfile::default(),
            n_adversary_obs: self.auth.n_adversary_obs,
            n_trials: self.auth.n_trials,
            gan: TrainConfig {
                batch_size: self.auth.gan_batch_size,
                n_steps: self.auth.gan_steps,
                learning_rate: self.auth.gan_learning_rate,
                optimizer: OptimizerKind::Adam,
                seed: 0,
            },
            classifier: self.train_config(0),
            adversary_colocated: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn budget_units(&self) -> f64 {
        if self.scenario1.budget_units > 0.0 {
            self.scenario1.budget_units
        } else {
            0.2 * self.scenario1.n_slots as f64 * self.timing.data_units
        }
    }

    /// Keep the TDL default exposed for tooling parity.
    pub fn tdl_fading(&self) -> Fading {
        Fading::Rayleigh
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults_baseline1() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.scenario, Scenario::Baseline1);
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn out_of_range_pd_names_the_field() {
        let err = parse_config("[defense]\np_d = 1.5\n").unwrap_err();
        match err {
            HarnessError::Validation { field, .. } => assert_eq!(field, "defense.p_d"),
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn echo_round_trip_preserves_values() {
        let text = "scenario = \"spoof2\"\n[auth]\ngamma_db = 3.0\nn_trials = 500\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.auth.gamma_db, 3.0);
        assert_eq!(cfg.auth.n_trials, 500);
        let echoed = cfg.echo();
        let back = parse_config(&echoed).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.config_hash(), cfg.config_hash());
    }

    #[test]
    fn parse_error_carries_line_information() {
        let err = parse_config("scenario = \"nope\"").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("parse error"), "{text}");
        // toml errors carry a line/column span.
        assert!(text.contains("line 1"), "{text}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_config("definitely_not_a_key = 3").is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = parse_config("").unwrap();
        let b = parse_config("seed = 2").unwrap();
        assert_eq!(a.config_hash(), parse_config("").unwrap().config_hash());
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 16);
    }
}
