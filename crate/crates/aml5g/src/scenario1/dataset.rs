//! Training datasets for the defender's sensing classifier and the
//! adversary's surrogate ACK predictor.

use rand::Rng;

use ndarray::Array2;

use crate::defense::{apply_defense, DefensePolicy, FlipAudit};
use crate::neural::{LabelSemantics, LabeledDataset, Mlp};

use super::world::Scenario1World;
use super::ScenarioError;

/// Balanced idle/busy sensing dataset as seen at the base station; label 1
/// is busy. Built half idle, half busy by construction.
pub fn build_defender_dataset(
    world: &Scenario1World,
    n_samples: usize,
) -> Result<LabeledDataset, ScenarioError> {
    if n_samples < 2 {
        return Err(ScenarioError::InvalidConfig(
            "need at least 2 defender samples".into(),
        ));
    }
    let d = world.cfg.n_rssi_bins;
    let mut features = Array2::zeros((n_samples, d));
    let mut labels = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let busy = k % 2 == 1;
        let signals = world.slot_signals("defender", k as u64, busy)?;
        for (j, &v) in signals.bs_sensing_rssi.iter().enumerate() {
            features[[k, j]] = v;
        }
        labels.push(busy as u8);
    }
    Ok(LabeledDataset::new(
        features,
        labels,
        LabelSemantics::IdleBusy,
    )?)
}

/// What the adversary collected during its observation window, plus the
/// defender-side bookkeeping of that window.
pub struct AdversaryObservations {
    /// 400-wide feature rows (sensing window bins then data window bins at
    /// the adversary) labeled with observed ACKs.
    pub dataset: LabeledDataset,
    /// Fraction of would-be successes the defender gave up to its own
    /// flips during this window.
    pub defender_cost: f64,
    /// How many transmit decisions were flipped.
    pub n_flips: usize,
    /// Scope-safety audit of the flips.
    pub audit: FlipAudit,
}

/// Simulates the adversary's observation window: `n_samples` slots of
/// baseline operation (no jamming), optionally with the defender's
/// decision-flipping active, and collects the adversary's labeled
/// observations.
pub fn build_adversary_dataset(
    world: &Scenario1World,
    sensing_classifier: &Mlp,
    n_samples: usize,
    defense: Option<&DefensePolicy>,
) -> Result<AdversaryObservations, ScenarioError> {
    if n_samples < 2 {
        return Err(ScenarioError::InvalidConfig(
            "need at least 2 adversary samples".into(),
        ));
    }
    let family = "observe";
    let occupancy = world.occupancy_sequence(family, n_samples);

    // Pass 1: sensing decisions for every slot (these do not depend on
    // transmit outcomes).
    let mut slot_signals = Vec::with_capacity(n_samples);
    let mut decisions = Vec::with_capacity(n_samples);
    for (k, &busy) in occupancy.iter().enumerate() {
        let signals = world.slot_signals(family, k as u64, busy)?;
        let (label, confidence) = sensing_classifier.predict(&signals.bs_sensing_rssi)?;
        decisions.push((label, confidence));
        slot_signals.push(signals);
    }

    // The defender flips its top-confidence transmit-bound decisions.
    let mut audit = FlipAudit::default();
    let (final_decisions, n_flips) = match defense {
        None => (decisions.clone(), 0),
        Some(policy) => {
            let mut rng = world.streams().stream("observe.defense");
            let outcome = apply_defense(&decisions, policy, &mut rng);
            audit.record(&outcome, &decisions);
            let n = outcome.flip_indices.len();
            (outcome.decisions, n)
        }
    };

    // Pass 2: transmissions, ACKs, and the adversary's observations.
    let d = 2 * world.cfg.n_rssi_bins;
    let mut features = Array2::zeros((n_samples, d));
    let mut labels = Vec::with_capacity(n_samples);
    let mut ack_miss_rng = world.streams().stream("observe.ack_miss");
    let mut would_be_successes = 0usize;
    let mut realized_successes = 0usize;
    for k in 0..n_samples {
        let signals = &slot_signals[k];
        let would_transmit = decisions[k].0 == 0;
        let transmitted = final_decisions[k].0 == 0;
        let clean_success = world.transmission_succeeds(family, k as u64, signals, 0.0)?;
        if would_transmit && clean_success {
            would_be_successes += 1;
        }
        let ack = transmitted && clean_success;
        if ack {
            realized_successes += 1;
        }

        let data_rssi = world.adversary_data_window(family, k as u64, signals, transmitted)?;
        for (j, &v) in signals.adv_sensing_rssi.iter().enumerate() {
            features[[k, j]] = v;
        }
        for (j, &v) in data_rssi.iter().enumerate() {
            features[[k, world.cfg.n_rssi_bins + j]] = v;
        }
        let observed_ack = ack
            && !(world.cfg.ack_miss_probability > 0.0
                && ack_miss_rng.gen::<f64>() < world.cfg.ack_miss_probability);
        labels.push(observed_ack as u8);
    }

    let defender_cost = if would_be_successes > 0 {
        1.0 - realized_successes as f64 / would_be_successes as f64
    } else {
        0.0
    };
    Ok(AdversaryObservations {
        dataset: LabeledDataset::new(features, labels, LabelSemantics::AckNoAck)?,
        defender_cost,
        n_flips,
        audit,
    })
}
