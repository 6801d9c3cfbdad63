//! Slot-loop simulation: the undisturbed baseline and the budgeted jamming
//! attack, sharing one world so runs are pairwise comparable.

use std::fmt;

use crate::neural::Mlp;
use crate::signal::{rssi_features, superpose};

use super::world::{EnergyBudget, Scenario1World};
use super::ScenarioError;

/// The adversary's per-slot action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackMode {
    None,
    JamData,
    JamSensing,
}

impl fmt::Display for AttackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AttackMode::None => "none",
            AttackMode::JamData => "jam_data",
            AttackMode::JamSensing => "jam_sensing",
        };
        f.write_str(s)
    }
}

/// Ground truth, decisions, and outcomes for one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRecord {
    pub slot: usize,
    pub truth_busy: bool,
    /// True when the sensing classifier called the slot busy.
    pub ct_decision_busy: bool,
    pub transmitted: bool,
    pub jam_action: AttackMode,
    pub ack: bool,
    pub adversary_predicted_ack: Option<bool>,
}

impl SlotRecord {
    /// The world-dynamics part of the record (everything except the
    /// adversary's private prediction).
    pub fn dynamics(&self) -> (bool, bool, bool, AttackMode, bool) {
        (
            self.truth_busy,
            self.ct_decision_busy,
            self.transmitted,
            self.jam_action,
            self.ack,
        )
    }
}

/// Per-slot trace of a run.
#[derive(Debug, Clone, Default)]
pub struct SlotTrace {
    pub records: Vec<SlotRecord>,
}

impl SlotTrace {
    /// CSV export: slot, truth_busy, ct_decision, transmitted, jam_action,
    /// ack, adversary_prediction.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("slot,truth_busy,ct_decision,transmitted,jam_action,ack,adversary_prediction\n");
        for r in &self.records {
            let prediction = match r.adversary_predicted_ack {
                Some(true) => "ack",
                Some(false) => "no_ack",
                None => "",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.slot,
                r.truth_busy,
                if r.ct_decision_busy { "busy" } else { "idle" },
                r.transmitted,
                r.jam_action,
                r.ack,
                prediction
            ));
        }
        out
    }
}

/// Aggregate outcome of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario1Metrics {
    pub n_slots: usize,
    pub truly_idle: usize,
    pub successes: usize,
    /// Successes over truly idle slots (the throughput an ideal detector
    /// would normalize to 1).
    pub normalized_throughput: f64,
    /// P(decision = idle | truth idle).
    pub idle_detection_rate: f64,
    /// P(decision = idle | truth busy).
    pub busy_detection_error: f64,
    /// P(no transmission | truth busy).
    pub incumbent_protection: f64,
    pub n_jams: usize,
    /// Jam actions spent on slots that would not have carried an ACK.
    pub unnecessary_jams: usize,
    pub unnecessary_jamming_rate: f64,
    pub energy_spent: f64,
}

fn metrics_from(records: &[SlotRecord], counterfactual_acks: Option<&[bool]>, energy: f64)
    -> Scenario1Metrics
{
    let n_slots = records.len();
    let truly_idle = records.iter().filter(|r| !r.truth_busy).count();
    let truly_busy = n_slots - truly_idle;
    let successes = records.iter().filter(|r| r.ack).count();
    let idle_said_idle = records
        .iter()
        .filter(|r| !r.truth_busy && !r.ct_decision_busy)
        .count();
    let busy_said_idle = records
        .iter()
        .filter(|r| r.truth_busy && !r.ct_decision_busy)
        .count();
    let busy_transmitted = records
        .iter()
        .filter(|r| r.truth_busy && r.transmitted)
        .count();
    let n_jams = records
        .iter()
        .filter(|r| r.jam_action != AttackMode::None)
        .count();
    let unnecessary_jams = match counterfactual_acks {
        None => 0,
        Some(acks) => records
            .iter()
            .filter(|r| r.jam_action != AttackMode::None && !acks[r.slot])
            .count(),
    };
    Scenario1Metrics {
        n_slots,
        truly_idle,
        successes,
        normalized_throughput: if truly_idle > 0 {
            successes as f64 / truly_idle as f64
        } else {
            0.0
        },
        idle_detection_rate: if truly_idle > 0 {
            idle_said_idle as f64 / truly_idle as f64
        } else {
            1.0
        },
        busy_detection_error: if truly_busy > 0 {
            busy_said_idle as f64 / truly_busy as f64
        } else {
            0.0
        },
        incumbent_protection: if truly_busy > 0 {
            1.0 - busy_transmitted as f64 / truly_busy as f64
        } else {
            1.0
        },
        n_jams,
        unnecessary_jams,
        unnecessary_jamming_rate: if n_jams > 0 {
            unnecessary_jams as f64 / n_jams as f64
        } else {
            0.0
        },
        energy_spent: energy,
    }
}

/// Runs the spectrum-sharing system with no adversary: sense, classify,
/// transmit on idle decisions, collect ACKs.
pub fn run_baseline(
    world: &Scenario1World,
    sensing_classifier: &Mlp,
    n_slots: usize,
    family: &str,
) -> Result<(SlotTrace, Scenario1Metrics), ScenarioError> {
    let occupancy = world.occupancy_sequence(family, n_slots);
    let mut records = Vec::with_capacity(n_slots);
    for (k, &busy) in occupancy.iter().enumerate() {
        let signals = world.slot_signals(family, k as u64, busy)?;
        let (label, _) = sensing_classifier.predict(&signals.bs_sensing_rssi)?;
        let decision_busy = label == 1;
        let transmitted = !decision_busy;
        let ack = transmitted && world.transmission_succeeds(family, k as u64, &signals, 0.0)?;
        records.push(SlotRecord {
            slot: k,
            truth_busy: busy,
            ct_decision_busy: decision_busy,
            transmitted,
            jam_action: AttackMode::None,
            ack,
            adversary_predicted_ack: None,
        });
    }
    let metrics = metrics_from(&records, None, 0.0);
    Ok((SlotTrace { records }, metrics))
}

/// Runs the budgeted jamming attack.
///
/// Each slot the adversary predicts from its own observations whether the
/// slot would carry an ACK, and if so spends energy on the selected jam:
/// `JamData` destroys the slot's reception at the data-phase cost;
/// `JamSensing` superposes a radar-mimicking burst onto the base station's
/// sensing window at the (much cheaper) sensing-phase cost, so the
/// classifier reads the idle channel as busy and the transmit opportunity
/// is wasted.
pub fn run_attack(
    world: &Scenario1World,
    sensing_classifier: &Mlp,
    surrogate: &Mlp,
    mode: AttackMode,
    mut budget: EnergyBudget,
    n_slots: usize,
    family: &str,
) -> Result<(SlotTrace, Scenario1Metrics), ScenarioError> {
    let cfg = &world.cfg;
    let occupancy = world.occupancy_sequence(family, n_slots);
    let mut records = Vec::with_capacity(n_slots);
    let mut counterfactual_acks = Vec::with_capacity(n_slots);
    for (k, &busy) in occupancy.iter().enumerate() {
        let slot = k as u64;
        let signals = world.slot_signals(family, slot, busy)?;

        // The system's undisturbed decision and outcome for this slot.
        let (clean_label, _) = sensing_classifier.predict(&signals.bs_sensing_rssi)?;
        let clean_transmit = clean_label == 0;
        let clean_success = world.transmission_succeeds(family, slot, &signals, 0.0)?;
        let clean_ack = clean_transmit && clean_success;
        counterfactual_acks.push(clean_ack);

        // The adversary's ACK prediction from its own observation of the
        // undisturbed slot (sensing bins, then data bins).
        let data_rssi = world.adversary_data_window(family, slot, &signals, clean_transmit)?;
        let mut adv_features = Vec::with_capacity(2 * cfg.n_rssi_bins);
        adv_features.extend_from_slice(&signals.adv_sensing_rssi);
        adv_features.extend_from_slice(&data_rssi);
        let (adv_label, _) = surrogate.predict(&adv_features)?;
        let predicted_ack = adv_label == 1;

        let cost = match mode {
            AttackMode::None => 0.0,
            AttackMode::JamData => cfg.timing.data_units,
            AttackMode::JamSensing => cfg.timing.sensing_units,
        };
        let jams = mode != AttackMode::None && predicted_ack && budget.try_spend(cost);
        let jam_action = if jams { mode } else { AttackMode::None };

        let (decision_busy, transmitted, ack) = match jam_action {
            AttackMode::JamSensing => {
                let jam = world.sensing_jam_waveform(family, slot)?;
                let jammed = superpose(&[&signals.bs_sensing_frame, &jam], &[1.0, 1.0])?;
                let jammed_rssi = rssi_features(&jammed, cfg.n_rssi_bins)?;
                let (label, _) = sensing_classifier.predict(&jammed_rssi)?;
                let decision_busy = label == 1;
                let transmitted = !decision_busy;
                // The sensing jam ends before the data phase; reception of
                // a transmission that happens anyway is unaffected.
                let ack = transmitted && clean_success;
                (decision_busy, transmitted, ack)
            }
            AttackMode::JamData => {
                // Jamming the whole data phase at the configured INR
                // destroys reception outright.
                (clean_label == 1, clean_transmit, false)
            }
            _ => (clean_label == 1, clean_transmit, clean_ack),
        };

        records.push(SlotRecord {
            slot: k,
            truth_busy: busy,
            ct_decision_busy: decision_busy,
            transmitted,
            jam_action,
            ack,
            adversary_predicted_ack: Some(predicted_ack),
        });
    }
    let metrics = metrics_from(&records, Some(&counterfactual_acks), budget.spent_units);
    Ok((SlotTrace { records }, metrics))
}

/// Relative throughput loss of an attacked run against its paired baseline
/// (same world seed and slot count).
pub fn throughput_reduction(
    baseline: &Scenario1Metrics,
    attacked: &Scenario1Metrics,
) -> Result<f64, ScenarioError> {
    if baseline.successes == 0 {
        return Err(ScenarioError::ZeroBaselineSuccesses);
    }
    Ok((baseline.successes as f64 - attacked.successes as f64) / baseline.successes as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{HiddenActivation, Mlp, MlpSpec, OutputActivation, Role};
    use crate::scenario1::{OccupancyModel, Scenario1Config, Scenario1World};
    use crate::StreamFactory;
    use ndarray::{Array1, Array2};

    /// Hand-built energy-threshold classifier: calls a slot busy when the
    /// mean RSSI bin exceeds the given dB level. Perfect on this world's
    /// clean inputs for a suitable threshold.
    fn threshold_classifier(n_bins: usize, threshold_db: f64) -> Mlp {
        let spec = MlpSpec {
            layer_sizes: vec![n_bins, 2],
            hidden_activation: HiddenActivation::Relu,
            output_activation: OutputActivation::Softmax,
            dropout_after: Default::default(),
        };
        let gain = 4.0;
        let mut w = Array2::zeros((2, n_bins));
        for j in 0..n_bins {
            w[[0, j]] = -gain / n_bins as f64;
            w[[1, j]] = gain / n_bins as f64;
        }
        let mut biases = Array1::zeros(2);
        biases[0] = gain * threshold_db;
        biases[1] = -gain * threshold_db;
        Mlp {
            spec,
            weights: vec![w],
            biases: vec![biases],
            role: Role::SensingClassifier,
            normalizer: None,
        }
    }

    fn always_ack_surrogate(n_features: usize) -> Mlp {
        let spec = MlpSpec {
            layer_sizes: vec![n_features, 2],
            hidden_activation: HiddenActivation::Relu,
            output_activation: OutputActivation::Softmax,
            dropout_after: Default::default(),
        };
        let w = Array2::zeros((2, n_features));
        let mut b = Array1::zeros(2);
        b[1] = 5.0;
        Mlp {
            spec,
            weights: vec![w],
            biases: vec![b],
            role: Role::SurrogateClassifier,
            normalizer: None,
        }
    }

    fn world(p_busy: f64, seed: u64) -> Scenario1World {
        let cfg = Scenario1Config {
            occupancy: OccupancyModel::Iid { p_busy },
            sensing_samples: 400,
            n_rssi_bins: 40,
            ..Scenario1Config::default()
        };
        Scenario1World::new(cfg, StreamFactory::new(seed)).unwrap()
    }

    #[test]
    fn zero_budget_attack_matches_baseline_dynamics() {
        let world = world(0.3, 90);
        let ct = threshold_classifier(40, 1.0);
        let ca = always_ack_surrogate(80);
        let (base_trace, base_metrics) = run_baseline(&world, &ct, 120, "run").unwrap();
        let (attack_trace, attack_metrics) = run_attack(
            &world,
            &ct,
            &ca,
            AttackMode::JamData,
            EnergyBudget::new(0.0),
            120,
            "run",
        )
        .unwrap();
        for (b, a) in base_trace.records.iter().zip(&attack_trace.records) {
            assert_eq!(b.dynamics(), a.dynamics());
        }
        assert_eq!(base_metrics.successes, attack_metrics.successes);
        assert_eq!(attack_metrics.energy_spent, 0.0);
        assert_eq!(attack_metrics.n_jams, 0);
    }

    #[test]
    fn all_busy_world_has_no_transmissions() {
        let world = world(1.0, 91);
        let ct = threshold_classifier(40, 1.0);
        let (trace, metrics) = run_baseline(&world, &ct, 60, "run").unwrap();
        // The threshold classifier sees every busy slot's pulses.
        assert!(metrics.busy_detection_error < 0.2);
        let transmissions = trace.records.iter().filter(|r| r.transmitted).count();
        assert!(transmissions <= 12);
        assert!(trace.records.iter().all(|r| !r.ack || !r.truth_busy));
    }

    #[test]
    fn all_idle_world_throughput_equals_idle_detection() {
        let world = world(0.0, 92);
        let ct = threshold_classifier(40, 1.0);
        let (_, metrics) = run_baseline(&world, &ct, 80, "run").unwrap();
        // With no radar and a solid link, every transmitted slot succeeds.
        assert!((metrics.normalized_throughput - metrics.idle_detection_rate).abs() < 1e-12);
    }

    #[test]
    fn jam_data_never_coexists_with_ack() {
        let world = world(0.2, 93);
        let ct = threshold_classifier(40, 1.0);
        let ca = always_ack_surrogate(80);
        let (trace, metrics) = run_attack(
            &world,
            &ct,
            &ca,
            AttackMode::JamData,
            EnergyBudget::new(9.0 * 30.0),
            100,
            "run",
        )
        .unwrap();
        assert!(trace
            .records
            .iter()
            .all(|r| !(r.jam_action == AttackMode::JamData && r.ack)));
        assert!(metrics.n_jams > 0);
        assert!(metrics.energy_spent <= 9.0 * 30.0 + 1e-9);
    }

    #[test]
    fn sensing_jam_flips_idle_decisions() {
        let world = world(0.0, 94);
        let ct = threshold_classifier(40, 1.0);
        let ca = always_ack_surrogate(80);
        let n = 100;
        let (trace, _) = run_attack(
            &world,
            &ct,
            &ca,
            AttackMode::JamSensing,
            EnergyBudget::new(n as f64),
            n,
            "run",
        )
        .unwrap();
        let jammed: Vec<_> = trace
            .records
            .iter()
            .filter(|r| r.jam_action == AttackMode::JamSensing)
            .collect();
        assert!(!jammed.is_empty());
        let flipped = jammed.iter().filter(|r| r.ct_decision_busy).count();
        assert!(
            flipped as f64 / jammed.len() as f64 >= 0.9,
            "{} of {} jammed slots flipped",
            flipped,
            jammed.len()
        );
    }

    #[test]
    fn throughput_reduction_arithmetic() {
        let mk = |successes| Scenario1Metrics {
            n_slots: 100,
            truly_idle: 100,
            successes,
            normalized_throughput: successes as f64 / 100.0,
            idle_detection_rate: 1.0,
            busy_detection_error: 0.0,
            incumbent_protection: 1.0,
            n_jams: 0,
            unnecessary_jams: 0,
            unnecessary_jamming_rate: 0.0,
            energy_spent: 0.0,
        };
        assert_eq!(throughput_reduction(&mk(500), &mk(500)).unwrap(), 0.0);
        assert_eq!(throughput_reduction(&mk(500), &mk(0)).unwrap(), 1.0);
        assert!((throughput_reduction(&mk(500), &mk(400)).unwrap() - 0.2).abs() < 1e-12);
        assert!(throughput_reduction(&mk(0), &mk(0)).is_err());
    }

    #[test]
    fn trace_csv_has_expected_header_and_rows() {
        let world = world(0.5, 95);
        let ct = threshold_classifier(40, 1.0);
        let (trace, _) = run_baseline(&world, &ct, 10, "run").unwrap();
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "slot,truth_busy,ct_decision,transmitted,jam_action,ack,adversary_prediction"
        );
        assert_eq!(lines.count(), 10);
    }
}
