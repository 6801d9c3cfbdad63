//! Scenario 1: time-slotted spectrum sharing between a radar incumbent and
//! a 5G link, the adversary's surrogate-model (exploratory) attack on ACK
//! observations, and budgeted sensing-phase vs data-phase jamming.
//!
//! Entities, on a line: the radar (incumbent) at the origin, the base
//! station 1000 m away, the UE receiver just past it, and the adversary on
//! the far side of the radar — 1010 m from the radar, which puts it 2010 m
//! from the base station. The base station hosts the sensing classifier
//! (the ESC decision gates transmission directly); the adversary overhears
//! ACKs and jams from its own position.

mod dataset;
mod sim;
mod world;

pub use dataset::{build_adversary_dataset, build_defender_dataset, AdversaryObservations};
pub use sim::{
    run_attack, run_baseline, throughput_reduction, AttackMode, Scenario1Metrics, SlotRecord,
    SlotTrace,
};
pub use world::{
    EnergyBudget, Geometry, OccupancyModel, PowerConfig, Scenario1Config, Scenario1World,
    SlotTiming, SuccessRule,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("baseline has zero successes; throughput reduction undefined")]
    ZeroBaselineSuccesses,
    #[error(transparent)]
    Signal(#[from] crate::signal::SignalError),
    #[error(transparent)]
    Neural(#[from] crate::neural::NeuralError),
}
