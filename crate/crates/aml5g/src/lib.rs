//! Desk-scale simulation of adversarial machine learning attacks on a
//! 5G-like system, together with a proactive decision-flipping defense.
//!
//! Two attack scenarios are modeled end to end:
//!
//! 1. **Spectrum sharing** ([`scenario1`]): a radar incumbent shares a band
//!    with a 5G link whose sensing classifier decides when to transmit. An
//!    adversary trains a surrogate model from over-the-air ACK observations
//!    and spends a finite energy budget jamming either data transmissions or
//!    the sensing period itself.
//! 2. **Signal authentication** ([`scenario2`]): a base station authenticates
//!    a UE by classifying raw I/Q features. An adversary pair trains a GAN
//!    over the air and transmits synthetic signals to infiltrate the
//!    authentication check.
//!
//! The [`defense`] module implements the countermeasure: the defender flips a
//! small ratio of its highest-confidence decisions while the adversary is
//! collecting training data, poisoning the surrogate/GAN without increasing
//! its own misdetection rate.
//!
//! Everything is deterministic under a fixed seed: random streams are derived
//! by name from a root seed (see [`rng`]), so independent consumers never
//! perturb each other.

pub mod defense;
pub mod harness;
pub mod neural;
pub mod rng;
pub mod scenario1;
pub mod scenario2;
pub mod signal;

pub use rng::StreamFactory;
