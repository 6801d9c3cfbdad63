//! Waveform synthesis, channel effects, and receiver feature extraction.
//!
//! This module owns everything that happens "on the air": radar pulse
//! trains, OFDM modulation/demodulation, free-space path loss, tapped
//! delay line fading, AWGN, superposition of concurrent transmitters, and
//! the RSSI / I-Q feature vectors that the classifiers consume.

mod channel;
mod features;
mod frame;
mod ofdm;
mod radar;

pub use channel::{
    add_awgn, apply_realization, apply_tdl_channel, draw_realization, free_space_loss_db,
    gen_noise_frame, path_gain_lin, superpose, ChannelRealization, Fading, LinkGeometry,
    TdlProfile,
};
pub use features::{deinterleave_iq, iq_features, rssi_features, RSSI_FLOOR_DB};
pub use frame::{read_iq_file, Origin, IqFrame};
pub use ofdm::{demod_ofdm, gen_ofdm_frame, OfdmConfig};
pub use radar::{gen_radar_pulse, RadarConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("frame too short: need {need} samples, have {have}")]
    FrameTooShort { need: usize, have: usize },
    #[error("frame length {len} is not a multiple of the symbol length {symbol_len}")]
    LengthMismatch { len: usize, symbol_len: usize },
    #[error("cannot superpose an empty frame list")]
    EmptyFrameList,
    #[error("mismatched sample rates: {0} Hz vs {1} Hz")]
    SampleRateMismatch(f64, f64),
    #[error("finite SNR requested for a zero-power signal")]
    ZeroPowerSignal,
    #[error("frame contains non-finite samples")]
    NonFiniteSamples,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub(crate) fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}
