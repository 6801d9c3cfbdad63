//! Monostatic radar pulse train synthesis.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use super::frame::{IqFrame, Origin};
use super::SignalError;

/// Rectangular pulse train parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarConfig {
    pub pulse_width_s: f64,
    pub pulse_repetition_interval_s: f64,
    /// Peak pulse power (linear). Zero yields an all-zero frame.
    pub peak_power_lin: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            pulse_width_s: 10e-6,
            pulse_repetition_interval_s: 100e-6,
            peak_power_lin: 1.0,
        }
    }
}

impl RadarConfig {
    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.pulse_width_s > 0.0 && self.pulse_width_s.is_finite()) {
            return Err(SignalError::InvalidConfig(format!(
                "pulse_width_s must be positive, got {}",
                self.pulse_width_s
            )));
        }
        if self.pulse_width_s >= self.pulse_repetition_interval_s {
            return Err(SignalError::InvalidConfig(format!(
                "pulse width {} s must be shorter than the PRI {} s",
                self.pulse_width_s, self.pulse_repetition_interval_s
            )));
        }
        if !(self.peak_power_lin >= 0.0 && self.peak_power_lin.is_finite()) {
            return Err(SignalError::InvalidConfig(format!(
                "peak_power_lin must be non-negative, got {}",
                self.peak_power_lin
            )));
        }
        Ok(())
    }
}

/// Generates a rectangular pulse train: pulses of `pulse_width_s` at the
/// PRI, zero between pulses, each pulse with a random carrier phase.
pub fn gen_radar_pulse(
    cfg: &RadarConfig,
    n_samples: usize,
    sample_rate_hz: f64,
    rng: &mut ChaCha8Rng,
) -> Result<IqFrame, SignalError> {
    cfg.validate()?;
    if n_samples == 0 {
        return Err(SignalError::InvalidConfig(
            "n_samples must be positive".into(),
        ));
    }
    let pri_samples = (cfg.pulse_repetition_interval_s * sample_rate_hz).round() as usize;
    let width_samples = ((cfg.pulse_width_s * sample_rate_hz).round() as usize).max(1);
    if pri_samples == 0 {
        return Err(SignalError::InvalidConfig(
            "PRI shorter than one sample period".into(),
        ));
    }
    let amp = cfg.peak_power_lin.sqrt();
    let mut samples = vec![Complex64::new(0.0, 0.0); n_samples];
    let mut start = 0usize;
    while start < n_samples {
        let phase = rng.gen::<f64>() * TAU;
        let value = Complex64::from_polar(amp, phase);
        for s in samples.iter_mut().skip(start).take(width_samples) {
            *s = value;
        }
        start += pri_samples;
    }
    Ok(IqFrame::unchecked(samples, sample_rate_hz, Origin::Radar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamFactory;

    /// Independent oracle: expected pulse layout from width/PRI/sample rate.
    fn expected_runs(n_samples: usize, width_s: f64, pri_s: f64, fs: f64) -> Vec<(usize, usize)> {
        let pri = (pri_s * fs).round() as usize;
        let width = (width_s * fs).round() as usize;
        let mut runs = Vec::new();
        let mut start = 0;
        while start < n_samples {
            runs.push((start, width.min(n_samples - start)));
            start += pri;
        }
        runs
    }

    fn nonzero_runs(frame: &IqFrame) -> Vec<(usize, usize)> {
        let mut runs = Vec::new();
        let mut i = 0;
        while i < frame.len() {
            if frame.samples[i].norm_sqr() > 0.0 {
                let start = i;
                while i < frame.len() && frame.samples[i].norm_sqr() > 0.0 {
                    i += 1;
                }
                runs.push((start, i - start));
            } else {
                i += 1;
            }
        }
        runs
    }

    #[test]
    fn pulse_count_matches_oracle() {
        let cfg = RadarConfig {
            pulse_width_s: 1e-5,
            pulse_repetition_interval_s: 1e-4,
            peak_power_lin: 1.0,
        };
        let mut rng = StreamFactory::new(1).stream("radar");
        let frame = gen_radar_pulse(&cfg, 10_000, 1e6, &mut rng).unwrap();
        let expected = expected_runs(10_000, 1e-5, 1e-4, 1e6);
        // 10 000 samples at 1 MHz with a 100 us PRI hold 100 pulses of
        // 10 samples each.
        assert_eq!(expected.len(), 100);
        assert!(expected.iter().all(|&(_, w)| w == 10));
        assert_eq!(nonzero_runs(&frame), expected);
    }

    #[test]
    fn zero_power_gives_zero_frame() {
        let cfg = RadarConfig {
            peak_power_lin: 0.0,
            ..RadarConfig::default()
        };
        let mut rng = StreamFactory::new(2).stream("radar");
        let frame = gen_radar_pulse(&cfg, 1000, 1e6, &mut rng).unwrap();
        assert!(frame.samples.iter().all(|s| s.norm_sqr() == 0.0));
    }

    #[test]
    fn pulse_width_equal_to_pri_is_rejected() {
        let cfg = RadarConfig {
            pulse_width_s: 1e-4,
            pulse_repetition_interval_s: 1e-4,
            peak_power_lin: 1.0,
        };
        let mut rng = StreamFactory::new(3).stream("radar");
        assert!(gen_radar_pulse(&cfg, 1000, 1e6, &mut rng).is_err());
    }

    #[test]
    fn deterministic_under_fixed_seed() {
        let cfg = RadarConfig::default();
        let mut a = StreamFactory::new(9).stream("radar");
        let mut b = StreamFactory::new(9).stream("radar");
        let fa = gen_radar_pulse(&cfg, 2000, 1e6, &mut a).unwrap();
        let fb = gen_radar_pulse(&cfg, 2000, 1e6, &mut b).unwrap();
        assert_eq!(fa, fb);
    }
}
