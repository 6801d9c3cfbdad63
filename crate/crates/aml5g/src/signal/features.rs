//! Receiver feature extraction: windowed RSSI vectors and raw I/Q vectors.

use num_complex::Complex64;

use super::frame::{IqFrame, Origin};
use super::{lin_to_db, SignalError};

/// Floor applied to RSSI features so all-zero windows stay finite.
pub const RSSI_FLOOR_DB: f64 = -120.0;

/// Splits the frame into `n_bins` contiguous equal-length windows and
/// returns the mean power of each window in dB (floored at
/// [`RSSI_FLOOR_DB`]). Trailing samples that do not fill a window are
/// ignored.
pub fn rssi_features(frame: &IqFrame, n_bins: usize) -> Result<Vec<f64>, SignalError> {
    if n_bins == 0 {
        return Err(SignalError::InvalidConfig("n_bins must be positive".into()));
    }
    if frame.len() < n_bins {
        return Err(SignalError::FrameTooShort {
            need: n_bins,
            have: frame.len(),
        });
    }
    let window = frame.len() / n_bins;
    let features = (0..n_bins)
        .map(|i| {
            let mean_power = frame.samples[i * window..(i + 1) * window]
                .iter()
                .map(|s| s.norm_sqr())
                .sum::<f64>()
                / window as f64;
            if mean_power > 0.0 {
                lin_to_db(mean_power).max(RSSI_FLOOR_DB)
            } else {
                RSSI_FLOOR_DB
            }
        })
        .collect();
    Ok(features)
}

/// Takes the first `n_complex` samples, normalizes them to unit average
/// power, and interleaves them as [re0, im0, re1, im1, ...].
pub fn iq_features(frame: &IqFrame, n_complex: usize) -> Result<Vec<f64>, SignalError> {
    if frame.len() < n_complex {
        return Err(SignalError::FrameTooShort {
            need: n_complex,
            have: frame.len(),
        });
    }
    let head = &frame.samples[..n_complex];
    let mean_power = head.iter().map(|s| s.norm_sqr()).sum::<f64>() / n_complex as f64;
    let scale = if mean_power > 0.0 {
        1.0 / mean_power.sqrt()
    } else {
        1.0
    };
    let mut out = Vec::with_capacity(2 * n_complex);
    for s in head {
        out.push(s.re * scale);
        out.push(s.im * scale);
    }
    Ok(out)
}

/// Inverse of [`iq_features`]: de-interleaves a feature row back into
/// complex samples. Used to put synthetic feature rows on the air.
pub fn deinterleave_iq(features: &[f64], sample_rate_hz: f64) -> Result<IqFrame, SignalError> {
    if features.is_empty() || features.len() % 2 != 0 {
        return Err(SignalError::InvalidConfig(format!(
            "feature row length must be even and non-zero, got {}",
            features.len()
        )));
    }
    let samples: Vec<Complex64> = features
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    IqFrame::new(samples, sample_rate_hz, Origin::Spoof)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::StreamFactory;
    use crate::signal::gen_noise_frame;

    #[test]
    fn constant_amplitude_gives_zero_db() {
        let frame =
            IqFrame::new(vec![Complex64::new(1.0, 0.0); 400], 1e6, Origin::Noise).unwrap();
        for n_bins in [1, 4, 200] {
            let f = rssi_features(&frame, n_bins).unwrap();
            assert_eq!(f.len(), n_bins);
            assert!(f.iter().all(|&v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn all_zero_frame_hits_floor() {
        let frame = IqFrame::unchecked(vec![Complex64::new(0.0, 0.0); 100], 1e6, Origin::Noise);
        let f = rssi_features(&frame, 10).unwrap();
        assert!(f.iter().all(|&v| v == RSSI_FLOOR_DB));
    }

    #[test]
    fn two_step_amplitude_profile() {
        let mut samples = vec![Complex64::new(1.0, 0.0); 50];
        samples.extend(vec![Complex64::new(2.0, 0.0); 50]);
        let frame = IqFrame::new(samples, 1e6, Origin::Noise).unwrap();
        let f = rssi_features(&frame, 2).unwrap();
        assert!(f[0].abs() < 1e-12);
        // 20 log10(2) = 6.0206 dB.
        assert!((f[1] - 20.0 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn frame_too_short_is_rejected() {
        let frame = IqFrame::new(vec![Complex64::new(1.0, 0.0); 5], 1e6, Origin::Noise).unwrap();
        assert!(matches!(
            rssi_features(&frame, 10),
            Err(SignalError::FrameTooShort { .. })
        ));
        assert!(matches!(
            iq_features(&frame, 10),
            Err(SignalError::FrameTooShort { .. })
        ));
    }

    #[test]
    fn iq_features_length_and_normalization() {
        let mut rng = StreamFactory::new(11).stream("iq");
        let frame = gen_noise_frame(300, 2.5, 1e6, &mut rng);
        let f = iq_features(&frame, 200).unwrap();
        assert_eq!(f.len(), 400);
        let mean_power: f64 = f.chunks_exact(2).map(|c| c[0] * c[0] + c[1] * c[1]).sum::<f64>()
            / 200.0;
        assert!((mean_power - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pure_real_frame_has_zero_imag_entries() {
        let samples: Vec<Complex64> = (1..=100).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let frame = IqFrame::new(samples, 1e6, Origin::Noise).unwrap();
        let f = iq_features(&frame, 50).unwrap();
        for (i, v) in f.iter().enumerate() {
            if i % 2 == 1 {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn deinterleave_round_trip() {
        let mut rng = StreamFactory::new(12).stream("iq");
        let frame = gen_noise_frame(200, 1.0, 1e6, &mut rng);
        let f = iq_features(&frame, 200).unwrap();
        let back = deinterleave_iq(&f, 1e6).unwrap();
        let f2 = iq_features(&back, 200).unwrap();
        for (a, b) in f.iter().zip(&f2) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
