//! Propagation: free-space loss, tapped delay line fading, AWGN,
//! superposition of concurrent transmissions.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::frame::{IqFrame, Origin};
use super::{db_to_lin, SignalError};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// One point-to-point link.
#[derive(Debug, Clone, Copy)]
pub struct LinkGeometry {
    pub distance_m: f64,
    pub carrier_hz: f64,
}

impl LinkGeometry {
    pub fn new(distance_m: f64, carrier_hz: f64) -> Result<Self, SignalError> {
        if !(distance_m > 0.0 && distance_m.is_finite()) {
            return Err(SignalError::InvalidConfig(format!(
                "distance_m must be positive, got {distance_m}"
            )));
        }
        if !(carrier_hz > 0.0 && carrier_hz.is_finite()) {
            return Err(SignalError::InvalidConfig(format!(
                "carrier_hz must be positive, got {carrier_hz}"
            )));
        }
        Ok(Self {
            distance_m,
            carrier_hz,
        })
    }
}

/// Free-space path loss, 20 log10(4 pi d f / c) dB.
pub fn free_space_loss_db(g: &LinkGeometry) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * g.distance_m * g.carrier_hz / SPEED_OF_LIGHT_M_S).log10()
}

/// Linear power gain of a link (inverse of the free-space loss).
pub fn path_gain_lin(g: &LinkGeometry) -> f64 {
    db_to_lin(-free_space_loss_db(g))
}

/// Per-tap fading law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fading {
    /// Complex Gaussian tap gains, |h_k|^2 averaging tap_powers_lin[k].
    Rayleigh,
    /// Deterministic gains sqrt(tap_powers_lin[k]).
    None,
}

/// Tapped delay line power-delay profile.
///
/// `delay_spread_s` is the maximum excess delay of the profile; tap powers
/// are normalized to sum to one at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TdlProfile {
    pub tap_delays_s: Vec<f64>,
    pub tap_powers_lin: Vec<f64>,
    pub delay_spread_s: f64,
    pub fading: Fading,
}

impl Default for TdlProfile {
    /// Three taps at {0, 100, 300} ns with an exponential power profile
    /// (decay constant 100 ns) and Rayleigh per-tap fading.
    fn default() -> Self {
        let delays = vec![0.0, 100e-9, 300e-9];
        let powers: Vec<f64> = delays.iter().map(|&d: &f64| (-d / 100e-9).exp()).collect();
        TdlProfile::new(delays, powers, 300e-9, Fading::Rayleigh).expect("default profile valid")
    }
}

impl TdlProfile {
    pub fn new(
        tap_delays_s: Vec<f64>,
        tap_powers_lin: Vec<f64>,
        delay_spread_s: f64,
        fading: Fading,
    ) -> Result<Self, SignalError> {
        if tap_delays_s.is_empty() || tap_delays_s.len() != tap_powers_lin.len() {
            return Err(SignalError::InvalidConfig(
                "tap delays and powers must be non-empty and equal length".into(),
            ));
        }
        if tap_delays_s.windows(2).any(|w| w[0] >= w[1]) || tap_delays_s[0] < 0.0 {
            return Err(SignalError::InvalidConfig(
                "tap delays must be ascending and non-negative".into(),
            ));
        }
        if tap_powers_lin.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(SignalError::InvalidConfig(
                "tap powers must be positive".into(),
            ));
        }
        let sum: f64 = tap_powers_lin.iter().sum();
        let tap_powers_lin: Vec<f64> = tap_powers_lin.iter().map(|p| p / sum).collect();
        let profile = Self {
            tap_delays_s,
            tap_powers_lin,
            delay_spread_s,
            fading,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Single tap at zero delay, no fading: the identity channel.
    pub fn identity() -> Self {
        Self {
            tap_delays_s: vec![0.0],
            tap_powers_lin: vec![1.0],
            delay_spread_s: 0.0,
            fading: Fading::None,
        }
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        let sum: f64 = self.tap_powers_lin.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(SignalError::InvalidConfig(format!(
                "tap powers must sum to 1 after normalization, got {sum}"
            )));
        }
        let max_delay = *self
            .tap_delays_s
            .last()
            .expect("profile has at least one tap");
        let spread = self.delay_spread_s;
        let consistent = if spread == 0.0 {
            max_delay == 0.0
        } else {
            (max_delay - spread).abs() <= 0.05 * spread
        };
        if !consistent {
            return Err(SignalError::InvalidConfig(format!(
                "max tap delay {max_delay} s inconsistent with delay spread {spread} s"
            )));
        }
        Ok(())
    }
}

/// One realization of a TDL channel at a given sample rate: integer sample
/// delays with complex tap gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps: Vec<(usize, Complex64)>,
}

impl ChannelRealization {
    pub fn max_delay_samples(&self) -> usize {
        self.taps.iter().map(|&(d, _)| d).max().unwrap_or(0)
    }

    /// Sum over taps of |gain|^2 — the instantaneous power gain.
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|&(_, g)| g.norm_sqr()).sum()
    }

    /// Composite single-tap gain used for genie-aided equalization when the
    /// whole profile collapses into one sample period.
    pub fn flat_gain(&self) -> Complex64 {
        self.taps.iter().map(|&(_, g)| g).sum()
    }
}

/// Draws tap gains for one channel use.
pub fn draw_realization(
    profile: &TdlProfile,
    sample_rate_hz: f64,
    rng: &mut ChaCha8Rng,
) -> ChannelRealization {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let taps = profile
        .tap_delays_s
        .iter()
        .zip(&profile.tap_powers_lin)
        .map(|(&delay, &power)| {
            let delay_samples = (delay * sample_rate_hz).round() as usize;
            let gain = match profile.fading {
                Fading::Rayleigh => {
                    let re: f64 = normal.sample(rng);
                    let im: f64 = normal.sample(rng);
                    Complex64::new(re, im) * (power / 2.0).sqrt()
                }
                Fading::None => Complex64::new(power.sqrt(), 0.0),
            };
            (delay_samples, gain)
        })
        .collect();
    ChannelRealization { taps }
}

/// Convolves a frame with a drawn realization. Output length grows by the
/// maximum tap delay in samples.
pub fn apply_realization(frame: &IqFrame, realization: &ChannelRealization) -> IqFrame {
    let max_delay = realization.max_delay_samples();
    let mut out = vec![Complex64::new(0.0, 0.0); frame.len() + max_delay];
    for &(delay, gain) in &realization.taps {
        for (n, &x) in frame.samples.iter().enumerate() {
            out[n + delay] += gain * x;
        }
    }
    IqFrame::unchecked(out, frame.sample_rate_hz, frame.origin)
}

/// Passes a frame through a TDL channel, drawing fresh tap gains from `rng`.
pub fn apply_tdl_channel(
    frame: &IqFrame,
    profile: &TdlProfile,
    rng: &mut ChaCha8Rng,
) -> Result<IqFrame, SignalError> {
    if frame.is_empty() {
        return Err(SignalError::FrameTooShort { need: 1, have: 0 });
    }
    profile.validate()?;
    let realization = draw_realization(profile, frame.sample_rate_hz, rng);
    Ok(apply_realization(frame, &realization))
}

/// Adds complex white Gaussian noise so that the measured signal power over
/// the noise variance equals 10^(snr_db/10). `f64::INFINITY` is the
/// noiseless sentinel and returns the frame unchanged.
pub fn add_awgn(
    frame: &IqFrame,
    snr_db: f64,
    rng: &mut ChaCha8Rng,
) -> Result<IqFrame, SignalError> {
    if snr_db == f64::INFINITY {
        return Ok(frame.clone());
    }
    let power = frame.power();
    if power <= 0.0 {
        return Err(SignalError::ZeroPowerSignal);
    }
    let noise_var = power / db_to_lin(snr_db);
    let sigma = (noise_var / 2.0).sqrt();
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let samples = frame
        .samples
        .iter()
        .map(|&s| s + Complex64::new(normal.sample(rng), normal.sample(rng)))
        .collect();
    Ok(IqFrame::unchecked(
        samples,
        frame.sample_rate_hz,
        frame.origin,
    ))
}

/// A frame of pure complex Gaussian noise with the given per-sample
/// variance.
pub fn gen_noise_frame(
    n_samples: usize,
    variance: f64,
    sample_rate_hz: f64,
    rng: &mut ChaCha8Rng,
) -> IqFrame {
    let sigma = (variance / 2.0).sqrt();
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let samples = (0..n_samples)
        .map(|_| Complex64::new(normal.sample(rng), normal.sample(rng)))
        .collect();
    IqFrame::unchecked(samples, sample_rate_hz, Origin::Noise)
}

/// Sample-wise weighted sum of frames; shorter frames are zero-padded to
/// the longest.
pub fn superpose(frames: &[&IqFrame], gains_lin: &[f64]) -> Result<IqFrame, SignalError> {
    if frames.is_empty() {
        return Err(SignalError::EmptyFrameList);
    }
    if frames.len() != gains_lin.len() {
        return Err(SignalError::InvalidConfig(format!(
            "{} frames but {} gains",
            frames.len(),
            gains_lin.len()
        )));
    }
    let rate = frames[0].sample_rate_hz;
    for f in frames {
        if f.sample_rate_hz != rate {
            return Err(SignalError::SampleRateMismatch(rate, f.sample_rate_hz));
        }
    }
    let len = frames.iter().map(|f| f.len()).max().unwrap_or(0);
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (frame, &gain) in frames.iter().zip(gains_lin) {
        for (o, &x) in out.iter_mut().zip(&frame.samples) {
            *o += gain * x;
        }
    }
    Ok(IqFrame::unchecked(out, rate, Origin::Mixture))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::StreamFactory;

    #[test]
    fn fspl_reference_values() {
        let g = LinkGeometry::new(1000.0, 4e9).unwrap();
        let loss = free_space_loss_db(&g);
        // Closed form evaluated independently: 20 log10(4 pi 1e3 4e9 / c).
        assert!((loss - 104.49).abs() < 0.01, "fspl {loss}");
    }

    #[test]
    fn fspl_unit_argument_is_zero() {
        let f = 4e9;
        let d = SPEED_OF_LIGHT_M_S / (4.0 * std::f64::consts::PI * f);
        let g = LinkGeometry::new(d, f).unwrap();
        assert!(free_space_loss_db(&g).abs() < 1e-9);
    }

    #[test]
    fn fspl_doubling_distance_adds_6db() {
        let g1 = LinkGeometry::new(500.0, 4e9).unwrap();
        let g2 = LinkGeometry::new(1000.0, 4e9).unwrap();
        let delta = free_space_loss_db(&g2) - free_space_loss_db(&g1);
        assert!((delta - 20.0 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn identity_profile_is_identity() {
        let frame = gen_noise_frame(64, 1.0, 1e6, &mut StreamFactory::new(1).stream("n"));
        let out = apply_tdl_channel(
            &frame,
            &TdlProfile::identity(),
            &mut StreamFactory::new(1).stream("ch"),
        )
        .unwrap();
        assert_eq!(out.samples, frame.samples);
    }

    /// Brute-force convolution oracle for a fading-disabled profile.
    fn conv_oracle(x: &[Complex64], taps: &[(usize, f64)]) -> Vec<Complex64> {
        let max_delay = taps.iter().map(|&(d, _)| d).max().unwrap();
        let mut y = vec![Complex64::new(0.0, 0.0); x.len() + max_delay];
        for (n, out) in y.iter_mut().enumerate() {
            for &(d, g) in taps {
                if n >= d && n - d < x.len() {
                    *out += g * x[n - d];
                }
            }
        }
        y
    }

    #[test]
    fn two_tap_convolution_matches_oracle() {
        // Two equal taps, fading disabled, delay of 2 samples at 1 MHz.
        let profile =
            TdlProfile::new(vec![0.0, 2e-6], vec![1.0, 1.0], 2e-6, Fading::None).unwrap();
        let samples: Vec<Complex64> = (1..=5)
            .map(|i| Complex64::new(i as f64, -(i as f64) * 0.5))
            .collect();
        let frame = IqFrame::new(samples.clone(), 1e6, Origin::UeSignal).unwrap();
        let mut rng = StreamFactory::new(2).stream("ch");
        let out = apply_tdl_channel(&frame, &profile, &mut rng).unwrap();
        // Normalized tap powers are 0.5 each, so gains are sqrt(0.5).
        let g = 0.5f64.sqrt();
        let expected = conv_oracle(&samples, &[(0, g), (2, g)]);
        assert_eq!(out.len(), expected.len());
        for (a, b) in out.samples.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn expected_power_conserved_over_realizations() {
        // Per-realization energy gain is sum_k p_k |h_k|^2 with unit mean;
        // its variance is sum_k p_k^2 ~ 0.57 for the default profile, so the
        // 2% check needs a few thousand draws to sit well above the noise.
        let profile = TdlProfile::default();
        let mut rng = StreamFactory::new(3).stream("fade");
        let n = 4000;
        let mut acc = 0.0;
        for _ in 0..n {
            let realization = draw_realization(&profile, 1e6, &mut rng);
            acc += realization.energy();
        }
        let ratio = acc / n as f64;
        assert!((ratio - 1.0).abs() < 0.02, "energy ratio {ratio}");
    }

    #[test]
    fn channel_output_energy_matches_tap_energy() {
        let profile = TdlProfile::default();
        let frame = gen_noise_frame(4096, 1.0, 1e6, &mut StreamFactory::new(3).stream("sig"));
        let mut rng = StreamFactory::new(4).stream("fade");
        let out = apply_tdl_channel(&frame, &profile, &mut rng).unwrap();
        // At 1 MHz all default taps collapse to delay 0, so the output is an
        // exact scalar multiple of the input.
        let mut check_rng = StreamFactory::new(4).stream("fade");
        let realization = draw_realization(&profile, 1e6, &mut check_rng);
        assert_eq!(realization.max_delay_samples(), 0);
        let out_energy = out.power() * out.len() as f64;
        let in_energy = frame.power() * frame.len() as f64;
        // Coincident taps add coherently: the gain is |sum h_k|^2.
        let gain = realization.flat_gain().norm_sqr();
        assert!(
            (out_energy / in_energy - gain).abs() < 1e-9,
            "flat-fade energy mismatch"
        );
    }

    #[test]
    fn awgn_noise_power_tracks_snr() {
        let frame = IqFrame::new(
            vec![Complex64::new(1.0, 0.0); 100_000],
            1e6,
            Origin::UeSignal,
        )
        .unwrap();
        let mut rng = StreamFactory::new(4).stream("awgn");
        for (snr_db, expect_var) in [(0.0, 1.0), (10.0, 0.1)] {
            let noisy = add_awgn(&frame, snr_db, &mut rng).unwrap();
            let measured: f64 = noisy
                .samples
                .iter()
                .zip(&frame.samples)
                .map(|(y, x)| (y - x).norm_sqr())
                .sum::<f64>()
                / frame.len() as f64;
            assert!(
                (measured - expect_var).abs() < 0.05 * expect_var.max(1.0),
                "snr {snr_db}: measured {measured}, expected {expect_var}"
            );
        }
    }

    #[test]
    fn awgn_sentinel_and_zero_power() {
        let frame = IqFrame::new(vec![Complex64::new(1.0, 1.0); 8], 1e6, Origin::UeSignal).unwrap();
        let mut rng = StreamFactory::new(5).stream("awgn");
        let same = add_awgn(&frame, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(same.samples, frame.samples);

        let zero = IqFrame::unchecked(vec![Complex64::new(0.0, 0.0); 8], 1e6, Origin::Noise);
        assert!(matches!(
            add_awgn(&zero, 10.0, &mut rng),
            Err(SignalError::ZeroPowerSignal)
        ));
    }

    #[test]
    fn superpose_identity_cancellation_and_weights() {
        let mut rng = StreamFactory::new(6).stream("sp");
        let a = gen_noise_frame(10, 1.0, 1e6, &mut rng);
        let b = gen_noise_frame(10, 1.0, 1e6, &mut rng);

        let same = superpose(&[&a], &[1.0]).unwrap();
        assert_eq!(same.samples, a.samples);

        let cancel = superpose(&[&a, &a], &[1.0, -1.0]).unwrap();
        assert!(cancel.samples.iter().all(|s| s.norm_sqr() == 0.0));

        let mix = superpose(&[&a, &b], &[2.0, 3.0]).unwrap();
        for n in 0..10 {
            let expect = 2.0 * a.samples[n] + 3.0 * b.samples[n];
            assert_eq!(mix.samples[n], expect);
        }
        assert_eq!(mix.origin, Origin::Mixture);
    }

    #[test]
    fn superpose_rejects_empty_and_mismatched_rates() {
        assert!(matches!(
            superpose(&[], &[]),
            Err(SignalError::EmptyFrameList)
        ));
        let mut rng = StreamFactory::new(7).stream("sp");
        let a = gen_noise_frame(4, 1.0, 1e6, &mut rng);
        let b = gen_noise_frame(4, 1.0, 2e6, &mut rng);
        assert!(matches!(
            superpose(&[&a, &b], &[1.0, 1.0]),
            Err(SignalError::SampleRateMismatch(_, _))
        ));
    }
}
