//! World model: geometry, powers, occupancy, slot timing, energy budget,
//! and the per-slot signal synthesis shared by every scenario-1 pipeline.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::rng::StreamFactory;
use crate::signal::{
    apply_realization, demod_ofdm, draw_realization, gen_ofdm_frame, gen_noise_frame,
    gen_radar_pulse, rssi_features, superpose, ChannelRealization, IqFrame, OfdmConfig, Origin,
    RadarConfig, TdlProfile,
};

use super::ScenarioError;

/// Channel occupancy process for the incumbent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OccupancyModel {
    Iid { p_busy: f64 },
    Markov { p_idle_to_busy: f64, p_busy_to_idle: f64 },
}

impl OccupancyModel {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let probs = match self {
            OccupancyModel::Iid { p_busy } => vec![*p_busy],
            OccupancyModel::Markov {
                p_idle_to_busy,
                p_busy_to_idle,
            } => vec![*p_idle_to_busy, *p_busy_to_idle],
        };
        for p in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(ScenarioError::InvalidConfig(format!(
                    "occupancy probability {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn next(&self, previous_busy: bool, rng: &mut ChaCha8Rng) -> bool {
        match self {
            OccupancyModel::Iid { p_busy } => rng.gen::<f64>() < *p_busy,
            OccupancyModel::Markov {
                p_idle_to_busy,
                p_busy_to_idle,
            } => {
                if previous_busy {
                    !(rng.gen::<f64>() < *p_busy_to_idle)
                } else {
                    rng.gen::<f64>() < *p_idle_to_busy
                }
            }
        }
    }
}

/// Relative slot-phase durations (energy units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotTiming {
    pub sensing_units: f64,
    pub data_units: f64,
}

impl Default for SlotTiming {
    fn default() -> Self {
        Self {
            sensing_units: 1.0,
            data_units: 9.0,
        }
    }
}

impl SlotTiming {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.sensing_units > 0.0 && self.data_units > 0.0) {
            return Err(ScenarioError::InvalidConfig(
                "slot timing units must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The adversary's jamming energy ledger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBudget {
    pub total_units: f64,
    pub spent_units: f64,
}

impl EnergyBudget {
    pub fn new(total_units: f64) -> Self {
        Self {
            total_units,
            spent_units: 0.0,
        }
    }

    pub fn remaining(&self) -> f64 {
        self.total_units - self.spent_units
    }

    /// Spends `cost` if affordable; returns whether it was.
    pub fn try_spend(&mut self, cost: f64) -> bool {
        if cost <= self.remaining() + 1e-12 {
            self.spent_units += cost;
            true
        } else {
            false
        }
    }
}

/// Node positions expressed as pairwise distances (meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub radar_bs_m: f64,
    pub radar_adv_m: f64,
    pub radar_ue_m: f64,
    pub bs_ue_m: f64,
    pub bs_adv_m: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            radar_bs_m: 1000.0,
            radar_adv_m: 1010.0,
            radar_ue_m: 1050.0,
            bs_ue_m: 50.0,
            bs_adv_m: 2010.0,
        }
    }
}

/// Received power levels, as SNR/INR over the unit noise floor at the
/// victim receiver. Levels at other receivers follow from the free-space
/// distance ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig {
    /// Peak radar pulse SNR at the base station's sensing receiver.
    pub radar_snr_at_bs_db: f64,
    /// Clear-channel data SNR at the UE.
    pub data_snr_at_ue_db: f64,
    /// Sensing-phase jam INR at the base station.
    pub jam_sensing_inr_at_bs_db: f64,
    /// Data-phase jam INR at the UE.
    pub jam_data_inr_at_ue_db: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            radar_snr_at_bs_db: 12.0,
            data_snr_at_ue_db: 20.0,
            jam_sensing_inr_at_bs_db: 10.0,
            jam_data_inr_at_ue_db: 15.0,
        }
    }
}

/// How a slot's data reception is judged successful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuccessRule {
    /// Mean SINR at the UE above the threshold (dB). The default; cheap.
    SinrThreshold(f64),
    /// Zero bit errors on the genie-equalized demodulated payload.
    BitErrorFree,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario1Config {
    pub occupancy: OccupancyModel,
    pub timing: SlotTiming,
    pub ofdm: OfdmConfig,
    pub radar: RadarConfig,
    pub tdl: TdlProfile,
    pub geometry: Geometry,
    pub power: PowerConfig,
    pub success_rule: SuccessRule,
    /// Probability that the adversary misses an on-air ACK while collecting
    /// training labels.
    pub ack_miss_probability: f64,
    pub sensing_samples: usize,
    pub n_rssi_bins: usize,
    pub n_slots: usize,
    pub n_defender_samples: usize,
    pub n_adversary_samples: usize,
}

impl Default for Scenario1Config {
    fn default() -> Self {
        Self {
            // The jamming-comparison arithmetic of the attack evaluation
            // assumes a mostly-idle band; 0.1 keeps a few hundred busy
            // slots in a 2000-slot run for the protection metrics.
            occupancy: OccupancyModel::Iid { p_busy: 0.1 },
            timing: SlotTiming::default(),
            ofdm: OfdmConfig::default(),
            radar: RadarConfig::default(),
            tdl: TdlProfile::default(),
            geometry: Geometry::default(),
            power: PowerConfig::default(),
            success_rule: SuccessRule::SinrThreshold(10.0),
            ack_miss_probability: 0.0,
            sensing_samples: 2000,
            n_rssi_bins: 200,
            n_slots: 2000,
            n_defender_samples: 1000,
            n_adversary_samples: 1000,
        }
    }
}

impl Scenario1Config {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.occupancy.validate()?;
        self.timing.validate()?;
        self.ofdm.validate()?;
        self.radar.validate()?;
        self.tdl.validate()?;
        if !(0.0..=1.0).contains(&self.ack_miss_probability) {
            return Err(ScenarioError::InvalidConfig(format!(
                "ack_miss_probability {} outside [0, 1]",
                self.ack_miss_probability
            )));
        }
        for (name, d) in [
            ("radar_bs_m", self.geometry.radar_bs_m),
            ("radar_adv_m", self.geometry.radar_adv_m),
            ("radar_ue_m", self.geometry.radar_ue_m),
            ("bs_ue_m", self.geometry.bs_ue_m),
            ("bs_adv_m", self.geometry.bs_adv_m),
        ] {
            if !(d > 0.0 && d.is_finite()) {
                return Err(ScenarioError::InvalidConfig(format!(
                    "geometry.{name} must be positive, got {d}"
                )));
            }
        }
        if self.sensing_samples < self.n_rssi_bins || self.n_rssi_bins == 0 {
            return Err(ScenarioError::InvalidConfig(
                "sensing window must cover at least one sample per RSSI bin".into(),
            ));
        }
        if let SuccessRule::SinrThreshold(t) = self.success_rule {
            if !t.is_finite() {
                return Err(ScenarioError::InvalidConfig(
                    "SINR threshold must be finite".into(),
                ));
            }
        }
        Ok(())
    }

    /// Free-space power ratio between two distances from the same source.
    fn distance_power_ratio(from_m: f64, to_m: f64) -> f64 {
        (from_m / to_m).powi(2)
    }

    pub fn radar_snr_at_bs_lin(&self) -> f64 {
        10f64.powf(self.power.radar_snr_at_bs_db / 10.0)
    }

    pub fn radar_snr_at_adv_lin(&self) -> f64 {
        self.radar_snr_at_bs_lin()
            * Self::distance_power_ratio(self.geometry.radar_bs_m, self.geometry.radar_adv_m)
    }

    pub fn radar_inr_at_ue_lin(&self) -> f64 {
        self.radar_snr_at_bs_lin()
            * Self::distance_power_ratio(self.geometry.radar_bs_m, self.geometry.radar_ue_m)
    }

    pub fn data_snr_at_ue_lin(&self) -> f64 {
        10f64.powf(self.power.data_snr_at_ue_db / 10.0)
    }

    pub fn data_snr_at_adv_lin(&self) -> f64 {
        self.data_snr_at_ue_lin()
            * Self::distance_power_ratio(self.geometry.bs_ue_m, self.geometry.bs_adv_m)
    }

    pub fn radar_duty_cycle(&self) -> f64 {
        self.radar.pulse_width_s / self.radar.pulse_repetition_interval_s
    }

    pub fn data_samples(&self) -> usize {
        (self.sensing_samples as f64 * self.timing.data_units / self.timing.sensing_units).round()
            as usize
    }

    /// Default attack budget: enough to jam the data phase of 20% of slots.
    pub fn default_attack_budget(&self, n_slots: usize) -> f64 {
        0.2 * n_slots as f64 * self.timing.data_units
    }
}

/// Everything the per-slot synthesis produces for one slot.
pub struct SlotSignals {
    pub truth_busy: bool,
    /// RSSI features over the sensing window at the base station (clean,
    /// i.e. before any sensing jam).
    pub bs_sensing_rssi: Vec<f64>,
    /// The raw sensing window at the base station, kept so a sensing jam
    /// can be superposed onto it.
    pub bs_sensing_frame: IqFrame,
    /// RSSI features over the sensing window at the adversary.
    pub adv_sensing_rssi: Vec<f64>,
    /// Instantaneous power gain of the data link to the UE.
    pub ue_link_gain: f64,
    /// Instantaneous power gain of the radar-to-UE path (0 when idle).
    pub ue_radar_gain: f64,
    /// Channel realization of the base-station-to-adversary path.
    pub adv_link: ChannelRealization,
    /// Channel realization of the base-station-to-UE path (for the
    /// bit-error success rule).
    pub ue_link: ChannelRealization,
}

/// A scenario-1 world: validated config plus the stream factory that all
/// slot-level randomness derives from.
pub struct Scenario1World {
    pub cfg: Scenario1Config,
    streams: StreamFactory,
}

impl Scenario1World {
    pub fn new(cfg: Scenario1Config, streams: StreamFactory) -> Result<Self, ScenarioError> {
        cfg.validate()?;
        Ok(Self { cfg, streams })
    }

    pub fn streams(&self) -> &StreamFactory {
        &self.streams
    }

    /// Draws the occupancy sequence for `n` slots under a named stream.
    pub fn occupancy_sequence(&self, family: &str, n: usize) -> Vec<bool> {
        let mut rng = self.streams.stream(&format!("{family}.occupancy"));
        let mut busy = false;
        (0..n)
            .map(|_| {
                busy = self.cfg.occupancy.next(busy, &mut rng);
                busy
            })
            .collect()
    }

    /// Channel realization for a path, keyed by slot and source distance so
    /// co-located receivers see the same fade while their noise stays
    /// independent.
    fn path_realization(
        &self,
        family: &str,
        slot: u64,
        source: &str,
        distance_m: f64,
    ) -> ChannelRealization {
        let label = format!("{family}.path.{source}.{}", distance_m.to_bits());
        let mut rng = self.streams.indexed_stream(&label, slot);
        draw_realization(&self.cfg.tdl, self.cfg.ofdm.sample_rate_hz(), &mut rng)
    }

    /// The radar waveform for one busy slot, with a random pulse-train
    /// offset, at unit peak power.
    fn radar_waveform(
        &self,
        family: &str,
        slot: u64,
        n_samples: usize,
    ) -> Result<IqFrame, ScenarioError> {
        let mut rng = self
            .streams
            .indexed_stream(&format!("{family}.radar"), slot);
        let fs = self.cfg.ofdm.sample_rate_hz();
        let pri_samples = (self.cfg.radar.pulse_repetition_interval_s * fs).round() as usize;
        let frame = gen_radar_pulse(&self.cfg.radar, n_samples + pri_samples, fs, &mut rng)?;
        let offset = rng.gen_range(0..pri_samples.max(1));
        Ok(IqFrame::unchecked(
            frame.samples[offset..offset + n_samples].to_vec(),
            fs,
            Origin::Radar,
        ))
    }

    /// Received sensing window at a receiver: faded, scaled radar (when
    /// busy) over a unit-variance noise floor.
    fn sensing_window_at(
        &self,
        family: &str,
        slot: u64,
        receiver: &str,
        distance_from_radar_m: f64,
        radar_snr_lin: f64,
        radar_frame: Option<&IqFrame>,
    ) -> Result<IqFrame, ScenarioError> {
        let n = self.cfg.sensing_samples;
        let fs = self.cfg.ofdm.sample_rate_hz();
        let mut noise_rng = self
            .streams
            .indexed_stream(&format!("{family}.noise.{receiver}.sensing"), slot);
        let noise = gen_noise_frame(n, 1.0, fs, &mut noise_rng);
        match radar_frame {
            None => Ok(noise),
            Some(radar) => {
                let realization =
                    self.path_realization(family, slot, "radar", distance_from_radar_m);
                let mut faded = apply_realization(radar, &realization);
                faded.samples.truncate(n);
                let scaled = superpose(&[&faded, &noise], &[radar_snr_lin.sqrt(), 1.0])?;
                Ok(scaled)
            }
        }
    }

    /// Synthesizes everything observable in one slot, given its truth.
    pub fn slot_signals(
        &self,
        family: &str,
        slot: u64,
        truth_busy: bool,
    ) -> Result<SlotSignals, ScenarioError> {
        let cfg = &self.cfg;
        let radar_frame = if truth_busy {
            Some(self.radar_waveform(family, slot, cfg.sensing_samples.max(cfg.data_samples()))?)
        } else {
            None
        };
        let radar_sensing = radar_frame.as_ref().map(|f| {
            IqFrame::unchecked(
                f.samples[..cfg.sensing_samples].to_vec(),
                f.sample_rate_hz,
                Origin::Radar,
            )
        });

        let bs_sensing_frame = self.sensing_window_at(
            family,
            slot,
            "bs",
            cfg.geometry.radar_bs_m,
            cfg.radar_snr_at_bs_lin(),
            radar_sensing.as_ref(),
        )?;
        let bs_sensing_rssi = rssi_features(&bs_sensing_frame, cfg.n_rssi_bins)?;

        let adv_sensing_frame = self.sensing_window_at(
            family,
            slot,
            "adv",
            cfg.geometry.radar_adv_m,
            cfg.radar_snr_at_adv_lin(),
            radar_sensing.as_ref(),
        )?;
        let adv_sensing_rssi = rssi_features(&adv_sensing_frame, cfg.n_rssi_bins)?;

        let ue_link = self.path_realization(family, slot, "bs", cfg.geometry.bs_ue_m);
        let adv_link = self.path_realization(family, slot, "bs", cfg.geometry.bs_adv_m);
        let ue_radar_gain = if truth_busy {
            self.path_realization(family, slot, "radar", cfg.geometry.radar_ue_m)
                .energy()
        } else {
            0.0
        };

        Ok(SlotSignals {
            truth_busy,
            bs_sensing_rssi,
            bs_sensing_frame,
            adv_sensing_rssi,
            ue_link_gain: ue_link.energy(),
            ue_radar_gain,
            adv_link,
            ue_link,
        })
    }

    /// The adversary's data-window RSSI features for a slot, given whether
    /// the base station transmitted.
    pub fn adversary_data_window(
        &self,
        family: &str,
        slot: u64,
        signals: &SlotSignals,
        transmitted: bool,
    ) -> Result<Vec<f64>, ScenarioError> {
        let cfg = &self.cfg;
        let n = cfg.data_samples();
        let fs = cfg.ofdm.sample_rate_hz();
        let mut noise_rng = self
            .streams
            .indexed_stream(&format!("{family}.noise.adv.data"), slot);
        let noise = gen_noise_frame(n, 1.0, fs, &mut noise_rng);

        let mut parts: Vec<IqFrame> = Vec::new();
        let mut gains: Vec<f64> = Vec::new();
        if transmitted {
            let tx = self.data_waveform(family, slot, n)?;
            let mut faded = apply_realization(&tx, &signals.adv_link);
            faded.samples.truncate(n);
            parts.push(faded);
            gains.push(cfg.data_snr_at_adv_lin().sqrt());
        }
        if signals.truth_busy {
            let record_len = cfg.sensing_samples.max(n);
            let mut radar = self.radar_waveform(family, slot, record_len)?;
            radar.samples.truncate(n);
            let realization =
                self.path_realization(family, slot, "radar", cfg.geometry.radar_adv_m);
            let mut faded = apply_realization(&radar, &realization);
            faded.samples.truncate(n);
            parts.push(faded);
            gains.push(cfg.radar_snr_at_adv_lin().sqrt());
        }
        let mut refs: Vec<&IqFrame> = parts.iter().collect();
        refs.push(&noise);
        gains.push(1.0);
        let window = superpose(&refs, &gains)?;
        Ok(rssi_features(&window, cfg.n_rssi_bins)?)
    }

    /// The base station's data-phase waveform for one slot: as many whole
    /// OFDM symbols as fit the data window, zero-padded to its length.
    pub fn data_waveform(
        &self,
        family: &str,
        slot: u64,
        n_samples: usize,
    ) -> Result<IqFrame, ScenarioError> {
        Ok(self.data_waveform_with_bits(family, slot, n_samples)?.0)
    }

    fn data_waveform_with_bits(
        &self,
        family: &str,
        slot: u64,
        n_samples: usize,
    ) -> Result<(IqFrame, Vec<bool>), ScenarioError> {
        let cfg = &self.cfg;
        let n_symbols = n_samples / cfg.ofdm.symbol_len();
        let n_bits = n_symbols * cfg.ofdm.bits_per_ofdm_symbol();
        let mut rng = self
            .streams
            .indexed_stream(&format!("{family}.payload"), slot);
        let bits: Vec<bool> = (0..n_bits).map(|_| rng.gen::<bool>()).collect();
        let (mut frame, _) = gen_ofdm_frame(&cfg.ofdm, &bits)?;
        frame.samples.resize(n_samples, Complex64::new(0.0, 0.0));
        Ok((frame, bits))
    }

    /// Decides whether a transmission in this slot succeeds, given the jam
    /// interference at the UE (linear INR, 0 when not jammed).
    pub fn transmission_succeeds(
        &self,
        family: &str,
        slot: u64,
        signals: &SlotSignals,
        jam_inr_at_ue_lin: f64,
    ) -> Result<bool, ScenarioError> {
        let cfg = &self.cfg;
        let signal = cfg.data_snr_at_ue_lin() * signals.ue_link_gain;
        let radar_interference =
            cfg.radar_inr_at_ue_lin() * signals.ue_radar_gain * cfg.radar_duty_cycle();
        match cfg.success_rule {
            SuccessRule::SinrThreshold(threshold_db) => {
                // Colliding with the incumbent's pulses corrupts the slot
                // outright; the SINR test covers the jam and noise.
                if signals.truth_busy {
                    return Ok(false);
                }
                let sinr = signal / (1.0 + radar_interference + jam_inr_at_ue_lin);
                Ok(10.0 * sinr.log10() > threshold_db)
            }
            SuccessRule::BitErrorFree => {
                self.bit_error_free(family, slot, signals, jam_inr_at_ue_lin)
            }
        }
    }

    /// Bit-error success rule: synthesize the received frame at the UE,
    /// genie-equalize per subcarrier with the known channel, demodulate,
    /// and require zero payload errors.
    fn bit_error_free(
        &self,
        family: &str,
        slot: u64,
        signals: &SlotSignals,
        jam_inr_at_ue_lin: f64,
    ) -> Result<bool, ScenarioError> {
        let cfg = &self.cfg;
        let n = cfg.data_samples();
        let n_symbols = n / cfg.ofdm.symbol_len();
        let used = n_symbols * cfg.ofdm.symbol_len();
        let (tx, sent_bits) = self.data_waveform_with_bits(family, slot, n)?;

        let mut faded = apply_realization(&tx, &signals.ue_link);
        faded.samples.truncate(used);
        let amp = cfg.data_snr_at_ue_lin().sqrt();
        let noise_var = 1.0
            + cfg.radar_inr_at_ue_lin() * signals.ue_radar_gain * cfg.radar_duty_cycle()
            + jam_inr_at_ue_lin;
        let mut noise_rng = self
            .streams
            .indexed_stream(&format!("{family}.noise.ue.data"), slot);
        let noise = gen_noise_frame(used, noise_var, cfg.ofdm.sample_rate_hz(), &mut noise_rng);
        let received = superpose(&[&faded, &noise], &[amp, 1.0])?;

        let equalized = equalize_known_channel(&received, &signals.ue_link, &cfg.ofdm, amp);
        let got_bits = demod_ofdm(&equalized, &cfg.ofdm)?;
        Ok(sent_bits == got_bits)
    }

    /// The sensing-phase jam waveform the adversary fires at the base
    /// station: radar-mimicking pulses over the sensing window, received at
    /// the configured INR, line-of-sight (no fading).
    pub fn sensing_jam_waveform(
        &self,
        family: &str,
        slot: u64,
    ) -> Result<IqFrame, ScenarioError> {
        let cfg = &self.cfg;
        let mut rng = self
            .streams
            .indexed_stream(&format!("{family}.jam"), slot);
        let fs = cfg.ofdm.sample_rate_hz();
        let frame = gen_radar_pulse(&cfg.radar, cfg.sensing_samples, fs, &mut rng)?;
        let amp = 10f64.powf(cfg.power.jam_sensing_inr_at_bs_db / 20.0);
        let samples = frame.samples.iter().map(|&s| s * amp).collect();
        Ok(IqFrame::unchecked(samples, fs, Origin::Jammer))
    }
}

/// Genie-aided per-subcarrier equalization with the known channel
/// realization and transmit amplitude.
fn equalize_known_channel(
    received: &IqFrame,
    channel: &ChannelRealization,
    cfg: &OfdmConfig,
    amplitude: f64,
) -> IqFrame {
    use rustfft::FftPlanner;
    let n = cfg.fft_size;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);

    // Per-bin channel response H_k = sum_m h_m exp(-j 2 pi k d_m / N).
    let response: Vec<Complex64> = (0..n)
        .map(|k| {
            channel
                .taps
                .iter()
                .map(|&(d, g)| {
                    let phase = -2.0 * std::f64::consts::PI * (k * d) as f64 / n as f64;
                    g * Complex64::from_polar(1.0, phase)
                })
                .sum::<Complex64>()
                * amplitude
        })
        .collect();

    let symbol_len = cfg.symbol_len();
    let mut out = Vec::with_capacity(received.len());
    for symbol in received.samples.chunks_exact(symbol_len) {
        let mut freq: Vec<Complex64> = symbol[cfg.cp_len..].to_vec();
        fft.process(&mut freq);
        for (k, bin) in freq.iter_mut().enumerate() {
            let h = response[k];
            if h.norm_sqr() > 1e-12 {
                *bin /= h;
            }
        }
        let mut time = freq;
        ifft.process(&mut time);
        let scale = 1.0 / n as f64;
        // Demodulation skips the prefix, so pass the received one through.
        out.extend(symbol[..cfg.cp_len].iter().copied());
        out.extend(time.iter().map(|&c| c * scale));
    }
    IqFrame::unchecked(out, received.sample_rate_hz, Origin::Mixture)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_budget_accounting() {
        let mut budget = EnergyBudget::new(10.0);
        assert!(budget.try_spend(9.0));
        assert!(!budget.try_spend(9.0));
        assert!(budget.try_spend(1.0));
        assert!((budget.spent_units - 10.0).abs() < 1e-12);
        assert!(budget.spent_units <= budget.total_units);
    }

    #[test]
    fn occupancy_probabilities_validated() {
        assert!(OccupancyModel::Iid { p_busy: 1.5 }.validate().is_err());
        assert!(OccupancyModel::Markov {
            p_idle_to_busy: 0.2,
            p_busy_to_idle: -0.1
        }
        .validate()
        .is_err());
        assert!(OccupancyModel::Iid { p_busy: 0.5 }.validate().is_ok());
    }

    #[test]
    fn default_config_is_valid() {
        Scenario1Config::default().validate().unwrap();
    }

    #[test]
    fn derived_power_levels() {
        let cfg = Scenario1Config::default();
        // The adversary sits 1010 m from the radar vs 1000 m for the BS.
        let ratio = cfg.radar_snr_at_adv_lin() / cfg.radar_snr_at_bs_lin();
        assert!((ratio - (1000.0f64 / 1010.0).powi(2)).abs() < 1e-12);
        // The adversary overhears the 50 m data link from 2010 m away.
        let data_ratio = cfg.data_snr_at_adv_lin() / cfg.data_snr_at_ue_lin();
        assert!((data_ratio - (50.0f64 / 2010.0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn occupancy_sequence_is_deterministic() {
        let world =
            Scenario1World::new(Scenario1Config::default(), StreamFactory::new(7)).unwrap();
        let a = world.occupancy_sequence("run", 100);
        let b = world.occupancy_sequence("run", 100);
        assert_eq!(a, b);
        let fraction_busy = a.iter().filter(|&&b| b).count() as f64 / 100.0;
        assert!(fraction_busy < 0.35, "p_busy 0.1 expected, got {fraction_busy}");
    }

    #[test]
    fn colocated_receivers_share_the_radar_fade() {
        let mut cfg = Scenario1Config::default();
        cfg.geometry.radar_adv_m = cfg.geometry.radar_bs_m;
        let world = Scenario1World::new(cfg, StreamFactory::new(8)).unwrap();
        let signals = world.slot_signals("t", 3, true).unwrap();
        // Same distance means the same channel draw; features differ only
        // by each receiver's own noise, so hot bins line up.
        let hot_bs: Vec<usize> = signals
            .bs_sensing_rssi
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 6.0)
            .map(|(i, _)| i)
            .collect();
        let hot_adv: Vec<usize> = signals
            .adv_sensing_rssi
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 6.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(hot_bs, hot_adv);
    }
}
