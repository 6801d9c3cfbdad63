//! OFDM modulation and hard-decision demodulation.
//!
//! Gray-mapped square QAM on the active subcarriers, IFFT, cyclic prefix.
//! Symbols are normalized to unit average sample energy. An optional pilot
//! grid (every `pilot_spacing`-th active subcarrier carries a fixed QPSK
//! value) models the deterministic reference structure of a real uplink
//! waveform; it is off by default.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::frame::{IqFrame, Origin};
use super::SignalError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmConfig {
    pub subcarrier_spacing_hz: f64,
    pub n_resource_blocks: usize,
    pub fft_size: usize,
    pub cp_len: usize,
    pub bits_per_symbol: usize,
    pub carrier_hz: f64,
    /// Every `pilot_spacing`-th active subcarrier carries a fixed pilot
    /// (0 disables pilots; all active subcarriers carry payload).
    pub pilot_spacing: usize,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            subcarrier_spacing_hz: 15e3,
            n_resource_blocks: 52,
            fft_size: 1024,
            cp_len: 72,
            bits_per_symbol: 4,
            carrier_hz: 4e9,
            pilot_spacing: 0,
        }
    }
}

impl OfdmConfig {
    /// 12 subcarriers per resource block.
    pub fn active_subcarriers(&self) -> usize {
        12 * self.n_resource_blocks
    }

    pub fn n_pilots(&self) -> usize {
        if self.pilot_spacing == 0 {
            0
        } else {
            self.active_subcarriers().div_ceil(self.pilot_spacing)
        }
    }

    pub fn data_subcarriers(&self) -> usize {
        self.active_subcarriers() - self.n_pilots()
    }

    pub fn bits_per_ofdm_symbol(&self) -> usize {
        self.data_subcarriers() * self.bits_per_symbol
    }

    pub fn symbol_len(&self) -> usize {
        self.fft_size + self.cp_len
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.subcarrier_spacing_hz * self.fft_size as f64
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        if self.n_resource_blocks == 0 {
            return Err(SignalError::InvalidConfig(
                "n_resource_blocks must be positive".into(),
            ));
        }
        if self.fft_size < self.active_subcarriers() {
            return Err(SignalError::InvalidConfig(format!(
                "fft_size {} is smaller than the {} active subcarriers",
                self.fft_size,
                self.active_subcarriers()
            )));
        }
        if self.cp_len == 0 || self.cp_len >= self.fft_size {
            return Err(SignalError::InvalidConfig(format!(
                "cp_len must lie in [1, fft_size), got {}",
                self.cp_len
            )));
        }
        if !matches!(self.bits_per_symbol, 2 | 4 | 6) {
            return Err(SignalError::InvalidConfig(format!(
                "bits_per_symbol must be 2, 4 or 6, got {}",
                self.bits_per_symbol
            )));
        }
        if !(self.subcarrier_spacing_hz > 0.0) || !(self.carrier_hz > 0.0) {
            return Err(SignalError::InvalidConfig(
                "subcarrier_spacing_hz and carrier_hz must be positive".into(),
            ));
        }
        if self.pilot_spacing == 1 {
            return Err(SignalError::InvalidConfig(
                "pilot_spacing 1 leaves no data subcarriers".into(),
            ));
        }
        Ok(())
    }

    fn is_pilot(&self, active_idx: usize) -> bool {
        self.pilot_spacing > 0 && active_idx % self.pilot_spacing == 0
    }

    /// Fixed unit-energy QPSK pilot for an active-subcarrier index.
    fn pilot_value(&self, active_idx: usize) -> Complex64 {
        // Cheap integer hash so the pilot pattern is aperiodic but fixed.
        let h = (active_idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 32;
        let quadrant = (h % 4) as f64;
        Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * (2.0 * quadrant + 1.0))
    }

    /// FFT bin for the k-th active subcarrier (centered around DC).
    fn bin(&self, active_idx: usize) -> usize {
        let half = (self.active_subcarriers() / 2) as isize;
        let freq = active_idx as isize - half;
        freq.rem_euclid(self.fft_size as isize) as usize
    }
}

/// Per-axis Gray-coded amplitude levels in Gray-index order.
///
/// Index i carries the Gray code of i; the amplitude follows the canonical
/// Gray walk so that adjacent levels differ in one bit.
fn gray_levels(bits_per_axis: usize) -> &'static [(u8, f64)] {
    // (gray code, unnormalized level)
    const QPSK: [(u8, f64); 2] = [(0, -1.0), (1, 1.0)];
    const QAM16: [(u8, f64); 4] = [(0b00, -3.0), (0b01, -1.0), (0b11, 1.0), (0b10, 3.0)];
    const QAM64: [(u8, f64); 8] = [
        (0b000, -7.0),
        (0b001, -5.0),
        (0b011, -3.0),
        (0b010, -1.0),
        (0b110, 1.0),
        (0b111, 3.0),
        (0b101, 5.0),
        (0b100, 7.0),
    ];
    match bits_per_axis {
        1 => &QPSK,
        2 => &QAM16,
        3 => &QAM64,
        _ => unreachable!("bits_per_symbol validated earlier"),
    }
}

/// 1/sqrt(mean symbol energy) for the square constellation.
fn qam_scale(bits_per_symbol: usize) -> f64 {
    match bits_per_symbol {
        2 => 1.0 / 2f64.sqrt(),
        4 => 1.0 / 10f64.sqrt(),
        6 => 1.0 / 42f64.sqrt(),
        _ => unreachable!(),
    }
}

fn map_axis(bits: &[bool]) -> f64 {
    let mut code = 0u8;
    for &b in bits {
        code = (code << 1) | b as u8;
    }
    gray_levels(bits.len())
        .iter()
        .find(|(g, _)| *g == code)
        .expect("all codes covered")
        .1
}

/// Nearest level, ties resolved toward the lowest Gray code.
fn slice_axis(value: f64, bits_per_axis: usize, out: &mut Vec<bool>) {
    let mut best: Option<(f64, u8)> = None;
    for &(gray, level) in gray_levels(bits_per_axis) {
        let d = (value - level).abs();
        let better = match best {
            None => true,
            Some((bd, bg)) => d < bd || (d == bd && gray < bg),
        };
        if better {
            best = Some((d, gray));
        }
    }
    let (_, gray) = best.unwrap();
    for i in (0..bits_per_axis).rev() {
        out.push((gray >> i) & 1 == 1);
    }
}

fn qam_map(bits: &[bool], bits_per_symbol: usize) -> Complex64 {
    let per_axis = bits_per_symbol / 2;
    let i = map_axis(&bits[..per_axis]);
    let q = map_axis(&bits[per_axis..]);
    Complex64::new(i, q) * qam_scale(bits_per_symbol)
}

fn qam_demap(symbol: Complex64, bits_per_symbol: usize, out: &mut Vec<bool>) {
    let per_axis = bits_per_symbol / 2;
    let unscaled = symbol / qam_scale(bits_per_symbol);
    slice_axis(unscaled.re, per_axis, out);
    slice_axis(unscaled.im, per_axis, out);
}

/// Modulates `payload_bits` into a frame of whole OFDM symbols.
///
/// The payload is zero-padded up to a whole number of symbols; the number
/// of padding bits is returned alongside the frame. An empty payload yields
/// an empty frame.
pub fn gen_ofdm_frame(
    cfg: &OfdmConfig,
    payload_bits: &[bool],
) -> Result<(IqFrame, usize), SignalError> {
    cfg.validate()?;
    let rate = cfg.sample_rate_hz();
    if payload_bits.is_empty() {
        return Ok((IqFrame::unchecked(Vec::new(), rate, Origin::UeSignal), 0));
    }
    let per_symbol = cfg.bits_per_ofdm_symbol();
    let n_symbols = payload_bits.len().div_ceil(per_symbol);
    let padding = n_symbols * per_symbol - payload_bits.len();
    let mut bits = payload_bits.to_vec();
    bits.resize(n_symbols * per_symbol, false);

    let fft = FftPlanner::new().plan_fft_inverse(cfg.fft_size);
    let scale = 1.0 / (cfg.active_subcarriers() as f64).sqrt();
    let mut samples = Vec::with_capacity(n_symbols * cfg.symbol_len());
    let mut grid = vec![Complex64::new(0.0, 0.0); cfg.fft_size];

    for sym_bits in bits.chunks(per_symbol) {
        grid.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        let mut data_iter = sym_bits.chunks(cfg.bits_per_symbol);
        for k in 0..cfg.active_subcarriers() {
            let value = if cfg.is_pilot(k) {
                cfg.pilot_value(k)
            } else {
                qam_map(data_iter.next().expect("bit budget"), cfg.bits_per_symbol)
            };
            grid[cfg.bin(k)] = value;
        }
        let mut time = grid.clone();
        fft.process(&mut time);
        time.iter_mut().for_each(|c| *c *= scale);
        samples.extend_from_slice(&time[cfg.fft_size - cfg.cp_len..]);
        samples.extend_from_slice(&time);
    }
    Ok((
        IqFrame::unchecked(samples, rate, Origin::UeSignal),
        padding,
    ))
}

/// Hard-decision demodulation of a frame of whole OFDM symbols.
///
/// Returns every decoded data bit, including any that the modulator used
/// for padding.
pub fn demod_ofdm(frame: &IqFrame, cfg: &OfdmConfig) -> Result<Vec<bool>, SignalError> {
    cfg.validate()?;
    let symbol_len = cfg.symbol_len();
    if frame.len() % symbol_len != 0 {
        return Err(SignalError::LengthMismatch {
            len: frame.len(),
            symbol_len,
        });
    }
    let fft = FftPlanner::new().plan_fft_forward(cfg.fft_size);
    let unscale = (cfg.active_subcarriers() as f64).sqrt() / cfg.fft_size as f64;
    let mut bits = Vec::with_capacity(frame.len() / symbol_len * cfg.bits_per_ofdm_symbol());
    for symbol in frame.samples.chunks(symbol_len) {
        let mut time: Vec<Complex64> = symbol[cfg.cp_len..].to_vec();
        fft.process(&mut time);
        for k in 0..cfg.active_subcarriers() {
            if cfg.is_pilot(k) {
                continue;
            }
            qam_demap(time[cfg.bin(k)] * unscale, cfg.bits_per_symbol, &mut bits);
        }
    }
    Ok(bits)
}
