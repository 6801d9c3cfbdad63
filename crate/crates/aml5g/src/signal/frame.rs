//! Complex baseband frames — the unit of everything transmitted over the
//! simulated air.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use super::SignalError;

/// What produced a frame. Mixtures of several transmitters are `Mixture`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Radar,
    UeSignal,
    Jammer,
    Noise,
    Spoof,
    Mixture,
}

impl Origin {
    fn as_str(&self) -> &'static str {
        match self {
            Origin::Radar => "radar",
            Origin::UeSignal => "ue_signal",
            Origin::Jammer => "jammer",
            Origin::Noise => "noise",
            Origin::Spoof => "spoof",
            Origin::Mixture => "mixture",
        }
    }
}

impl FromStr for Origin {
    type Err = SignalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "radar" => Ok(Origin::Radar),
            "ue_signal" => Ok(Origin::UeSignal),
            "jammer" => Ok(Origin::Jammer),
            "noise" => Ok(Origin::Noise),
            "spoof" => Ok(Origin::Spoof),
            "mixture" => Ok(Origin::Mixture),
            other => Err(SignalError::InvalidConfig(format!(
                "unknown origin tag '{other}'"
            ))),
        }
    }
}

/// A vector of complex baseband samples with its sample rate and origin tag.
#[derive(Debug, Clone, PartialEq)]
pub struct IqFrame {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
    pub origin: Origin,
}

impl IqFrame {
    /// Builds a frame and checks the invariants: non-empty, all samples
    /// finite, positive sample rate.
    pub fn new(
        samples: Vec<Complex64>,
        sample_rate_hz: f64,
        origin: Origin,
    ) -> Result<Self, SignalError> {
        if samples.is_empty() {
            return Err(SignalError::InvalidConfig(
                "frame must contain at least one sample".into(),
            ));
        }
        let frame = Self::unchecked(samples, sample_rate_hz, origin);
        frame.validate()?;
        Ok(frame)
    }

    /// Builds a frame without validating. Used by generators whose output
    /// may legitimately be empty (e.g. OFDM modulation of an empty payload).
    pub(crate) fn unchecked(samples: Vec<Complex64>, sample_rate_hz: f64, origin: Origin) -> Self {
        Self {
            samples,
            sample_rate_hz,
            origin,
        }
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(SignalError::InvalidConfig(format!(
                "sample_rate_hz must be positive and finite, got {}",
                self.sample_rate_hz
            )));
        }
        if self.samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(SignalError::NonFiniteSamples);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean |sample|^2.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Writes `<prefix>.iq` (little-endian interleaved f32 [re, im]) and a
    /// `<prefix>.meta` sidecar with the sample rate and origin tag.
    pub fn write_iq_file(&self, prefix: &Path) -> Result<(), SignalError> {
        let iq_path = prefix.with_extension("iq");
        let mut w = BufWriter::new(fs::File::create(&iq_path)?);
        for s in &self.samples {
            w.write_all(&(s.re as f32).to_le_bytes())?;
            w.write_all(&(s.im as f32).to_le_bytes())?;
        }
        w.flush()?;
        let meta = format!(
            "sample_rate_hz = {}\norigin = {}\n",
            self.sample_rate_hz,
            self.origin.as_str()
        );
        fs::write(prefix.with_extension("meta"), meta)?;
        Ok(())
    }
}

/// Reads a frame written by [`IqFrame::write_iq_file`].
pub fn read_iq_file(prefix: &Path) -> Result<IqFrame, SignalError> {
    let mut bytes = Vec::new();
    fs::File::open(prefix.with_extension("iq"))?.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(SignalError::InvalidConfig(
            "raw I/Q file length is not a multiple of 8 bytes".into(),
        ));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64;
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]) as f64;
            Complex64::new(re, im)
        })
        .collect();

    let meta = fs::read_to_string(prefix.with_extension("meta"))?;
    let mut sample_rate_hz = None;
    let mut origin = None;
    for line in meta.lines() {
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        match key.trim() {
            "sample_rate_hz" => {
                sample_rate_hz = Some(value.trim().parse::<f64>().map_err(|e| {
                    SignalError::InvalidConfig(format!("bad sample_rate_hz: {e}"))
                })?)
            }
            "origin" => origin = Some(value.trim().parse::<Origin>()?),
            _ => {}
        }
    }
    let sample_rate_hz = sample_rate_hz
        .ok_or_else(|| SignalError::InvalidConfig("sidecar missing sample_rate_hz".into()))?;
    let origin =
        origin.ok_or_else(|| SignalError::InvalidConfig("sidecar missing origin".into()))?;
    IqFrame::new(samples, sample_rate_hz, origin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(IqFrame::new(vec![], 1e6, Origin::Noise).is_err());
        let bad = vec![Complex64::new(f64::NAN, 0.0)];
        assert!(IqFrame::new(bad, 1e6, Origin::Noise).is_err());
    }

    #[test]
    fn power_of_unit_frame() {
        let f = IqFrame::new(vec![Complex64::new(1.0, 0.0); 16], 1e6, Origin::Noise).unwrap();
        assert!((f.power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iq_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("frame");
        let samples: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new(i as f64 * 0.125, -(i as f64) * 0.25))
            .collect();
        let frame = IqFrame::new(samples, 15.36e6, Origin::UeSignal).unwrap();
        frame.write_iq_file(&prefix).unwrap();
        let back = read_iq_file(&prefix).unwrap();
        assert_eq!(back.origin, Origin::UeSignal);
        assert_eq!(back.sample_rate_hz, 15.36e6);
        assert_eq!(back.len(), frame.len());
        // f64 -> f32 -> f64 is exact for values representable in f32.
        for (a, b) in frame.samples.iter().zip(&back.samples) {
            assert_eq!(a.re as f32, b.re as f32);
            assert_eq!(a.im as f32, b.im as f32);
        }
    }
}
