use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::utterance::{synth_utterance, PhonemeClass, Segment, UtteranceSpec};
use super::{SampleBuffer, Unit};
use crate::error::{Error, Result};
use crate::spectral;

/// RMS of every generated noise buffer, in digital full scale.
pub const NOISE_RMS: f64 = 0.1;

/// Number of overlapping talkers in babble noise.
pub const BABBLE_STREAMS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseColor {
    White,
    /// -3 dB/octave.
    Pink,
    /// -6 dB/octave.
    Brown,
    /// Overlapping synthetic talkers ("coffee-shop" noise).
    Babble,
}

impl NoiseColor {
    pub fn name(self) -> &'static str {
        match self {
            NoiseColor::White => "white",
            NoiseColor::Pink => "pink",
            NoiseColor::Brown => "brown",
            NoiseColor::Babble => "babble",
        }
    }
}

impl std::str::FromStr for NoiseColor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "white" => Ok(NoiseColor::White),
            "pink" => Ok(NoiseColor::Pink),
            "brown" | "brownian" | "red" => Ok(NoiseColor::Brown),
            "babble" => Ok(NoiseColor::Babble),
            other => Err(Error::invalid(format!("unknown noise color '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub color: NoiseColor,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub seed: u64,
    /// Pass band `(low, high)` in Hz.
    pub bandwidth_hz: (f64, f64),
}

impl NoiseSpec {
    /// Full-band noise.
    pub fn new(color: NoiseColor, duration_s: f64, sample_rate_hz: f64, seed: u64) -> Self {
        Self {
            color,
            duration_s,
            sample_rate_hz,
            seed,
            bandwidth_hz: (0.0, sample_rate_hz / 2.0),
        }
    }

    pub fn with_band(mut self, low_hz: f64, high_hz: f64) -> Self {
        self.bandwidth_hz = (low_hz, high_hz);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::invalid(format!(
                "noise duration must be positive, got {}",
                self.duration_s
            )));
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(Error::invalid("noise sample rate must be positive"));
        }
        let (low, high) = self.bandwidth_hz;
        let nyquist = self.sample_rate_hz / 2.0;
        if !(low >= 0.0 && low < high) {
            return Err(Error::invalid(format!(
                "noise band needs 0 <= low < high, got ({low}, {high}) Hz"
            )));
        }
        if high > nyquist {
            return Err(Error::invalid(format!(
                "noise band upper edge {high} Hz exceeds Nyquist {nyquist} Hz"
            )));
        }
        Ok(())
    }
}

/// Seeded noise of the requested color, confined to the requested band and
/// normalized to an RMS of [`NOISE_RMS`].
///
/// Colored spectra are shaped on the DFT of a Gaussian white sequence, so the
/// slopes are exact in expectation and the band edges are brick-wall.
pub fn gen_noise(spec: &NoiseSpec) -> Result<SampleBuffer> {
    spec.validate()?;
    let rate = spec.sample_rate_hz;
    let n = (spec.duration_s * rate).round() as usize;
    if n == 0 {
        return Err(Error::invalid("noise duration shorter than one sample"));
    }
    let (low, high) = spec.bandwidth_hz;

    let raw = match spec.color {
        NoiseColor::Babble => babble(n, rate, spec.seed)?,
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            (0..n)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect()
        }
    };

    let exponent = match spec.color {
        NoiseColor::White | NoiseColor::Babble => 0.0,
        NoiseColor::Pink => -0.5,
        NoiseColor::Brown => -1.0,
    };
    let mut samples = spectral::shape_circular(&raw, rate, |f| {
        if f < low || f > high {
            0.0
        } else if exponent == 0.0 {
            1.0
        } else if f == 0.0 {
            0.0
        } else {
            f.powf(exponent)
        }
    });

    let rms = spectral::rms(&samples);
    if rms == 0.0 {
        return Err(Error::invalid(
            "noise band contains no DFT bins; widen the band or lengthen the buffer",
        ));
    }
    let g = NOISE_RMS / rms;
    samples.iter_mut().for_each(|v| *v *= g);
    SampleBuffer::new(rate, samples, Unit::DigitalFullScale)
}

/// Sum of seeded synthetic talkers, each a random run of phoneme segments
/// starting at a random offset.
fn babble(n: usize, rate: f64, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xB4BB_1E5E_ED00_0000);
    let mut out = vec![0.0; n];
    let total_s = n as f64 / rate;
    for _ in 0..BABBLE_STREAMS {
        let offset_s: f64 = rng.random_range(0.0..0.3);
        let mut segments = vec![Segment::silence(offset_s.max(1e-3))];
        let mut t = offset_s;
        while t < total_s {
            let seg = match rng.random_range(0..20u32) {
                0..=9 => Segment::new(
                    PhonemeClass::Vowel,
                    rng.random_range(300.0..900.0),
                    rng.random_range(0.06..0.16),
                ),
                10..=13 => Segment::new(
                    PhonemeClass::Fricative,
                    rng.random_range(3500.0..7000.0),
                    rng.random_range(0.06..0.14),
                ),
                14..=16 => Segment::new(PhonemeClass::Stop, 0.0, 0.03),
                _ => Segment::silence(rng.random_range(0.03..0.12)),
            };
            t += seg.duration_s;
            segments.push(seg);
        }
        let talker = UtteranceSpec {
            segments,
            fundamental_hz: rng.random_range(90.0..230.0),
            seed: rng.random(),
            sample_rate_hz: rate,
        };
        let voice = synth_utterance(&talker)?;
        let rms = voice.rms();
        if rms > 0.0 {
            for (o, v) in out.iter_mut().zip(voice.samples()) {
                *o += v / rms;
            }
        }
    }
    Ok(out)
}
