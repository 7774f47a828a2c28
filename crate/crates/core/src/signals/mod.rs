//! Time-domain signals: buffers, noise, tones, caricatured speech, mixing,
//! SPL calibration, rate conversion and WAV I/O.

mod noise;
mod resample;
mod utterance;
pub mod wav;

use std::f64::consts::PI;

pub use noise::{gen_noise, NoiseColor, NoiseSpec};
pub use resample::resample;
pub use utterance::{synth_utterance, PhonemeClass, Segment, UtteranceSpec};

use crate::error::{Error, Result};

/// Reference pressure for dB SPL, in pascal.
pub const P_REF: f64 = 20e-6;

/// Default synthesis rate; leaves headroom above the 22 kHz jammer edge.
pub const SYNTH_RATE_HZ: f64 = 96_000.0;

/// Physical meaning of the samples in a [`SampleBuffer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    /// Acoustic pressure in pascal.
    Pascal,
    /// Digital amplitude relative to full scale (+/-1.0).
    DigitalFullScale,
}

/// Uniformly sampled waveform.
///
/// Construction rejects non-positive rates and non-finite samples, so every
/// buffer in circulation satisfies both invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer {
    sample_rate_hz: f64,
    samples: Vec<f64>,
    unit: Unit,
}

impl SampleBuffer {
    pub fn new(sample_rate_hz: f64, samples: Vec<f64>, unit: Unit) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(Self {
            sample_rate_hz,
            samples,
            unit,
        })
    }

    pub fn zeros(sample_rate_hz: f64, len: usize, unit: Unit) -> Result<Self> {
        Self::new(sample_rate_hz, vec![0.0; len], unit)
    }

    /// Internal constructor for operations that preserve both invariants.
    pub(crate) fn from_parts(sample_rate_hz: f64, samples: Vec<f64>, unit: Unit) -> Self {
        debug_assert!(sample_rate_hz > 0.0);
        debug_assert!(samples.iter().all(|v| v.is_finite()));
        Self {
            sample_rate_hz,
            samples,
            unit,
        }
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.sample_rate_hz / 2.0
    }

    pub fn rms(&self) -> f64 {
        crate::spectral::rms(&self.samples)
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn energy(&self) -> f64 {
        crate::spectral::energy(&self.samples)
    }

    /// Samplewise multiplication by a constant.
    pub fn scaled(&self, gain: f64) -> SampleBuffer {
        let samples = self.samples.iter().map(|v| v * gain).collect();
        Self::from_parts(self.sample_rate_hz, samples, self.unit)
    }

    /// Same samples, different unit label.
    pub fn with_unit(self, unit: Unit) -> SampleBuffer {
        Self { unit, ..self }
    }

    /// Copy of the samples in `[start, end)`, clamped to the buffer.
    pub fn slice(&self, start: usize, end: usize) -> SampleBuffer {
        let end = end.min(self.samples.len());
        let start = start.min(end);
        Self::from_parts(
            self.sample_rate_hz,
            self.samples[start..end].to_vec(),
            self.unit,
        )
    }

    /// Hard clip to `[-level, level]`.
    pub fn clipped(&self, level: f64) -> SampleBuffer {
        let samples = self
            .samples
            .iter()
            .map(|v| v.clamp(-level, level))
            .collect();
        Self::from_parts(self.sample_rate_hz, samples, self.unit)
    }
}

/// `amplitude * sin(2 pi f n / fs)`.
pub fn gen_tone(
    freq_hz: f64,
    amplitude: f64,
    duration_s: f64,
    sample_rate_hz: f64,
    unit: Unit,
) -> Result<SampleBuffer> {
    if !(sample_rate_hz > 0.0) {
        return Err(Error::invalid("sample rate must be positive"));
    }
    if !(freq_hz >= 0.0 && freq_hz < sample_rate_hz / 2.0) {
        return Err(Error::invalid(format!(
            "tone frequency {freq_hz} Hz outside [0, {}) Hz",
            sample_rate_hz / 2.0
        )));
    }
    if !(duration_s >= 0.0) || !amplitude.is_finite() {
        return Err(Error::invalid(
            "duration must be non-negative and amplitude finite",
        ));
    }
    let n = (duration_s * sample_rate_hz).round() as usize;
    let w = 2.0 * PI * freq_hz / sample_rate_hz;
    let samples = (0..n).map(|i| amplitude * (w * i as f64).sin()).collect();
    SampleBuffer::new(sample_rate_hz, samples, unit)
}

/// Samplewise weighted sum; shorter buffers are zero-padded to the longest.
pub fn mix(buffers: &[&SampleBuffer], gains: &[f64]) -> Result<SampleBuffer> {
    if buffers.len() != gains.len() {
        return Err(Error::invalid(format!(
            "{} buffers but {} gains",
            buffers.len(),
            gains.len()
        )));
    }
    let first = buffers
        .first()
        .ok_or_else(|| Error::invalid("nothing to mix"))?;
    for b in &buffers[1..] {
        if b.sample_rate_hz != first.sample_rate_hz {
            return Err(Error::invalid(format!(
                "sample rate mismatch: {} vs {} Hz",
                b.sample_rate_hz, first.sample_rate_hz
            )));
        }
        if b.unit != first.unit {
            return Err(Error::invalid(format!(
                "unit mismatch: {:?} vs {:?}",
                b.unit, first.unit
            )));
        }
    }
    let len = buffers.iter().map(|b| b.len()).max().unwrap_or(0);
    let mut out = vec![0.0; len];
    for (b, &g) in buffers.iter().zip(gains) {
        for (o, v) in out.iter_mut().zip(&b.samples) {
            *o += g * v;
        }
    }
    SampleBuffer::new(first.sample_rate_hz, out, first.unit)
}

pub fn db_spl_to_pa(db_spl: f64) -> f64 {
    P_REF * 10f64.powf(db_spl / 20.0)
}

/// Scale a pressure buffer so its RMS equals the target level.
pub fn scale_to_spl(buffer: &SampleBuffer, target_db_spl: f64) -> Result<SampleBuffer> {
    if buffer.unit != Unit::Pascal {
        return Err(Error::invalid("scale_to_spl needs a pascal buffer"));
    }
    let rms = buffer.rms();
    if rms == 0.0 {
        return Err(Error::invalid(
            "cannot scale a silent buffer to a sound pressure level",
        ));
    }
    Ok(buffer.scaled(db_spl_to_pa(target_db_spl) / rms))
}

/// Level of a pressure buffer in dB SPL; a silent buffer gives `-inf`.
pub fn measure_spl(buffer: &SampleBuffer) -> Result<f64> {
    if buffer.is_empty() {
        return Err(Error::invalid(
            "cannot measure the level of an empty buffer",
        ));
    }
    if buffer.unit != Unit::Pascal {
        return Err(Error::invalid("measure_spl needs a pascal buffer"));
    }
    let rms = buffer.rms();
    Ok(if rms == 0.0 {
        f64::NEG_INFINITY
    } else {
        20.0 * (rms / P_REF).log10()
    })
}

/// Human-readable level, spelling `-inf` as "silence".
pub fn format_spl(db: f64) -> String {
    if db == f64::NEG_INFINITY {
        "silence".to_string()
    } else {
        format!("{db:.2} dB SPL")
    }
}
