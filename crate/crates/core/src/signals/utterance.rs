//! Formant/frication caricature of speech.
//!
//! Only the distribution of energy across phoneme classes matters here:
//! voiced segments carry low-frequency harmonic energy, fricatives carry
//! weak high-frequency noise, stops are short broadband bursts.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{SampleBuffer, Unit, SYNTH_RATE_HZ};
use crate::error::{Error, Result};
use crate::spectral;

pub const FADE_S: f64 = 0.005;
pub const PEAK_LIMIT: f64 = 0.9;
/// Lowest frequency of any fricative pass band.
pub const FRICATIVE_FLOOR_HZ: f64 = 3000.0;

const STOP_GAP_S: f64 = 0.010;
const STOP_BURST_S: f64 = 0.020;

// Relative segment levels before the global peak limit. Fricatives sit
// about 10 dB under vowels, as in running speech.
const VOWEL_RMS: f64 = 0.2;
const FRICATIVE_RMS: f64 = 0.063;
const STOP_RMS: f64 = 0.12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhonemeClass {
    Vowel,
    Fricative,
    Stop,
    Silence,
}

impl PhonemeClass {
    pub fn name(self) -> &'static str {
        match self {
            PhonemeClass::Vowel => "vowel",
            PhonemeClass::Fricative => "fricative",
            PhonemeClass::Stop => "stop",
            PhonemeClass::Silence => "silence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub class: PhonemeClass,
    /// Formant (vowel) or frication centroid (fricative); ignored otherwise.
    pub center_hz: f64,
    pub duration_s: f64,
}

impl Segment {
    pub fn new(class: PhonemeClass, center_hz: f64, duration_s: f64) -> Self {
        Self {
            class,
            center_hz,
            duration_s,
        }
    }

    pub fn vowel(center_hz: f64, duration_s: f64) -> Self {
        Self::new(PhonemeClass::Vowel, center_hz, duration_s)
    }

    pub fn fricative(center_hz: f64, duration_s: f64) -> Self {
        Self::new(PhonemeClass::Fricative, center_hz, duration_s)
    }

    pub fn stop() -> Self {
        Self::new(PhonemeClass::Stop, 0.0, STOP_GAP_S + STOP_BURST_S)
    }

    pub fn silence(duration_s: f64) -> Self {
        Self::new(PhonemeClass::Silence, 0.0, duration_s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceSpec {
    pub segments: Vec<Segment>,
    /// Voiced pitch.
    pub fundamental_hz: f64,
    pub seed: u64,
    pub sample_rate_hz: f64,
}

impl UtteranceSpec {
    pub fn new(segments: Vec<Segment>, fundamental_hz: f64, seed: u64) -> Self {
        Self {
            segments,
            fundamental_hz,
            seed,
            sample_rate_hz: SYNTH_RATE_HZ,
        }
    }

    pub fn total_duration_s(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_s).sum()
    }

    /// Sample ranges `[start, end)` of every segment at `rate`.
    ///
    /// Boundaries are rounded from cumulative time so they never drift.
    pub fn segment_bounds(&self, rate: f64) -> Vec<(usize, usize)> {
        let mut t = 0.0;
        self.segments
            .iter()
            .map(|s| {
                let start = (t * rate).round() as usize;
                t += s.duration_s;
                (start, (t * rate).round() as usize)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz > 0.0) {
            return Err(Error::invalid("utterance sample rate must be positive"));
        }
        if !(self.fundamental_hz > 0.0 && self.fundamental_hz.is_finite()) {
            return Err(Error::invalid("fundamental must be positive"));
        }
        let nyquist = self.sample_rate_hz / 2.0;
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration_s > 0.0 && s.duration_s.is_finite()) {
                return Err(Error::invalid(format!(
                    "segment {i}: duration must be positive"
                )));
            }
            let voiced = matches!(s.class, PhonemeClass::Vowel | PhonemeClass::Fricative);
            if voiced && !(s.center_hz > 0.0 && s.center_hz < nyquist) {
                return Err(Error::invalid(format!(
                    "segment {i}: center {} Hz outside (0, {nyquist}) Hz",
                    s.center_hz
                )));
            }
        }
        Ok(())
    }
}

/// Render an utterance. Segments sit at their nominal times; every sounding
/// segment fades in and out over 5 ms so adjacent segments blend without
/// clicks.
pub fn synth_utterance(spec: &UtteranceSpec) -> Result<SampleBuffer> {
    spec.validate()?;
    let rate = spec.sample_rate_hz;
    let bounds = spec.segment_bounds(rate);
    let total = bounds.last().map_or(0, |b| b.1);
    let mut out = vec![0.0; total];

    for (i, (seg, &(start, end))) in spec.segments.iter().zip(&bounds).enumerate() {
        let n = end - start;
        if n == 0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(
            spec.seed
                .wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        let mut chunk = match seg.class {
            PhonemeClass::Silence => continue,
            PhonemeClass::Vowel => vowel(n, rate, spec.fundamental_hz, seg.center_hz),
            PhonemeClass::Fricative => fricative(n, rate, seg.center_hz, &mut rng),
            PhonemeClass::Stop => stop(n, rate, &mut rng),
        };
        fade(&mut chunk, (FADE_S * rate).round() as usize);
        out[start..end].copy_from_slice(&chunk);
    }

    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > PEAK_LIMIT {
        let g = PEAK_LIMIT / peak;
        out.iter_mut().for_each(|v| *v *= g);
    }
    SampleBuffer::new(rate, out, Unit::DigitalFullScale)
}

/// Pass band used for a fricative centred at `center_hz`.
pub fn fricative_band(center_hz: f64, rate: f64) -> (f64, f64) {
    let ceiling = 0.95 * rate / 2.0;
    let low = (0.75 * center_hz)
        .max(FRICATIVE_FLOOR_HZ)
        .min(ceiling * 0.9);
    let high = (1.25 * center_hz).max(low + 1000.0).min(ceiling);
    (low, high)
}

fn vowel(n: usize, rate: f64, f0: f64, formant: f64) -> Vec<f64> {
    // glottal impulse train
    let step = f0 / rate;
    let mut phase = 1.0;
    let pulses: Vec<f64> = (0..n)
        .map(|_| {
            let v = if phase >= 1.0 {
                phase -= 1.0;
                1.0
            } else {
                0.0
            };
            phase += step;
            v
        })
        .collect();

    // two-pole resonator at the formant
    let bandwidth = (0.12 * formant).max(60.0);
    let r = (-PI * bandwidth / rate).exp();
    let a1 = 2.0 * r * (2.0 * PI * formant / rate).cos();
    let a2 = -r * r;
    let (mut y1, mut y2) = (0.0, 0.0);
    let mut out: Vec<f64> = pulses
        .into_iter()
        .map(|x| {
            let y = x + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = y;
            y
        })
        .collect();
    normalize_rms(&mut out, VOWEL_RMS);
    out
}

fn fricative(n: usize, rate: f64, center: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (low, high) = fricative_band(center, rate);
    let white: Vec<f64> = (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut out =
        spectral::shape_circular(
            &white,
            rate,
            |f| if f < low || f > high { 0.0 } else { 1.0 },
        );
    normalize_rms(&mut out, FRICATIVE_RMS);
    out
}

fn stop(n: usize, rate: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let gap = ((STOP_GAP_S * rate).round() as usize).min(n);
    let burst_end = (((STOP_GAP_S + STOP_BURST_S) * rate).round() as usize).min(n);
    let mut out = vec![0.0; n];
    let tau = 0.005 * rate;
    for (j, v) in out[gap..burst_end].iter_mut().enumerate() {
        *v = rng.sample::<f64, _>(StandardNormal) * (-(j as f64) / tau).exp();
    }
    normalize_rms(&mut out[gap..burst_end], STOP_RMS);
    out
}

fn normalize_rms(x: &mut [f64], target: f64) {
    let rms = spectral::rms(x);
    if rms > 0.0 {
        let g = target / rms;
        x.iter_mut().for_each(|v| *v *= g);
    }
}

fn fade(x: &mut [f64], len: usize) {
    let len = len.min(x.len() / 2);
    let n = x.len();
    for i in 0..len {
        let g = 0.5 * (1.0 - (PI * (i as f64 + 0.5) / len as f64).cos());
        x[i] *= g;
        x[n - 1 - i] *= g;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_spec_is_empty_buffer() {
        let b = synth_utterance(&UtteranceSpec::new(vec![], 120.0, 0)).unwrap();
        assert!(b.is_empty());
    }

    #[test]
    fn silence_only_is_zero_with_duration() {
        let spec = UtteranceSpec::new(
            vec![Segment::silence(0.1), Segment::silence(0.15)],
            120.0,
            3,
        );
        let b = synth_utterance(&spec).unwrap();
        assert_eq!(b.len(), 24_000);
        assert!(b.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn peak_limited_and_deterministic() {
        let spec = UtteranceSpec::new(
            vec![
                Segment::vowel(700.0, 0.2),
                Segment::fricative(5000.0, 0.1),
                Segment::stop(),
            ],
            120.0,
            11,
        );
        let a = synth_utterance(&spec).unwrap();
        assert!(a.peak() <= PEAK_LIMIT + 1e-12);
        assert_eq!(a.samples(), synth_utterance(&spec).unwrap().samples());
    }

    #[test]
    fn stop_has_leading_gap() {
        let spec = UtteranceSpec::new(vec![Segment::stop()], 120.0, 5);
        let b = synth_utterance(&spec).unwrap();
        assert_eq!(b.len(), 2880);
        assert!(b.samples()[..960].iter().all(|&v| v == 0.0));
        assert!(b.samples()[960..].iter().any(|&v| v != 0.0));
    }

    #[test]
    fn rejects_invalid_segments() {
        let bad = UtteranceSpec::new(vec![Segment::vowel(60_000.0, 0.1)], 120.0, 0);
        assert!(synth_utterance(&bad).is_err());
        let bad = UtteranceSpec::new(vec![Segment::silence(0.0)], 120.0, 0);
        assert!(synth_utterance(&bad).is_err());
        let bad = UtteranceSpec::new(vec![Segment::silence(0.1)], 0.0, 0);
        assert!(synth_utterance(&bad).is_err());
    }

    #[test]
    fn fricative_band_never_below_floor() {
        for c in [1000.0, 3000.0, 5000.0, 7000.0] {
            let (lo, hi) = fricative_band(c, 16_000.0);
            assert!(
                lo >= FRICATIVE_FLOOR_HZ && hi <= 7600.0 && lo < hi,
                "{c}: {lo}..{hi}"
            );
        }
    }
}
