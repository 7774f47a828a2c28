//! MEMS microphone capture chain with a square-law transducer.
//!
//! `v = a1 p + a2 p^2`. The quadratic term produces difference-frequency
//! products: two ultrasonic components at f1 and f2 leave a tone at f2 - f1
//! with amplitude `a2 A1 A2`, and band-limited ultrasonic noise folds into
//! the audible band where the anti-alias filter can no longer remove it.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::modulation::bandpass;
use crate::signals::{resample, SampleBuffer, Unit};

/// Corner of the AC-coupling high-pass.
pub const DC_BLOCK_HZ: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicModelParams {
    /// Linear sensitivity, full scale per pascal.
    pub a1: f64,
    /// Quadratic coefficient, full scale per pascal squared.
    pub a2: f64,
    pub adc_rate_hz: f64,
    pub antialias_cutoff_hz: f64,
    pub noise_floor_db_fs: f64,
    pub clip_level: f64,
}

impl Default for MicModelParams {
    fn default() -> Self {
        Self {
            a1: 0.5,
            a2: 10.0,
            adc_rate_hz: 16_000.0,
            antialias_cutoff_hz: 7_200.0,
            noise_floor_db_fs: -80.0,
            clip_level: 1.0,
        }
    }
}

impl MicModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.adc_rate_hz > 0.0) {
            return Err(Error::invalid("ADC rate must be positive"));
        }
        if !(self.antialias_cutoff_hz > 0.0 && self.antialias_cutoff_hz < self.adc_rate_hz / 2.0) {
            return Err(Error::invalid(format!(
                "anti-alias cutoff {} Hz must lie below the ADC Nyquist {} Hz",
                self.antialias_cutoff_hz,
                self.adc_rate_hz / 2.0
            )));
        }
        if !(self.a1 > 0.0) {
            return Err(Error::invalid("a1 must be positive"));
        }
        if !(self.a2 >= 0.0) {
            return Err(Error::invalid("a2 must be non-negative"));
        }
        if !(self.clip_level > 0.0) || !self.noise_floor_db_fs.is_finite() {
            return Err(Error::invalid(
                "clip level must be positive and noise floor finite",
            ));
        }
        Ok(())
    }

    pub fn noise_floor_rms(&self) -> f64 {
        10f64.powf(self.noise_floor_db_fs / 20.0)
    }

    pub fn linear(self) -> Self {
        Self { a2: 0.0, ..self }
    }
}

/// Transducer only: `a1 p + a2 p^2`, same rate, not yet clipped.
pub fn apply_nonlinearity(
    pressure: &SampleBuffer,
    params: &MicModelParams,
) -> Result<SampleBuffer> {
    if pressure.unit() != Unit::Pascal {
        return Err(Error::invalid("microphone input must be a pascal buffer"));
    }
    let (a1, a2) = (params.a1, params.a2);
    let samples = pressure
        .samples()
        .iter()
        .map(|&p| a1 * p + a2 * p * p)
        .collect();
    SampleBuffer::new(pressure.sample_rate_hz(), samples, Unit::DigitalFullScale)
}

/// Full capture: transducer, DC block, anti-alias low-pass, rate conversion
/// to the ADC rate, seeded Gaussian noise floor, clipping.
pub fn capture(
    pressure: &SampleBuffer,
    params: &MicModelParams,
    seed: u64,
) -> Result<SampleBuffer> {
    params.validate()?;
    if params.antialias_cutoff_hz >= pressure.nyquist_hz() {
        return Err(Error::invalid(format!(
            "pressure at {} Hz cannot represent content up to the anti-alias cutoff",
            pressure.sample_rate_hz()
        )));
    }
    let v = if pressure.samples().iter().all(|&p| p == 0.0) {
        // every stage maps silence to silence
        let len = (pressure.len() as f64 * params.adc_rate_hz / pressure.sample_rate_hz()).round()
            as usize;
        SampleBuffer::zeros(params.adc_rate_hz, len, Unit::DigitalFullScale)?
    } else {
        let v = apply_nonlinearity(pressure, params)?;
        let v = dc_block(&v, DC_BLOCK_HZ);
        let v = bandpass(&v, 0.0, params.antialias_cutoff_hz)?;
        resample(&v, params.adc_rate_hz)?
    };

    let floor = params.noise_floor_rms();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = v
        .samples()
        .iter()
        .map(|&s| {
            (s + floor * rng.sample::<f64, _>(StandardNormal))
                .clamp(-params.clip_level, params.clip_level)
        })
        .collect();
    SampleBuffer::new(params.adc_rate_hz, samples, Unit::DigitalFullScale)
}

/// First-order high-pass (bilinear transform of `s / (s + wc)`).
pub fn dc_block(buffer: &SampleBuffer, corner_hz: f64) -> SampleBuffer {
    let k = (PI * corner_hz / buffer.sample_rate_hz()).tan();
    let b0 = 1.0 / (1.0 + k);
    let a1 = (1.0 - k) / (1.0 + k);
    let mut x1 = 0.0;
    let mut y1 = 0.0;
    let samples = buffer
        .samples()
        .iter()
        .map(|&x| {
            let y = b0 * (x - x1) + a1 * y1;
            x1 = x;
            y1 = y;
            y
        })
        .collect();
    SampleBuffer::from_parts(buffer.sample_rate_hz(), samples, buffer.unit())
}
