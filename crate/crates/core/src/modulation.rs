//! Single upper sideband amplitude modulation (Hartley phasing method) and
//! a coherent reference demodulator used to verify it.
//!
//! The modulator forms `y = x cos(wc t) - H{x} sin(wc t)`, which keeps only
//! the spectrum above the carrier. With the defaults (16 kHz carrier, 6 kHz
//! baseband) a masking noise lands in 16-22 kHz.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signals::{resample, SampleBuffer, Unit};
use crate::spectral::{self, BandMask};

pub const MIN_ANALYTIC_LEN: usize = 64;
pub const OUTPUT_PEAK: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusbamParams {
    pub carrier_hz: f64,
    pub baseband_limit_hz: f64,
    pub output_rate_hz: f64,
}

impl Default for SusbamParams {
    fn default() -> Self {
        Self {
            carrier_hz: 16_000.0,
            baseband_limit_hz: 6_000.0,
            output_rate_hz: 96_000.0,
        }
    }
}

impl SusbamParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0 && self.output_rate_hz > 0.0) {
            return Err(Error::invalid("carrier and output rate must be positive"));
        }
        if !(self.baseband_limit_hz > 0.0) {
            return Err(Error::invalid("baseband limit must be positive"));
        }
        if self.carrier_hz + self.baseband_limit_hz > self.output_rate_hz / 2.0 {
            return Err(Error::invalid(format!(
                "sideband {}..{} Hz exceeds Nyquist {} Hz",
                self.carrier_hz,
                self.carrier_hz + self.baseband_limit_hz,
                self.output_rate_hz / 2.0
            )));
        }
        Ok(())
    }

    /// Occupied band `[carrier, carrier + limit]`.
    pub fn band(&self) -> (f64, f64) {
        (self.carrier_hz, self.carrier_hz + self.baseband_limit_hz)
    }
}

/// Analytic signal via the DFT: positive frequencies doubled, negative ones
/// zeroed, DC and Nyquist kept. Returns `(real, imag)` where `imag` is the
/// Hilbert transform of the input.
pub fn analytic_signal(buffer: &SampleBuffer) -> Result<(SampleBuffer, SampleBuffer)> {
    let z = analytic(buffer)?;
    let rate = buffer.sample_rate_hz();
    let re = z.iter().map(|c| c.re).collect();
    let im = z.iter().map(|c| c.im).collect();
    Ok((
        SampleBuffer::from_parts(rate, re, buffer.unit()),
        SampleBuffer::from_parts(rate, im, buffer.unit()),
    ))
}

fn analytic(buffer: &SampleBuffer) -> Result<Vec<Complex64>> {
    let n = buffer.len();
    if n < MIN_ANALYTIC_LEN {
        return Err(Error::invalid(format!(
            "analytic signal needs at least {MIN_ANALYTIC_LEN} samples, got {n}"
        )));
    }
    let mut bins = spectral::to_complex(buffer.samples(), n);
    spectral::fft(&mut bins);
    let half = n / 2;
    for (k, v) in bins.iter_mut().enumerate() {
        let g = if k == 0 || (n.is_multiple_of(2) && k == half) {
            1.0
        } else if k <= (n - 1) / 2 {
            2.0
        } else {
            0.0
        };
        *v *= g;
    }
    spectral::ifft(&mut bins);
    Ok(bins)
}

/// Shift a digital baseband into the upper sideband above `carrier_hz`.
///
/// The baseband is brought to the output rate, confined to
/// `baseband_limit_hz`, modulated, and peak-normalized to 0.9 full scale.
pub fn susbam_modulate(baseband: &SampleBuffer, params: &SusbamParams) -> Result<SampleBuffer> {
    let raw = susbam_unnormalized(baseband, params)?;
    let peak = raw.peak();
    Ok(if peak > 0.0 {
        raw.scaled(OUTPUT_PEAK / peak)
    } else {
        raw
    })
}

/// The modulator without the final peak normalization; linear in its input.
pub fn susbam_unnormalized(baseband: &SampleBuffer, params: &SusbamParams) -> Result<SampleBuffer> {
    params.validate()?;
    if baseband.unit() != Unit::DigitalFullScale {
        return Err(Error::invalid(
            "SUSBAM baseband must be a digital full-scale buffer",
        ));
    }
    let at_rate = resample(baseband, params.output_rate_hz)?;
    let confined = bandpass(&at_rate, 0.0, params.baseband_limit_hz)?;
    let z = analytic(&confined)?;
    let w = 2.0 * PI * params.carrier_hz / params.output_rate_hz;
    let samples = z
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let (s, co) = (w * n as f64).sin_cos();
            c.re * co - c.im * s
        })
        .collect();
    Ok(SampleBuffer::from_parts(
        params.output_rate_hz,
        samples,
        Unit::DigitalFullScale,
    ))
}

/// Coherent product detector: mix down by the carrier, low-pass at the
/// baseband limit, keep twice the real part.
pub fn ssb_demodulate(buffer: &SampleBuffer, params: &SusbamParams) -> Result<SampleBuffer> {
    params.validate()?;
    if buffer.sample_rate_hz() != params.output_rate_hz {
        return Err(Error::invalid(format!(
            "demodulator expects {} Hz input, got {} Hz",
            params.output_rate_hz,
            buffer.sample_rate_hz()
        )));
    }
    let w = 2.0 * PI * params.carrier_hz / params.output_rate_hz;
    let mixed: Vec<Complex64> = buffer
        .samples()
        .iter()
        .enumerate()
        .map(|(n, &v)| v * Complex64::from_polar(1.0, -w * n as f64))
        .collect();
    let limit = params.baseband_limit_hz;
    let mask = BandMask {
        low: 0.0,
        high: limit,
        low_skirt: 0.0,
        high_skirt: spectral::transition_width(limit),
    };
    let filtered = spectral::filter_complex(&mixed, params.output_rate_hz, |f| mask.gain(f));
    let samples = filtered.iter().map(|c| 2.0 * c.re).collect();
    Ok(SampleBuffer::from_parts(
        params.output_rate_hz,
        samples,
        buffer.unit(),
    ))
}

/// Zero-phase band-pass on `[low_hz, high_hz]`.
///
/// The pass band is flat; raised-cosine skirts of width
/// `max(200 Hz, 5% of the edge)` sit outside it and the response is exactly
/// zero beyond them. `low_hz = 0` and `high_hz = Nyquist` disable the
/// respective skirt.
pub fn bandpass(buffer: &SampleBuffer, low_hz: f64, high_hz: f64) -> Result<SampleBuffer> {
    let nyquist = buffer.nyquist_hz();
    if !(low_hz >= 0.0 && low_hz < high_hz && high_hz <= nyquist) {
        return Err(Error::invalid(format!(
            "band ({low_hz}, {high_hz}) Hz invalid for Nyquist {nyquist} Hz"
        )));
    }
    if low_hz == 0.0 && high_hz == nyquist {
        return Ok(buffer.clone());
    }
    let mask = BandMask {
        low: low_hz,
        high: high_hz,
        low_skirt: if low_hz > 0.0 {
            spectral::transition_width(low_hz)
        } else {
            0.0
        },
        high_skirt: if high_hz < nyquist {
            spectral::transition_width(high_hz)
        } else {
            0.0
        },
    };
    let samples =
        spectral::filter_real(buffer.samples(), buffer.sample_rate_hz(), |f| mask.gain(f));
    Ok(SampleBuffer::from_parts(
        buffer.sample_rate_hz(),
        samples,
        buffer.unit(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::gen_tone;

    #[test]
    fn default_params_span_near_ultrasound() {
        let p = SusbamParams::default();
        p.validate().unwrap();
        assert_eq!(p.band(), (16_000.0, 22_000.0));
    }

    #[test]
    fn rejects_bad_params() {
        let p = SusbamParams {
            carrier_hz: 44_000.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = SusbamParams {
            baseband_limit_hz: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn analytic_needs_64_samples() {
        let x = SampleBuffer::zeros(48_000.0, 63, Unit::DigitalFullScale).unwrap();
        assert!(analytic_signal(&x).is_err());
    }

    #[test]
    fn dc_has_no_hilbert_component() {
        let x = SampleBuffer::new(48_000.0, vec![0.3; 4800], Unit::DigitalFullScale).unwrap();
        let (re, im) = analytic_signal(&x).unwrap();
        assert!(im.samples().iter().all(|v| v.abs() < 1e-12));
        assert!(re.samples().iter().all(|v| (v - 0.3).abs() < 1e-12));
    }

    #[test]
    fn demodulating_zero_gives_zero() {
        let p = SusbamParams::default();
        let z = SampleBuffer::zeros(96_000.0, 9600, Unit::DigitalFullScale).unwrap();
        let y = ssb_demodulate(&z, &p).unwrap();
        assert!(y.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bandpass_identity_and_errors() {
        let x = gen_tone(1234.0, 0.7, 0.05, 48_000.0, Unit::DigitalFullScale).unwrap();
        let y = bandpass(&x, 0.0, 24_000.0).unwrap();
        for (a, b) in x.samples().iter().zip(y.samples()) {
            assert!((a - b).abs() <= 1e-6);
        }
        assert!(bandpass(&x, 5000.0, 4000.0).is_err());
        assert!(bandpass(&x, 0.0, 30_000.0).is_err());
    }

    #[test]
    fn modulator_rejects_pressure_input() {
        let x = gen_tone(1000.0, 0.1, 0.01, 96_000.0, Unit::Pascal).unwrap();
        assert!(susbam_modulate(&x, &SusbamParams::default()).is_err());
    }
}
