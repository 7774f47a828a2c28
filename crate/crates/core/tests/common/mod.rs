//! Reference measurements written directly against the DFT, independent of
//! the crate's own filtering and spectral code.

#![allow(dead_code)]

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Amplitude of the sinusoid at `f` by direct correlation. Exact when the
/// buffer holds a whole number of cycles of every component present.
pub fn tone_amplitude(x: &[f64], rate: f64, f: f64) -> f64 {
    let w = 2.0 * PI * f / rate;
    let (mut re, mut im) = (0.0, 0.0);
    for (n, &v) in x.iter().enumerate() {
        let (s, c) = (w * n as f64).sin_cos();
        re += v * c;
        im -= v * s;
    }
    2.0 * re.hypot(im) / x.len() as f64
}

pub fn spectrum(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf
}

/// Share of the total energy that lies in `[low, high]` Hz.
pub fn band_fraction(x: &[f64], rate: f64, low: f64, high: f64) -> f64 {
    let spec = spectrum(x);
    let n = spec.len();
    let (mut inside, mut total) = (0.0, 0.0);
    for (k, c) in spec.iter().enumerate() {
        let f = k.min(n - k) as f64 * rate / n as f64;
        let e = c.norm_sqr();
        total += e;
        if f >= low && f <= high {
            inside += e;
        }
    }
    inside / total
}

/// Energy in `[low, high]` Hz.
pub fn band_energy(x: &[f64], rate: f64, low: f64, high: f64) -> f64 {
    let spec = spectrum(x);
    let n = spec.len();
    spec.iter()
        .enumerate()
        .filter(|(k, _)| {
            let f = (*k).min(n - k) as f64 * rate / n as f64;
            f >= low && f <= high
        })
        .map(|(_, c)| c.norm_sqr())
        .sum::<f64>()
        / n as f64
}

/// Welch power spectral density: Hann segments of `seg` samples, 50% overlap.
/// Returns `(frequencies, power)` for the one-sided bins.
pub fn welch(x: &[f64], rate: f64, seg: usize) -> (Vec<f64>, Vec<f64>) {
    let w: Vec<f64> = (0..seg)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg as f64).cos())
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let bins = seg / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut count = 0;
    let mut start = 0;
    while start + seg <= x.len() {
        let mut buf: Vec<Complex64> = (0..seg)
            .map(|i| Complex64::new(x[start + i] * w[i], 0.0))
            .collect();
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
        count += 1;
        start += seg / 2;
    }
    let freqs = (0..bins).map(|k| k as f64 * rate / seg as f64).collect();
    (freqs, acc.into_iter().map(|a| a / count as f64).collect())
}

/// Mean Welch power in `[low, high)`, in dB.
pub fn band_psd_db(freqs: &[f64], psd: &[f64], low: f64, high: f64) -> f64 {
    let vals: Vec<f64> = freqs
        .iter()
        .zip(psd)
        .filter(|(f, _)| **f >= low && **f < high)
        .map(|(_, p)| *p)
        .collect();
    10.0 * (vals.iter().sum::<f64>() / vals.len() as f64).log10()
}

/// Least-squares slope of PSD in dB per octave over `[low, high)`.
pub fn slope_db_per_octave(freqs: &[f64], psd: &[f64], low: f64, high: f64) -> f64 {
    let pts: Vec<(f64, f64)> = freqs
        .iter()
        .zip(psd)
        .filter(|(f, _)| **f >= low && **f < high)
        .map(|(f, p)| (f.log2(), 10.0 * p.log10()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn db(x: f64) -> f64 {
    20.0 * x.log10()
}
