use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signals::SampleBuffer;

pub const MFCC_RATE_HZ: f64 = 16_000.0;
pub const FRAME_LEN: usize = 400; // 25 ms
pub const FRAME_HOP: usize = 160; // 10 ms
const FFT_LEN: usize = 512;
const N_MEL: usize = 26;
const LOG_FLOOR: f64 = 1e-30;

/// Rows are frames, columns are cepstral coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_frames(&self) -> usize {
        self.rows.len()
    }

    pub fn n_coeffs(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfccOptions {
    pub n_coeffs: usize,
    /// Per-utterance cepstral mean subtraction.
    pub mean_subtraction: bool,
}

impl Default for MfccOptions {
    fn default() -> Self {
        Self {
            n_coeffs: 13,
            mean_subtraction: true,
        }
    }
}

/// 25 ms Hamming frames every 10 ms, 26 mel bands over 0-8 kHz, log band
/// energies, orthonormal DCT-II, cepstral mean subtraction.
pub fn mfcc(buffer: &SampleBuffer, n_coeffs: usize) -> Result<FeatureMatrix> {
    mfcc_with(
        buffer,
        MfccOptions {
            n_coeffs,
            ..Default::default()
        },
    )
}

pub fn mfcc_with(buffer: &SampleBuffer, opts: MfccOptions) -> Result<FeatureMatrix> {
    if buffer.sample_rate_hz() != MFCC_RATE_HZ {
        return Err(Error::invalid(format!(
            "MFCC front end runs at 16 kHz, got {} Hz",
            buffer.sample_rate_hz()
        )));
    }
    if buffer.len() < FRAME_LEN {
        return Err(Error::invalid(format!(
            "MFCC needs at least {FRAME_LEN} samples (25 ms), got {}",
            buffer.len()
        )));
    }
    if opts.n_coeffs == 0 || opts.n_coeffs > N_MEL {
        return Err(Error::invalid(format!("n_coeffs must be in 1..={N_MEL}")));
    }

    let x = buffer.samples();
    let window: Vec<f64> = (0..FRAME_LEN)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (FRAME_LEN - 1) as f64).cos())
        .collect();
    let bank = mel_bank();
    let dct = dct_matrix(opts.n_coeffs);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(FFT_LEN);

    let n_frames = 1 + (x.len() - FRAME_LEN) / FRAME_HOP;
    let mut buf = vec![Complex64::new(0.0, 0.0); FFT_LEN];
    let mut rows = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let start = f * FRAME_HOP;
        buf.fill(Complex64::new(0.0, 0.0));
        for (j, slot) in buf[..FRAME_LEN].iter_mut().enumerate() {
            slot.re = x[start + j] * window[j];
        }
        fft.process(&mut buf);
        let power: Vec<f64> = buf[..FFT_LEN / 2 + 1]
            .iter()
            .map(|c| c.norm_sqr())
            .collect();
        let log_mel: Vec<f64> = bank
            .iter()
            .map(|filt| {
                let e: f64 = filt.iter().map(|&(k, w)| w * power[k]).sum();
                e.max(LOG_FLOOR).ln()
            })
            .collect();
        rows.push(
            dct.iter()
                .map(|basis| basis.iter().zip(&log_mel).map(|(a, b)| a * b).sum())
                .collect::<Vec<f64>>(),
        );
    }

    if opts.mean_subtraction {
        let mean: Vec<f64> = (0..opts.n_coeffs)
            .map(|c| rows.iter().map(|r: &Vec<f64>| r[c]).sum::<f64>() / n_frames as f64)
            .collect();
        for r in rows.iter_mut() {
            for (v, m) in r.iter_mut().zip(&mean) {
                *v -= m;
            }
        }
    }
    Ok(FeatureMatrix { rows })
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters as sparse `(bin, weight)` lists.
fn mel_bank() -> Vec<Vec<(usize, f64)>> {
    let top = hz_to_mel(MFCC_RATE_HZ / 2.0);
    let edges: Vec<f64> = (0..N_MEL + 2)
        .map(|i| mel_to_hz(top * i as f64 / (N_MEL + 1) as f64))
        .collect();
    let bin_hz = MFCC_RATE_HZ / FFT_LEN as f64;
    (0..N_MEL)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..=FFT_LEN / 2)
                .filter_map(|k| {
                    let f = k as f64 * bin_hz;
                    let w = if f > lo && f <= mid {
                        (f - lo) / (mid - lo)
                    } else if f > mid && f < hi {
                        (hi - f) / (hi - mid)
                    } else {
                        0.0
                    };
                    (w > 0.0).then_some((k, w))
                })
                .collect()
        })
        .collect()
}

fn dct_matrix(n_coeffs: usize) -> Vec<Vec<f64>> {
    let m = N_MEL as f64;
    (0..n_coeffs)
        .map(|k| {
            let scale = if k == 0 {
                (1.0 / m).sqrt()
            } else {
                (2.0 / m).sqrt()
            };
            (0..N_MEL)
                .map(|j| scale * (PI * k as f64 * (j as f64 + 0.5) / m).cos())
                .collect()
        })
        .collect()
}
