//! FFT plumbing shared by the filtering, modulation and analysis code.

use std::cell::RefCell;

use realfft::RealFftPlanner;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static COMPLEX_PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static REAL_PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
}

pub(crate) fn fft(buf: &mut [Complex64]) {
    let plan = COMPLEX_PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

/// Inverse FFT including the 1/N scaling.
pub(crate) fn ifft(buf: &mut [Complex64]) {
    let plan = COMPLEX_PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

pub(crate) fn to_complex(samples: &[f64], len: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (dst, &src) in out.iter_mut().zip(samples) {
        dst.re = src;
    }
    out
}

/// Signed frequency of DFT bin `k` for a transform of length `len`.
pub(crate) fn bin_freq(k: usize, len: usize, rate: f64) -> f64 {
    if k <= len / 2 {
        k as f64 * rate / len as f64
    } else {
        (k as f64 - len as f64) * rate / len as f64
    }
}

/// Zero-phase filtering of a complex sequence by a real frequency response
/// `gain(f)` evaluated at signed frequency `f`.
///
/// The input is zero-padded by a guard interval so the circular convolution
/// behaves as a linear one for any response with a smooth transition.
pub(crate) fn filter_complex<F>(input: &[Complex64], rate: f64, gain: F) -> Vec<Complex64>
where
    F: Fn(f64) -> f64,
{
    if input.is_empty() {
        return Vec::new();
    }
    let len = padded_len(input.len(), rate);
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    buf[..input.len()].copy_from_slice(input);
    fft(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= gain(bin_freq(k, len, rate));
    }
    ifft(&mut buf);
    buf.truncate(input.len());
    buf
}

/// Zero-phase filtering of a real sequence by a response symmetric in `|f|`.
pub(crate) fn filter_real<F>(input: &[f64], rate: f64, gain: F) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    if input.is_empty() {
        return Vec::new();
    }
    real_filter_with_len(input, padded_len(input.len(), rate), rate, gain)
}

/// Like [`filter_real`] but circular: no padding, the DFT spans exactly the
/// input.
pub(crate) fn shape_circular<F>(input: &[f64], rate: f64, gain: F) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    if input.is_empty() {
        return Vec::new();
    }
    real_filter_with_len(input, input.len(), rate, gain)
}

fn real_filter_with_len<F>(input: &[f64], len: usize, rate: f64, gain: F) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    let (forward, inverse) = REAL_PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(len), p.plan_fft_inverse(len))
    });
    let mut buf = vec![0.0; len];
    buf[..input.len()].copy_from_slice(input);
    let mut spectrum = forward.make_output_vec();
    forward
        .process(&mut buf, &mut spectrum)
        .expect("buffer sizes match the plan");
    let scale = 1.0 / len as f64;
    for (k, v) in spectrum.iter_mut().enumerate() {
        *v *= gain(k as f64 * rate / len as f64) * scale;
    }
    // the inverse ignores the imaginary parts of DC and Nyquist
    spectrum[0].im = 0.0;
    if len.is_multiple_of(2) {
        if let Some(last) = spectrum.last_mut() {
            last.im = 0.0;
        }
    }
    inverse
        .process(&mut spectrum, &mut buf)
        .expect("buffer sizes match the plan");
    buf.truncate(input.len());
    buf
}

/// Guard interval appended before filtering.
const GUARD_S: f64 = 0.1;
const MIN_GUARD: usize = 1024;

/// Even length of the form 2^a 3^b 5^c covering the input plus a guard.
fn padded_len(n: usize, rate: f64) -> usize {
    let guard = ((GUARD_S * rate).ceil() as usize)
        .max(MIN_GUARD)
        .min(n.max(1));
    fast_len(n + guard)
}

fn fast_len(target: usize) -> usize {
    let target = target.max(2);
    let mut best = target.next_power_of_two();
    let mut p5 = 1usize;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut len = p35 * 2;
            while len < target {
                len *= 2;
            }
            best = best.min(len);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

/// Raised-cosine band mask: unity on `[low, high]`, cosine skirts of the
/// given widths outside it, zero beyond.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BandMask {
    pub low: f64,
    pub high: f64,
    pub low_skirt: f64,
    pub high_skirt: f64,
}

impl BandMask {
    pub fn gain(&self, f: f64) -> f64 {
        let f = f.abs();
        if f < self.low {
            if self.low_skirt <= 0.0 {
                return 0.0;
            }
            let d = self.low - f;
            if d >= self.low_skirt {
                0.0
            } else {
                0.5 * (1.0 + (std::f64::consts::PI * d / self.low_skirt).cos())
            }
        } else if f > self.high {
            if self.high_skirt <= 0.0 {
                return 0.0;
            }
            let d = f - self.high;
            if d >= self.high_skirt {
                0.0
            } else {
                0.5 * (1.0 + (std::f64::consts::PI * d / self.high_skirt).cos())
            }
        } else {
            1.0
        }
    }
}

/// Transition width for a band edge at `edge_hz`.
pub(crate) fn transition_width(edge_hz: f64) -> f64 {
    (0.05 * edge_hz).max(200.0)
}

pub(crate) fn energy(samples: &[f64]) -> f64 {
    samples.iter().map(|v| v * v).sum()
}

pub(crate) fn rms(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        0.0
    } else {
        (energy(samples) / samples.len() as f64).sqrt()
    }
}
