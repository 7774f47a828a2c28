use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signals::SampleBuffer;
use crate::spectral;

/// Floor applied to every spectrogram cell, in dB re full scale.
pub const DB_FLOOR: f64 = -120.0;

/// Magnitude STFT in dB re full scale.
///
/// `magnitude_db[frame][bin]`. A full-scale sine lands at 0 dB in its peak
/// bin.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramMatrix {
    pub frame_times_s: Vec<f64>,
    pub freq_bins_hz: Vec<f64>,
    pub magnitude_db: Vec<Vec<f64>>,
    pub window_size: usize,
    pub hop: usize,
}

impl SpectrogramMatrix {
    pub fn n_frames(&self) -> usize {
        self.frame_times_s.len()
    }

    pub fn n_bins(&self) -> usize {
        self.freq_bins_hz.len()
    }

    /// Mean of the dB cells whose bin frequency lies in `[low, high]`.
    pub fn mean_db_in_band(&self, low: f64, high: f64) -> f64 {
        let cols: Vec<usize> = (0..self.n_bins())
            .filter(|&k| self.freq_bins_hz[k] >= low && self.freq_bins_hz[k] <= high)
            .collect();
        let mut sum = 0.0;
        let mut count = 0usize;
        for row in &self.magnitude_db {
            for &k in &cols {
                sum += row[k];
                count += 1;
            }
        }
        if count == 0 {
            f64::NAN
        } else {
            sum / count as f64
        }
    }
}

/// Periodic Hann window.
fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Hann-windowed STFT.
///
/// The signal is zero-padded by `window_size - hop` on both sides so that
/// every sample is covered by the same number of frames; frame times refer
/// to frame centres and may be negative for the leading frames.
pub fn stft(buffer: &SampleBuffer, window_size: usize, hop: usize) -> Result<SpectrogramMatrix> {
    if window_size < 64 || !window_size.is_power_of_two() {
        return Err(Error::invalid(format!(
            "window size must be a power of two >= 64, got {window_size}"
        )));
    }
    if hop == 0 || hop > window_size {
        return Err(Error::invalid(format!(
            "hop must be in 1..={window_size}, got {hop}"
        )));
    }
    let x = buffer.samples();
    if x.len() < window_size {
        return Err(Error::invalid(format!(
            "buffer of {} samples is shorter than the {window_size}-sample window",
            x.len()
        )));
    }
    let rate = buffer.sample_rate_hz();
    let window = hann(window_size);
    let norm = 2.0 / window.iter().sum::<f64>();
    let n_bins = window_size / 2 + 1;
    let lead = (window_size - hop) as isize;

    let mut planner = rustfft::FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(window_size);
    let mut frame_times_s = Vec::new();
    let mut magnitude_db = Vec::new();
    let mut start = -lead;
    let mut buf = vec![rustfft::num_complex::Complex64::new(0.0, 0.0); window_size];
    while start < x.len() as isize {
        for (j, slot) in buf.iter_mut().enumerate() {
            let idx = start + j as isize;
            let v = if idx >= 0 && (idx as usize) < x.len() {
                x[idx as usize]
            } else {
                0.0
            };
            *slot = rustfft::num_complex::Complex64::new(v * window[j], 0.0);
        }
        fft.process(&mut buf);
        magnitude_db.push(
            buf[..n_bins]
                .iter()
                .map(|c| {
                    let m = c.norm() * norm;
                    if m > 0.0 {
                        (20.0 * m.log10()).max(DB_FLOOR)
                    } else {
                        DB_FLOOR
                    }
                })
                .collect(),
        );
        frame_times_s.push((start as f64 + window_size as f64 / 2.0) / rate);
        start += hop as isize;
    }
    let freq_bins_hz = (0..n_bins)
        .map(|k| spectral::bin_freq(k, window_size, rate))
        .collect();
    Ok(SpectrogramMatrix {
        frame_times_s,
        freq_bins_hz,
        magnitude_db,
        window_size,
        hop,
    })
}

/// 8-bit grayscale raster, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Binary PGM (P5) encoding.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Map dB linearly onto gray levels: `db_range.0 -> 0`, `db_range.1 -> 255`,
/// clamped. Time runs left to right, frequency bottom to top. Returns the
/// image and the CSV of the raw grid.
pub fn render_spectrogram(
    matrix: &SpectrogramMatrix,
    db_range: (f64, f64),
) -> Result<(GrayImage, String)> {
    let (lo, hi) = db_range;
    if !(lo < hi) {
        return Err(Error::invalid(format!(
            "dB range needs min < max, got ({lo}, {hi})"
        )));
    }
    let width = matrix.n_frames();
    let height = matrix.n_bins();
    let mut pixels = vec![0u8; width * height];
    for (x, frame) in matrix.magnitude_db.iter().enumerate() {
        for (k, &db) in frame.iter().enumerate() {
            let t = ((db - lo) / (hi - lo)).clamp(0.0, 1.0);
            let y = height - 1 - k;
            pixels[y * width + x] = (t * 255.0).round() as u8;
        }
    }
    Ok((
        GrayImage {
            width,
            height,
            pixels,
        },
        grid_csv(matrix),
    ))
}

/// CSV: header row of bin frequencies, then one row of dB values per frame.
fn grid_csv(matrix: &SpectrogramMatrix) -> String {
    let mut out = String::new();
    let header: Vec<String> = matrix
        .freq_bins_hz
        .iter()
        .map(|f| format!("{f:.3}"))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for frame in &matrix.magnitude_db {
        for (i, v) in frame.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.3}");
        }
        out.push('\n');
    }
    out
}

pub fn write_pgm(path: &Path, image: &GrayImage) -> Result<()> {
    fs::write(path, image.to_pgm())?;
    Ok(())
}

pub fn write_grid_csv(path: &Path, csv: &str) -> Result<()> {
    fs::write(path, csv)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{gen_tone, Unit};

    fn matrix(db: f64, frames: usize, bins: usize) -> SpectrogramMatrix {
        SpectrogramMatrix {
            frame_times_s: (0..frames).map(|i| i as f64).collect(),
            freq_bins_hz: (0..bins).map(|i| i as f64 * 10.0).collect(),
            magnitude_db: vec![vec![db; bins]; frames],
            window_size: 64,
            hop: 32,
        }
    }

    #[test]
    fn tone_peaks_in_its_bin() {
        let x = gen_tone(1000.0, 0.5, 0.5, 16_000.0, Unit::DigitalFullScale).unwrap();
        let s = stft(&x, 1024, 256).unwrap();
        let bin_hz = 16_000.0 / 1024.0;
        // skip frames that straddle the padded edges
        for frame in &s.magnitude_db[4..s.n_frames() - 4] {
            let (k, _) = frame
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap();
            assert!((s.freq_bins_hz[k] - 1000.0).abs() <= bin_hz);
        }
    }

    #[test]
    fn full_scale_sine_reads_near_zero_db() {
        let x = gen_tone(1000.0, 1.0, 0.5, 16_000.0, Unit::DigitalFullScale).unwrap();
        let s = stft(&x, 1024, 256).unwrap();
        let peak = s.magnitude_db[10].iter().cloned().fold(f64::MIN, f64::max);
        // bin 64 is exactly 1 kHz
        assert!(peak.abs() < 0.01, "{peak}");
    }

    #[test]
    fn silence_hits_floor() {
        let x = SampleBuffer::zeros(16_000.0, 4096, Unit::DigitalFullScale).unwrap();
        let s = stft(&x, 512, 128).unwrap();
        assert!(s.magnitude_db.iter().flatten().all(|&v| v == DB_FLOOR));
    }

    #[test]
    fn stft_argument_checks() {
        let x = SampleBuffer::zeros(16_000.0, 1000, Unit::DigitalFullScale).unwrap();
        assert!(stft(&x, 1024, 256).is_err());
        assert!(stft(&x, 100, 50).is_err());
        assert!(stft(&x, 32, 16).is_err());
        assert!(stft(&x, 512, 0).is_err());
        assert!(stft(&x, 512, 513).is_err());
    }

    #[test]
    fn gray_mapping() {
        let (img, _) = render_spectrogram(&matrix(-60.0, 3, 4), (-120.0, 0.0)).unwrap();
        assert!(img.pixels.iter().all(|&p| p == 128));
        let (img, _) = render_spectrogram(&matrix(-130.0, 3, 4), (-120.0, 0.0)).unwrap();
        assert!(img.pixels.iter().all(|&p| p == 0));
        let (img, _) = render_spectrogram(&matrix(-120.0, 3, 4), (-120.0, 0.0)).unwrap();
        assert!(img.pixels.iter().all(|&p| p == 0));
        assert!(render_spectrogram(&matrix(0.0, 1, 1), (0.0, 0.0)).is_err());
    }

    #[test]
    fn frequency_ascends_upward() {
        let mut m = matrix(-120.0, 2, 3);
        m.magnitude_db[1][2] = 0.0;
        let (img, csv) = render_spectrogram(&m, (-120.0, 0.0)).unwrap();
        assert_eq!((img.width, img.height), (2, 3));
        assert_eq!(img.get(1, 0), 255);
        assert_eq!(img.get(1, 2), 0);
        let pgm = img.to_pgm();
        assert!(pgm.starts_with(b"P5\n2 3\n255\n"));
        assert_eq!(pgm.len(), 11 + 6);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "0.000,10.000,20.000");
        assert_eq!(lines[2], "-120.000,-120.000,0.000");
    }
}
