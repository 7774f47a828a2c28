//! Measurement and the ASR stand-in: spectrograms, band SNR, MFCC features,
//! DTW keyword spotting and per-phoneme-class degradation.

mod degradation;
mod dtw;
mod mfcc;
mod spectrogram;
mod spotter;

pub use degradation::{
    phoneme_class_degradation, ClassDrop, DegradationReport, FRICATIVE_BAND_HZ, VOWEL_BAND_HZ,
};
pub use dtw::dtw_distance;
pub use mfcc::{mfcc, mfcc_with, FeatureMatrix, MfccOptions};
pub use spectrogram::{
    render_spectrogram, stft, write_grid_csv, write_pgm, GrayImage, SpectrogramMatrix, DB_FLOOR,
};
pub use spotter::{
    calibrate_thresholds, keyword_spot, Template, Thresholds, TrialOutcome, Verdict,
};

use crate::error::{Error, Result};
use crate::modulation::bandpass;
use crate::signals::SampleBuffer;

/// `10 log10(E_signal / E_interference)` within `band`.
///
/// Zero interference energy yields `+inf` ("clean").
pub fn band_snr(
    signal: &SampleBuffer,
    interference: &SampleBuffer,
    band: (f64, f64),
) -> Result<f64> {
    if signal.sample_rate_hz() != interference.sample_rate_hz() {
        return Err(Error::invalid(format!(
            "rate mismatch: {} vs {} Hz",
            signal.sample_rate_hz(),
            interference.sample_rate_hz()
        )));
    }
    let s = bandpass(signal, band.0, band.1)?.energy();
    let i = bandpass(interference, band.0, band.1)?.energy();
    if i == 0.0 {
        return Ok(f64::INFINITY);
    }
    if s == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (s / i).log10())
}

/// Text form of an SNR, spelling `+inf` as "clean".
pub fn format_snr(db: f64) -> String {
    if db == f64::INFINITY {
        "clean".to_string()
    } else {
        format!("{db:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{gen_noise, NoiseColor, NoiseSpec, Unit};

    #[test]
    fn snr_symmetry_and_scaling() {
        let x = gen_noise(&NoiseSpec::new(NoiseColor::White, 0.5, 16_000.0, 3)).unwrap();
        let same = band_snr(&x, &x, (300.0, 6000.0)).unwrap();
        assert!(same.abs() < 0.1);
        let scaled = band_snr(&x, &x.scaled(0.1), (300.0, 6000.0)).unwrap();
        assert!((scaled - 20.0).abs() < 0.1);
    }

    #[test]
    fn snr_clean_sentinel() {
        let x = gen_noise(&NoiseSpec::new(NoiseColor::White, 0.1, 16_000.0, 3)).unwrap();
        let z = SampleBuffer::zeros(16_000.0, x.len(), Unit::DigitalFullScale).unwrap();
        let snr = band_snr(&x, &z, (300.0, 6000.0)).unwrap();
        assert_eq!(snr, f64::INFINITY);
        assert_eq!(format_snr(snr), "clean");
        let other = SampleBuffer::zeros(48_000.0, 10, Unit::DigitalFullScale).unwrap();
        assert!(band_snr(&x, &other, (300.0, 6000.0)).is_err());
    }
}
