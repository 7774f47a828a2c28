mod common;

use common::*;
use nujam::acoustics::{propagate, AbsorptionTable, Calibration, SourceSpec};
use nujam::mic_model::*;
use nujam::modulation::{susbam_modulate, SusbamParams};
use nujam::signals::*;

const RATE: f64 = 96_000.0;

fn pressure(samples: Vec<f64>) -> SampleBuffer {
    SampleBuffer::new(RATE, samples, Unit::Pascal).unwrap()
}

fn cosines(parts: &[(f64, f64, f64)], seconds: f64) -> SampleBuffer {
    let n = (seconds * RATE) as usize;
    pressure(
        (0..n)
            .map(|i| {
                let t = i as f64 / RATE;
                parts
                    .iter()
                    .map(|&(a, f, ph)| a * (2.0 * std::f64::consts::PI * f * t + ph).cos())
                    .sum()
            })
            .collect(),
    )
}

fn quiet() -> MicModelParams {
    MicModelParams {
        noise_floor_db_fs: -200.0,
        ..Default::default()
    }
}

fn jammer_at_mic(seed: u64) -> SampleBuffer {
    let base =
        gen_noise(&NoiseSpec::new(NoiseColor::White, 1.0, RATE, seed).with_band(0.0, 6000.0))
            .unwrap();
    let j = susbam_modulate(&base, &SusbamParams::default()).unwrap();
    let src = SourceSpec {
        waveform: j,
        calibration: Calibration {
            spl_db: 60.0,
            at_distance_m: 0.9144,
        },
        distance_m: 0.5,
    };
    propagate(&src, &AbsorptionTable::default(), RATE).unwrap()
}

#[test]
fn two_tones_demodulate_to_their_difference() {
    let (a1, a2) = (0.04, 0.06);
    let p = cosines(&[(a1, 17_000.0, 0.0), (a2, 19_000.0, 0.3)], 1.0);
    let params = quiet();
    let v = capture(&p, &params, 1).unwrap();
    let mid = &v.samples()[1600..14_400];
    let measured = tone_amplitude(mid, 16_000.0, 2000.0);
    let expected = params.a2 * a1 * a2;
    assert!(
        db(measured / expected).abs() <= 1.0,
        "{measured} vs {expected}"
    );
    // nothing else of note survives in the audible band
    let total = rms(mid) * 2f64.sqrt();
    assert!(total / measured < 1.01);
}

#[test]
fn transducer_identities() {
    let params = MicModelParams::default();
    let a = 0.05;
    let p = cosines(&[(a, 1000.0, 0.0)], 0.1);
    let v = apply_nonlinearity(&p, &params).unwrap();
    assert_eq!(v.unit(), Unit::DigitalFullScale);
    let dc = v.samples().iter().sum::<f64>() / v.len() as f64;
    assert!((dc - params.a2 * a * a / 2.0).abs() < 1e-12);
    assert!((tone_amplitude(v.samples(), RATE, 2000.0) - params.a2 * a * a / 2.0).abs() < 1e-9);
    assert!((tone_amplitude(v.samples(), RATE, 1000.0) - params.a1 * a).abs() < 1e-9);

    let lin = apply_nonlinearity(&p, &params.linear()).unwrap();
    for (x, y) in p.samples().iter().zip(lin.samples()) {
        assert_eq!(*y, params.a1 * x);
    }
    let two = cosines(&[(a, 17_000.0, 0.0), (a, 19_000.0, 0.0)], 0.1);
    let v = apply_nonlinearity(&two, &params).unwrap();
    assert!((tone_amplitude(v.samples(), RATE, 2000.0) - params.a2 * a * a).abs() < 1e-9);
}

#[test]
fn silence_sits_at_the_noise_floor() {
    let params = MicModelParams::default();
    let v = capture(&pressure(vec![0.0; 96_000]), &params, 3).unwrap();
    assert_eq!(v.sample_rate_hz(), 16_000.0);
    assert_eq!(v.len(), 16_000);
    assert!((db(rms(v.samples())) - params.noise_floor_db_fs).abs() <= 1.0);
}

#[test]
fn linear_path_preserves_audible_tones() {
    let params = MicModelParams {
        a2: 0.0,
        ..Default::default()
    };
    let amp = 0.02 * 2f64.sqrt();
    let freqs: Vec<f64> = (1..=60).map(|k| 100.0 * k as f64).collect();
    let parts: Vec<(f64, f64, f64)> = freqs
        .iter()
        .enumerate()
        .map(|(i, &f)| (amp / 8.0, f, i as f64 * 1.3))
        .collect();
    let p = cosines(&parts, 1.0);
    let v = capture(&p, &params, 4).unwrap();
    let mid = &v.samples()[1600..14_400];
    for &f in &freqs {
        let got = tone_amplitude(mid, 16_000.0, f);
        let want = params.a1 * amp / 8.0;
        assert!(
            db(got / want).abs() <= 0.5,
            "{f} Hz: {:.3} dB",
            db(got / want)
        );
    }
}

#[test]
fn single_tone_at_sixty_db_is_scaled_by_a1() {
    let params = MicModelParams {
        a2: 0.0,
        ..Default::default()
    };
    let amp = 0.02 * 2f64.sqrt();
    let v = capture(&cosines(&[(amp, 1000.0, 0.0)], 1.0), &params, 5).unwrap();
    let got = tone_amplitude(&v.samples()[1600..14_400], 16_000.0, 1000.0);
    assert!(db(got / (params.a1 * amp)).abs() <= 0.5);
}

#[test]
fn jammer_demodulation_grows_with_a2() {
    let p = jammer_at_mic(8);
    let mut last = 0.0;
    for a2 in [0.0, 0.5, 2.0, 5.0, 10.0, 20.0] {
        let v = capture(
            &p,
            &MicModelParams {
                a2,
                ..Default::default()
            },
            9,
        )
        .unwrap();
        let e = band_energy(v.samples(), 16_000.0, 300.0, 6000.0);
        assert!(e >= last, "a2 = {a2}");
        last = e;
    }
}

#[test]
fn capture_is_seeded() {
    let p = jammer_at_mic(1);
    let params = MicModelParams::default();
    let a = capture(&p, &params, 77).unwrap();
    assert_eq!(a, capture(&p, &params, 77).unwrap());
    assert_ne!(a, capture(&p, &params, 78).unwrap());
}

#[test]
fn capture_clips_at_full_scale() {
    let params = MicModelParams::default();
    let v = capture(&cosines(&[(20.0, 500.0, 0.0)], 0.2), &params, 0).unwrap();
    assert!(v.peak() <= params.clip_level);
    assert!(v.samples().iter().any(|x| x.abs() == params.clip_level));
}

#[test]
fn invalid_parameters_and_inputs_are_rejected() {
    let p = pressure(vec![0.0; 1000]);
    for bad in [
        MicModelParams {
            a1: 0.0,
            ..Default::default()
        },
        MicModelParams {
            a2: -1.0,
            ..Default::default()
        },
        MicModelParams {
            antialias_cutoff_hz: 9000.0,
            ..Default::default()
        },
        MicModelParams {
            adc_rate_hz: 0.0,
            ..Default::default()
        },
    ] {
        assert!(capture(&p, &bad, 0).is_err());
    }
    let digital = SampleBuffer::zeros(RATE, 1000, Unit::DigitalFullScale).unwrap();
    assert!(apply_nonlinearity(&digital, &MicModelParams::default()).is_err());
    let slow = SampleBuffer::zeros(8000.0, 1000, Unit::Pascal).unwrap();
    assert!(capture(&slow, &MicModelParams::default(), 0).is_err());
}
