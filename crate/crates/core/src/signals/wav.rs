//! Mono 32-bit float WAV files with an optional `.cal` sidecar.
//!
//! Pressure buffers are written as raw pascal values; the sidecar
//! `<name>.cal` next to the WAV carries `unit=pascal` and
//! `rms_db_spl=<value>`. On read, the sidecar level is authoritative and the
//! samples are rescaled to it.

use std::fs;
use std::path::{Path, PathBuf};

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{measure_spl, scale_to_spl, SampleBuffer, Unit};
use crate::error::{Error, Result};

pub const SUPPORTED_RATES: [u32; 3] = [16_000, 48_000, 96_000];

pub fn cal_path(wav: &Path) -> PathBuf {
    wav.with_extension("cal")
}

fn check_rate(rate: f64, path: &Path) -> Result<u32> {
    SUPPORTED_RATES
        .iter()
        .copied()
        .find(|&r| r as f64 == rate)
        .ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            message: format!(
                "unsupported sample rate {rate} Hz (expected one of {SUPPORTED_RATES:?})"
            ),
        })
}

pub fn write_wav(path: &Path, buffer: &SampleBuffer) -> Result<()> {
    let rate = check_rate(buffer.sample_rate_hz(), path)?;
    let spec = WavSpec {
        channels: 1,
        sample_rate: rate,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path, spec)?;
    for &v in buffer.samples() {
        writer.write_sample(v as f32)?;
    }
    writer.finalize()?;

    let cal = cal_path(path);
    match buffer.unit() {
        Unit::Pascal => {
            let level = measure_spl(buffer)?;
            let level = if level.is_finite() {
                format!("{level:.6}")
            } else {
                "-inf".to_string()
            };
            fs::write(&cal, format!("unit=pascal\nrms_db_spl={level}\n"))?;
        }
        Unit::DigitalFullScale => {
            if cal.exists() {
                fs::remove_file(&cal)?;
            }
        }
    }
    Ok(())
}

pub fn read_wav(path: &Path) -> Result<SampleBuffer> {
    let mut reader = WavReader::open(path)?;
    let spec = reader.spec();
    let fmt_err = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    if spec.channels != 1 {
        return Err(fmt_err(format!(
            "expected mono, found {} channels",
            spec.channels
        )));
    }
    if spec.sample_format != SampleFormat::Float || spec.bits_per_sample != 32 {
        return Err(fmt_err("expected 32-bit IEEE float samples".to_string()));
    }
    check_rate(spec.sample_rate as f64, path)?;
    let samples = reader
        .samples::<f32>()
        .map(|s| s.map(f64::from))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let buffer = SampleBuffer::new(spec.sample_rate as f64, samples, Unit::DigitalFullScale)
        .map_err(|e| fmt_err(e.to_string()))?;

    let cal = cal_path(path);
    if !cal.exists() {
        return Ok(buffer);
    }
    let sidecar = read_cal(&cal)?;
    if !sidecar.pascal {
        return Ok(buffer);
    }
    let buffer = buffer.with_unit(Unit::Pascal);
    match sidecar.rms_db_spl {
        Some(level) if level.is_finite() && buffer.rms() > 0.0 => scale_to_spl(&buffer, level),
        _ => Ok(buffer),
    }
}

struct Calibration {
    pascal: bool,
    rms_db_spl: Option<f64>,
}

fn read_cal(path: &Path) -> Result<Calibration> {
    let text = fs::read_to_string(path)?;
    let mut cal = Calibration {
        pascal: false,
        rms_db_spl: None,
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::Format {
            path: path.to_path_buf(),
            message: format!("line {}: {message}", i + 1),
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got '{line}'")))?;
        match key.trim() {
            "unit" => match value.trim() {
                "pascal" => cal.pascal = true,
                "digital_full_scale" => cal.pascal = false,
                other => return Err(bad(format!("unknown unit '{other}'"))),
            },
            "rms_db_spl" => {
                let v = value.trim();
                cal.rms_db_spl = Some(if v == "-inf" {
                    f64::NEG_INFINITY
                } else {
                    v.parse()
                        .map_err(|_| bad(format!("rms_db_spl is not a number: '{v}'")))?
                });
            }
            other => return Err(bad(format!("unknown key '{other}'"))),
        }
    }
    Ok(cal)
}
