//! Free-field propagation and scene assembly.
//!
//! A source is calibrated to a level at a reference distance, then moved to
//! its actual distance with spherical spreading (`1/r`) and frequency-dependent
//! air absorption applied over the extra path. There are no reflections.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::signals::{db_spl_to_pa, resample, wav, SampleBuffer, Unit};
use crate::spectral;

pub const M_PER_FT: f64 = 0.3048;

pub fn ft_to_m(feet: f64) -> f64 {
    feet * M_PER_FT
}

/// Calibration point: `spl_db` measured at `at_distance_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub spl_db: f64,
    pub at_distance_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub waveform: SampleBuffer,
    pub calibration: Calibration,
    pub distance_m: f64,
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance_m > 0.0 && self.calibration.at_distance_m > 0.0) {
            return Err(Error::invalid(
                "source and calibration distances must be positive",
            ));
        }
        if !self.calibration.spl_db.is_finite() {
            return Err(Error::invalid("calibration level must be finite"));
        }
        Ok(())
    }
}

/// Air absorption in dB/m, linearly interpolated between table rows.
///
/// Below the first row the coefficient falls linearly to zero at DC; above
/// the last row it is held constant.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionTable {
    rows: Vec<(f64, f64)>,
}

impl AbsorptionTable {
    pub fn new(mut rows: Vec<(f64, f64)>) -> Result<Self> {
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.is_empty() {
            return Err(Error::invalid("absorption table is empty"));
        }
        for w in rows.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::invalid(format!(
                    "duplicate absorption frequency {} Hz",
                    w[0].0
                )));
            }
        }
        if rows
            .iter()
            .any(|&(f, a)| !(f > 0.0) || !(a >= 0.0) || !a.is_finite())
        {
            return Err(Error::invalid(
                "absorption rows need positive frequency and alpha >= 0",
            ));
        }
        if rows[0].0 > 1000.0 || rows[rows.len() - 1].0 < 22_000.0 {
            return Err(Error::invalid(
                "absorption table must cover 1 kHz to 22 kHz",
            ));
        }
        Ok(Self { rows })
    }

    /// No absorption at any frequency.
    pub fn none() -> Self {
        Self {
            rows: vec![(1000.0, 0.0), (22_000.0, 0.0)],
        }
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    pub fn alpha_db_per_m(&self, f: f64) -> f64 {
        let f = f.abs();
        let rows = &self.rows;
        let (f0, a0) = rows[0];
        if f <= f0 {
            return a0 * f / f0;
        }
        for w in rows.windows(2) {
            let ((fa, aa), (fb, ab)) = (w[0], w[1]);
            if f <= fb {
                return aa + (ab - aa) * (f - fa) / (fb - fa);
            }
        }
        rows[rows.len() - 1].1
    }
}

impl Default for AbsorptionTable {
    /// Representative magnitudes for 20 degC, 50% relative humidity.
    fn default() -> Self {
        Self {
            rows: vec![
                (1_000.0, 0.005),
                (4_000.0, 0.03),
                (10_000.0, 0.11),
                (16_000.0, 0.27),
                (20_000.0, 0.40),
                (22_000.0, 0.47),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub sources: Vec<SourceSpec>,
    pub air_absorption: AbsorptionTable,
    pub sample_rate_hz: f64,
}

/// Pressure at the microphone due to one source.
pub fn propagate(
    source: &SourceSpec,
    air: &AbsorptionTable,
    sample_rate_hz: f64,
) -> Result<SampleBuffer> {
    source.validate()?;
    let wave = resample(&source.waveform, sample_rate_hz)?;
    let rms = wave.rms();
    if rms == 0.0 {
        return SampleBuffer::zeros(sample_rate_hz, wave.len(), Unit::Pascal);
    }
    let cal = source.calibration;
    let gain = db_spl_to_pa(cal.spl_db) / rms * (cal.at_distance_m / source.distance_m);
    let extra_m = source.distance_m - cal.at_distance_m;
    let scaled = wave.scaled(gain).with_unit(Unit::Pascal);
    if extra_m == 0.0 {
        return Ok(scaled);
    }
    let samples = spectral::filter_real(scaled.samples(), sample_rate_hz, |f| {
        10f64.powf(-air.alpha_db_per_m(f) * extra_m / 20.0)
    });
    SampleBuffer::new(sample_rate_hz, samples, Unit::Pascal)
}

/// Sum of every source's pressure, zero-padded to the longest.
pub fn scene_pressure(scene: &Scene) -> Result<SampleBuffer> {
    let mut total: Vec<f64> = Vec::new();
    for source in &scene.sources {
        let p = propagate(source, &scene.air_absorption, scene.sample_rate_hz)?;
        if p.len() > total.len() {
            total.resize(p.len(), 0.0);
        }
        for (t, v) in total.iter_mut().zip(p.samples()) {
            *t += v;
        }
    }
    SampleBuffer::new(scene.sample_rate_hz, total, Unit::Pascal)
}

/// One source as written in a scene description file.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSourceEntry {
    pub wav: PathBuf,
    pub spl_db: f64,
    pub cal_distance_ft: f64,
    pub distance_ft: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneDescription {
    pub sources: Vec<SceneSourceEntry>,
    pub absorption: AbsorptionTable,
}

/// Parse `key = value` scene text with keys `source.<n>.wav`,
/// `source.<n>.spl_db`, `source.<n>.cal_distance_ft`,
/// `source.<n>.distance_ft` and `absorption.<freq_hz>`.
///
/// Any `absorption.*` key replaces the default table as a whole.
pub fn parse_scene(text: &str) -> Result<SceneDescription> {
    use std::collections::BTreeMap;

    #[derive(Default)]
    struct Partial {
        wav: Option<PathBuf>,
        spl_db: Option<f64>,
        cal_distance_ft: Option<f64>,
        distance_ft: Option<f64>,
        line: usize,
    }

    let mut sources: BTreeMap<u32, Partial> = BTreeMap::new();
    let mut absorption = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| Error::Config {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let number = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| err(format!("'{key}' expects a number, got '{v}'")))
        };
        let parts: Vec<&str> = key.split('.').collect();
        match parts.as_slice() {
            ["source", n, field] => {
                let n: u32 = n
                    .parse()
                    .map_err(|_| err(format!("source index '{n}' is not an integer")))?;
                let entry = sources.entry(n).or_insert_with(|| Partial {
                    line: line_no,
                    ..Default::default()
                });
                match *field {
                    "wav" => entry.wav = Some(PathBuf::from(value)),
                    "spl_db" => entry.spl_db = Some(number(value)?),
                    "cal_distance_ft" => entry.cal_distance_ft = Some(number(value)?),
                    "distance_ft" => entry.distance_ft = Some(number(value)?),
                    other => return Err(err(format!("unknown source field '{other}'"))),
                }
            }
            ["absorption", f] => {
                let f = number(f)?;
                absorption.push((f, number(value)?));
            }
            _ => return Err(err(format!("unknown key '{key}'"))),
        }
    }

    let mut out = Vec::new();
    for (n, p) in sources {
        let missing = |what: &str| Error::Config {
            line: p.line,
            message: format!("source.{n} is missing '{what}'"),
        };
        let entry = SceneSourceEntry {
            wav: p.wav.clone().ok_or_else(|| missing("wav"))?,
            spl_db: p.spl_db.ok_or_else(|| missing("spl_db"))?,
            cal_distance_ft: p
                .cal_distance_ft
                .ok_or_else(|| missing("cal_distance_ft"))?,
            distance_ft: p.distance_ft.ok_or_else(|| missing("distance_ft"))?,
        };
        if !(entry.cal_distance_ft > 0.0 && entry.distance_ft > 0.0) {
            return Err(Error::Config {
                line: p.line,
                message: format!("source.{n}: distances must be positive"),
            });
        }
        out.push(entry);
    }
    let absorption = if absorption.is_empty() {
        AbsorptionTable::default()
    } else {
        AbsorptionTable::new(absorption).map_err(|e| Error::Config {
            line: 0,
            message: e.to_string(),
        })?
    };
    Ok(SceneDescription {
        sources: out,
        absorption,
    })
}

/// Load a scene file, reading every source WAV relative to the file's
/// directory.
pub fn load_scene(path: &Path, sample_rate_hz: f64) -> Result<Scene> {
    let desc = parse_scene(&fs::read_to_string(path)?)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut sources = Vec::new();
    for s in &desc.sources {
        let wav_path = if s.wav.is_absolute() {
            s.wav.clone()
        } else {
            base.join(&s.wav)
        };
        let waveform = wav::read_wav(&wav_path)?;
        sources.push(SourceSpec {
            waveform,
            calibration: Calibration {
                spl_db: s.spl_db,
                at_distance_m: ft_to_m(s.cal_distance_ft),
            },
            distance_m: ft_to_m(s.distance_ft),
        });
    }
    Ok(Scene {
        sources,
        air_absorption: desc.absorption,
        sample_rate_hz,
    })
}
