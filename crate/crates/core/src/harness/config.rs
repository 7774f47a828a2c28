//! Experiment configuration: line-oriented `key = value` text.
//!
//! `#` starts a comment. Keys are dot paths. Absent keys take their
//! defaults; unknown keys are errors. Any `absorption.*` key replaces the
//! whole default table, and any `command.*` key replaces the whole default
//! command bank.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use super::commands::{default_bank, Command, Profile};
use crate::acoustics::AbsorptionTable;
use crate::analysis::Thresholds;
use crate::error::{Error, Result};
use crate::mic_model::MicModelParams;
use crate::modulation::SusbamParams;
use crate::signals::NoiseColor;

/// Spotter thresholds frozen from the clean calibration run of the default
/// configuration (90% target, 10% headroom), rounded down.
pub const DEFAULT_THRESHOLDS: Thresholds = Thresholds {
    t_ack: 11.25,
    t_margin: 0.6,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SpeechConfig {
    pub spl_db: f64,
    pub cal_distance_ft: f64,
}

impl Default for SpeechConfig {
    fn default() -> Self {
        Self {
            spl_db: 65.0,
            cal_distance_ft: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JammerConfig {
    pub susbam: SusbamParams,
    pub color: NoiseColor,
    /// Baseband noise band before modulation.
    pub band_hz: (f64, f64),
    pub spl_db: f64,
    pub cal_distance_ft: f64,
    pub distance_ft: f64,
}

impl Default for JammerConfig {
    fn default() -> Self {
        let susbam = SusbamParams::default();
        Self {
            susbam,
            color: NoiseColor::White,
            band_hz: (0.0, susbam.baseband_limit_hz),
            spl_db: 60.0,
            cal_distance_ft: 3.0,
            distance_ft: 0.25 / crate::acoustics::M_PER_FT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub commands: Vec<Command>,
    pub distances_ft: Vec<f64>,
    pub speech: SpeechConfig,
    pub jammer: JammerConfig,
    pub mic: MicModelParams,
    pub absorption: AbsorptionTable,
    pub thresholds: Thresholds,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub repeats: u32,
    pub manual_trigger: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            commands: default_bank(),
            distances_ft: vec![1.0, 3.0, 6.0],
            speech: SpeechConfig::default(),
            jammer: JammerConfig::default(),
            mic: MicModelParams::default(),
            absorption: AbsorptionTable::default(),
            thresholds: DEFAULT_THRESHOLDS,
            master_seed: 0,
            output_dir: PathBuf::from("out"),
            repeats: 1,
            manual_trigger: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.commands.is_empty() {
            return Err(Error::invalid("command bank is empty"));
        }
        let mut ids: Vec<&str> = self.commands.iter().map(|c| c.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("command ids must be unique"));
        }
        if self.distances_ft.is_empty() {
            return Err(Error::invalid("distances_ft must not be empty"));
        }
        if let Some(d) = self
            .distances_ft
            .iter()
            .find(|d| !(d.is_finite() && **d > 0.0))
        {
            return Err(Error::invalid(format!(
                "distances must be positive, got {d}"
            )));
        }
        let mut sorted = self.distances_ft.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("distances_ft contains duplicates"));
        }
        for (name, v) in [
            ("speech_cal_distance_ft", self.speech.cal_distance_ft),
            ("jammer.cal_distance_ft", self.jammer.cal_distance_ft),
            ("jammer.distance_ft", self.jammer.distance_ft),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.speech.spl_db.is_finite() && self.jammer.spl_db.is_finite()) {
            return Err(Error::invalid("levels must be finite"));
        }
        self.jammer.susbam.validate()?;
        let (lo, hi) = self.jammer.band_hz;
        if !(lo >= 0.0 && lo < hi && hi <= self.jammer.susbam.baseband_limit_hz) {
            return Err(Error::invalid(format!(
                "jammer.band_hz ({lo}, {hi}) must satisfy 0 <= low < high <= baseband_limit_hz"
            )));
        }
        self.mic.validate()?;
        if !(self.thresholds.t_ack > 0.0 && self.thresholds.t_margin > 0.0) {
            return Err(Error::invalid("asr thresholds must be positive"));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be at least 1"));
        }
        Ok(())
    }
}

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "distances_ft",
    "speech_spl_db",
    "speech_cal_distance_ft",
    "jammer.spl_db",
    "jammer.cal_distance_ft",
    "jammer.distance_ft",
    "jammer.color",
    "jammer.band_hz",
    "jammer.carrier_hz",
    "jammer.baseband_limit_hz",
    "jammer.output_rate_hz",
    "mic.a1",
    "mic.a2",
    "mic.adc_rate_hz",
    "mic.antialias_cutoff_hz",
    "mic.noise_floor_db_fs",
    "mic.clip_level",
    "asr.t_ack",
    "asr.t_margin",
    "seeds.master",
    "output_dir",
    "repeats",
    "trial.manual_trigger",
    "absorption.<freq_hz>",
    "command.<id>.text",
    "command.<id>.profile",
];

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut absorption = Vec::new();
    let mut absorption_line = 0;
    let mut commands: BTreeMap<String, (usize, Option<String>, Option<Profile>)> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    let mut band_changed = false;
    let mut limit_changed = false;
    let mut last_line = 0;

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
        last_line = line_no;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(format!("'{key}' expects a number, got '{v}'")))
        };
        let list = |v: &str| -> Result<Vec<f64>> { v.split(',').map(&num).collect() };

        match key {
            "distances_ft" => cfg.distances_ft = list(value)?,
            "speech_spl_db" => cfg.speech.spl_db = num(value)?,
            "speech_cal_distance_ft" => cfg.speech.cal_distance_ft = num(value)?,
            "jammer.spl_db" => cfg.jammer.spl_db = num(value)?,
            "jammer.cal_distance_ft" => cfg.jammer.cal_distance_ft = num(value)?,
            "jammer.distance_ft" => cfg.jammer.distance_ft = num(value)?,
            "jammer.color" => {
                cfg.jammer.color = NoiseColor::from_str(value).map_err(|e| err(e.to_string()))?;
            }
            "jammer.band_hz" => {
                let v = list(value)?;
                if v.len() != 2 {
                    return Err(err(format!("'{key}' expects 'low, high', got '{value}'")));
                }
                cfg.jammer.band_hz = (v[0], v[1]);
                band_changed = true;
            }
            "jammer.carrier_hz" => cfg.jammer.susbam.carrier_hz = num(value)?,
            "jammer.baseband_limit_hz" => {
                cfg.jammer.susbam.baseband_limit_hz = num(value)?;
                limit_changed = true;
            }
            "jammer.output_rate_hz" => cfg.jammer.susbam.output_rate_hz = num(value)?,
            "mic.a1" => cfg.mic.a1 = num(value)?,
            "mic.a2" => cfg.mic.a2 = num(value)?,
            "mic.adc_rate_hz" => cfg.mic.adc_rate_hz = num(value)?,
            "mic.antialias_cutoff_hz" => cfg.mic.antialias_cutoff_hz = num(value)?,
            "mic.noise_floor_db_fs" => cfg.mic.noise_floor_db_fs = num(value)?,
            "mic.clip_level" => cfg.mic.clip_level = num(value)?,
            "asr.t_ack" => cfg.thresholds.t_ack = num(value)?,
            "asr.t_margin" => cfg.thresholds.t_margin = num(value)?,
            "seeds.master" => {
                cfg.master_seed = value.parse().map_err(|_| {
                    err(format!(
                        "'{key}' expects an unsigned 64-bit integer, got '{value}'"
                    ))
                })?;
            }
            "output_dir" => {
                if value.is_empty() {
                    return Err(err("output_dir must not be empty".into()));
                }
                cfg.output_dir = PathBuf::from(value);
            }
            "repeats" => {
                cfg.repeats = value.parse().map_err(|_| {
                    err(format!("'{key}' expects a positive integer, got '{value}'"))
                })?;
            }
            "trial.manual_trigger" => {
                cfg.manual_trigger = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(err(format!("'{key}' expects true or false, got '{value}'"))),
                };
            }
            _ => {
                let parts: Vec<&str> = key.split('.').collect();
                match parts.as_slice() {
                    ["absorption", f] => {
                        absorption.push((num(f)?, num(value)?));
                        absorption_line = line_no;
                    }
                    ["command", id, field] => {
                        if id.is_empty()
                            || !id
                                .chars()
                                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
                        {
                            return Err(err(format!(
                                "command id '{id}' may only use letters, digits, '_' and '-'"
                            )));
                        }
                        let entry = commands.entry(id.to_string()).or_insert_with(|| {
                            order.push(id.to_string());
                            (line_no, None, None)
                        });
                        match *field {
                            "text" => entry.1 = Some(value.to_string()),
                            "profile" => {
                                entry.2 =
                                    Some(Profile::from_str(value).map_err(|e| err(e.to_string()))?);
                            }
                            other => return Err(err(format!("unknown command field '{other}'"))),
                        }
                    }
                    _ => return Err(err(format!("unknown key '{key}'"))),
                }
            }
        }
    }

    if limit_changed && !band_changed {
        cfg.jammer.band_hz = (0.0, cfg.jammer.susbam.baseband_limit_hz);
    }
    if !absorption.is_empty() {
        cfg.absorption = AbsorptionTable::new(absorption).map_err(|e| Error::Config {
            line: absorption_line,
            message: e.to_string(),
        })?;
    }
    if !commands.is_empty() {
        let mut bank = Vec::new();
        for id in order {
            let (line, text, profile) = commands.remove(&id).expect("recorded id");
            let missing = |what: &str| Error::Config {
                line,
                message: format!("command.{id} is missing '{what}'"),
            };
            let text = text.ok_or_else(|| missing("text"))?;
            let profile = profile.ok_or_else(|| missing("profile"))?;
            bank.push(Command::new(id, text, profile));
        }
        cfg.commands = bank;
    }
    cfg.validate().map_err(|e| match e {
        Error::InvalidInput(message) => Error::Config {
            line: last_line,
            message,
        },
        other => other,
    })?;
    Ok(cfg)
}
