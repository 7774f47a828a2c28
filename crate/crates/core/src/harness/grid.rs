use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::{fnv1a, splitmix};
use crate::acoustics::{ft_to_m, propagate, Calibration, SourceSpec};
use crate::analysis::{
    band_snr, calibrate_thresholds, keyword_spot, Template, Thresholds, TrialOutcome, Verdict,
};
use crate::error::{Error, Result};
use crate::mic_model::capture;
use crate::modulation::susbam_modulate;
use crate::signals::{gen_noise, synth_utterance, NoiseSpec, SampleBuffer, Unit, UtteranceSpec};

/// Band over which speech and jammer are compared.
pub const AUDIBLE_BAND_HZ: (f64, f64) = (300.0, 6000.0);

const TEMPLATE_SEED: u64 = 0x7e3a_11d0_5eed_0001;
const JAMMER_STREAM: u64 = 1;
const MIC_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub command_id: String,
    pub distance_ft: f64,
    pub jammer_on: bool,
    pub repeat: u32,
    pub outcome: TrialOutcome,
    /// Speech over everything else in [`AUDIBLE_BAND_HZ`], from separate
    /// speech-only and interference-only captures.
    pub audible_band_snr_db: f64,
    pub seed_used: u64,
}

/// 16 kHz capture that a record's verdict was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct CellCapture {
    pub command_id: String,
    pub distance_ft: f64,
    pub jammer_on: bool,
    pub repeat: u32,
    pub capture: SampleBuffer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRun {
    pub records: Vec<TrialRecord>,
    pub captures: Vec<CellCapture>,
}

/// Seed of one grid cell: a hash of the master seed and the cell
/// coordinates, independent of evaluation order.
pub fn cell_seed(
    master: u64,
    command_id: &str,
    distance_ft: f64,
    jammer_on: bool,
    repeat: u32,
) -> u64 {
    let mut bytes = Vec::with_capacity(command_id.len() + 21);
    bytes.extend_from_slice(&master.to_le_bytes());
    bytes.extend_from_slice(command_id.as_bytes());
    bytes.push(0xff);
    bytes.extend_from_slice(&distance_ft.to_bits().to_le_bytes());
    bytes.push(jammer_on as u8);
    bytes.extend_from_slice(&repeat.to_le_bytes());
    splitmix(fnv1a(&bytes))
}

/// Everything shared by the cells of one configuration: rendered commands
/// and the spotter's template bank.
pub struct Rig {
    config: ExperimentConfig,
    utterances: Vec<(UtteranceSpec, SampleBuffer)>,
    templates: Vec<Template>,
}

impl Rig {
    /// Templates are enrolled from captures of each command at the speech
    /// calibration distance through a linear microphone.
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let utterances = config
            .commands
            .par_iter()
            .map(|c| {
                let spec = c.utterance(config.manual_trigger);
                let wave = synth_utterance(&spec)?;
                Ok((spec, wave))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rig = Self {
            config: config.clone(),
            utterances,
            templates: Vec::new(),
        };
        let linear = config.mic.linear();
        rig.templates = (0..config.commands.len())
            .into_par_iter()
            .map(|i| {
                let p = rig.speech_pressure(i, config.speech.cal_distance_ft)?;
                let enrolled = capture(&p, &linear, TEMPLATE_SEED)?;
                Template::from_waveform(config.commands[i].id.clone(), &enrolled)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(rig)
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn utterance(&self, command: usize) -> &UtteranceSpec {
        &self.utterances[command].0
    }

    fn scene_rate(&self) -> f64 {
        self.config.jammer.susbam.output_rate_hz
    }

    /// Speech pressure at the microphone from `distance_ft` away.
    pub fn speech_pressure(&self, command: usize, distance_ft: f64) -> Result<SampleBuffer> {
        let speech = &self.config.speech;
        let source = SourceSpec {
            waveform: self.utterances[command].1.clone(),
            calibration: Calibration {
                spl_db: speech.spl_db,
                at_distance_m: ft_to_m(speech.cal_distance_ft),
            },
            distance_m: ft_to_m(distance_ft),
        };
        propagate(&source, &self.config.absorption, self.scene_rate())
    }

    /// Jammer pressure at the microphone, `len` samples at the scene rate.
    pub fn jammer_pressure(&self, len: usize, seed: u64) -> Result<SampleBuffer> {
        let j = &self.config.jammer;
        let rate = self.scene_rate();
        let spec = NoiseSpec {
            color: j.color,
            duration_s: len as f64 / rate,
            sample_rate_hz: rate,
            seed,
            bandwidth_hz: j.band_hz,
        };
        let mut waveform = susbam_modulate(&gen_noise(&spec)?, &j.susbam)?;
        if waveform.len() != len {
            let mut s = waveform.into_samples();
            s.resize(len, 0.0);
            waveform = SampleBuffer::new(rate, s, Unit::DigitalFullScale)?;
        }
        let source = SourceSpec {
            waveform,
            calibration: Calibration {
                spl_db: j.spl_db,
                at_distance_m: ft_to_m(j.cal_distance_ft),
            },
            distance_m: ft_to_m(j.distance_ft),
        };
        propagate(&source, &self.config.absorption, rate)
    }

    /// Run one cell: returns its record and the capture the spotter heard.
    pub fn run_cell(
        &self,
        command: usize,
        distance_ft: f64,
        jammer_on: bool,
        repeat: u32,
    ) -> Result<(TrialRecord, SampleBuffer)> {
        let id = &self.config.commands[command].id;
        let seed = cell_seed(self.config.master_seed, id, distance_ft, jammer_on, repeat);
        let wrap = |e: Error| Error::Trial {
            command: id.clone(),
            distance_ft,
            jammer: if jammer_on { "on" } else { "off" },
            source: Box::new(e),
        };
        self.cell_inner(command, distance_ft, jammer_on, repeat, seed)
            .map_err(wrap)
    }

    fn cell_inner(
        &self,
        command: usize,
        distance_ft: f64,
        jammer_on: bool,
        repeat: u32,
        seed: u64,
    ) -> Result<(TrialRecord, SampleBuffer)> {
        let mic_seed = splitmix(seed ^ MIC_STREAM);
        let speech = self.speech_pressure(command, distance_ft)?;
        let speech_only = capture(&speech, &self.config.mic, mic_seed)?;
        let interference = if jammer_on {
            self.jammer_pressure(speech.len(), splitmix(seed ^ JAMMER_STREAM))?
        } else {
            SampleBuffer::zeros(speech.sample_rate_hz(), speech.len(), Unit::Pascal)?
        };
        let cell = Cell {
            command,
            distance_ft,
            jammer_on,
            repeat,
            seed,
            mic_seed,
        };
        self.evaluate(&cell, &speech, &speech_only, &interference)
    }

    fn evaluate(
        &self,
        cell: &Cell,
        speech: &SampleBuffer,
        speech_only: &SampleBuffer,
        interference: &SampleBuffer,
    ) -> Result<(TrialRecord, SampleBuffer)> {
        let mic = &self.config.mic;
        let total: Vec<f64> = speech
            .samples()
            .iter()
            .zip(interference.samples())
            .map(|(a, b)| a + b)
            .collect();
        let total = SampleBuffer::new(speech.sample_rate_hz(), total, Unit::Pascal)?;
        let heard = capture(&total, mic, cell.mic_seed)?;
        let interference_only = capture(interference, mic, cell.mic_seed)?;
        let snr = band_snr(speech_only, &interference_only, AUDIBLE_BAND_HZ)?;

        let id = &self.config.commands[cell.command].id;
        let outcome = keyword_spot(&heard, &self.templates, id, self.config.thresholds)?;
        let record = TrialRecord {
            command_id: id.clone(),
            distance_ft: cell.distance_ft,
            jammer_on: cell.jammer_on,
            repeat: cell.repeat,
            outcome,
            audible_band_snr_db: snr,
            seed_used: cell.seed,
        };
        Ok((record, heard))
    }

    /// Jammer-on cells re-run with the jammer calibrated to each of
    /// `levels_db` in turn (everything else, seeds included, held fixed).
    /// Element `i` of the result holds the records for `levels_db[i]`, sorted
    /// like [`Rig::run`].
    pub fn sweep_jammer_levels(&self, levels_db: &[f64]) -> Result<Vec<Vec<TrialRecord>>> {
        let per_cell = self
            .cells(&[true])
            .into_par_iter()
            .map(|(c, d, _, r)| {
                let id = &self.config.commands[c].id;
                let seed = cell_seed(self.config.master_seed, id, d, true, r);
                let cell = Cell {
                    command: c,
                    distance_ft: d,
                    jammer_on: true,
                    repeat: r,
                    seed,
                    mic_seed: splitmix(seed ^ MIC_STREAM),
                };
                let wrap = |e: Error| Error::Trial {
                    command: id.clone(),
                    distance_ft: d,
                    jammer: "on",
                    source: Box::new(e),
                };
                let speech = self.speech_pressure(c, d).map_err(wrap)?;
                let speech_only =
                    capture(&speech, &self.config.mic, cell.mic_seed).map_err(wrap)?;
                let jammer = self
                    .jammer_pressure(speech.len(), splitmix(seed ^ JAMMER_STREAM))
                    .map_err(wrap)?;
                levels_db
                    .iter()
                    .map(|&level| {
                        let gain = 10f64.powf((level - self.config.jammer.spl_db) / 20.0);
                        self.evaluate(&cell, &speech, &speech_only, &jammer.scaled(gain))
                            .map(|(rec, _)| rec)
                            .map_err(wrap)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut by_level: Vec<Vec<TrialRecord>> =
            vec![Vec::with_capacity(per_cell.len()); levels_db.len()];
        for cell in per_cell {
            for (i, rec) in cell.into_iter().enumerate() {
                by_level[i].push(rec);
            }
        }
        for records in &mut by_level {
            records.sort_by(record_order);
        }
        Ok(by_level)
    }

    fn cells(&self, jammer_states: &[bool]) -> Vec<(usize, f64, bool, u32)> {
        let mut cells = Vec::new();
        for c in 0..self.config.commands.len() {
            for &d in &self.config.distances_ft {
                for &j in jammer_states {
                    for r in 0..self.config.repeats {
                        cells.push((c, d, j, r));
                    }
                }
            }
        }
        cells
    }

    /// Evaluate cells in parallel; results come back sorted by
    /// (command, distance, jammer, repeat).
    pub fn run(&self, jammer_states: &[bool]) -> Result<GridRun> {
        let results = self
            .cells(jammer_states)
            .into_par_iter()
            .map(|(c, d, j, r)| self.run_cell(c, d, j, r))
            .collect::<Result<Vec<_>>>()?;
        let mut pairs: Vec<(TrialRecord, SampleBuffer)> = results;
        pairs.sort_by(|a, b| record_order(&a.0, &b.0));
        let captures = pairs
            .iter()
            .map(|(r, c)| CellCapture {
                command_id: r.command_id.clone(),
                distance_ft: r.distance_ft,
                jammer_on: r.jammer_on,
                repeat: r.repeat,
                capture: c.clone(),
            })
            .collect();
        Ok(GridRun {
            records: pairs.into_iter().map(|(r, _)| r).collect(),
            captures,
        })
    }
}

struct Cell {
    command: usize,
    distance_ft: f64,
    jammer_on: bool,
    repeat: u32,
    seed: u64,
    mic_seed: u64,
}

fn record_order(a: &TrialRecord, b: &TrialRecord) -> std::cmp::Ordering {
    a.command_id
        .cmp(&b.command_id)
        .then(a.distance_ft.total_cmp(&b.distance_ft))
        .then(a.jammer_on.cmp(&b.jammer_on))
        .then(a.repeat.cmp(&b.repeat))
}

/// Full cross product of commands, distances and jammer off/on.
pub fn run_grid(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    Ok(run_grid_with_captures(config)?.records)
}

pub fn run_grid_with_captures(config: &ExperimentConfig) -> Result<GridRun> {
    Rig::new(config)?.run(&[false, true])
}

/// Thresholds from the jammer-off cells of `config`, using the config's
/// own thresholds only to obtain raw distances and margins.
pub fn calibrate_asr(
    config: &ExperimentConfig,
    target_ack_rate: f64,
    headroom: f64,
) -> Result<Thresholds> {
    let run = Rig::new(config)?.run(&[false])?;
    let outcomes: Vec<TrialOutcome> = run.records.iter().map(|r| r.outcome.clone()).collect();
    let truth: Vec<&str> = run.records.iter().map(|r| r.command_id.as_str()).collect();
    calibrate_thresholds(&outcomes, &truth, target_ack_rate, headroom)
}

/// Fraction of records acknowledged.
pub fn ack_rate<'a>(records: impl IntoIterator<Item = &'a TrialRecord>) -> f64 {
    let mut n = 0usize;
    let mut acks = 0usize;
    for r in records {
        n += 1;
        if r.outcome.verdict == Verdict::Ack {
            acks += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        acks as f64 / n as f64
    }
}
