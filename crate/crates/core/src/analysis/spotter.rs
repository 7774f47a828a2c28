//! Template-matching keyword spotter standing in for a voice assistant's ASR.

use std::fmt;

use super::dtw::dtw_distance;
use super::mfcc::{mfcc, FeatureMatrix, MFCC_RATE_HZ};
use crate::error::{Error, Result};
use crate::signals::{resample, SampleBuffer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Ack,
    Misheard,
    NoResponse,
}

impl Verdict {
    /// Spelling used in trial tables.
    pub fn table_code(self) -> &'static str {
        match self {
            Verdict::Ack => "ack",
            Verdict::Misheard => "misheard",
            Verdict::NoResponse => "x",
        }
    }

    pub fn from_table_code(s: &str) -> Option<Self> {
        match s {
            "ack" => Some(Verdict::Ack),
            "misheard" => Some(Verdict::Misheard),
            "x" => Some(Verdict::NoResponse),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.table_code())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub verdict: Verdict,
    /// Closest template, if features could be computed at all.
    pub best_command_id: Option<String>,
    pub best_distance: f64,
    /// Second-best minus best distance; `+inf` with a single template.
    pub margin: f64,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub command_id: String,
    pub features: FeatureMatrix,
}

impl Template {
    /// Template from a clean digital rendering of the command.
    pub fn from_waveform(command_id: impl Into<String>, waveform: &SampleBuffer) -> Result<Self> {
        let at_rate = resample(waveform, MFCC_RATE_HZ)?;
        Ok(Self {
            command_id: command_id.into(),
            features: mfcc(&at_rate, 13)?,
        })
    }
}

/// Decision thresholds on the DTW distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Largest best-match distance the spotter acts on.
    pub t_ack: f64,
    /// Smallest gap to the runner-up for an unambiguous decision.
    pub t_margin: f64,
}

/// Match a capture against the template bank.
///
/// No response if the best distance exceeds `t_ack` or the runner-up is
/// closer than `t_margin` behind it; otherwise ack when the best template is
/// `ground_truth`, misheard when it is not. Ties are broken by command id,
/// so template order never matters.
pub fn keyword_spot(
    capture: &SampleBuffer,
    templates: &[Template],
    ground_truth: &str,
    thresholds: Thresholds,
) -> Result<TrialOutcome> {
    if templates.is_empty() {
        return Err(Error::invalid(
            "keyword spotting needs at least one template",
        ));
    }
    if !(thresholds.t_ack > 0.0 && thresholds.t_margin > 0.0) {
        return Err(Error::invalid(
            "keyword spotting thresholds must be positive",
        ));
    }
    let features = match resample(capture, MFCC_RATE_HZ).and_then(|c| mfcc(&c, 13)) {
        Ok(f) => f,
        Err(e) => {
            return Ok(TrialOutcome {
                verdict: Verdict::NoResponse,
                best_command_id: None,
                best_distance: f64::INFINITY,
                margin: 0.0,
                diagnostic: Some(format!("no features: {e}")),
            })
        }
    };

    let mut scored: Vec<(f64, &str)> = templates
        .iter()
        .map(|t| (dtw_distance(&features, &t.features), t.command_id.as_str()))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let (d1, best) = scored[0];
    let d2 = scored.get(1).map_or(f64::INFINITY, |s| s.0);
    let margin = d2 - d1;

    Ok(TrialOutcome {
        verdict: decide(d1, margin, best == ground_truth, thresholds),
        best_command_id: Some(best.to_string()),
        best_distance: d1,
        margin,
        diagnostic: None,
    })
}

fn decide(d1: f64, margin: f64, correct: bool, t: Thresholds) -> Verdict {
    if d1 > t.t_ack || margin < t.t_margin {
        Verdict::NoResponse
    } else if correct {
        Verdict::Ack
    } else {
        Verdict::Misheard
    }
}

/// Pick thresholds from clean-capture outcomes.
///
/// `t_margin` is half the smallest margin among correct matches. `t_ack`
/// is the smallest distance that acknowledges at least `target_ack_rate` of
/// all trials under that margin gate, raised by `headroom` (e.g. 0.1 for
/// 10%).
pub fn calibrate_thresholds(
    clean: &[TrialOutcome],
    ground_truth: &[&str],
    target_ack_rate: f64,
    headroom: f64,
) -> Result<Thresholds> {
    if clean.len() != ground_truth.len() || clean.is_empty() {
        return Err(Error::invalid(
            "calibration needs one ground-truth id per clean outcome",
        ));
    }
    let correct: Vec<&TrialOutcome> = clean
        .iter()
        .zip(ground_truth)
        .filter(|(o, t)| o.best_command_id.as_deref() == Some(**t) && o.best_distance.is_finite())
        .map(|(o, _)| o)
        .collect();
    let need = (target_ack_rate * clean.len() as f64).ceil() as usize;
    if correct.len() < need {
        return Err(Error::invalid(format!(
            "only {} of {} clean trials match the right template; {need} needed",
            correct.len(),
            clean.len()
        )));
    }
    let min_margin = correct
        .iter()
        .map(|o| o.margin)
        .fold(f64::INFINITY, f64::min);
    // a one-template bank has no runner-up, so any gate passes
    let t_margin = if min_margin.is_finite() {
        0.5 * min_margin
    } else {
        1.0
    };
    let t_margin = t_margin.max(f64::MIN_POSITIVE);
    let mut d: Vec<f64> = correct.iter().map(|o| o.best_distance).collect();
    d.sort_by(f64::total_cmp);
    let t_ack = d[need.max(1) - 1] * (1.0 + headroom);
    Ok(Thresholds { t_ack, t_margin })
}
