use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::modulation::bandpass;
use crate::signals::{PhonemeClass, SampleBuffer, UtteranceSpec};

pub const VOWEL_BAND_HZ: (f64, f64) = (100.0, 1500.0);
pub const FRICATIVE_BAND_HZ: (f64, f64) = (3000.0, 7000.0);
const STOP_BAND_HZ: (f64, f64) = (300.0, 7000.0);
/// Alignment tolerance between utterance and captures.
const FRAME_S: f64 = 0.010;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentDrop {
    pub index: usize,
    pub class: PhonemeClass,
    pub drop_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDrop {
    pub class: PhonemeClass,
    pub mean_drop_db: f64,
    pub segments: usize,
}

/// How far the jammer swamped each segment's dominant band.
///
/// A segment's drop is `10 log10(E_jammed / E_clean)` over its band and time
/// span, so 0 dB means untouched and larger means more masked.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationReport {
    pub segments: Vec<SegmentDrop>,
    pub classes: Vec<ClassDrop>,
}

impl DegradationReport {
    pub fn class(&self, class: PhonemeClass) -> Option<&ClassDrop> {
        self.classes.iter().find(|c| c.class == class)
    }
}

fn band_for(class: PhonemeClass, nyquist: f64) -> Option<(f64, f64)> {
    let (lo, hi) = match class {
        PhonemeClass::Vowel => VOWEL_BAND_HZ,
        PhonemeClass::Fricative => FRICATIVE_BAND_HZ,
        PhonemeClass::Stop => STOP_BAND_HZ,
        PhonemeClass::Silence => return None,
    };
    Some((lo, hi.min(nyquist)))
}

pub fn phoneme_class_degradation(
    spec: &UtteranceSpec,
    clean_capture: &SampleBuffer,
    jammed_capture: &SampleBuffer,
) -> Result<DegradationReport> {
    let rate = clean_capture.sample_rate_hz();
    if jammed_capture.sample_rate_hz() != rate {
        return Err(Error::invalid(
            "clean and jammed captures differ in sample rate",
        ));
    }
    for (name, c) in [("clean", clean_capture), ("jammed", jammed_capture)] {
        let mismatch = (c.duration_s() - spec.total_duration_s()).abs();
        if mismatch > FRAME_S {
            return Err(Error::invalid(format!(
                "{name} capture lasts {:.3} s but the utterance lasts {:.3} s",
                c.duration_s(),
                spec.total_duration_s()
            )));
        }
    }

    let nyquist = clean_capture.nyquist_hz();
    let mut filtered: BTreeMap<PhonemeClass, (SampleBuffer, SampleBuffer)> = BTreeMap::new();
    for seg in &spec.segments {
        if let Some(band) = band_for(seg.class, nyquist) {
            if let Entry::Vacant(e) = filtered.entry(seg.class) {
                let c = bandpass(clean_capture, band.0, band.1)?;
                let j = bandpass(jammed_capture, band.0, band.1)?;
                e.insert((c, j));
            }
        }
    }

    let mut segments = Vec::new();
    for (index, (seg, (start, end))) in spec
        .segments
        .iter()
        .zip(spec.segment_bounds(rate))
        .enumerate()
    {
        let Some((c, j)) = filtered.get(&seg.class) else {
            continue;
        };
        let ec = c.slice(start, end).energy();
        let ej = j.slice(start, end).energy();
        let drop_db = match (ec > 0.0, ej > 0.0) {
            (true, true) => 10.0 * (ej / ec).log10(),
            (false, false) => 0.0,
            _ => continue,
        };
        segments.push(SegmentDrop {
            index,
            class: seg.class,
            drop_db,
        });
    }

    let mut by_class: BTreeMap<PhonemeClass, Vec<f64>> = BTreeMap::new();
    for s in &segments {
        by_class.entry(s.class).or_default().push(s.drop_db);
    }
    let classes = by_class
        .into_iter()
        .map(|(class, drops)| ClassDrop {
            class,
            mean_drop_db: drops.iter().sum::<f64>() / drops.len() as f64,
            segments: drops.len(),
        })
        .collect();
    Ok(DegradationReport { segments, classes })
}
