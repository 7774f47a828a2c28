//! Synthetic command bank.
//!
//! Each command's English text is turned into a phoneme-class caricature by a
//! crude letter-to-sound pass. Only the class and rough spectral centre of
//! each segment matter downstream, so the mapping is deliberately simple.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::signals::{PhonemeClass, Segment, UtteranceSpec, SYNTH_RATE_HZ};

pub const WAKE_PHRASE: &str = "alexa";
pub const FUNDAMENTAL_HZ: f64 = 120.0;

const LEAD_SILENCE_S: f64 = 0.2;
const WAKE_GAP_S: f64 = 0.15;
const WORD_GAP_S: f64 = 0.05;
const VOWEL_S: f64 = 0.11;
const SONORANT_S: f64 = 0.06;
const FRICATIVE_S: f64 = 0.11;
const BREATH_S: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Profile {
    FricativeHeavy,
    FricativePoor,
}

impl Profile {
    pub fn label(self) -> &'static str {
        match self {
            Profile::FricativeHeavy => "fricative-heavy",
            Profile::FricativePoor => "fricative-poor",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.label())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fricative-heavy" => Ok(Profile::FricativeHeavy),
            "fricative-poor" => Ok(Profile::FricativePoor),
            other => Err(Error::invalid(format!(
                "unknown profile '{other}' (expected fricative-heavy or fricative-poor)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub id: String,
    pub text: String,
    pub profile: Profile,
}

impl Command {
    pub fn new(id: impl Into<String>, text: impl Into<String>, profile: Profile) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            profile,
        }
    }

    /// Spoken form of the command, preceded by the wake phrase unless the
    /// device was triggered manually.
    pub fn utterance(&self, manual_trigger: bool) -> UtteranceSpec {
        let mut segments = vec![Segment::silence(LEAD_SILENCE_S)];
        if !manual_trigger {
            segments.extend(caricature(WAKE_PHRASE));
            segments.push(Segment::silence(WAKE_GAP_S));
        }
        segments.extend(caricature(&self.text));
        segments.push(Segment::silence(LEAD_SILENCE_S));
        UtteranceSpec {
            segments,
            fundamental_hz: FUNDAMENTAL_HZ,
            seed: text_seed(&self.id),
            sample_rate_hz: SYNTH_RATE_HZ,
        }
    }
}

/// Share of voiced (non-silent) time spent in fricatives.
pub fn fricative_share(spec: &UtteranceSpec) -> f64 {
    let mut fric = 0.0;
    let mut voiced = 0.0;
    for s in &spec.segments {
        match s.class {
            PhonemeClass::Silence => {}
            PhonemeClass::Fricative => {
                fric += s.duration_s;
                voiced += s.duration_s;
            }
            _ => voiced += s.duration_s,
        }
    }
    if voiced == 0.0 {
        0.0
    } else {
        fric / voiced
    }
}

/// Ten everyday voice-assistant requests.
pub fn default_bank() -> Vec<Command> {
    use Profile::*;
    vec![
        Command::new(
            "thermostat",
            "Set the thermostat to fifty-five degrees",
            FricativeHeavy,
        ),
        Command::new(
            "forecast",
            "What's the forecast for this Thursday",
            FricativeHeavy,
        ),
        Command::new("flutes", "Find songs that feature flutes", FricativeHeavy),
        Command::new("world_cup", "Who won the World Cup in 2018", FricativePoor),
        Command::new(
            "shawshank",
            "Search for the film The Shawshank Redemption",
            FricativeHeavy,
        ),
        Command::new("audiobook", "Play an audiobook on Audible", FricativePoor),
        Command::new(
            "sift_files",
            "Show me the fastest way to sift through these files",
            FricativeHeavy,
        ),
        Command::new("milk", "Remind me to buy milk tomorrow", FricativePoor),
        Command::new("bedroom_light", "Turn on bedroom light", FricativePoor),
        Command::new("adele", "Play music by Adele", FricativePoor),
    ]
}

fn text_seed(id: &str) -> u64 {
    super::fnv1a(id.as_bytes())
}

fn digit_word(d: char) -> &'static str {
    match d {
        '0' => "zero",
        '1' => "one",
        '2' => "two",
        '3' => "three",
        '4' => "four",
        '5' => "five",
        '6' => "six",
        '7' => "seven",
        '8' => "eight",
        _ => "nine",
    }
}

fn normalize(text: &str) -> String {
    let mut out = String::new();
    for c in text.chars() {
        if c.is_ascii_digit() {
            out.push(' ');
            out.push_str(digit_word(c));
            out.push(' ');
        } else if c.is_ascii_alphabetic() {
            out.push(c.to_ascii_lowercase());
        } else if c.is_whitespace() || c == '-' {
            out.push(' ');
        }
    }
    out
}

fn vowel(c: char) -> Option<f64> {
    Some(match c {
        'a' => 800.0,
        'e' => 1800.0,
        'i' => 2400.0,
        'o' => 550.0,
        'u' => 350.0,
        'y' => 2000.0,
        _ => return None,
    })
}

fn sonorant(c: char) -> Option<f64> {
    Some(match c {
        'm' => 250.0,
        'n' => 280.0,
        'l' => 420.0,
        'r' => 1200.0,
        'w' => 320.0,
        _ => return None,
    })
}

fn fricative(c: char) -> Option<f64> {
    Some(match c {
        's' => 6500.0,
        'z' => 6000.0,
        'f' => 4200.0,
        'v' => 3800.0,
        _ => return None,
    })
}

/// Letter-to-segment caricature of English text.
pub fn caricature(text: &str) -> Vec<Segment> {
    let mut out = Vec::new();
    for (w, word) in normalize(text).split_whitespace().enumerate() {
        if w > 0 {
            out.push(Segment::silence(WORD_GAP_S));
        }
        let chars: Vec<char> = word.chars().collect();
        let mut i = 0;
        let mut prev = '\0';
        while i < chars.len() {
            let c = chars[i];
            let next = chars.get(i + 1).copied().unwrap_or('\0');
            if c == prev {
                i += 1;
                continue;
            }
            prev = c;
            let digraph = match (c, next) {
                ('t', 'h') => Some(vec![Segment::fricative(5200.0, FRICATIVE_S)]),
                ('s', 'h') => Some(vec![Segment::fricative(3600.0, FRICATIVE_S)]),
                ('c', 'h') => Some(vec![
                    Segment::stop(),
                    Segment::fricative(3600.0, FRICATIVE_S),
                ]),
                ('p', 'h') => Some(vec![Segment::fricative(4200.0, FRICATIVE_S)]),
                ('c', 'k') => Some(vec![Segment::stop()]),
                ('n', 'g') => Some(vec![Segment::vowel(300.0, SONORANT_S)]),
                _ => None,
            };
            if let Some(segs) = digraph {
                out.extend(segs);
                prev = next;
                i += 2;
                continue;
            }
            if let Some(f) = vowel(c) {
                out.push(Segment::vowel(f, VOWEL_S));
            } else if let Some(f) = sonorant(c) {
                out.push(Segment::vowel(f, SONORANT_S));
            } else if let Some(f) = fricative(c) {
                out.push(Segment::fricative(f, FRICATIVE_S));
            } else {
                match c {
                    'h' => out.push(Segment::fricative(3200.0, BREATH_S)),
                    'c' if matches!(next, 'e' | 'i' | 'y') => {
                        out.push(Segment::fricative(6500.0, FRICATIVE_S))
                    }
                    'x' => out.extend([Segment::stop(), Segment::fricative(6500.0, FRICATIVE_S)]),
                    'j' => out.extend([Segment::stop(), Segment::fricative(3600.0, SONORANT_S)]),
                    _ => out.push(Segment::stop()),
                }
            }
            i += 1;
        }
    }
    out
}
