//! Simulation of near-ultrasonic speech jamming against MEMS microphones.
//!
//! The chain modelled here runs end to end:
//!
//! 1. [`signals`] generates masking noise, test tones and caricatured speech.
//! 2. [`modulation`] shifts baseband noise into the 16-22 kHz band with a
//!    single upper sideband (Hartley) modulator.
//! 3. [`acoustics`] places talker and jammer in a free field and calibrates
//!    their sound pressure levels at the microphone.
//! 4. [`mic_model`] captures the pressure through a square-law transducer,
//!    which folds ultrasonic energy back into the audible band.
//! 5. [`analysis`] measures the damage: spectrograms, band SNR, and an
//!    MFCC/DTW keyword spotter standing in for a voice assistant's ASR.
//! 6. [`harness`] sweeps commands, distances and jammer state and writes
//!    the trial table and spectrogram pairs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acoustics;
pub mod analysis;
mod error;
pub mod harness;
pub mod mic_model;
pub mod modulation;
pub mod signals;
mod spectral;

pub use error::{Error, Result};
pub use signals::{SampleBuffer, Unit};
