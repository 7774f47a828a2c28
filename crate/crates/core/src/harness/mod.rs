//! Experiment runner: configuration, the command × distance × jammer sweep,
//! and the files it leaves behind.

mod commands;
mod config;
mod grid;
mod report;

pub use commands::{
    caricature, default_bank, fricative_share, Command, Profile, FUNDAMENTAL_HZ, WAKE_PHRASE,
};
pub use config::{
    parse_config, ExperimentConfig, JammerConfig, SpeechConfig, DEFAULT_THRESHOLDS, KEYS,
};
pub use grid::{
    ack_rate, calibrate_asr, cell_seed, run_grid, run_grid_with_captures, CellCapture, GridRun,
    Rig, TrialRecord, AUDIBLE_BAND_HZ,
};
pub use report::{
    capture_name, emit_rows, emit_spectrogram_pairs, emit_table, parse_table, regenerate_report,
    simulate, spectrogram_of, write_captures, TableRow, SPECTROGRAM_DB_RANGE, SPECTROGRAM_HOP,
    SPECTROGRAM_WINDOW, TABLE_HEADER,
};

/// 64-bit FNV-1a.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// SplitMix64 finalizer; spreads nearby inputs across the whole range.
pub(crate) fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Distances print without trailing zeros: `3`, `1.5`.
pub(crate) fn format_distance(ft: f64) -> String {
    format!("{ft}")
}
