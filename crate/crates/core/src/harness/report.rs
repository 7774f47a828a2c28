use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::format_distance;
use super::grid::{run_grid_with_captures, CellCapture, GridRun, TrialRecord};
use crate::analysis::{
    render_spectrogram, stft, write_grid_csv, write_pgm, SpectrogramMatrix, Verdict,
};
use crate::error::{Error, Result};
use crate::signals::{wav, SampleBuffer};

pub const TABLE_HEADER: &str = "command,distance_ft,jammer,outcome,audible_snr_db,margin";
pub const SPECTROGRAM_WINDOW: usize = 1024;
pub const SPECTROGRAM_HOP: usize = 256;
pub const SPECTROGRAM_DB_RANGE: (f64, f64) = (-100.0, -20.0);

const TABLE_FILE: &str = "trials.csv";
const CAPTURE_DIR: &str = "captures";
const SPECTROGRAM_DIR: &str = "spectrograms";

/// One parsed line of a trial table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub command: String,
    pub distance_ft: f64,
    pub jammer_on: bool,
    pub verdict: Verdict,
    pub audible_snr_db: f64,
    pub margin: f64,
}

impl From<&TrialRecord> for TableRow {
    fn from(r: &TrialRecord) -> Self {
        Self {
            command: r.command_id.clone(),
            distance_ft: r.distance_ft,
            jammer_on: r.jammer_on,
            verdict: r.outcome.verdict,
            audible_snr_db: r.audible_band_snr_db,
            margin: r.outcome.margin,
        }
    }
}

fn fmt_num(x: f64, decimals: usize) -> String {
    if x.is_finite() {
        format!("{x:.decimals$}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn parse_num(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

fn row_line(r: &TableRow) -> String {
    format!(
        "{},{},{},{},{},{}",
        r.command,
        format_distance(r.distance_ft),
        if r.jammer_on { "on" } else { "off" },
        r.verdict.table_code(),
        fmt_num(r.audible_snr_db, 3),
        fmt_num(r.margin, 4)
    )
}

/// CSV of rows sorted by (command, distance, jammer); remaining ties are
/// broken on the rendered line so input order never shows through.
pub fn emit_rows(rows: &[TableRow]) -> String {
    let mut keyed: Vec<(&TableRow, String)> = rows.iter().map(|r| (r, row_line(r))).collect();
    keyed.sort_by(|(a, la), (b, lb)| {
        a.command
            .cmp(&b.command)
            .then(a.distance_ft.total_cmp(&b.distance_ft))
            .then(a.jammer_on.cmp(&b.jammer_on))
            .then(la.cmp(lb))
    });
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for (_, line) in keyed {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn emit_table(records: &[TrialRecord]) -> String {
    let rows: Vec<TableRow> = records.iter().map(TableRow::from).collect();
    emit_rows(&rows)
}

pub fn parse_table(text: &str) -> Result<Vec<TableRow>> {
    let mut lines = text.lines().enumerate();
    let bad = |line: usize, message: String| Error::Format {
        path: PathBuf::from(TABLE_FILE),
        message: format!("line {line}: {message}"),
    };
    match lines.next() {
        Some((_, h)) if h.trim() == TABLE_HEADER => {}
        _ => return Err(bad(1, format!("expected header '{TABLE_HEADER}'"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad(n, format!("expected 6 fields, found {}", f.len())));
        }
        let jammer_on = match f[2] {
            "on" => true,
            "off" => false,
            other => return Err(bad(n, format!("jammer must be on or off, got '{other}'"))),
        };
        rows.push(TableRow {
            command: f[0].to_string(),
            distance_ft: f[1]
                .parse()
                .map_err(|_| bad(n, format!("bad distance '{}'", f[1])))?,
            jammer_on,
            verdict: Verdict::from_table_code(f[3])
                .ok_or_else(|| bad(n, format!("bad outcome '{}'", f[3])))?,
            audible_snr_db: parse_num(f[4]).ok_or_else(|| bad(n, format!("bad snr '{}'", f[4])))?,
            margin: parse_num(f[5]).ok_or_else(|| bad(n, format!("bad margin '{}'", f[5])))?,
        });
    }
    Ok(rows)
}

/// `<cmd>_<dist>ft_clean` or `<cmd>_<dist>ft_jammed`.
pub fn capture_name(command: &str, distance_ft: f64, jammer_on: bool) -> String {
    format!(
        "{command}_{}ft_{}",
        format_distance(distance_ft),
        if jammer_on { "jammed" } else { "clean" }
    )
}

pub fn spectrogram_of(capture: &SampleBuffer) -> Result<SpectrogramMatrix> {
    stft(capture, SPECTROGRAM_WINDOW, SPECTROGRAM_HOP)
}

fn write_spectrogram(dir: &Path, name: &str, capture: &SampleBuffer) -> Result<[PathBuf; 2]> {
    let (image, csv) = render_spectrogram(&spectrogram_of(capture)?, SPECTROGRAM_DB_RANGE)?;
    let pgm = dir.join(format!("{name}.pgm"));
    let grid = dir.join(format!("{name}.csv"));
    write_pgm(&pgm, &image)?;
    write_grid_csv(&grid, &csv)?;
    Ok([pgm, grid])
}

/// PGM image and CSV grid for the first repeat of every cell, clean and
/// jammed side by side by name.
pub fn emit_spectrogram_pairs(dir: &Path, captures: &[CellCapture]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for c in captures.iter().filter(|c| c.repeat == 0) {
        written.extend(write_spectrogram(
            dir,
            &capture_name(&c.command_id, c.distance_ft, c.jammer_on),
            &c.capture,
        )?);
    }
    Ok(written)
}

pub fn write_captures(dir: &Path, captures: &[CellCapture]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for c in captures.iter().filter(|c| c.repeat == 0) {
        let name = capture_name(&c.command_id, c.distance_ft, c.jammer_on);
        wav::write_wav(&dir.join(format!("{name}.wav")), &c.capture)?;
    }
    Ok(())
}

/// Run the grid and write `trials.csv`, `captures/*.wav` and
/// `spectrograms/*.{pgm,csv}` under `out_dir`.
pub fn simulate(config: &ExperimentConfig, out_dir: &Path) -> Result<GridRun> {
    let run = run_grid_with_captures(config)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join(TABLE_FILE), emit_table(&run.records))?;
    // images are drawn from the stored precision so `regenerate_report` matches
    let stored = run
        .captures
        .iter()
        .map(|c| {
            let s = c
                .capture
                .samples()
                .iter()
                .map(|&v| v as f32 as f64)
                .collect();
            Ok(CellCapture {
                capture: SampleBuffer::new(c.capture.sample_rate_hz(), s, c.capture.unit())?,
                ..c.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_captures(&out_dir.join(CAPTURE_DIR), &stored)?;
    emit_spectrogram_pairs(&out_dir.join(SPECTROGRAM_DIR), &stored)?;
    Ok(run)
}

/// Rebuild the table and spectrograms of a previous `simulate` output from
/// its stored table and captures. Returns the number of captures rendered.
pub fn regenerate_report(out_dir: &Path) -> Result<usize> {
    let table_path = out_dir.join(TABLE_FILE);
    let rows = parse_table(&fs::read_to_string(&table_path)?).map_err(|e| match e {
        Error::Format { message, .. } => Error::Format {
            path: table_path.clone(),
            message,
        },
        other => other,
    })?;
    fs::write(&table_path, emit_rows(&rows))?;

    let spec_dir = out_dir.join(SPECTROGRAM_DIR);
    fs::create_dir_all(&spec_dir)?;
    let mut wavs: Vec<PathBuf> = fs::read_dir(out_dir.join(CAPTURE_DIR))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "wav"))
        .collect();
    wavs.sort();
    for p in &wavs {
        let name = p
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("capture")
            .to_string();
        write_spectrogram(&spec_dir, &name, &wav::read_wav(p)?)?;
    }
    Ok(wavs.len())
}
