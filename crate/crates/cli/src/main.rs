use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nujam::analysis::{band_snr, format_snr, phoneme_class_degradation};
use nujam::harness::{
    ack_rate, calibrate_asr, default_bank, parse_config, regenerate_report, simulate,
    ExperimentConfig, Profile, AUDIBLE_BAND_HZ,
};
use nujam::modulation::{susbam_modulate, SusbamParams};
use nujam::signals::{gen_noise, synth_utterance, wav, NoiseColor, NoiseSpec, SampleBuffer};
use nujam::{Error, Result};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "nujam",
    version,
    about = "Near-ultrasonic speech jamming simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a noise or spoken-command WAV.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Write a modulated jammer WAV.
    Jam(JamArgs),
    /// Run the command x distance x jammer grid and write its report.
    Simulate(SimulateArgs),
    /// Compare a clean and a jammed capture.
    Analyze(AnalyzeArgs),
    /// Rebuild the table and spectrograms of a simulate output directory.
    Report(ReportArgs),
    /// Derive spotter thresholds from the clean half of the grid.
    Calibrate(CalibrateArgs),
}

#[derive(Subcommand)]
enum GenCmd {
    /// Seeded noise at RMS 0.1 full scale.
    Noise(NoiseArgs),
    /// A command from the built-in bank, synthesized at 96 kHz.
    Utterance(UtteranceArgs),
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long, default_value = "white")]
    color: String,
    #[arg(long, default_value_t = 5.0)]
    duration_s: f64,
    #[arg(long, default_value_t = 48_000.0)]
    rate_hz: f64,
    /// `LOW,HIGH` in Hz; defaults to the full band.
    #[arg(long)]
    band_hz: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct UtteranceArgs {
    /// Command id; `list` prints the bank.
    #[arg(long)]
    command: String,
    /// Leave out the wake phrase.
    #[arg(long)]
    manual_trigger: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct JamArgs {
    #[arg(long, default_value = "white")]
    color: String,
    #[arg(long, default_value_t = 16_000.0)]
    carrier_hz: f64,
    /// Baseband band before modulation: `HIGH` or `LOW,HIGH` in Hz.
    #[arg(long, default_value = "6000")]
    band_hz: String,
    #[arg(long, default_value_t = 5.0)]
    duration_s: f64,
    #[arg(long, default_value_t = 96_000.0)]
    rate_hz: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Configuration file; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `seeds.master`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output_dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    clean: PathBuf,
    #[arg(long)]
    jammed: PathBuf,
    /// `LOW,HIGH` in Hz for the SNR.
    #[arg(long, default_value = "300,6000")]
    band: String,
    /// Bank command the captures hold; enables the per-class degradation report.
    #[arg(long)]
    command: Option<String>,
    #[arg(long)]
    manual_trigger: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    dir: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.9)]
    target: f64,
    #[arg(long, default_value_t = 0.1)]
    headroom: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_RUNTIME
            })
        }
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Gen(GenCmd::Noise(a)) => gen_noise_cmd(a),
        Cmd::Gen(GenCmd::Utterance(a)) => gen_utterance_cmd(a),
        Cmd::Jam(a) => jam(a),
        Cmd::Simulate(a) => simulate_cmd(a),
        Cmd::Analyze(a) => analyze(a),
        Cmd::Report(a) => {
            let n = regenerate_report(&a.dir)?;
            println!("rendered {n} spectrograms in {}", a.dir.display());
            Ok(())
        }
        Cmd::Calibrate(a) => {
            let t = calibrate_asr(&load_config(a.config.as_deref())?, a.target, a.headroom)?;
            println!("asr.t_ack = {:.6}", t.t_ack);
            println!("asr.t_margin = {:.6}", t.t_margin);
            Ok(())
        }
    }
}

fn invalid(message: String) -> Error {
    Error::InvalidInput(message)
}

fn parse_band(text: &str, default_low: Option<f64>) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| invalid(format!("bad frequency '{s}' in band '{text}'")))
    };
    match (parts.as_slice(), default_low) {
        ([lo, hi], _) => Ok((num(lo)?, num(hi)?)),
        ([hi], Some(lo)) => Ok((lo, num(hi)?)),
        _ => Err(invalid(format!("band must be LOW,HIGH, got '{text}'"))),
    }
}

fn write(out: &Path, buffer: &SampleBuffer) -> Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    wav::write_wav(out, buffer)?;
    println!(
        "wrote {} ({:.3} s at {} Hz)",
        out.display(),
        buffer.duration_s(),
        buffer.sample_rate_hz()
    );
    Ok(())
}

fn gen_noise_cmd(a: NoiseArgs) -> Result<()> {
    let mut spec = NoiseSpec::new(
        a.color.parse::<NoiseColor>()?,
        a.duration_s,
        a.rate_hz,
        a.seed,
    );
    if let Some(band) = a.band_hz {
        let (lo, hi) = parse_band(&band, None)?;
        spec = spec.with_band(lo, hi);
    }
    write(&a.out, &gen_noise(&spec)?)
}

fn gen_utterance_cmd(a: UtteranceArgs) -> Result<()> {
    let bank = default_bank();
    if a.command == "list" {
        for c in &bank {
            println!("{:<14} {:<16} {}", c.id, c.profile, c.text);
        }
        return Ok(());
    }
    let cmd = bank
        .iter()
        .find(|c| c.id == a.command)
        .ok_or_else(|| invalid(format!("unknown command '{}'", a.command)))?;
    let out = a.out.ok_or_else(|| invalid("--out is required".into()))?;
    write(&out, &synth_utterance(&cmd.utterance(a.manual_trigger))?)
}

fn jam(a: JamArgs) -> Result<()> {
    let (lo, hi) = parse_band(&a.band_hz, Some(0.0))?;
    let params = SusbamParams {
        carrier_hz: a.carrier_hz,
        baseband_limit_hz: hi,
        output_rate_hz: a.rate_hz,
    };
    params.validate()?;
    let spec = NoiseSpec::new(
        a.color.parse::<NoiseColor>()?,
        a.duration_s,
        a.rate_hz,
        a.seed,
    )
    .with_band(lo, hi);
    let jammer = susbam_modulate(&gen_noise(&spec)?, &params)?;
    write(&a.out, &jammer)
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => parse_config(&fs::read_to_string(p)?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn simulate_cmd(a: SimulateArgs) -> Result<()> {
    let mut config = load_config(a.config.as_deref())?;
    if let Some(seed) = a.seed {
        config.master_seed = seed;
    }
    if let Some(dir) = a.out_dir {
        config.output_dir = dir;
    }
    let out = config.output_dir.clone();
    let run = simulate(&config, &out)?;
    let rate = |on: bool| ack_rate(run.records.iter().filter(|r| r.jammer_on == on));
    println!("{} trials written to {}", run.records.len(), out.display());
    println!(
        "ack rate: clean {:.3}, jammed {:.3}",
        rate(false),
        rate(true)
    );
    for p in [Profile::FricativeHeavy, Profile::FricativePoor] {
        let ids: Vec<&str> = config
            .commands
            .iter()
            .filter(|c| c.profile == p)
            .map(|c| c.id.as_str())
            .collect();
        let of = |on: bool| {
            ack_rate(
                run.records
                    .iter()
                    .filter(|r| r.jammer_on == on && ids.contains(&r.command_id.as_str())),
            )
        };
        println!("  {p}: clean {:.3}, jammed {:.3}", of(false), of(true));
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let clean = wav::read_wav(&a.clean)?;
    let jammed = wav::read_wav(&a.jammed)?;
    if clean.sample_rate_hz() != jammed.sample_rate_hz() {
        return Err(invalid(format!(
            "captures differ in rate: {} vs {} Hz",
            clean.sample_rate_hz(),
            jammed.sample_rate_hz()
        )));
    }
    let band = parse_band(&a.band, None)?;
    let n = clean.len().min(jammed.len());
    let residual: Vec<f64> = jammed.samples()[..n]
        .iter()
        .zip(&clean.samples()[..n])
        .map(|(j, c)| j - c)
        .collect();
    let residual = SampleBuffer::new(clean.sample_rate_hz(), residual, clean.unit())?;
    let snr = band_snr(&clean.slice(0, n), &residual, band)?;
    println!(
        "band {:.0}-{:.0} Hz snr_db={}",
        band.0,
        band.1,
        format_snr(snr)
    );
    if band != AUDIBLE_BAND_HZ {
        let audible = band_snr(&clean.slice(0, n), &residual, AUDIBLE_BAND_HZ)?;
        println!("audible band snr_db={}", format_snr(audible));
    }

    if let Some(id) = a.command {
        let bank = default_bank();
        let cmd = bank
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| invalid(format!("unknown command '{id}'")))?;
        let report = phoneme_class_degradation(&cmd.utterance(a.manual_trigger), &clean, &jammed)?;
        println!("class,segments,mean_drop_db");
        for c in &report.classes {
            println!("{},{},{:.3}", c.class.name(), c.segments, c.mean_drop_db);
        }
    }
    Ok(())
}
