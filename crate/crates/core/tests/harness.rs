use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use nujam::analysis::Verdict;
use nujam::harness::*;
use nujam::Error;

fn default_run() -> &'static GridRun {
    static RUN: OnceLock<GridRun> = OnceLock::new();
    RUN.get_or_init(|| run_grid_with_captures(&ExperimentConfig::default()).unwrap())
}

fn small_config(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.commands.truncate(3);
    cfg.distances_ft = vec![1.0, 6.0];
    cfg.master_seed = seed;
    cfg
}

fn files_with(dir: &Path, ext: &str) -> BTreeSet<String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect()
}

#[test]
fn default_grid_covers_every_cell_once() {
    let run = default_run();
    assert_eq!(run.records.len(), 60);
    assert_eq!(run.captures.len(), 60);
    let cells: BTreeSet<(String, u64, bool)> = run
        .records
        .iter()
        .map(|r| (r.command_id.clone(), r.distance_ft.to_bits(), r.jammer_on))
        .collect();
    assert_eq!(cells.len(), 60);
    for (r, c) in run.records.iter().zip(&run.captures) {
        assert_eq!(
            (&r.command_id, r.distance_ft, r.jammer_on),
            (&c.command_id, c.distance_ft, c.jammer_on)
        );
        assert_eq!(c.capture.sample_rate_hz(), 16_000.0);
        assert_eq!(
            r.seed_used,
            cell_seed(0, &r.command_id, r.distance_ft, r.jammer_on, r.repeat)
        );
    }
    for pair in run.records.chunks(2) {
        assert!(!pair[0].jammer_on && pair[1].jammer_on);
        assert!(pair[0].audible_band_snr_db > pair[1].audible_band_snr_db);
    }
}

#[test]
fn default_grid_separates_clean_from_jammed() {
    let run = default_run();
    let clean = ack_rate(run.records.iter().filter(|r| !r.jammer_on));
    let jammed = ack_rate(run.records.iter().filter(|r| r.jammer_on));
    assert!(clean >= 0.9, "clean {clean}");
    assert!(jammed <= 0.2, "jammed {jammed}");
}

#[test]
fn simulate_is_reproducible_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let run = simulate(&ExperimentConfig::default(), dir.path()).unwrap();
    assert_eq!(&run, default_run());

    let table = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(table.lines().count(), 61);
    assert_eq!(table.lines().next().unwrap(), TABLE_HEADER);
    let rows = parse_table(&table).unwrap();
    assert_eq!(rows.len(), 60);
    assert_eq!(emit_rows(&rows), table);

    let spec = dir.path().join("spectrograms");
    let pgm = files_with(&spec, "pgm");
    assert_eq!(pgm.len(), 60);
    assert_eq!(files_with(&spec, "csv").len(), 60);
    assert_eq!(files_with(&dir.path().join("captures"), "wav").len(), 60);
    for r in &run.records {
        assert!(pgm.contains(&format!(
            "{}.pgm",
            capture_name(&r.command_id, r.distance_ft, r.jammer_on)
        )));
    }

    // rebuilding from the stored table and captures changes no bytes
    let before: Vec<Vec<u8>> = pgm
        .iter()
        .map(|n| fs::read(spec.join(n)).unwrap())
        .collect();
    assert_eq!(regenerate_report(dir.path()).unwrap(), 60);
    assert_eq!(
        fs::read_to_string(dir.path().join("trials.csv")).unwrap(),
        table
    );
    for (n, b) in pgm.iter().zip(&before) {
        assert_eq!(&fs::read(spec.join(n)).unwrap(), b, "{n}");
    }
}

#[test]
fn table_ignores_record_order() {
    let records = default_run().records.clone();
    let text = emit_table(&records);
    let mut reversed = records.clone();
    reversed.reverse();
    assert_eq!(emit_table(&reversed), text);
    let mut interleaved: Vec<_> = records
        .iter()
        .step_by(2)
        .chain(records.iter().skip(1).step_by(2))
        .cloned()
        .collect();
    interleaved.rotate_left(17);
    assert_eq!(emit_table(&interleaved), text);
}

#[test]
fn command_bank_order_never_shows_in_results() {
    let a = small_config(11);
    let mut b = a.clone();
    b.commands.reverse();
    b.distances_ft.reverse();
    assert_eq!(
        emit_table(&run_grid(&a).unwrap()),
        emit_table(&run_grid(&b).unwrap())
    );
}

#[test]
fn master_seed_changes_the_noise() {
    let a = run_grid_with_captures(&small_config(1)).unwrap();
    let b = run_grid_with_captures(&small_config(2)).unwrap();
    assert_eq!(a.records.len(), 12);
    assert_ne!(a.captures[0].capture, b.captures[0].capture);
}

#[test]
fn repeats_multiply_the_grid() {
    let mut cfg = small_config(4);
    cfg.commands.truncate(1);
    cfg.repeats = 3;
    let run = run_grid_with_captures(&cfg).unwrap();
    assert_eq!(run.records.len(), 12);
    let seeds: BTreeSet<u64> = run.records.iter().map(|r| r.seed_used).collect();
    assert_eq!(seeds.len(), 12);
    let dir = tempfile::tempdir().unwrap();
    emit_spectrogram_pairs(dir.path(), &run.captures).unwrap();
    assert_eq!(files_with(dir.path(), "pgm").len(), 4);
}

#[test]
fn cell_seeds_depend_only_on_coordinates() {
    let s = cell_seed(7, "milk", 3.0, true, 0);
    assert_eq!(s, cell_seed(7, "milk", 3.0, true, 0));
    let others = [
        cell_seed(8, "milk", 3.0, true, 0),
        cell_seed(7, "milkk", 3.0, true, 0),
        cell_seed(7, "milk", 3.5, true, 0),
        cell_seed(7, "milk", 3.0, false, 0),
        cell_seed(7, "milk", 3.0, true, 1),
    ];
    assert!(others.iter().all(|&o| o != s));
}

#[test]
fn manual_trigger_drops_the_wake_phrase() {
    let bank = default_bank();
    let with = bank[0].utterance(false);
    let without = bank[0].utterance(true);
    assert!(with.total_duration_s() > without.total_duration_s());
    let mut cfg = small_config(5);
    cfg.manual_trigger = true;
    let run = run_grid(&cfg).unwrap();
    assert!(ack_rate(run.iter().filter(|r| !r.jammer_on)) > 0.0);
}

#[test]
fn frozen_thresholds_match_a_fresh_calibration() {
    let t = calibrate_asr(&ExperimentConfig::default(), 0.9, 0.1).unwrap();
    assert!(t.t_ack >= DEFAULT_THRESHOLDS.t_ack && t.t_ack - DEFAULT_THRESHOLDS.t_ack < 0.05);
    assert!(
        t.t_margin >= DEFAULT_THRESHOLDS.t_margin
            && t.t_margin - DEFAULT_THRESHOLDS.t_margin < 0.05
    );
}

#[test]
fn bank_has_both_profiles_and_fricatives() {
    let bank = default_bank();
    assert_eq!(bank.len(), 10);
    let heavy = bank
        .iter()
        .filter(|c| c.profile == Profile::FricativeHeavy)
        .count();
    assert!(heavy >= 3 && bank.len() - heavy >= 3);
    for c in &bank {
        let share = fricative_share(&c.utterance(true));
        match c.profile {
            Profile::FricativeHeavy => assert!(share >= 0.3, "{}: {share}", c.id),
            Profile::FricativePoor => assert!(share <= 0.15, "{}: {share}", c.id),
        }
    }
}

#[test]
fn config_text_parses_and_validates() {
    let cfg = parse_config(
        "# demo\ndistances_ft = 2, 4\nmic.a2 = 3\njammer.color = pink\nseeds.master = 9\nrepeats = 2\n\
         command.x.text = open the door\ncommand.x.profile = fricative-poor\n",
    )
    .unwrap();
    assert_eq!(cfg.distances_ft, vec![2.0, 4.0]);
    assert_eq!(cfg.mic.a2, 3.0);
    assert_eq!(cfg.master_seed, 9);
    assert_eq!(cfg.repeats, 2);
    assert_eq!(cfg.commands.len(), 1);
    assert_eq!(KEYS.len(), 26);

    for (text, line) in [
        ("mic.a2 = 1\nmic.a3 = 2\n", 2),
        ("\n\ndistances_ft = 1, x\n", 3),
        ("jammer.carrier_hz = 45000\n", 1),
        ("command.y.text = hi\n", 1),
        ("repeats = 0\n", 1),
        ("trial.manual_trigger = maybe\n", 1),
    ] {
        match parse_config(text) {
            Err(Error::Config { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}

#[test]
fn failing_cells_name_their_coordinates() {
    let mut cfg = small_config(6);
    cfg.commands.truncate(1);
    cfg.distances_ft = vec![1.0];
    let rig = Rig::new(&cfg).unwrap();
    // a command index past the bank is a caller bug, but a bad capture is not
    let mut broken = cfg.clone();
    broken.mic.clip_level = -1.0;
    assert!(Rig::new(&broken).is_err());
    let (rec, cap) = rig.run_cell(0, 1.0, true, 0).unwrap();
    assert_eq!(rec.command_id, cfg.commands[0].id);
    assert!(matches!(
        rec.outcome.verdict,
        Verdict::Ack | Verdict::Misheard | Verdict::NoResponse
    ));
    assert_eq!(cap.sample_rate_hz(), 16_000.0);
    let err = Error::Trial {
        command: "milk".into(),
        distance_ft: 3.0,
        jammer: "on",
        source: Box::new(Error::InvalidInput("x".into())),
    };
    let text = err.to_string();
    assert!(
        text.contains("milk") && text.contains('3') && text.contains("on"),
        "{text}"
    );
}
