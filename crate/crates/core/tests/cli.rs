use std::fs;
use std::path::Path;

use sram_ser::cli::cli_main;
use sram_ser::io::{ingest_measurements_csv, REFERENCE_MEASUREMENTS_CSV};
use sram_ser::stats::{calibrate_parts, CalibrationOptions, FitArtifact, WeightMode};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sram-ser").chain(args.iter().copied());
    let code = cli_main(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let r = run(&[]);
    assert_ne!(r.code, 0);
    assert!((r.out + &r.err).contains("Usage"));
}

#[test]
fn unknown_subcommand_and_bad_flag_fail() {
    let r = run(&["frobnicate"]);
    assert_ne!(r.code, 0);
    assert!(r.err.contains("Usage"));

    let r = run(&["calibrate", "--no-such-flag"]);
    assert_ne!(r.code, 0);
    assert!(r.err.contains("Usage"));

    let r = run(&["sweep", "--kind", "sideways"]);
    assert_ne!(r.code, 0);
}

#[test]
fn help_succeeds() {
    let r = run(&["--help"]);
    assert_eq!(r.code, 0);
    for cmd in ["simulate", "sweep", "ser-test", "calibrate", "predict", "paper-repro", "report"] {
        assert!(r.out.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn calibrate_matches_library_fit() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("m.csv");
    fs::write(&input, REFERENCE_MEASUREMENTS_CSV).unwrap();
    let fit_path = dir.path().join("fit.json");
    let r = run(&["calibrate", "--input", p(&input), "--out", p(&fit_path)]);
    assert_eq!(r.code, 0, "{}", r.err);

    let saved = FitArtifact::from_json(&fs::read_to_string(&fit_path).unwrap()).unwrap();
    let lib = calibrate_parts(&ingest_measurements_csv(&input).unwrap(), &CalibrationOptions::default()).unwrap();
    assert_eq!(saved, FitArtifact::new(lib, WeightMode::Combined));

    let r = run(&["calibrate", "--input", p(&input), "--weight-mode", "stat-only", "--out", p(&fit_path)]);
    assert_eq!(r.code, 0);
    let saved = FitArtifact::from_json(&fs::read_to_string(&fit_path).unwrap()).unwrap();
    assert_eq!(saved.weight_mode, WeightMode::StatOnly);
}

#[test]
fn malformed_input_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "part_id,cell_type,quantity,value\nP1,SS,ser_uSEU_per_bit_s,abc\n").unwrap();
    let r = run(&["calibrate", "--input", p(&input)]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("line 2"), "{}", r.err);

    let r = run(&["calibrate", "--input", p(&dir.path().join("missing.csv"))]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("missing.csv"));
}

#[test]
fn predict_from_saved_fit() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("m.csv");
    fs::write(&input, REFERENCE_MEASUREMENTS_CSV).unwrap();
    let fit_path = dir.path().join("fit.json");
    assert_eq!(run(&["calibrate", "--input", p(&input), "--out", p(&fit_path)]).code, 0);

    let r = run(&["predict", "--fit", p(&fit_path), "--v-wlvm", "0.409", "--v-wlvm", "0.01"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let lines: Vec<&str> = r.out.lines().collect();
    assert_eq!(lines[0], "part_id,cell_type,v_wlvm_V,ser_pred,sigma,below_floor");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with(",false"));
    assert!(lines[2].ends_with(",true"));

    let out = dir.path().join("pred.csv");
    let r = run(&["predict", "--fit", p(&fit_path), "--input", p(&input), "--out", p(&out)]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 26);

    let r = run(&["predict", "--fit", p(&fit_path)]);
    assert_eq!(r.code, 1);
}

#[test]
fn repro_exit_status_follows_checks() {
    let r = run(&["paper-repro"]);
    assert!(r.out.contains("[PASS] m"));
    assert!(r.out.contains("[FAIL] chi2_red"));
    assert_eq!(r.code, 1);

    let r = run(&["paper-repro", "--weight-mode", "linear"]);
    assert!(!r.out.contains("[FAIL]"));
    assert_eq!(r.code, 0);
}

#[test]
fn report_writes_bundle_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(&["report", "--out", p(a.path())]).code, 0);
    assert_eq!(run(&["report", "--out", p(b.path())]).code, 0);
    for f in ["fit.json", "predictions.csv", "scatter_fit.tsv"] {
        let x = fs::read(a.path().join(f)).unwrap();
        assert_eq!(x, fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn simulate_then_calibrate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let r = run(&["simulate", "--seed", "7", "--parts", "2", "--duration", "86400", "--out", p(&out)]);
    assert_eq!(r.code, 0, "{}", r.err);
    for f in ["measurements.csv", "truth.csv", "fit.json", "predictions.csv", "scatter_fit.tsv", "cumulative_seu.tsv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let fit_json = fs::read_to_string(out.join("fit.json")).unwrap();
    let fit_path = dir.path().join("refit.json");
    let r = run(&["calibrate", "--input", p(&out.join("measurements.csv")), "--out", p(&fit_path)]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(
        FitArtifact::from_json(&fs::read_to_string(fit_path).unwrap()).unwrap(),
        FitArtifact::from_json(&fit_json).unwrap()
    );
}

#[test]
fn single_block_commands() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("sweep.csv");
    let r = run(&["sweep", "--cell-type", "ls", "--log", p(&log)]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("word-line voltage margin"));
    assert!(fs::read_to_string(&log).unwrap().starts_with("step,v_mV,new_failures,cumulative_failures"));

    let r = run(&["sweep", "--kind", "hold", "--cell-type", "SS"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("vdd_hold"));

    let ser_log = dir.path().join("ser.csv");
    let events = dir.path().join("events.csv");
    let r = run(&[
        "ser-test", "--cell-type", "SM", "--rate", "1.0", "--duration", "36000", "--log", p(&ser_log), "--events",
        p(&events),
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(fs::read_to_string(&ser_log).unwrap().lines().count(), 21);
    assert!(fs::read_to_string(&events).unwrap().starts_with("time_s,cell_index"));

    let r = run(&["sweep", "--cell-type", "XL"]);
    assert_eq!(r.code, 1);
}
