//! End-to-end tests spawning the real binary.

use std::io::Write;
use std::process::{Command, Output, Stdio};

const PRESETS: [&str; 4] = ["alpha_small", "alpha_one", "alpha_large", "single_fig1"];

fn memsyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memsyn"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn memsyn_stdin(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_memsyn"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn preset_lists_all_names() {
    let out = memsyn(&["preset"]);
    assert!(out.status.success());
    let listing = stdout_str(&out);
    let names: Vec<&str> = listing.lines().map(str::trim).collect();
    assert_eq!(names, PRESETS);
}

#[test]
fn preset_texts_spell_out_device_values() {
    let out = memsyn(&["preset", "alpha_small"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.contains("r_off = 1M"), "missing r_off in:\n{text}");
    assert!(text.contains("topology = series"));
}

#[test]
fn unknown_preset_fails_cleanly() {
    for args in [&["preset", "alpha_huge"][..], &["verify", "alpha_huge"][..]] {
        let out = memsyn(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(stderr_str(&out).contains("alpha_huge"));
    }
}

/// preset -> run -> analyze holds together for every preset, and analyze
/// lands on the expected regime.
#[test]
fn pipeline_closes_over_every_preset() {
    let expectations = [
        ("alpha_small", "regime: Decelerating"),
        ("alpha_one", "regime: Linear"),
        ("alpha_large", "regime: Accelerating"),
        ("single_fig1", "regime: Accelerating"),
    ];
    for (name, want) in expectations {
        let text = stdout_str(&memsyn(&["preset", name]));
        let run = memsyn_stdin(&["run", "-"], text.as_bytes());
        assert!(run.status.success(), "run {name}: {}", stderr_str(&run));
        let analyze = memsyn_stdin(&["analyze", "-"], &run.stdout);
        assert!(
            analyze.status.success(),
            "analyze {name}: {}",
            stderr_str(&analyze)
        );
        let report = stdout_str(&analyze);
        assert!(report.contains(want), "{name} report:\n{report}");
        assert!(
            report.contains("pulse,delta_m1"),
            "{name} lacks the delta table"
        );
        assert!(report.contains(&format!("label: {name}")));
        if name.starts_with("alpha") {
            assert!(report.contains("alpha: "), "{name} lacks alpha");
        }
        assert!(report.contains("r2 (pre-saturation): "), "{name} lacks r2");
    }
}

#[test]
fn identical_runs_produce_identical_bytes() {
    let text = stdout_str(&memsyn(&["preset", "alpha_one"]));
    let a = memsyn_stdin(&["run", "-"], text.as_bytes());
    let b = memsyn_stdin(&["run", "-"], text.as_bytes());
    assert!(a.status.success() && b.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn run_writes_files_and_analyze_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let exp_path = dir.path().join("exp.mem");
    let csv_path = dir.path().join("out.csv");
    let text = stdout_str(&memsyn(&["preset", "alpha_large"]));
    std::fs::write(&exp_path, text).unwrap();

    let run = memsyn(&[
        "run",
        exp_path.to_str().unwrap(),
        "-o",
        csv_path.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", stderr_str(&run));
    let summary = stderr_str(&run);
    assert!(summary.contains("final m1 = "), "summary was: {summary}");
    assert!(summary.contains("samples"));

    let analyze = memsyn(&["analyze", csv_path.to_str().unwrap()]);
    assert!(analyze.status.success());
    assert!(stdout_str(&analyze).contains("regime: Accelerating"));
}

#[test]
fn overrides_land_in_the_csv_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let exp_path = dir.path().join("exp.mem");
    std::fs::write(&exp_path, stdout_str(&memsyn(&["preset", "alpha_one"]))).unwrap();

    let run = memsyn(&[
        "run",
        exp_path.to_str().unwrap(),
        "--pulses",
        "3",
        "--amplitude",
        "0.5",
        "--dt",
        "1e-6",
    ]);
    assert!(run.status.success(), "{}", stderr_str(&run));
    let csv = String::from_utf8(run.stdout).unwrap();
    assert!(
        csv.contains("# count = 3"),
        "metadata lost the pulse override"
    );
    assert!(csv.contains("# amplitude = 500m"));
    assert!(csv.contains("# dt = 1u"));
    // and the trajectory really is 3 pulses of 2 ms at 1 us steps
    let rows = csv.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, 6001);
}

#[test]
fn zero_amplitude_run_holds_m1_constant() {
    let text = stdout_str(&memsyn(&["preset", "single_fig1"]));
    let run = memsyn_stdin(&["run", "-", "--amplitude", "0"], text.as_bytes());
    assert!(run.status.success(), "{}", stderr_str(&run));
    let csv = String::from_utf8(run.stdout).unwrap();
    let m1: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("t,"))
        .map(|l| l.split(',').nth(4).unwrap())
        .collect();
    assert!(!m1.is_empty());
    assert!(m1.iter().all(|v| v == &m1[0]), "m1 moved without drive");

    let analyze = memsyn_stdin(&["analyze", "-"], csv.as_bytes());
    assert!(analyze.status.success());
    assert!(stdout_str(&analyze).contains("regime: Saturated"));
}

#[test]
fn malformed_experiments_fail_with_their_line() {
    let broken = "[circuit]\ntopology = series\nbogus_key = 1\n";
    let out = memsyn_stdin(&["run", "-"], broken.as_bytes());
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr_str(&out);
    assert!(msg.contains("line 3"), "message was: {msg}");
}

#[test]
fn invalid_override_combinations_fail_validation() {
    let text = stdout_str(&memsyn(&["preset", "alpha_one"]));
    // dt above width / 10
    let out = memsyn_stdin(&["run", "-", "--dt", "0.5e-3"], text.as_bytes());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("dt"));
}

#[test]
fn foreign_csv_is_rejected() {
    let out = memsyn_stdin(&["analyze", "-"], b"t,m1\n0,1\n1,2\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("header"));
}

#[test]
fn verify_passes_every_preset() {
    for name in PRESETS {
        let out = memsyn(&["verify", name]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stderr_str(&out));
        let report = stdout_str(&out);
        assert!(
            report.contains("max relative deviation"),
            "{name} report: {report}"
        );
    }
}
