use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn polarized(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polarized"))
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON report")
}

fn golden(name: &str, args: &[&str]) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let want = std::fs::read_to_string(&path).unwrap();
    for _ in 0..2 {
        let out = polarized(args);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert_eq!(stdout(&out), want, "{name} drifted");
    }
}

#[test]
fn golden_reports_are_byte_stable() {
    golden("bv_find_10110.json", &["bv", "find", "--a", "10110"]);
    golden("run_mz.json", &["run", "tests/fixtures/mz.onl"]);
    golden("qref_bv_1011_phase.json", &["qref", "bv", "--a", "1011", "--phase-form"]);
    golden("synth_iy.json", &["synth", "--matrix", "0", "0", "1", "0", "-1", "0", "0", "0"]);
}

#[test]
fn report_fields_come_in_schema_order() {
    let text = stdout(&polarized(&["baseline", "--a", "101"]));
    let order = [
        "\"command\"",
        "\"parameters\"",
        "\"detectors\"",
        "\"bits\"",
        "\"recovered\"",
        "\"f_value\"",
        "\"values\"",
        "\"checks\"",
        "\"wall_time_ms\"",
    ];
    let positions: Vec<usize> = order.iter().map(|k| text.find(k).expect(k)).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "{text}");
}

#[test]
fn find_and_baseline_agree() {
    for a in ["1", "0", "10110", "0000001", "1111111111"] {
        let find = json(&polarized(&["bv", "find", "--a", a]));
        let base = json(&polarized(&["baseline", "--a", a]));
        assert_eq!(find["recovered"], a);
        assert_eq!(base["recovered"], find["recovered"]);
        assert_eq!(base["values"]["queries"], a.len());
    }
}

#[test]
fn eval_reports_optical_and_reference_values() {
    let out = polarized(&["bv", "eval", "--a", "1101", "--x", "0111"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    // a·x = 0+1+0+1 = 0 mod 2
    assert_eq!(r["bits"], "0101");
    assert_eq!(r["f_value"], false);
    assert_eq!(r["values"]["f_reference"], false);
}

#[test]
fn qref_check_is_exhaustive_without_a() {
    let out = polarized(&["qref", "check", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = json(&out);
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 8 * 3);
    assert!(checks.iter().all(|c| c["passed"] == true));

    let one = json(&polarized(&["qref", "check", "--n", "4", "--a", "0110"]));
    assert_eq!(one["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn qref_bv_standard_form_uses_ancilla() {
    let r = json(&polarized(&["qref", "bv", "--a", "011"]));
    assert_eq!(r["recovered"], "011");
    assert_eq!(r["values"]["qubits"], 4);
}

#[test]
fn lossy_splitter_exits_2_with_line_number() {
    let out = polarized(&["run", "tests/fixtures/broken.onl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = stderr(&out);
    assert!(err.starts_with("tests/fixtures/broken.onl:3:"), "{err}");
    assert!(err.contains("t + r"), "{err}");
}

#[test]
fn missing_and_non_utf8_files_exit_2() {
    assert_eq!(polarized(&["run", "tests/fixtures/nope.onl"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.onl");
    std::fs::write(&path, b"version 1\ndet \xff\n").unwrap();
    let out = polarized(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains(":2:"), "{}", stderr(&out));
}

#[test]
fn emitted_circuit_runs_and_matches_find() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bv.onl");
    let path = path.to_str().unwrap();
    let find = json(&polarized(&["bv", "find", "--a", "0110", "--emit-circuit", path]));
    let run = polarized(&["run", path]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let run = json(&run);

    // `run` lists detectors by name, `bv find` by beam; same set for n < 10
    let mut by_find = find["detectors"].as_array().unwrap().clone();
    by_find.sort_by_key(|d| d["name"].as_str().unwrap().to_string());
    assert_eq!(&by_find, run["detectors"].as_array().unwrap());
}

#[test]
fn warnings_go_to_stderr_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.onl");
    std::fs::write(&path, "version 1\nbeam s pol=V intensity=2\nwp idle eta=1 phi=0\ndet d\nconnect s.0 -> d.0\n")
        .unwrap();
    let out = polarized(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning"), "{}", stderr(&out));
    let intensity = json(&out)["detectors"][0]["intensity"].as_f64().unwrap();
    assert!((intensity - 2.0).abs() < 1e-12, "{intensity}");
}

#[test]
fn bad_arguments_exit_3() {
    for args in [
        &["bv", "find"][..],
        &["bv", "find", "--a", "012"],
        &["bv", "eval", "--a", "11", "--x", "111"],
        &["qref", "check", "--n", "11"],
        &["qref", "check", "--n", "2", "--a", "101"],
        &["synth", "--matrix", "1", "0", "0", "0", "0", "0", "1"],
        &["synth", "--matrix", "1", "0", "0", "0", "0", "0", "1", "x"],
        &["frobnicate"],
    ] {
        let out = polarized(args);
        assert_eq!(out.status.code(), Some(3), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!stderr(&out).is_empty(), "{args:?}");
    }
}

#[test]
fn help_and_version_exit_0() {
    for flag in ["--help", "--version"] {
        let out = polarized(&[flag]);
        assert_eq!(out.status.code(), Some(0));
        assert!(!out.stdout.is_empty());
    }
}
