//! End-to-end tests of the `simcensus` binary: exit codes, report files and
//! determinism.

use std::path::Path;
use std::process::{Command, Output};

fn simcensus(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simcensus"))
        .args(args)
        .current_dir(dir)
        .env_remove("SIMCENSUS_SPEC")
        .env_remove("SIMCENSUS_FIELD")
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn full_run_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = simcensus(
        &["--spec", "2:2,3:1", "--level", "full", "--out", "report.json"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("checks passed: true"));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["dim_expected"], 17);
    assert_eq!(report["dim_closure"], 17);
    assert_eq!(report["census"]["2"], 2);
    assert_eq!(report["census"]["3"], 1);
    assert_eq!(report["radical_dim"], 0);
    assert_eq!(report["center_dim"], 3);
    assert_eq!(report["checks_passed"], true);
    assert_eq!(report["witnesses"]["2:1"]["corner"], "-3");
    assert_eq!(report["witnesses"]["2:2"]["corner"], "12");
}

#[test]
fn bad_spec_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(exit_code(&simcensus(&["--spec", "2:0"], dir.path())), 2);
    assert_eq!(exit_code(&simcensus(&["--spec", "1:1"], dir.path())), 2);
    assert_eq!(exit_code(&simcensus(&[], dir.path())), 2);
}

#[test]
fn small_prime_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = simcensus(&["--spec", "2:2", "--field", "fp:3"], dir.path());
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("too small"), "stderr: {stderr}");
}

#[test]
fn fp_mode_reports_skipped_radical() {
    let dir = tempfile::tempdir().unwrap();
    let out = simcensus(
        &["--spec", "2:2", "--field", "fp:11", "--out", "r.json"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap())
            .unwrap();
    assert_eq!(report["radical_dim"], "skipped");
    assert_eq!(report["checks_passed"], true);
}

#[test]
fn paper_variant_exits_1_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = simcensus(
        &["--spec", "2:1,4:1", "--leading-factor", "paper", "--out", "r.json"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 1);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap())
            .unwrap();
    assert_eq!(report["checks_passed"], false);
    let failures = report["failures"].as_array().unwrap();
    assert!(failures.iter().any(|f| f.as_str().unwrap().contains("nonzero residue")));

    let out = simcensus(
        &["--spec", "2:1,4:1", "--leading-factor", "standard"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
}

#[test]
fn stdout_report_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = simcensus(&["--spec", "2:1", "--out", "-"], dir.path());
    assert_eq!(exit_code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let json_start = stdout.find('{').expect("JSON in stdout");
    let report: serde_json::Value = serde_json::from_str(&stdout[json_start..]).unwrap();
    assert_eq!(report["census"]["2"], 1);
}

fn scrubbed_report(dir: &Path, name: &str, extra: &[&str]) -> String {
    let mut args = vec!["--spec", "2:2,3:1", "--out", name];
    args.extend_from_slice(extra);
    let out = simcensus(&args, dir);
    assert_eq!(exit_code(&out), 0);
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap();
    let obj = v.as_object_mut().unwrap();
    obj.remove("timestamp");
    obj.remove("timings_ms");
    serde_json::to_string(&v).unwrap()
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = scrubbed_report(dir.path(), "a.json", &[]);
    let b = scrubbed_report(dir.path(), "b.json", &[]);
    assert_eq!(a, b);
    // identical under a different thread count
    let c = scrubbed_report(dir.path(), "c.json", &["--threads", "4"]);
    assert_eq!(a, c);
}

#[test]
fn env_var_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_simcensus"))
        .args(["--out", "env.json"])
        .current_dir(dir.path())
        .env("SIMCENSUS_SPEC", "2:1")
        .env("SIMCENSUS_LEVEL", "fast")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("env.json")).unwrap())
            .unwrap();
    assert_eq!(report["census"]["2"], 1);
    assert_eq!(report["witnesses"].as_object().unwrap().len(), 0); // fast level
}

#[test]
fn spec_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("spec.json"),
        r#"{"field":"Q","entries":[{"n":2,"a":2,"lambdas":["1/3","5"]}]}"#,
    )
    .unwrap();
    let out = simcensus(
        &["--spec-file", "spec.json", "--out", "r.json"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap())
            .unwrap();
    // corner values stay exact rationals: (1/9)(1/9 - 25) = -224/81
    assert_eq!(report["witnesses"]["2:1"]["corner"], "-224/81");

    // --spec and --spec-file together is a usage error
    let out = simcensus(&["--spec", "2:1", "--spec-file", "spec.json"], dir.path());
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn probe_max_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = simcensus(
        &["--spec", "2:1,3:1,5:1", "--probe-max", "12", "--out", "r.json"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap())
            .unwrap();
    let probes = report["relation_probes"].as_array().unwrap();
    assert_eq!(probes.len(), 12);
    assert_eq!(probes[6]["i"], 7);
    assert_eq!(probes[6]["support"].as_array().unwrap().len(), 0);

    // outside [1, 10 * max(S)]
    let out = simcensus(&["--spec", "2:1", "--probe-max", "99"], dir.path());
    assert_eq!(exit_code(&out), 2);
}
