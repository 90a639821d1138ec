//! End-to-end tests of the command-line contract: exit codes, output
//! determinism, cache validation, and the text/JSON formats.

use std::path::{Path, PathBuf};
use std::process::Command;

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run<I, S>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = Command::new(env!("CARGO_BIN_EXE_stablecrd"))
        .args(args)
        .env("STABLECRD_THREADS", "1")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
    )
}

fn tmp_file(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(dir).unwrap();
    dir.join(name)
}

#[test]
fn validate_reports_shape() {
    let (code, stdout, _) = run(["validate", &corpus("existence.crd")]);
    assert_eq!(code, 0);
    assert!(stdout.contains("class: bimolecular"));
    assert!(stdout.contains("species: 3 (A, B, Y)"));
    assert!(stdout.contains("reactions: 1 (0 mute)"));
}

#[test]
fn validate_protocol_import() {
    let (code, stdout, _) = run(["validate", &corpus("parity.pp")]);
    assert_eq!(code, 0);
    assert!(stdout.contains("imported population protocol (6 transitions)"));
    assert!(stdout.contains("class: bimolecular"));
}

#[test]
fn unvoted_species_is_exit_2_with_position() {
    let (code, _, stderr) = run(["validate", &fixture("unvoted.crd")]);
    assert_eq!(code, 2);
    assert!(stderr.contains("`Y` has no vote"), "{stderr}");
    assert!(stderr.contains(":1:16"), "{stderr}");
}

#[test]
fn unsupported_class_is_exit_4() {
    let (code, _, stderr) = run(["minu", &fixture("increasing.crd")]);
    assert_eq!(code, 4);
    assert!(stderr.contains("not supported"), "{stderr}");
}

#[test]
fn element_cap_truncation_is_exit_3() {
    let (code, stdout, _) = run(["minu", &corpus("parity.crd"), "--element-cap", "1"]);
    assert_eq!(code, 3);
    assert!(stdout.contains("truncated"), "{stdout}");
}

#[test]
fn minu_json_matches_golden_files() {
    for name in ["existence", "parity", "threshold2", "novote-flip", "threshold3", "threshold5"] {
        let (code, stdout, _) = run(["minu", &corpus(&format!("{name}.crd")), "--format", "json"]);
        assert_eq!(code, 0, "{name}");
        let golden =
            std::fs::read_to_string(corpus(&format!("expected/{name}.minu.json"))).unwrap();
        assert_eq!(stdout, golden, "{name}: golden file drifted");
    }
}

#[test]
fn mutated_decider_diverges_from_golden() {
    // harness sanity: a mutated reaction must not reproduce the golden set
    let (code, stdout, _) = run(["minu", &fixture("existence-mutated.crd"), "--format", "json"]);
    assert_eq!(code, 0);
    let mutated: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let golden: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(corpus("expected/existence.minu.json")).unwrap())
            .unwrap();
    assert_ne!(
        mutated.get("min_unstable"),
        golden.get("min_unstable"),
        "mutation must change the antichain"
    );
    // specifically, 2Y becomes minimal unstable
    assert!(stdout.contains(r#""Y": 2"#), "{stdout}");
}

#[test]
fn stdout_is_byte_identical_across_runs_and_threads() {
    let args = ["minu", &corpus("parity.crd"), "--format", "json"];
    let (_, first, _) = run(args);
    let (_, second, _) = run(args);
    assert_eq!(first, second);
    let out = Command::new(env!("CARGO_BIN_EXE_stablecrd"))
        .args(args)
        .env("STABLECRD_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(first, String::from_utf8(out.stdout).unwrap());

    let text_args = ["minu", &corpus("parity.crd")];
    let (_, t1, _) = run(text_args);
    let (_, t2, _) = run(text_args);
    assert_eq!(t1, t2);
}

#[test]
fn check_uses_and_validates_caches() {
    let cache = tmp_file("existence.minu.json");
    let (code, stdout, _) = run(["minu", &corpus("existence.crd"), "--format", "json"]);
    assert_eq!(code, 0);
    std::fs::write(&cache, &stdout).unwrap();

    let cache_arg = cache.to_string_lossy().into_owned();
    let (code, stdout, stderr) = run([
        "check",
        &corpus("existence.crd"),
        "A + 3Y",
        "2A + B",
        "7B",
        "--minu",
        &cache_arg,
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert_eq!(stdout, "A + 3Y: o-stable\n2A + B: o-unstable\n7B: o-stable\n");
    // cached runs must not recompute, so no precondition caveat
    assert!(!stderr.contains("precondition"), "{stderr}");

    // the same cache against a different decider is rejected
    let (code, _, stderr) = run([
        "check",
        &corpus("threshold2.crd"),
        "A + Y",
        "--minu",
        &cache_arg,
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("content hash mismatch"), "{stderr}");
}

#[test]
fn check_without_cache_prints_caveat() {
    let (code, stdout, stderr) =
        run(["check", &corpus("existence.crd"), "A + Y", "--mode", "o"]);
    assert_eq!(code, 0);
    assert_eq!(stdout, "A + Y: o-stable\n");
    assert!(stderr.contains("output stable"), "{stderr}");
}

#[test]
fn check_mode_t() {
    let (code, stdout, _) = run([
        "check",
        &corpus("existence.crd"),
        "A + Y",
        "A + B",
        "--mode",
        "t",
    ]);
    assert_eq!(code, 0);
    assert_eq!(stdout, "A + Y: t-stable\nA + B: t-unstable\n");
}

#[test]
fn malformed_literal_is_exit_2() {
    let (code, _, stderr) = run(["check", &corpus("existence.crd"), "A + 5Q"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("`Q` is not declared"), "{stderr}");
}

#[test]
fn zero_literal_is_rejected() {
    // the zero configuration is neither stable nor unstable
    let (code, _, stderr) = run(["check", &corpus("existence.crd"), "0"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("zero configuration"), "{stderr}");
    let (code, _, stderr) = run(["check", &corpus("existence.crd"), "0", "--mode", "t"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("zero configuration"), "{stderr}");
}

#[test]
fn uncertifiable_query_is_exit_5() {
    // a truncated run certifies instability but cannot certify stability
    // above its completeness bound
    let cache = tmp_file("parity-truncated.minu.json");
    let (code, stdout, _) =
        run(["minu", &corpus("parity.crd"), "--element-cap", "1", "--format", "json"]);
    assert_eq!(code, 3);
    std::fs::write(&cache, &stdout).unwrap();
    let cache_arg = cache.to_string_lossy().into_owned();

    let (code, _, stderr) = run([
        "check",
        &corpus("parity.crd"),
        "5L1 + 2F0",
        "--minu",
        &cache_arg,
    ]);
    assert_eq!(code, 5, "{stderr}");
    assert!(stderr.contains("truncated"), "{stderr}");
}

#[test]
fn compare_passes_on_corpus() {
    for (name, k) in
        [("existence.crd", "6"), ("parity.crd", "8"), ("threshold2.crd", "8"), ("novote-flip.crd", "6")]
    {
        let (code, stdout, stderr) = run(["compare", &corpus(name), "--max-size", k]);
        assert_eq!(code, 0, "{name}: {stderr}");
        assert!(stdout.starts_with("PASS"), "{name}: {stdout}");
    }
}

#[test]
fn oracle_stability_table_text() {
    let (code, stdout, _) = run([
        "oracle",
        &corpus("existence.crd"),
        "--what",
        "stability",
        "--max-size",
        "2",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("Y: o-stable\n"));
    assert!(stdout.contains("A + B: o-unstable\n"));
}

#[test]
fn oracle_decides_failure_report() {
    // an oscillating decider is reported as a counterexample, exit 0
    let osc = tmp_file("oscillator.crd");
    std::fs::write(
        &osc,
        "species: A, B, Y\ninputs: A, B\nyes: A\nno: B, Y\nreactions:\nA + B -> Y + Y\nY + A -> A + A\nY + B -> B + B\n",
    )
    .unwrap();
    let osc_arg = osc.to_string_lossy().into_owned();
    let (code, stdout, _) = run(["oracle", &osc_arg, "--what", "decides", "--max-size", "4"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("not a stable decider"), "{stdout}");
    assert!(stdout.contains("2A + 2B"), "{stdout}");
}

#[test]
fn protocol_and_native_parity_agree() {
    let (_, crd_out, _) = run(["minu", &corpus("parity.crd"), "--format", "json"]);
    let (_, pp_out, _) = run(["minu", &corpus("parity.pp"), "--format", "json"]);
    let crd_json: serde_json::Value = serde_json::from_str(&crd_out).unwrap();
    let pp_json: serde_json::Value = serde_json::from_str(&pp_out).unwrap();
    assert_eq!(crd_json.get("min_unstable"), pp_json.get("min_unstable"));
}

#[test]
fn missing_file_is_exit_2() {
    let (code, _, stderr) = run(["validate", "no-such-file.crd"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("no-such-file.crd"));
}
