//! End-to-end runs of the `nsys` binary: file round trips and the exit-code
//! contract (0 ok, 1 usage/parse, 2 validation, 3 build, 4 uncertified).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nsys::construct::build_max_system;
use nsys::json::from_json;
use nsys::scalar::int;

fn nsys_bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsys"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Builds the strict worked example into `dir` and returns its path.
fn build_strict(dir: &Path) -> PathBuf {
    let out = nsys_bin(
        dir,
        &[
            "build",
            "maximal",
            "--schedule",
            "1,6,42,336",
            "--out",
            "strict.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    dir.join("strict.json")
}

#[test]
fn build_round_trips_bit_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let path = build_strict(tmp.path());
    let text = std::fs::read_to_string(&path).unwrap();
    let (parsed, sched) = from_json(&text).unwrap();
    let l = vec![int(1), int(6), int(42), int(336)];
    let (built, built_sched) = build_max_system(3, &l).unwrap();
    assert_eq!(parsed, built);
    assert_eq!(sched.unwrap(), built_sched);
}

#[test]
fn validate_accepts_own_build() {
    let tmp = tempfile::tempdir().unwrap();
    build_strict(tmp.path());
    let out = nsys_bin(tmp.path(), &["validate", "strict.json"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("every axiom holds"));
}

#[test]
fn missing_out_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nsys_bin(tmp.path(), &["build", "maximal", "--epochs", "3"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--out"));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nsys_bin(tmp.path(), &["frobnicate"]);
    assert_eq!(code(&out), 1);
    let help = nsys_bin(tmp.path(), &["--help"]);
    assert_eq!(code(&help), 0);
}

#[test]
fn malformed_json_is_parse_error() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("broken.json"), "{ \"n\": ").unwrap();
    let out = nsys_bin(tmp.path(), &["validate", "broken.json"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn corrupted_order_is_validation_error_with_position() {
    let tmp = tempfile::tempdir().unwrap();
    let path = build_strict(tmp.path());
    // Swapping two components keeps each internally consistent but breaks
    // the ordering axiom, so the parse succeeds and validation fails.
    let text = std::fs::read_to_string(&path).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let comps = doc["components"].as_array_mut().unwrap();
    comps.swap(0, 1);
    std::fs::write(tmp.path().join("corrupt.json"), doc.to_string()).unwrap();
    let out = nsys_bin(tmp.path(), &["validate", "corrupt.json"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("order at q ="), "{}", stdout(&out));
}

#[test]
fn too_tight_schedule_is_build_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nsys_bin(
        tmp.path(),
        &[
            "build",
            "maximal",
            "--schedule",
            "1,6,42,43",
            "--out",
            "f.json",
        ],
    );
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("build failed at epoch"));
    assert!(!tmp.path().join("f.json").exists());
}

#[test]
fn oversized_band_period_is_build_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nsys_bin(
        tmp.path(),
        &["build", "alternating", "--d", "5", "--out", "x.json"],
    );
    assert_eq!(code(&out), 3);
}

#[test]
fn check_passes_on_deep_maximal_build() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nsys_bin(
        tmp.path(),
        &[
            "build",
            "maximal",
            "--epochs",
            "14",
            "--out",
            "max14.json",
        ],
    );
    assert_eq!(code(&out), 0);
    let out = nsys_bin(tmp.path(), &["check", "max14.json"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("checks satisfied"));
    // Estimation window opens at the middle schedule entry, l_7 = 8!.
    assert!(text.contains("tail window [40320,"));
    assert!(text.contains("sharp branch"));
}

#[test]
fn check_passes_on_alternating_build() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nsys_bin(
        tmp.path(),
        &[
            "build",
            "alternating",
            "--d",
            "1/20",
            "--phases",
            "1",
            "--out",
            "alt.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = nsys_bin(
        tmp.path(),
        &["check", "alt.json", "--targets", "alternating", "--tol", "1/20"],
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn check_rejects_invalid_system() {
    let tmp = tempfile::tempdir().unwrap();
    let path = build_strict(tmp.path());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["components"].as_array_mut().unwrap().swap(0, 2);
    std::fs::write(tmp.path().join("corrupt.json"), doc.to_string()).unwrap();
    let out = nsys_bin(tmp.path(), &["check", "corrupt.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn uncertified_scan_fails_only_under_require_certified() {
    let tmp = tempfile::tempdir().unwrap();
    let lax = nsys_bin(
        tmp.path(),
        &[
            "minima",
            "--boxes",
            "50",
            "--x-max",
            "3",
            "--out",
            "tiny.csv",
        ],
    );
    assert_eq!(code(&lax), 0);
    assert!(stdout(&lax).contains("certified 0 of 1"));
    let strict = nsys_bin(
        tmp.path(),
        &[
            "minima",
            "--boxes",
            "50",
            "--x-max",
            "3",
            "--require-certified",
            "--out",
            "tiny.csv",
        ],
    );
    assert_eq!(code(&strict), 4);
    // The partial results are still written before the failure exit.
    assert!(tmp.path().join("tiny.csv").exists());
}

#[test]
fn minima_csv_feeds_render_and_compare() {
    let tmp = tempfile::tempdir().unwrap();
    build_strict(tmp.path());
    let out = nsys_bin(
        tmp.path(),
        &[
            "minima",
            "--terms",
            "2",
            "--boxes",
            "10,100",
            "--out",
            "sweep.csv",
            "--xi-out",
            "xi.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("certified 2 of 2"));
    assert!(tmp.path().join("xi.json").exists());

    let render = nsys_bin(
        tmp.path(),
        &[
            "render",
            "strict.json",
            "--overlay",
            "sweep.csv",
            "--out",
            "fig.svg",
        ],
    );
    assert_eq!(code(&render), 0);
    let svg = std::fs::read_to_string(tmp.path().join("fig.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<circle").count(), 6);

    let cmp = nsys_bin(tmp.path(), &["compare", "strict.json", "sweep.csv"]);
    assert_eq!(code(&cmp), 0);
    assert!(stdout(&cmp).contains("max deviation"));
}

#[test]
fn out_of_range_overlay_warns_and_skips() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nsys_bin(
        tmp.path(),
        &["build", "maximal", "--schedule", "1,6", "--out", "tiny.json"],
    );
    assert_eq!(code(&out), 0);
    let out = nsys_bin(
        tmp.path(),
        &["minima", "--boxes", "10,1000", "--out", "sweep.csv"],
    );
    assert_eq!(code(&out), 0);
    // Horizon 6 < ln 1000: the second sample must fall off the chart.
    let render = nsys_bin(
        tmp.path(),
        &[
            "render",
            "tiny.json",
            "--overlay",
            "sweep.csv",
            "--out",
            "fig.svg",
        ],
    );
    assert_eq!(code(&render), 0);
    assert!(stderr(&render).contains("skipped 1 overlay sample"));
    let svg = std::fs::read_to_string(tmp.path().join("fig.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 3);
}

#[test]
fn render_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    build_strict(tmp.path());
    for name in ["a.svg", "b.svg"] {
        let out = nsys_bin(tmp.path(), &["render", "strict.json", "--out", name]);
        assert_eq!(code(&out), 0);
    }
    let a = std::fs::read(tmp.path().join("a.svg")).unwrap();
    let b = std::fs::read(tmp.path().join("b.svg")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn seed_flag_is_accepted_and_ignored() {
    let tmp = tempfile::tempdir().unwrap();
    build_strict(tmp.path());
    let out = nsys_bin(tmp.path(), &["--seed", "7", "validate", "strict.json"]);
    assert_eq!(code(&out), 0);
}
