//! End-to-end runs of the compiled binary: exit codes, report envelopes, and
//! the failure-control behavior of each verb.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fmtrace")
}

fn work_dir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Coarse grids: every verb that doesn't chase 1e-6 accuracy runs on these.
const FAST_GRIDS: &str = "\
discretization.n_ambient = 32
discretization.n_sub = 32
mellin.tau_min = -30
mellin.tau_max = 30
mellin.step = 0.02
mellin.line_min = -40
mellin.line_max = 40
mellin.line_step = 0.05
";

fn run(dir: &Path, config: &str, args: &[&str]) -> (Output, PathBuf) {
    let cfg_path = dir.join("experiment.cfg");
    std::fs::write(&cfg_path, config).unwrap();
    let out_path = dir.join("report.json");
    let output = Command::new(bin())
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out_path)
        .args(args)
        .output()
        .expect("binary runs");
    (output, out_path)
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn verify_example_passes_on_defaults() {
    let dir = work_dir("verify_example");
    let (out, path) = run(&dir, "transformation = torus_rotation\n", &["verify-example"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let rep = report(&path);
    assert_eq!(rep["schema_version"], 1);
    assert_eq!(rep["command"], "verify-example");
    assert_eq!(rep["pass"], true);
    assert_eq!(rep["failures"].as_array().unwrap().len(), 0);
    assert_eq!(rep["results"]["localization_verdict"], "Pass");
    // The envelope echoes the full effective config for reproducibility.
    assert_eq!(rep["config"]["discretization.n_ambient"], 64);
}

#[test]
fn symbol_writes_both_report_shapes() {
    let dir = work_dir("symbol_shapes");
    let (out, path) =
        run(&dir, FAST_GRIDS, &["--seed", "9", "symbol", "--rhos", "0:2:0.5"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let rep = report(&path);
    assert_eq!(rep["seed"], 9);
    assert_eq!(rep["results"]["table"].as_array().unwrap().len(), 5);
    // The norm profile is mirrored as CSV regardless of the format flag.
    let csv = std::fs::read_to_string(path.with_extension("csv")).unwrap();
    assert!(csv.starts_with("rho,spectral_norm\n"), "{csv}");
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn symbol_off_line_gamma_is_a_config_error() {
    let dir = work_dir("symbol_gamma");
    let (out, _) = run(&dir, FAST_GRIDS, &["symbol", "--gamma", "1.6"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
}

#[test]
fn positive_sobolev_order_is_rejected_with_the_invariant() {
    let dir = work_dir("bad_s");
    let cfg = format!("{FAST_GRIDS}sobolev.s = 0.5\n");
    let (out, _) = run(&dir, &cfg, &["symbol"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("s < 0"), "stderr: {}", stderr_of(&out));
}

#[test]
fn malformed_config_cites_the_line() {
    let dir = work_dir("bad_line");
    let (out, _) = run(&dir, "discretization.n_ambient 32\n", &["symbol"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("line 1"), "stderr: {err}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = work_dir("bad_key");
    let (out, _) = run(&dir, "grid.points = 32\n", &["symbol"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("unknown key"), "stderr: {}", stderr_of(&out));
}

#[test]
fn trace_zero_input_is_exact() {
    let dir = work_dir("trace_zero");
    let (out, path) = run(&dir, FAST_GRIDS, &["trace", "--input", "zero"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let rep = report(&path);
    let rows = rep["results"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["oracle_norm"], 0.0);
}

#[test]
fn trace_rejects_unrepresentable_modes() {
    let dir = work_dir("trace_mode");
    let (out, _) = run(&dir, FAST_GRIDS, &["trace", "--input", "plane:40"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("outside the representable range"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn localize_validates_the_radius() {
    let dir = work_dir("localize_radius");
    let (out, _) = run(&dir, FAST_GRIDS, &["localize", "--radius", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("localization radius"), "stderr: {}", stderr_of(&out));
}

#[test]
fn identity_control_fails_localization() {
    let dir = work_dir("localize_identity");
    let cfg = format!("{FAST_GRIDS}transformation = identity\n");
    let (out, path) = run(&dir, &cfg, &["localize"]);
    // The identity trace is not localized anywhere: check failure, exit 1.
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr_of(&out));
    let rep = report(&path);
    assert_eq!(rep["pass"], false);
    assert_eq!(rep["results"]["report"]["verdict"], "Fail");
}

#[test]
fn translation_control_fails_conditions_with_witness() {
    let dir = work_dir("conditions_translation");
    let cfg = format!("{FAST_GRIDS}transformation = translation\n");
    let (out, path) = run(&dir, &cfg, &["check-conditions", "--samples", "128"]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr_of(&out));
    let rep = report(&path);
    assert_eq!(rep["pass"], false);
    let conditions = &rep["results"]["conditions"];
    let witnessed = ["condition_a", "condition_b", "condition_c"].iter().any(|key| {
        !conditions[key]["pass"].as_bool().unwrap()
            && !conditions[key]["witness"].is_null()
    });
    assert!(witnessed, "{conditions}");
}

#[test]
fn rotation_passes_conditions() {
    let dir = work_dir("conditions_rotation");
    let (out, path) = run(&dir, FAST_GRIDS, &["check-conditions", "--samples", "128"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let rep = report(&path);
    assert_eq!(rep["results"]["trace_sample"]["concentrated_at_origin"], true);
}

#[test]
fn csv_format_swaps_the_primary_report() {
    let dir = work_dir("csv_format");
    let (out, path) = run(
        &dir,
        FAST_GRIDS,
        &["--format", "csv", "trace", "--input", "plane:5"],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    // --out names the envelope; the CSV lands at the .csv sibling.
    let csv = std::fs::read_to_string(path.with_extension("csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.split(',').any(|c| c == "mellin_rel"), "{header}");
    assert!(path.with_extension("json").exists());
}
