//! End-to-end tests of the binary: exit codes, config precedence, output
//! determinism. Each test runs the compiled executable in a scratch
//! directory.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_epdwave"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Scratch directory removed on drop.
struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!(
            "epdwave-cli-{tag}-{}",
            std::process::id()
        ));
        std::fs::create_dir_all(&dir).expect("create scratch dir");
        Scratch(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

#[test]
fn verify_passes_on_clean_solution() {
    let out = run(&["verify", "--family", "epd", "--n", "2", "--grid", "12"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("PASS"), "{text}");
    assert!(
        text.contains(&format!("epdwave {}", env!("CARGO_PKG_VERSION"))),
        "version header missing: {text}"
    );
    assert!(text.contains("config:"), "config echo missing: {text}");
}

#[test]
fn verify_fails_on_corrupted_solution() {
    let out = run(&[
        "verify", "--family", "epd", "--n", "2", "--grid", "12", "--corrupt",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
    assert!(stderr(&out).contains("verification failed"));
}

#[test]
fn bad_family_is_usage_error() {
    let out = run(&["verify", "--family", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown family"));
}

#[test]
fn bad_profile_is_usage_error() {
    let out = run(&["verify", "--t-profile", "gaussian:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn epd_rejects_family_a_parameter() {
    let out = run(&["derive", "--family", "epd", "--a", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gas_closed_form_needs_n2() {
    let out = run(&["gas", "--n", "4", "--nx", "2", "--nt", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unstable_reference_run_is_numerical_error() {
    let out = run(&[
        "compare", "--cfl", "1.5", "--levels", "41,81", "--t-final", "0.4",
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("numerical failure"));
}

#[test]
fn derive_json_report_is_well_formed() {
    let scratch = Scratch::new("derive-json");
    let json_path = scratch.path("derive.json");
    let out = run(&[
        "derive",
        "--family",
        "family-a",
        "--n",
        "2",
        "--a",
        "1",
        "--json",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&json_path).expect("json written");
    let report: serde_json::Value = serde_json::from_str(&text).expect("valid json");
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["command"], "derive");
    assert_eq!(report["config"]["family"], "family-a");
    assert_eq!(
        report["equation"]["derivation"]
            .as_array()
            .map(|steps| steps.len()),
        Some(2)
    );
    assert!(report["solution"]["plus"].as_array().is_some_and(|v| !v.is_empty()));
    assert!(report["acoustics"]["f"].as_str().is_some_and(|f| f.contains('y')));
}

#[test]
fn gas_csv_reruns_are_byte_identical() {
    let scratch = Scratch::new("gas-csv");
    let args_for = |name: &str, dir: &Path| {
        vec![
            "gas".to_string(),
            "--nx".into(),
            "7".into(),
            "--nt".into(),
            "4".into(),
            "--csv".into(),
            dir.join(name).to_str().unwrap().to_string(),
        ]
    };
    let first_args = args_for("a.csv", &scratch.0);
    let second_args = args_for("b.csv", &scratch.0);
    assert_eq!(run_owned(&first_args).status.code(), Some(0));
    assert_eq!(run_owned(&second_args).status.code(), Some(0));
    let a = std::fs::read(scratch.path("a.csv")).unwrap();
    let b = std::fs::read(scratch.path("b.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "reruns must produce identical bytes");
    let head = String::from_utf8_lossy(&a);
    assert!(head.starts_with("x,t,r,s,u,rho,p\n"), "{head}");
    // 17 significant digits per value
    assert!(head.lines().nth(1).is_some_and(|l| l.contains("e1,")), "{head}");
}

fn run_owned(args: &[String]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let scratch = Scratch::new("config");
    let cfg = scratch.path("cfg.json");
    std::fs::write(&cfg, r#"{"family": "epd", "n": 4, "grid": 10}"#).unwrap();

    // Config alone: n = 4 and grid = 10 show up in the echo.
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("\"n\":4"), "{text}");
    assert!(text.contains("\"grid\":10"), "{text}");

    // Flag beats config.
    let out = run(&["verify", "--config", cfg.to_str().unwrap(), "--grid", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\"grid\":8"));

    // Unknown keys are rejected, not silently ignored.
    std::fs::write(&cfg, r#"{"gird": 10}"#).unwrap();
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad config"));
}

#[test]
fn out_dir_env_var_redirects_relative_paths() {
    let scratch = Scratch::new("outdir");
    let out = bin()
        .args(["verify", "--grid", "8", "--json", "report.json"])
        .env("EPDWAVE_OUT_DIR", &scratch.0)
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let written = scratch.path("report.json");
    assert!(written.is_file(), "expected {}", written.display());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(written).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest", "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("PASS"));
}
