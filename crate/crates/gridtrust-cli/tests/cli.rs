//! CLI behavior: exit codes, override plumbing, output stability.

use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_gridtrust");

const DEMO: &str = r#"
[topology]
grids = ["G1", "G2"]

[topology.domains]
D1 = "G1"
D2 = "G2"

[entities.A]
domain = "D1"
quality = 2.6
noise_sigma = 0.1

[entities.B]
domain = "D1"
quality = 2.4
noise_sigma = 0.1

[entities.C]
domain = "D2"
quality = 1.0
noise_sigma = 0.1

[entities.D]
domain = "D2"
quality = 2.5
noise_sigma = 0.1

[schedule]
warmup_rounds = 4
sampling = "sweep"
tick_months = 0.25
evaluations = [["A", "D"], ["C", "B"]]
runs = 2
master_seed = 3
"#;

fn write_demo(dir: &tempfile::TempDir) -> std::path::PathBuf {
    let path = dir.path().join("demo.toml");
    std::fs::write(&path, DEMO).unwrap();
    path
}

#[test]
fn validate_accepts_valid_config() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_demo(&tmp);
    let output = Command::new(BIN)
        .arg("validate")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&output.stdout).contains("ok"));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let output = Command::new(BIN)
        .args(["validate", "/nonexistent/config.toml"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).starts_with("error: io:"));
}

#[test]
fn unknown_override_key_exits_with_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_demo(&tmp);
    let output = Command::new(BIN)
        .arg("run")
        .arg(&path)
        .args(["--override", "bogus=1", "--out"])
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown override key"));
}

#[test]
fn malformed_override_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_demo(&tmp);
    let output = Command::new(BIN)
        .arg("run")
        .arg(&path)
        .args(["--override", "eta", "--out"])
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("key=value"));
}

#[test]
fn eta_override_tightens_decisions() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_demo(&tmp);

    let run = |overrides: &[&str], out: &str| -> String {
        let mut cmd = Command::new(BIN);
        cmd.arg("run").arg(&path);
        for o in overrides {
            cmd.args(["--override", o]);
        }
        cmd.arg("--out").arg(tmp.path().join(out));
        let output = cmd.output().unwrap();
        assert_eq!(output.status.code(), Some(0), "{output:?}");
        std::fs::read_to_string(tmp.path().join(out).join("report.csv")).unwrap()
    };

    let default_report = run(&[], "default");
    // A -> D scores around the provider quality 2.5, trustworthy by default.
    assert!(default_report.contains("A,D") && default_report.contains("YES"));

    // With an unreachable trust threshold every decision is NO.
    let strict_report = run(&["eta=2.95", "xi=0.1"], "strict");
    assert!(!strict_report.contains("YES"), "{strict_report}");
}

#[test]
fn run_is_deterministic_for_fixed_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_demo(&tmp);
    let mut outputs = Vec::new();
    for out in ["x", "y"] {
        let output = Command::new(BIN)
            .arg("run")
            .arg(&path)
            .args(["--seed", "11", "--out"])
            .arg(tmp.path().join(out))
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0));
        outputs.push((
            output.stdout,
            std::fs::read(tmp.path().join(out).join("report.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn runs_flag_overrides_run_count() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_demo(&tmp);
    let output = Command::new(BIN)
        .arg("run")
        .arg(&path)
        .args(["--runs", "1", "--out"])
        .arg(tmp.path().join("single"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let report = std::fs::read_to_string(tmp.path().join("single").join("report.csv")).unwrap();
    // Header plus one run of two scheduled rows.
    assert_eq!(report.lines().count(), 3);
}

#[test]
fn oracle_kendall_reports_pass() {
    let output = Command::new(BIN)
        .args(["oracle-kendall", "--n", "6", "--cases", "50"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("PASS"), "{stdout}");
    assert!(stdout.contains("0 mismatch(es)"), "{stdout}");
}

#[test]
fn table1_writes_expected_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("t1");
    let output = Command::new(BIN)
        .args(["table1", "--seed", "3", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(out.join("report.csv").is_file());
    assert!(out.join("aggregate.csv").is_file());
    for i in 0..10 {
        assert!(out.join(format!("run_{i}")).join("ledger.csv").is_file());
        assert!(out
            .join(format!("run_{i}"))
            .join("quarantine.csv")
            .is_file());
    }
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("flagged: E, J"), "{stdout}");
}
