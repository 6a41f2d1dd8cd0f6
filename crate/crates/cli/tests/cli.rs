use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn etpa(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etpa"))
        .args(args)
        .current_dir(cwd)
        .env_remove("ETPA_THREADS")
        .output()
        .expect("binary runs")
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const EXAMPLE_A: &str = r#"{
    "version": 1,
    "levels": { "intermediate_wavelengths_nm": [563, 612] },
    "source": { "pump_wavelength_nm": 405, "entanglement_time_ps": 0.87 },
    "tuning": { "kind": "linear", "slope": 2.0, "reference": 25.0 },
    "output": { "directory": "results" }
}"#;

#[test]
fn simulate_fft_reconstruct_recovers_example_a() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "a.json", EXAMPLE_A);
    let cfg = cfg.to_str().unwrap();
    for stage in ["simulate", "fft"] {
        let out = etpa(&[stage, "--config", cfg], dir.path());
        assert!(
            out.status.success(),
            "{stage}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let results = dir.path().join("results");
    for f in [
        "signal.csv",
        "signal.meta.json",
        "spectrum.csv",
        "spectrum.meta.json",
        "run.json",
    ] {
        assert!(results.join(f).exists(), "{f}");
    }
    let out = etpa(&["reconstruct", "--config", cfg], dir.path());
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(results.join("report.json")).unwrap()).unwrap();
    let mut lambdas: Vec<f64> = report["reconstruction"]["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["lambda"].as_f64().unwrap())
        .collect();
    lambdas.sort_by(f64::total_cmp);
    assert_eq!(lambdas.len(), 2);
    assert!(
        (lambdas[0] - 563.0).abs() < 2.0 && (lambdas[1] - 612.0).abs() < 2.0,
        "{lambdas:?}"
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("563.0"));
    assert!(results.join("report.txt").exists());
}

#[test]
fn csv_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "a.json", EXAMPLE_A);
    let cfg = cfg.to_str().unwrap();
    let mut runs = Vec::new();
    for (out, threads) in [("r1", "1"), ("r2", "3")] {
        let o = etpa(
            &["simulate", "--config", cfg, "--out", out, "--threads", threads],
            dir.path(),
        );
        assert!(o.status.success());
        runs.push(std::fs::read(dir.path().join(out).join("signal.csv")).unwrap());
    }
    assert!(runs[0] == runs[1]);
}

#[test]
fn tuning_curve_branches_meet_at_degeneracy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "a.json", EXAMPLE_A);
    let out = etpa(
        &["tuning-curve", "--config", cfg.to_str().unwrap(), "--out", "tc"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("tc/tuning_curve.csv")).unwrap();
    let row = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .find(|r| r[0] == 25.0)
        .unwrap();
    assert!(
        (row[1] - 810.0).abs() < 1e-9 && (row[2] - 810.0).abs() < 1e-9,
        "{row:?}"
    );
}

#[test]
fn jsa_needs_a_pulse() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "a.json", EXAMPLE_A);
    let cfg = cfg.to_str().unwrap();
    assert_eq!(etpa(&["jsa", "--config", cfg], dir.path()).status.code(), Some(1));
    let out = etpa(
        &[
            "jsa",
            "--config",
            cfg,
            "--pulse-duration",
            "4",
            "--samples",
            "64",
            "--out",
            "j",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(dir.path().join("j/jsa_tp4_T25.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(etpa(&["simulate"], dir.path()).status.code(), Some(1));
    assert_eq!(etpa(&["nonsense"], dir.path()).status.code(), Some(1));
    assert_eq!(
        etpa(&["simulate", "--config", "missing.json"], dir.path())
            .status
            .code(),
        Some(1)
    );

    let off = config(
        dir.path(),
        "off.json",
        &EXAMPLE_A.replace(
            r#""intermediate_wavelengths_nm": [563, 612]"#,
            r#""intermediate_wavelengths_nm": [563], "final_wavelength_nm": 404"#,
        ),
    );
    let out = etpa(&["simulate", "--config", off.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resonance"));
    assert!(!dir.path().join("results").exists(), "no data files on error");

    let dark = config(
        dir.path(),
        "dark.json",
        &EXAMPLE_A.replace(r#"[563, 612] }"#, r#"[563, 612], "dipoles": [[0, 0], [0, 0]] }"#),
    );
    let out = etpa(&["simulate", "--config", dark.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
