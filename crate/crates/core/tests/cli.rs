use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qkr(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkr"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("QKR_OUTPUT_ROOT")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn evolve_zero_horizon_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = qkr(&["evolve", "--set", "horizon=0", "--set", "basis_size=32"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "t,S_vN,S_lin,purity,lambda_1,lambda_2,lambda_3,lambda_4,lambda_5,lambda_6,E");
    assert!(lines[1].starts_with("0,0,0,1,1,0,"));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "evolve");
    assert_eq!(meta["status"], "completed");
    assert_eq!(meta["config"]["horizon"], 0);
}

#[test]
fn top_k_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("three.toml");
    fs::write(
        &cfg,
        "basis_size = 16\nhorizon = 3\n\n[interaction]\nkind = \"nearest-neighbor\"\nstrength = 0.1\n\n\
         [rotors.1]\ntau = 1\nkick_strength = 1.0\nkick_phase = 0.1\n\
         [rotors.2]\ntau = 2\nkick_strength = 0.5\nkick_phase = 0.2\n\
         [rotors.3]\ntau = 3\nkick_strength = 0.0\nkick_phase = 0.0\n",
    )
    .unwrap();
    let o = qkr(&["evolve", "--config", cfg.to_str().unwrap(), "--top-k", "2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,S_vN,S_lin,purity,lambda_1,lambda_2,E");
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn missing_config_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = qkr(&["evolve", "--config", "/nonexistent/qkr.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("i/o error"));
}

#[test]
fn invalid_config_reports_failures() {
    let dir = tempfile::tempdir().unwrap();
    let o = qkr(&["evolve", "--set", "basis_size=3", "--set", "rotors.2.tau=1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("odd basis size"), "{err}");
    assert!(err.contains("duplicate tau ratio 1"), "{err}");
}

#[test]
fn scan_and_sweep_argument_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = qkr(&["resonance-scan", "--eps", "1e-5,2e-5"], dir.path());
    assert_eq!(o.status.code(), Some(64), "{}", stderr(&o));
    let o = qkr(&["sweep-coupling", "--couplings", "0.05"], dir.path());
    assert_eq!(o.status.code(), Some(64), "{}", stderr(&o));
}

#[test]
fn oracle_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let o = qkr(&["oracle", "--set", "basis_size=8"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("oracle.json")).unwrap()).unwrap();
    assert!(report["state_deviation"].as_f64().unwrap() <= 1e-10);
    let o = qkr(&["oracle", "--set", "basis_size=64"], dir.path());
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn analytic_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let o = qkr(&["compare-analytic", "--analytic-only", "--set", "horizon=20"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("analytic.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,S_lin_analytic");
    assert_eq!(csv.lines().count(), 22);

    let o = qkr(
        &["compare-analytic", "--set", "horizon=20", "--set", "basis_size=64", "--set", "rotors.1.kick_strength=0", "--set", "rotors.2.kick_strength=0"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("analytic.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - v[2]).abs() < 1e-10, "{line}");
    }

    let o = qkr(&["compare-analytic", "--set", "interaction.kind=nearest-neighbor"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let runs: Vec<Vec<u8>> = ["1", "2"]
        .iter()
        .map(|w| {
            let dir = tempfile::tempdir().unwrap();
            let o = qkr(
                &[
                    "sweep-coupling",
                    "--couplings",
                    "0.2,0.05,0.1,0.15",
                    "--fixed-horizon",
                    "--workers",
                    w,
                    "--set",
                    "basis_size=128",
                    "--set",
                    "horizon=100",
                    "--set",
                    "rotors.1.kick_strength=0",
                    "--set",
                    "rotors.2.kick_strength=0",
                ],
                dir.path(),
            );
            assert!(o.status.success(), "{}", stderr(&o));
            fs::read(dir.path().join("sweep.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let text = String::from_utf8(runs[0].clone()).unwrap();
    let ks: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ks, ["0.05", "0.1", "0.15", "0.2"]);
}
