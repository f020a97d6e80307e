use std::path::{Path, PathBuf};
use std::process::Command;

use qsource::config::{ChannelKind, ChannelSpec};
use qsource::run::VerdictRecord;
use qsource::{emit_report, load_config, run_experiment, ReportFormat, MAX_DENSE_DIM_ENV};

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn qsource(args: &[&str], env: &[(&str, &str)]) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qsource"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn qsource")
}

#[test]
fn iid_source_passes_everything() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = config_path("iid.toml");
    let run = qsource(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out,
            "--n-max",
            "400",
        ],
        &[],
    );
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );

    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["config"]["n_max"], 400);
    assert!(report["failures"].as_array().unwrap().is_empty());

    let mut rows = csv::Reader::from_path(dir.path().join("decay.csv")).unwrap();
    let headers = rows.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        [
            "pair",
            "i",
            "corr_real",
            "corr_imag",
            "target",
            "abs_deviation",
            "cesaro_mean"
        ]
    );
    let pairs = report["pairs"].as_array().unwrap().len();
    let records: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 400 * pairs);
    assert!(records
        .iter()
        .all(|r| r[5].parse::<f64>().unwrap() <= 1e-15));
    assert!(dir.path().join("timing.json").exists());
}

#[test]
fn period_two_weak_mixing_fails_and_names_the_pair() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("period2_weak.toml");
    let run = qsource(
        &[
            "-c",
            cfg.to_str().unwrap(),
            "-o",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(run.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
    let failures = report["failures"].as_array().unwrap();
    assert!(failures.iter().any(|f| f["test"] == "weak_mixing"
        && f["subject"] == "P0@0|P0@0"
        && f["verdict"] == "fail"));
}

#[test]
fn period_two_sweep_is_ergodic_but_not_weakly_mixing() {
    let mut cfg = load_config(&config_path("period2_weak.toml")).unwrap();
    cfg.tests = vec![
        qsource::config::TestKind::Ergodic,
        qsource::config::TestKind::Weak,
    ];
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.aggregate.ergodic_mean, Some(VerdictRecord::Pass));
    assert_eq!(report.aggregate.weak_mixing, Some(VerdictRecord::Fail));
}

#[test]
fn mixture_stays_non_ergodic_after_depolarizing() {
    let mut cfg = load_config(&config_path("mixture.toml")).unwrap();
    cfg.channel = Some(ChannelSpec {
        kind: ChannelKind::Depolarizing { p: 0.3 },
        block: 1,
    });
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.aggregate.ergodic_mean, Some(VerdictRecord::Fail));
    assert_eq!(report.aggregate.implication_consistent, Some(true));
}

#[test]
fn non_stationary_start_fails_only_stationarity() {
    let cfg = load_config(&config_path("nonstationary_start.toml")).unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert!(!report.pass);
    assert!(report.failures.iter().all(|f| f.test == "stationarity"));
    assert!(report
        .checks
        .iter()
        .filter(|c| c.check == qsource::run::CheckKind::Consistency)
        .all(|c| c.pass));
}

#[test]
fn block_channel_checks_pass_with_shifts() {
    let cfg = load_config(&config_path("block_unitary.toml")).unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert!(report.pass, "{:?}", report.failures);
    assert!(report
        .checks
        .iter()
        .all(|c| c.m % 2 == 0 && c.padding % 2 == 0));
    assert!(report
        .checks
        .iter()
        .any(|c| c.check == qsource::run::CheckKind::ShiftStationarity));
}

#[test]
fn emitting_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load_config(&config_path("markov.toml")).unwrap();
    cfg.n_max = 200;
    cfg.checks.max_sites = 4;
    let report = run_experiment(&cfg).unwrap();
    for (format, name) in [
        (ReportFormat::Json, "r.json"),
        (ReportFormat::CsvDecay, "d.csv"),
    ] {
        let (a, b) = (
            dir.path().join(format!("a{name}")),
            dir.path().join(format!("b{name}")),
        );
        emit_report(&report, format, &a).unwrap();
        emit_report(&report, format, &b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
    let mut again = run_experiment(&cfg).unwrap();
    again.wall_time = report.wall_time;
    assert_eq!(report, again);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        "d = 2\nseed = 1\nn_max = 0\n[source]\nkind = \"iid\"\nstate = { diagonal = [1.0, 0.0] }\n",
    )
    .unwrap();
    let run = qsource(
        &[
            "-c",
            bad.to_str().unwrap(),
            "-o",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("n_max"));

    std::fs::write(
        &bad,
        "d = 2\nseed = 1\n[source]\nkind = \"iid\"\nstate = { diagonal = [1.0, 0.0] }\nbogus = 1\n",
    )
    .unwrap();
    let run = qsource(
        &[
            "-c",
            bad.to_str().unwrap(),
            "-o",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(run.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&run.stderr);
    assert!(
        stderr.contains("bogus") && stderr.contains("line 3"),
        "{stderr}"
    );
}

#[test]
fn dense_cap_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("dense.toml");
    std::fs::write(
        &cfg,
        "d = 2\nseed = 1\nn_max = 3\nbackend = \"dense\"\ntests = [\"strong\"]\n\
         [source]\nkind = \"iid\"\nstate = { diagonal = [0.5, 0.5] }\n",
    )
    .unwrap();
    let args = [
        "-c",
        cfg.to_str().unwrap(),
        "-o",
        dir.path().to_str().unwrap(),
    ];
    assert_eq!(qsource(&args, &[]).status.code(), Some(0));
    let run = qsource(&args, &[(MAX_DENSE_DIM_ENV, "8")]);
    assert_eq!(run.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&run.stderr).contains("cap of 8"));
}
