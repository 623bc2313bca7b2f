use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qdgate::config::RunConfig;
use qdgate::experiments::SWEEP_CSV_HEADER;
use qdgate::geometry::PATH_CSV_HEADER;
use qdgate::lindblad::TRAJECTORY_CSV_HEADER;
use qdgate::report::sig9;

fn qdgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdgate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Data rows of a CSV with `#` metadata lines, header dropped.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn header(csv: &str) -> &str {
    csv.lines().find(|l| !l.starts_with('#')).unwrap()
}

fn printed(out: &str, label: &str) -> String {
    out.lines()
        .find(|l| l.starts_with(label))
        .unwrap_or_else(|| panic!("no `{label}` line in\n{out}"))[label.len()..]
        .split_whitespace()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = qdgate(&["--config", "/nonexistent/run.conf", "gate"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("Usage:"));
}

#[test]
fn unknown_key_and_subcommand_are_rejected() {
    let out = qdgate(&["--cavity.gama", "1", "gate"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("cavity.gama"));
    assert_eq!(code(&qdgate(&["teleport"])), 1);
    assert_eq!(code(&qdgate(&["phases", "--model.delta"])), 1);
}

#[test]
fn zero_detuning_is_refused() {
    let out = qdgate(&["phases", "--model.delta", "0"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("zero detuning"));
}

#[test]
fn phases_close_the_loop() {
    let out = qdgate(&["phases"]);
    assert_eq!(code(&out), 0);
    let csv = stdout(&out);
    assert_eq!(header(&csv), PATH_CSV_HEADER);
    let data = rows(&csv);
    assert_eq!(data.len(), 1000);
    let last = data.last().unwrap();
    assert!(last[2].hypot(last[3]) <= 1e-12);
    let d = RunConfig::default().derived().unwrap();
    let expected = -2.0 * PI * d.epsilon().norm_sqr() / (d.delta() * d.delta());
    assert!((last[8] - expected).abs() <= 1e-12 * expected.abs());
}

#[test]
fn zero_loops_give_a_header_only_csv() {
    let out = qdgate(&["phases", "--phases.loops=0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), format!("{PATH_CSV_HEADER}\n"));
}

#[test]
fn check_exit_codes() {
    let ok = qdgate(&["check"]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    assert_eq!(stdout(&ok).lines().filter(|l| l.starts_with("PASS")).count(), 8);

    let fault = qdgate(&["check", "--inject-fault"]);
    assert_eq!(code(&fault), 2);
    let text = stdout(&fault);
    let failed: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].contains("phase_ratio_gg_fg"));

    let tight = qdgate(&["check", "--tolerance", "1e-30"]);
    assert_eq!(code(&tight), 3);
    assert!(stdout(&tight).contains("tolerance-induced"));

    let via_key = qdgate(&["check", "--check.inject_fault", "true"]);
    assert_eq!(code(&via_key), 2);
}

#[test]
fn lossless_gate_is_ideal() {
    let out = qdgate(&["gate"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mean: f64 = printed(&text, "mean fidelity").parse().unwrap();
    assert!(mean >= 0.9999, "{text}");
    assert_eq!(printed(&text, "loops l"), "25");
    assert!(!text.contains("reference"));
}

#[test]
fn lossy_gate_prints_the_reference_comparison() {
    let out = qdgate(&["gate", "--cavity.gamma_factor", "1", "--run.states", "50"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("reference") && l.contains("99.98 %")), "{text}");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# wide loop\nmodel.delta = 0.2\nrun.states = 10\nrun.seed = 5\n").unwrap();

    let from_file = stdout(&qdgate(&["--config", conf.to_str().unwrap(), "phases", "--phases.samples", "2"]));
    let overridden = stdout(&qdgate(&[
        "--config",
        conf.to_str().unwrap(),
        "phases",
        "--phases.samples",
        "2",
        "--model.delta",
        "0.025",
    ]));
    let default = stdout(&qdgate(&["phases", "--phases.samples", "2"]));
    assert_ne!(from_file, default);
    assert_eq!(overridden, default);

    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "model.delta 0.2\n").unwrap();
    assert_eq!(code(&qdgate(&["--config", bad.to_str().unwrap(), "phases"])), 1);
}

#[test]
fn decay_sweep_is_monotone_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path, workers: &'static str| {
        vec![
            "sweep-decay".to_string(),
            "--output".into(),
            p.to_str().unwrap().into(),
            "--workers".into(),
            workers.into(),
        ]
    };
    let run = |v: Vec<String>| {
        let v: Vec<&str> = v.iter().map(String::as_str).collect();
        assert_eq!(code(&qdgate(&v)), 0);
    };
    run(args(&a, "1"));
    run(args(&b, "3"));
    let csv = fs::read_to_string(&a).unwrap();
    assert_eq!(csv, fs::read_to_string(&b).unwrap());
    assert_eq!(header(&csv), SWEEP_CSV_HEADER);
    let data = rows(&csv);
    assert_eq!(data.len(), 5);
    for w in data.windows(2) {
        assert!(w[1][1] <= w[0][1]);
    }
    assert!(csv.contains("# mode = effective"));
}

#[test]
fn fluctuation_row_zero_matches_the_gate() {
    let common = ["--cavity.gamma_factor", "1", "--run.states", "40", "--seed", "11"];
    let mut sweep = vec!["sweep-fluct", "--sweep.parameter", "omega", "--sweep.zetas", "0, 0.02, 0.04"];
    sweep.extend(common);
    let out = qdgate(&sweep);
    assert_eq!(code(&out), 0);
    let data = rows(&stdout(&out));
    assert_eq!(data.len(), 3);
    assert!(data[2][1] <= data[1][1] && data[1][1] <= data[0][1]);

    let mut gate = vec!["gate"];
    gate.extend(common);
    let g = stdout(&qdgate(&gate));
    assert_eq!(printed(&g, "mean fidelity"), sig9(data[0][1]));
}

#[test]
fn all_classes_write_one_file_each() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fluct.csv");
    let res = qdgate(&[
        "sweep-fluct",
        "-o",
        out.to_str().unwrap(),
        "--sweep.zetas=0,0.04",
        "--run.states=8",
    ]);
    assert_eq!(code(&res), 0);
    for p in ["g", "omega", "delta_laser", "delta_cavity", "epsilon"] {
        let csv = fs::read_to_string(dir.path().join(format!("fluct_{p}.csv"))).unwrap();
        assert!(csv.contains(&format!("# parameter = {p}")));
        assert_eq!(rows(&csv).len(), 2);
    }
    assert!(!out.exists());
}

#[test]
fn trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let out = qdgate(&[
        "gate",
        "--run.states",
        "4",
        "--run.trajectory",
        path.to_str().unwrap(),
        "--run.trajectory_every",
        "500",
    ]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(&path).unwrap();
    assert_eq!(header(&csv), TRAJECTORY_CSV_HEADER);
    let data = rows(&csv);
    assert_eq!(data.len(), 11);
    assert_eq!(data[0][0], 0.0);
    for r in &data {
        assert!((r[2] - 1.0).abs() < 1e-9);
        let pops: f64 = r[3..7].iter().sum();
        assert!((pops - 1.0).abs() < 1e-9);
    }
}

#[test]
fn verify_effective_small() {
    let out = qdgate(&[
        "verify-effective",
        "--verify.fock_cutoff",
        "4",
        "--verify.scales",
        "1, 2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = stdout(&out);
    assert_eq!(header(&csv), qdgate::experiments::VERIFY_CSV_HEADER);
    let data = rows(&csv);
    assert_eq!(data.len(), 2);
    assert!(data[1][8] < data[0][8]);
    assert!(stderr(&out).contains("monotone decrease: yes"));
}

#[test]
fn verify_effective_refuses_intractable_runs() {
    let out = qdgate(&["verify-effective", "--verify.regime", "configured"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("intractable"));
}

#[test]
fn keys_lists_every_key() {
    let out = stdout(&qdgate(&["keys"]));
    assert_eq!(out.lines().count(), qdgate::config::KEYS.len());
    assert!(out.contains("cavity.fock_cutoff"));
}
