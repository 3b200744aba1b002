use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cspa_core::model::fit;
use cspa_core::Trace;

fn cspa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cspa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn triple_writes_three_traces() {
    let dir = tempfile::tempdir().unwrap();
    let o = cspa(&["--out", path(dir.path()), "simulate", "--strategy", "triple"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["uncompensated", "with_movement", "no_movement"] {
        assert!(dir.path().join(format!("{name}.csv")).exists());
    }
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn single_strategy_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = cspa(&["--out", path(dir.path()), "simulate", "--strategy", "counter_movement", "--emit", "plotdata"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = Trace::load(dir.path().join("counter_movement.csv")).unwrap();
    assert_eq!(t.strategy_label(), "channel static antenna");
    assert!(stdout(&o).is_empty());
}

#[test]
fn unknown_strategy_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = cspa(&["--out", path(dir.path()), "simulate", "--strategy", "sideways"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_scenario_file() {
    let o = cspa(&["simulate", "--scenario", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/scenario.toml"));
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = cspa(&["--seed", "99", "--out", path(d.path()), "simulate"]);
        assert!(o.status.success());
    }
    for name in ["uncompensated.csv", "with_movement.csv", "no_movement.csv", "summary.txt"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }
}

#[test]
fn stdout_matches_golden_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = cspa(&["--seed", "2450", "--out", path(dir.path()), "simulate", "--emit", "summary"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), include_str!("golden/simulate_triple_summary.txt"));
}

#[test]
fn scenario_file_round_trip_and_typo() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("clutter.toml");
    let o = cspa(&["scenario", "--clutter"]);
    assert!(o.status.success());
    fs::write(&file, stdout(&o)).unwrap();
    let o = cspa(&["--out", path(dir.path()), "simulate", "--scenario", path(&file)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let typo = stdout(&cspa(&["scenario"])).replace("speed_mps", "sped_mps");
    fs::write(&file, typo).unwrap();
    let o = cspa(&["--out", path(dir.path()), "simulate", "--scenario", path(&file)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sped_mps"), "{}", stderr(&o));
}

#[test]
fn invalid_values_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.toml");
    let text = stdout(&cspa(&["scenario"])).replace("speed_mps = 0.1", "speed_mps = -0.1");
    fs::write(&file, text).unwrap();
    let o = cspa(&["--out", path(dir.path()), "simulate", "--scenario", path(&file)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("run.speed_mps"));
}

#[test]
fn analyze_default_traces_gives_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    cspa(&["--out", path(dir.path()), "simulate", "--emit", "trace"]);
    let files: Vec<String> = ["uncompensated", "with_movement", "no_movement"]
        .iter()
        .map(|n| dir.path().join(format!("{n}.csv")).to_string_lossy().into_owned())
        .collect();
    let mut args = vec!["--format", "csv", "analyze"];
    args.extend(files.iter().map(String::as_str));
    let o = cspa(&args);
    assert!(o.status.success());
    let out = stdout(&o);
    let labels: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        labels,
        [
            "regular (wrapped 2pi)",
            "regular (not wrapped)",
            "channel static partner antenna",
            "no movement"
        ]
    );
}

#[test]
fn analyze_constant_trace() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("flat.csv");
    let o = cspa(&["model", "gen", "--var-amp", "0", "--var-phase", "0", "-n", "50", "--output", path(&file)]);
    assert!(o.status.success());
    let o = cspa(&["--format", "csv", "analyze", path(&file)]);
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let cols: Vec<f64> = row.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
    assert_eq!((cols[1], cols[2], cols[4], cols[5]), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn corrupted_trace_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    cspa(&["--out", path(dir.path()), "simulate", "--strategy", "with_movement", "--emit", "trace"]);
    let file = dir.path().join("with_movement.csv");
    let mut lines: Vec<String> = fs::read_to_string(&file).unwrap().lines().map(String::from).collect();
    lines[9] = "8,garbage".into();
    fs::write(&file, lines.join("\n")).unwrap();
    let o = cspa(&["analyze", path(&file)]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains(":10:"), "{}", stderr(&o));
}

#[test]
fn model_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("gen.csv");
    let o = cspa(&["--seed", "5", "model", "gen", "--var-phase", "0.0049", "-n", "100000", "--output", path(&file)]);
    assert!(o.status.success());
    let o = cspa(&["model", "fit", path(&file)]);
    assert!(o.status.success());
    let params = cspa_core::model::ModelParams::parse(&stdout(&o)).unwrap();
    assert!((params.var_phase_rad2 / 0.0049 - 1.0).abs() < 0.05);
    assert!((params.var_amp_db2 / 0.5711 - 1.0).abs() < 0.05);
}

#[test]
fn model_gen_without_noise_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.csv");
    cspa(&["model", "gen", "--var-amp", "0", "--var-phase", "0", "-n", "200", "--output", path(&file)]);
    let t = Trace::load(&file).unwrap();
    let h = t.coefficients();
    assert!(h.iter().all(|x| *x == h[0]));
    let (_, r) = fit(&t).unwrap();
    assert_eq!((r.var_amp(), r.var_phase()), (0.0, 0.0));
}

#[test]
fn model_gen_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("iv.csv");
    let o = cspa(&["model", "gen", "--var-amp", "0", "--var-phase", "0", "-n", "30", "--intervals", "3", "--output", path(&file)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let h = Trace::load(&file).unwrap().coefficients();
    for chunk in h.chunks(10) {
        assert!(chunk.iter().all(|x| *x == chunk[0]));
    }
    assert_ne!(h[0], h[10]);
}

#[test]
fn fit_on_single_sample_fails() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("one.csv");
    cspa(&["model", "gen", "-n", "1", "--output", path(&file)]);
    let o = cspa(&["model", "fit", path(&file)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn negative_variance_is_rejected() {
    let o = cspa(&["model", "gen", "--var-amp", "-0.5", "--output", "/tmp/never.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compare_prints_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let o = cspa(&["scenario", "--clutter"]);
    let file = dir.path().join("clutter.toml");
    fs::write(&file, stdout(&o)).unwrap();
    cspa(&["--out", path(dir.path()), "simulate", "--scenario", path(&file), "--emit", "trace"]);
    let o = cspa(&[
        "--format",
        "csv",
        "compare",
        path(&dir.path().join("with_movement.csv")),
        path(&dir.path().join("uncompensated.csv")),
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    for metric in ["var_db", "var_phase"] {
        let line = out.lines().find(|l| l.starts_with(metric)).unwrap();
        assert!(line.ends_with("channel static partner antenna"), "{line}");
    }
}
