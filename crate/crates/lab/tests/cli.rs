use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use loewner_lab::commands::{DriveResult, EnergyResult, LoopEnergyResult, MinimizeResult, RegularityResult, Report};
use loewner_lab::formats::CurveFile;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loewner-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("LOEWNER_LAB_CONFIG")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let o = lab(dir, args);
    assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

/// Parses a report and checks that serializing it again reproduces the file.
fn report<T: Serialize + DeserializeOwned>(path: PathBuf) -> Report<T> {
    let text = fs::read_to_string(&path).unwrap();
    let r: Report<T> = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", text, "{} does not round-trip", path.display());
    r
}

fn csv_rows(path: PathBuf) -> Vec<Vec<f64>> {
    let mut rd = csv::Reader::from_path(path).unwrap();
    rd.records().map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect()
}

fn driving_csv(dir: &Path, name: &str, f: impl Fn(f64) -> f64, n: usize) -> String {
    let mut text = String::from("t,W\n");
    for i in 0..=n {
        let t = i as f64 / n as f64;
        text += &format!("{t},{}\n", f(t));
    }
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

#[test]
fn zero_driving_traces_the_imaginary_axis() {
    let d = tempfile::tempdir().unwrap();
    let f = driving_csv(d.path(), "zero.csv", |_| 0.0, 64);
    ok(d.path(), &["trace", &f, "--out", "tr"]);
    for row in csv_rows(d.path().join("tr/trace.csv")) {
        assert!(row[1].abs() < 1e-10 && (row[2] - 2.0 * row[0].sqrt()).abs() < 1e-10, "{row:?}");
    }
}

#[test]
fn square_root_driving_traces_a_ray() {
    let d = tempfile::tempdir().unwrap();
    let k = 4.0 / 3f64.sqrt();
    let f = driving_csv(d.path(), "sqrt.csv", |t| k * t.sqrt(), 200);
    ok(d.path(), &["trace", &f, "--out", "tr"]);
    // |B(4/√3)| = 2·3^{1/4}, arg B = π/4
    let b = 2.0 * 3f64.powf(0.25);
    let last = csv_rows(d.path().join("tr/trace.csv")).pop().unwrap();
    assert!((last[1] - b * (PI / 4.0).cos() * last[0].sqrt()).abs() < 1e-3, "{last:?}");
    assert!((last[2] - b * (PI / 4.0).sin() * last[0].sqrt()).abs() < 1e-3, "{last:?}");
}

#[test]
fn trace_then_drive_recovers_the_driving_function() {
    let d = tempfile::tempdir().unwrap();
    let f = driving_csv(d.path(), "lin.csv", |t| 0.3 * t, 512);
    ok(d.path(), &["trace", &f, "--out", "tr", "--steps", "512"]);
    ok(d.path(), &["drive", "tr/curve.json", "--out", "dr"]);
    let err = csv_rows(d.path().join("dr/driving.csv")).iter().map(|r| (r[1] - 0.3 * r[0]).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-2, "{err}");
    let r: Report<DriveResult> = report(d.path().join("dr/report.json"));
    assert!(r.result.round_trip_error.unwrap() < 1e-6);
    assert_eq!(r.inputs[0].name, "curve.json");
}

#[test]
fn vertical_segment_has_zero_driving() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["catalog", "vertical", "-p", "height=2", "-n", "64"]);
    ok(d.path(), &["drive", "vertical.json", "--out", "dr"]);
    assert!(csv_rows(d.path().join("dr/driving.csv")).iter().all(|r| r[1].abs() < 1e-6));
}

#[test]
fn circle_loop_energy_report() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["catalog", "circle", "-p", "radius=2", "-p", "cx=1", "-n", "256"]);
    ok(d.path(), &["loop-energy", "circle.json", "--root", "37", "--out", "le"]);
    let r: Report<LoopEnergyResult> = report(d.path().join("le/report.json"));
    assert!(r.result.energy.0 <= 0.05);
    assert_eq!(r.result.root_index, 37);
    assert_eq!(csv_rows(d.path().join("le/partials.csv")).len(), r.config.eps_schedule.len());
}

#[test]
fn ray_energy_is_infinite() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["catalog", "ray", "-p", "theta=pi/8", "-n", "128"]);
    ok(d.path(), &["energy", "ray.json", "--out", "en"]);
    let text = fs::read_to_string(d.path().join("en/report.json")).unwrap();
    assert!(text.contains(r#""energy": "inf""#));
    let r: Report<EnergyResult> = report(d.path().join("en/report.json"));
    assert!(r.result.diverged);
    // rate k²/8 with k² = 16/15 for θ = π/8
    let rate = r.result.divergence_rate.unwrap();
    assert!((rate - 2.0 / 15.0).abs() < 0.01, "{rate}");
}

#[test]
fn minimize_chord_at_sixty_degrees() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("p.json"), r#"{"kind": "chord", "version": 1, "phi": 1.0471975511965976, "r": 2.0}"#)
        .unwrap();
    ok(d.path(), &["minimize", "p.json", "--out", "mn"]);
    let r: Report<MinimizeResult> = report(d.path().join("mn/report.json"));
    let exact = -8.0 * (PI / 3.0).sin().ln();
    assert!((r.result.energy.0 - exact).abs() <= 0.02 * exact);
    assert!(r.result.converged);
    let curve: CurveFile = serde_json::from_str(&fs::read_to_string(d.path().join("mn/curve.json")).unwrap()).unwrap();
    assert!(curve.samples().is_ok());
}

#[test]
fn regularity_of_c1beta_curve() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["catalog", "c1beta", "-p", "beta=0.75", "-p", "a=0.5", "-n", "1024"]);
    ok(d.path(), &["regularity", "c1beta.json", "--out", "rg"]);
    let r: Report<RegularityResult> = report(d.path().join("rg/report.json"));
    assert_eq!(r.result.quantity, "derivative");
    assert!(r.result.exponent_error <= 0.1, "{:?}", r.result);
    assert!(r.result.bound_ratio <= 16.0 / (3f64.sqrt() * PI));
}

#[test]
fn exit_codes_follow_failure_classes() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    fs::write(p.join("bad.json"), "{ not json").unwrap();
    assert_eq!(code(&lab(p, &["drive", "bad.json"])), 2);
    assert_eq!(code(&lab(p, &["drive", "missing.json"])), 2);
    assert_eq!(code(&lab(p, &["catalog", "spiral"])), 2);
    assert_eq!(code(&lab(p, &["catalog", "circle", "-p", "radius=-1"])), 2);
    ok(p, &["catalog", "arc", "-n", "64"]);
    assert_eq!(code(&lab(p, &["loop-energy", "arc.json"])), 2);
    ok(p, &["catalog", "circle", "-n", "64"]);
    assert_eq!(code(&lab(p, &["loop-energy", "circle.json", "--eps-schedule", "0.1,0.2"])), 2);

    let crossing = r#"{"version": 1, "kind": "chord-in-H",
        "points": [[0, 0], [0, 1], [0, 2], [1, 2], [1, 1], [-1, 1], [-1, 3], [-1, 4]]}"#;
    fs::write(p.join("cross.json"), crossing).unwrap();
    let o = lab(p, &["drive", "cross.json"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unconverged_minimizer_exits_with_four() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    fs::write(p.join("tri.json"), r#"{"kind": "loop", "version": 1, "points": [[1, 0], [-0.5, 1.2], [-0.7, -0.9]]}"#)
        .unwrap();
    let o = lab(p, &["minimize", "tri.json", "--tolerance", "1e-14", "--out", "mn"]);
    assert_eq!(code(&o), 4);
    assert!(p.join("mn/report.json").exists());
}

#[test]
fn outputs_are_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["catalog", "ellipse", "-n", "128"]);
    let mut runs = Vec::new();
    for _ in 0..2 {
        ok(p, &["loop-energy", "ellipse.json", "--out", "le", "--seed", "5"]);
        ok(p, &["catalog", "ray", "-n", "64", "--out", "c"]);
        ok(p, &["drive", "c/ray.json", "--out", "dr", "--seed", "5"]);
        let files = ["le/report.json", "le/partials.csv", "dr/report.json", "dr/driving.csv", "c/ray.json"];
        runs.push(files.map(|f| fs::read(p.join(f)).unwrap()));
    }
    assert!(runs[0] == runs[1]);
}

#[test]
fn config_file_and_environment_fallback() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    fs::write(p.join("cfg.json"), r#"{"eps_schedule": [0.1, 0.05, 0.025, 0.0125], "seed": 7}"#).unwrap();
    ok(p, &["catalog", "circle", "-n", "128"]);
    let o = Command::new(env!("CARGO_BIN_EXE_loewner-lab"))
        .args(["loop-energy", "circle.json", "--out", "env"])
        .current_dir(p)
        .env("LOEWNER_LAB_CONFIG", p.join("cfg.json"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let r: Report<LoopEnergyResult> = report(p.join("env/report.json"));
    assert_eq!(r.config.eps_schedule, vec![0.1, 0.05, 0.025, 0.0125]);
    assert_eq!(r.config.seed, 7);
    assert_eq!(serde_json::to_value(r.eps_schedule_source).unwrap(), "config-file");

    ok(
        p,
        &[
            "loop-energy",
            "circle.json",
            "--config",
            "cfg.json",
            "--eps-schedule",
            "0.2,0.1,0.05,0.025",
            "--out",
            "flag",
        ],
    );
    let r: Report<LoopEnergyResult> = report(p.join("flag/report.json"));
    assert_eq!(r.result.eps_schedule, vec![0.2, 0.1, 0.05, 0.025]);
    assert_eq!(serde_json::to_value(r.eps_schedule_source).unwrap(), "flag");

    fs::write(p.join("typo.json"), r#"{"eps_shedule": [0.1]}"#).unwrap();
    assert_eq!(code(&lab(p, &["catalog", "circle", "--config", "typo.json"])), 2);
}

#[test]
fn batch_runs_jobs_in_isolated_directories() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["catalog", "circle", "-n", "128"]);
    ok(p, &["catalog", "ellipse", "-n", "128"]);
    let manifest = r#"{"version": 1, "jobs": [
        {"name": "circle", "args": ["loop-energy", "circle.json"]},
        {"name": "ellipse", "args": ["loop-energy", "ellipse.json", "--root", "10"]},
        {"name": "broken", "args": ["drive", "nowhere.json"]}
    ]}"#;
    fs::write(p.join("jobs.json"), manifest).unwrap();
    let o = lab(p, &["batch", "jobs.json", "--out", "runs"]);
    assert_eq!(code(&o), 2);
    let summary: Report<Vec<loewner_lab::batch::JobStatus>> = report(p.join("runs/batch.json"));
    let names: Vec<&str> = summary.result.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, ["circle", "ellipse", "broken"]);
    assert_eq!(summary.result.iter().map(|s| s.exit_code).collect::<Vec<_>>(), [0, 0, 2]);
    let c: Report<LoopEnergyResult> = report(p.join("runs/circle/report.json"));
    let e: Report<LoopEnergyResult> = report(p.join("runs/ellipse/report.json"));
    assert!(c.result.energy.0 < e.result.energy.0);
    assert_eq!(e.result.root_index, 10);

    fs::write(p.join("dup.json"), r#"{"version": 1, "jobs": [{"name": "a", "args": ["catalog", "circle"]}, {"name": "a", "args": ["catalog", "circle"]}]}"#).unwrap();
    assert_eq!(code(&lab(p, &["batch", "dup.json"])), 2);
    fs::write(
        p.join("out.json"),
        r#"{"version": 1, "jobs": [{"name": "a", "args": ["catalog", "circle", "--out", "x"]}]}"#,
    )
    .unwrap();
    assert_eq!(code(&lab(p, &["batch", "out.json"])), 2);
}
