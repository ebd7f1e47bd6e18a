use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use obsplan::commands::{run_compare, run_plan, ObjectiveArg};
use obsplan::config::{parse_scenario, ScenarioFile};
use obsplan::report::parse_traces_csv;
use obsplan_core::eval::{compare, preset, CompareOptions};
use obsplan_core::gramian::MeasureKind;
use serde_json::Value;

fn obsplan(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obsplan"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("NO_COLOR", "1")
        .output()
        .unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn plan_cov_descends_from_preset_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("a.json");
    fs::write(&cfg, ScenarioFile::from_config(&preset("A").unwrap()).to_json()).unwrap();
    let out = tmp.path().join("run");
    let o = obsplan(&["plan", cfg.to_str().unwrap(), "--objective", "cov"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert!(r["objective_value"].as_f64().unwrap() <= r["initial_objective"].as_f64().unwrap());
    for f in [
        "scenario.json",
        "report.json",
        "traces.csv",
        "trajectory.csv",
        "plot_traces.svg",
        "plot_paths.svg",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn negative_sensor_noise_exits_with_field_name() {
    let tmp = tempfile::tempdir().unwrap();
    let mut file: Value = serde_json::from_str(&ScenarioFile::from_config(&preset("A").unwrap()).to_json()).unwrap();
    file["sigma_nu"] = Value::from(-1.0);
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, file.to_string()).unwrap();
    let o = obsplan(&["plan", cfg.to_str().unwrap()], &tmp.path().join("run"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma_nu"));
}

#[test]
fn unknown_field_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut file: Value = serde_json::from_str(&ScenarioFile::from_config(&preset("B").unwrap()).to_json()).unwrap();
    file["sigma_v"] = Value::from(0.1);
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, file.to_string()).unwrap();
    let o = obsplan(&["compare", cfg.to_str().unwrap()], &tmp.path().join("run"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma_v"));
}

#[test]
fn plan_og_writes_one_row_per_step() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = obsplan(&["plan", "--preset", "B", "--objective", "og:condition_number"], &out);
    assert!(o.status.success());
    let csv = fs::read_to_string(out.join("traces.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
    assert_eq!(csv.lines().next(), Some("t,initial,og"));
}

#[test]
fn compare_a_plots_three_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    assert!(obsplan(&["compare", "--preset", "A"], &out).status.success());
    let svg = fs::read_to_string(out.join("plot_paths.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert_eq!(
        fs::read_to_string(out.join("traces.csv")).unwrap().lines().next(),
        Some("t,initial,og,cov")
    );
    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().next(), Some("t,x,y,arm"));
    assert_eq!(traj.lines().count(), 1 + 3 * 8);
}

#[test]
fn compare_c_reports_gap_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    assert!(obsplan(&["compare", "--preset", "C"], &out).status.success());
    let r = report(&out);
    let cum = |i: usize| r["arms"][i]["cumulative_trace"].as_f64().unwrap();
    let gap = r["gap_ratio"].as_f64().unwrap();
    assert_eq!(gap, (cum(1) - cum(2)) / cum(2));
    assert!(r["og_exceeds_initial"].is_boolean());
    assert!(r["tool_version"].is_string());
}

#[test]
fn neg_trace_objective_is_constant_across_restarts() {
    let s = preset("B").unwrap();
    let value = |restarts: usize| {
        let opts = CompareOptions {
            restarts,
            seed: 3,
            ..CompareOptions::default()
        };
        compare(&s, MeasureKind::NegTrace, &opts)
            .unwrap()
            .og
            .plan
            .unwrap()
            .objective_value
    };
    let base = value(0);
    for k in [1, 4] {
        assert!((value(k) - base).abs() <= 1e-9);
    }
}

#[test]
fn sweep_shares_initial_and_cov_arms() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let o = obsplan(&["sweep", "--preset", "A", "--measures", "all"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for m in MeasureKind::ALL {
        assert!(out.join(m.name()).join("report.json").is_file(), "{m}");
    }
    let dirs = fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().is_dir())
        .count();
    assert_eq!(dirs, 7);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let rows: Vec<Vec<&str>> = summary.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0], ["measure", "initial", "og", "cov", "gap_ratio"]);
    assert!(rows[1..].iter().all(|r| r[3] == rows[1][3] && r[1] == rows[1][1]));
}

#[test]
fn traces_csv_round_trips_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let s = preset("B").unwrap();
    let opts = CompareOptions::default();
    run_compare(&s, MeasureKind::ConditionNumber, &opts, tmp.path()).unwrap();
    let (header, cols) = parse_traces_csv(&fs::read_to_string(tmp.path().join("traces.csv")).unwrap()).unwrap();
    assert_eq!(header, ["t", "initial", "og", "cov"]);
    let c = compare(&s, MeasureKind::ConditionNumber, &opts).unwrap();
    assert_eq!(cols[0], c.initial.traces);
    assert_eq!(cols[1], c.og.traces);
    assert_eq!(cols[2], c.cov.traces);
}

#[test]
fn scenario_echo_reproduces_report() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    let objective: ObjectiveArg = "og:trace_inverse".parse().unwrap();
    run_plan(&preset("C").unwrap(), objective, &CompareOptions::default(), &first).unwrap();
    let echoed = parse_scenario(&fs::read_to_string(first.join("scenario.json")).unwrap()).unwrap();
    run_plan(&echoed, objective, &CompareOptions::default(), &second).unwrap();
    for f in ["report.json", "traces.csv", "trajectory.csv", "scenario.json"] {
        assert_eq!(
            fs::read(first.join(f)).unwrap(),
            fs::read(second.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn bad_objective_and_missing_config_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        obsplan(&["plan", "--preset", "A", "--objective", "og:nope"], tmp.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(obsplan(&["compare"], tmp.path()).status.code(), Some(2));
}
