use std::process::Command;

use fiberloop_cli::execute;
use fiberloop_cli::output::{CompareRow, McRow, ReferenceRow, SweepRow, TrajectoryRow};
use serde::de::DeserializeOwned;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["fiberloop"];
    argv.extend_from_slice(args);
    let code = execute(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn rows<T: DeserializeOwned>(csv_text: &str) -> Vec<T> {
    csv::Reader::from_reader(csv_text.as_bytes()).deserialize().collect::<Result<_, _>>().unwrap()
}

#[test]
fn run_unitary_csv() {
    let (code, out, _) =
        run(&["run", "--mode", "unitary", "--topology", "both", "--wl1", "0.9", "--steps", "5", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("n,time,topology,a,b,w_left,w_right\n"));
    let records: Vec<TrajectoryRow> = rows(&out);
    assert_eq!(records.len(), 5);
    assert!((records[4].w_left - 0.5).abs() < 5e-4);
    assert!(records.iter().all(|r| r.a.is_some() && r.b.is_some()));
}

#[test]
fn run_measure_right_half() {
    let (code, out, _) =
        run(&["run", "--mode", "measure", "--topology", "right-half", "--a1sq", "0.9", "--steps", "3"]);
    assert_eq!(code, 0);
    let records: Vec<TrajectoryRow> = rows(&out);
    for (r, expected) in records.iter().zip([0.9, 0.81, 0.729]) {
        assert!((r.w_left - expected).abs() < 1e-15);
        assert_eq!((r.a, r.b), (None, None));
    }
    // amplitude columns are empty, not zero
    assert!(out.lines().nth(1).unwrap().starts_with("1,1.0,right-half,,,"));
}

#[test]
fn run_with_switch_and_json() {
    let (code, out, _) = run(&[
        "run",
        "--wl1",
        "0.5",
        "--steps",
        "40",
        "--switch",
        "2:right-half",
        "--eps",
        "1e-6",
        "--period",
        "0.5",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["config"]["schedule"][0]["at_step"], 2);
    let records: Vec<TrajectoryRow> = serde_json::from_value(doc["records"].clone()).unwrap();
    assert_eq!(records[1].topology, fiberloop::Topology::RightHalfConnected);
    assert_eq!(records[3].time, 2.0);
    assert!(doc["summary"]["final_w_right"].as_f64().unwrap() > 1.0 - 1e-6);
    assert!(doc["summary"]["converged_at"].as_u64().unwrap() <= 10);
}

#[test]
fn config_errors_exit_2() {
    let (code, _, err) = run(&["run", "--wl1", "1.5", "--steps", "3"]);
    assert_eq!(code, 2);
    assert!(err.contains("w_left_initial out of range"), "{err}");

    let (code, _, err) = run(&["run", "--wl1", "0.5", "--a1sq", "0.5", "--steps", "3"]);
    assert_eq!(code, 2);
    assert!(err.contains("exactly one"), "{err}");

    let (code, _, err) = run(&["run", "--a1sq", "0.5", "--steps", "3", "--switch", "9:both"]);
    assert_eq!(code, 2);
    assert!(err.contains("schedule"), "{err}");

    let (code, _, _) = run(&["run", "--a1sq", "0.5", "--steps", "3", "--topology", "sideways"]);
    assert_eq!(code, 2);

    let (code, _, err) =
        run(&["mc", "--mode", "unitary", "--a1sq", "0.9", "--steps", "5", "--paths", "10", "--seed", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("unsupported mode for sampling"), "{err}");

    let (code, _, _) = run(&["mc", "--a1sq", "0.9", "--steps", "5", "--paths", "10"]);
    assert_eq!(code, 2, "mc requires --seed");

    let (code, _, err) = run(&["sweep", "--mode", "measure", "--grid", "0.1:0.9:0.1"]);
    assert_eq!(code, 2);
    assert!(err.contains("a1_squared"), "{err}");

    let (code, _, _) = run(&["compare", "--wl1", "1.0"]);
    assert_eq!(code, 2);
}

#[test]
fn paper_reports_all_three_sequences() {
    let (code, out, _) = run(&["paper", "--format", "csv"]);
    assert_eq!(code, 0);
    let records: Vec<ReferenceRow> = rows(&out);
    assert_eq!(records.len(), 12);
    assert!(records.iter().all(|r| r.within_tolerance));
    let flagged: Vec<_> = records.iter().filter(|r| r.beyond_rounding).map(|r| r.sequence.as_str()).collect();
    assert!(flagged.iter().all(|s| *s == "measure-0.9") && !flagged.is_empty());

    let (code, out, _) = run(&["paper", "--format", "json"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let bounds = [5e-4, 5e-3, 3e-3];
    for (seq, bound) in doc["summary"]["sequences"].as_array().unwrap().iter().zip(bounds) {
        assert!(seq["max_deviation"].as_f64().unwrap() <= bound);
    }
}

#[test]
fn compare_point_nine() {
    let (code, out, _) = run(&["compare", "--wl1", "0.9", "--eps", "1e-3"]);
    assert_eq!(code, 0);
    let records: Vec<CompareRow> = rows(&out);
    assert_eq!(records[0].unitary_steps, Some(5));
    assert_eq!(records[0].measurement_steps, Some(28));
}

#[test]
fn sweep_unitary_grid() {
    let (code, out, _) =
        run(&["sweep", "--mode", "unitary", "--topology", "both", "--grid", "0.05:0.95:0.05", "--eps", "1e-3"]);
    assert_eq!(code, 0);
    let records: Vec<SweepRow> = rows(&out);
    assert_eq!(records.len(), 19);
    assert!(records.iter().all(|r| r.converged && r.steps.unwrap() <= 8));
}

#[test]
fn mc_step_five() {
    let (code, out, _) =
        run(&["mc", "--a1sq", "0.9", "--topology", "both", "--steps", "5", "--paths", "100000", "--seed", "42"]);
    assert_eq!(code, 0);
    let records: Vec<McRow> = rows(&out);
    assert_eq!(records.len(), 5);
    assert!((records[4].w_left - 0.66384).abs() < 0.006);
    assert!(records.iter().all(|r| r.generator == "ChaCha8Rng" && r.seed == 42));
}

#[test]
fn csv_and_json_carry_the_same_records() {
    let args = ["run", "--mode", "measure", "--a1sq", "0.3", "--steps", "12", "--topology", "left-half"];
    let (_, csv_out, _) = run(&args);
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let (_, json_out, _) = run(&json_args);
    let from_csv: Vec<TrajectoryRow> = rows(&csv_out);
    let doc: serde_json::Value = serde_json::from_str(&json_out).unwrap();
    let from_json: Vec<TrajectoryRow> = serde_json::from_value(doc["records"].clone()).unwrap();
    assert_eq!(from_csv, from_json);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("fiberloop-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.csv");
    let (code, out, _) = run(&["run", "--wl1", "0.9", "--steps", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(rows::<TrajectoryRow>(&written).len(), 5);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_fiberloop");
    let ok = Command::new(bin).args(["run", "--wl1", "0.9", "--steps", "5"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin).args(["run", "--wl1", "1.5", "--steps", "5"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("w_left_initial out of range"));
}
