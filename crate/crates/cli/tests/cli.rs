use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gfmm::dataio::save_model_named;
use gfmm::{Hyperbox, HyperparamConfig, TrainStats, TrainedModel};
use tempfile::TempDir;

fn gfmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfmm"))
        .args(args)
        .output()
        .expect("run gfmm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Two tight clusters per class in 2-D, label last.
fn clusters(dir: &Path) -> PathBuf {
    let mut text = String::from("x,y,class\n");
    for i in 0..20 {
        let d = i as f64 * 0.004;
        text.push_str(&format!("{},{},a\n", 0.1 + d, 0.1 + d));
        text.push_str(&format!("{},{},a\n", 0.1 + d, 0.9 - d));
        text.push_str(&format!("{},{},b\n", 0.9 - d, 0.9 - d));
        text.push_str(&format!("{},{},b\n", 0.9 - d, 0.1 + d));
    }
    let path = dir.join("clusters.csv");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn train_then_predict_round_trip() {
    let dir = TempDir::new().unwrap();
    let csv = clusters(dir.path());
    let model = dir.path().join("model.json");
    let out = gfmm(&[
        "train",
        "--data",
        s(&csv),
        "--algo",
        "iol",
        "--out",
        s(&model),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("boxes: "));

    let preds = dir.path().join("pred.csv");
    let out = gfmm(&[
        "predict",
        "--model",
        s(&model),
        "--data",
        s(&csv),
        "--out",
        s(&preds),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&preds).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("label,score,tie_broken,actual"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 80);
    let hits = rows.iter().filter(|r| r[0] == r[3]).count();
    // a single box per class would score 0.5 on this layout
    assert_eq!(hits, 80);
}

#[test]
fn every_algorithm_trains_from_the_command_line() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("m.json");
    for algo in ["onln", "iol", "agglo-sm", "agglo-2"] {
        let out = gfmm(&[
            "train",
            "--data",
            s(&data("iris.csv")),
            "--algo",
            algo,
            "--measure",
            "mid-min",
            "--out",
            s(&model),
        ]);
        assert!(
            out.status.success(),
            "{algo}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(fs::read_to_string(&model).unwrap().contains("\"boxes\""));
    }
}

#[test]
fn zero_theta_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = gfmm(&[
        "train",
        "--data",
        s(&data("iris.csv")),
        "--algo",
        "iol",
        "--theta",
        "0",
        "--out",
        s(&dir.path().join("m.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_data_file_fails_cleanly() {
    let dir = TempDir::new().unwrap();
    let out = gfmm(&[
        "train",
        "--data",
        "/nonexistent.csv",
        "--algo",
        "iol",
        "--out",
        s(&dir.path().join("m.json")),
    ]);
    assert!(!out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
}

fn tie_model(dir: &Path) -> PathBuf {
    let model = TrainedModel::new(
        vec![
            Hyperbox::new(vec![0.125], vec![0.25], 0, 3).unwrap(),
            Hyperbox::new(vec![0.5], vec![0.625], 1, 1).unwrap(),
        ],
        HyperparamConfig::uniform(0.1, 0.8, 1),
        TrainStats::default(),
    )
    .unwrap();
    let path = dir.join("tie.json");
    save_model_named(&model, Some(&["A".to_string(), "B".to_string()]), &path).unwrap();
    path
}

#[test]
fn cardinality_tie_break_picks_the_larger_class() {
    let dir = TempDir::new().unwrap();
    let model = tie_model(dir.path());
    let csv = dir.path().join("q.csv");
    fs::write(&csv, "x,class\n0.375,B\n").unwrap();
    let out = gfmm(&[
        "predict",
        "--model",
        s(&model),
        "--data",
        s(&csv),
        "--no-normalize",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("A,0.9,true"), "{row}");

    let out = gfmm(&[
        "predict",
        "--model",
        s(&model),
        "--data",
        s(&csv),
        "--no-normalize",
        "--tie",
        "first",
    ]);
    assert!(stdout(&out).lines().nth(1).unwrap().starts_with("A,"));
}

#[test]
fn empty_input_gives_header_only() {
    let dir = TempDir::new().unwrap();
    let model = tie_model(dir.path());
    let csv = dir.path().join("empty.csv");
    fs::write(&csv, "x,class\n").unwrap();
    let out = gfmm(&["predict", "--model", s(&model), "--data", s(&csv)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(stdout(&out).trim_end().lines().count(), 1);
}

#[test]
fn unlabelled_input_predicts() {
    let dir = TempDir::new().unwrap();
    let model = tie_model(dir.path());
    let csv = dir.path().join("u.csv");
    fs::write(&csv, "x\n0.375\n0.2\n").unwrap();
    let out = gfmm(&[
        "predict",
        "--model",
        s(&model),
        "--data",
        s(&csv),
        "--no-normalize",
        "--no-label",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "label,score,tie_broken");
    assert!(lines[2].starts_with("A,1,false"), "{}", lines[2]);
}

#[test]
fn verify_reports_no_violations() {
    let out = gfmm(&["verify", "--trials", "20000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("lemma1: trials: 20000"));
    assert_eq!(text.matches("violations: 0").count(), 5, "{text}");
}

#[test]
fn verify_rejects_zero_trials() {
    assert_eq!(gfmm(&["verify", "--trials", "0"]).status.code(), Some(2));
}

#[test]
fn verify_json_parses() {
    let out = gfmm(&[
        "verify",
        "--trials",
        "2000",
        "--gamma",
        "1,2,12",
        "--measure",
        "shortest",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["gamma"].as_array().unwrap().len(), 3);
    assert!(reports.iter().all(|r| r["violations"] == 0));
}

#[test]
fn bench_writes_report_and_prunes_balance_scale() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.csv");
    let summary = dir.path().join("summary.csv");
    let out = gfmm(&[
        "bench",
        "--data",
        s(&data("balance_scale.csv")),
        "--algos",
        "iol,agglo-2",
        "--protocol",
        "1x2cv",
        "--report",
        s(&report),
        "--summary",
        s(&summary),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let mut rdr = csv::Reader::from_path(&report).unwrap();
    let header = rdr.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    // 2 algorithms x 2 folds x accelerated on/off
    assert_eq!(rows.len(), 8);
    for r in &rows {
        let candidates: u64 = r[col("candidates")].parse().unwrap();
        if &r[col("accelerated")] == "true" {
            assert_eq!(candidates, 0);
        } else {
            assert!(candidates > 0);
        }
    }

    let mut rdr = csv::Reader::from_path(&summary).unwrap();
    let header = rdr.headers().unwrap().clone();
    let ratio = header.iter().position(|h| h == "candidate_ratio").unwrap();
    for r in rdr.records() {
        assert_eq!(r.unwrap()[ratio].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn bench_ratio_never_exceeds_one() {
    let dir = TempDir::new().unwrap();
    let csv = clusters(dir.path());
    let summary = dir.path().join("summary.csv");
    let out = gfmm(&[
        "bench",
        "--data",
        s(&csv),
        "--protocol",
        "2x2cv",
        "--measures",
        "longest,mid-max",
        "--report",
        s(&dir.path().join("r.csv")),
        "--summary",
        s(&summary),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut rdr = csv::Reader::from_path(&summary).unwrap();
    let header = rdr.headers().unwrap().clone();
    let ratio = header.iter().position(|h| h == "candidate_ratio").unwrap();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[ratio].parse::<f64>().unwrap() <= 1.0));
}
