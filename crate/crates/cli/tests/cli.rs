use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_vocalsel"));
    c.env_remove("VOCALSEL_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn vocalsel")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// The error object is the last stderr line; warnings may precede it.
fn error_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let last = text.lines().rfind(|l| !l.trim().is_empty()).expect("stderr is empty");
    serde_json::from_str(last).expect("stderr ends with JSON")
}

fn fixture(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(rel)
        .display()
        .to_string()
}

/// A 50-utterance synthetic corpus and its extracted dataset, built once.
fn dataset() -> &'static Path {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap().keep();
        let corpus = dir.join("corpus");
        let o = run(&["synth", "--out", corpus.to_str().unwrap(), "--per-class", "10", "--seed", "3"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = dir.join("data.csv");
        let o = run(&[
            "extract",
            "--manifest",
            corpus.join("manifest.csv").to_str().unwrap(),
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        csv
    })
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = run(&["rank", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["select", "--strategy", "sideways", "--inputs", "a.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn operation_error_is_json_on_stderr() {
    let o = run(&["evaluate", "--dataset", "/nonexistent/data.csv"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = error_json(&o);
    assert_eq!(v["error"], "io");
    assert!(v["message"].as_str().is_some_and(|m| !m.is_empty()));
}

#[test]
fn special_rejects_p_not_below_m() {
    let knn = fixture("rankings/knn_savee.csv");
    let o = run(&["select", "--strategy", "special", "--m", "10", "--p", "10", "--inputs", &knn, &knn]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = error_json(&o);
    assert_eq!(v["error"], "bad_cutoffs");
}

#[test]
fn select_common_on_knn_fixtures() {
    let inputs = ["polish", "savee", "serbian"].map(|d| fixture(&format!("rankings/knn_{d}.csv")));
    let mut args = vec!["select", "--strategy", "common", "--m", "22", "--inputs"];
    args.extend(inputs.iter().map(String::as_str));
    let o = run(&args);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result_labels"], serde_json::json!(["x33", "x84"]));
    assert_eq!(v["strategy"], "common");
}

#[test]
fn select_full_groups_by_classifier() {
    let mut files = vec![];
    for c in ["knn", "msvm", "nn"] {
        for d in ["polish", "savee", "serbian"] {
            files.push(fixture(&format!("rankings/{c}_{d}.csv")));
        }
    }
    let mut args = vec!["select", "--strategy", "full", "--inputs"];
    args.extend(files.iter().map(String::as_str));
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let labels: Vec<&str> = v["result_labels"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    // each per-classifier set must contain the result
    for c in ["knn", "msvm", "nn"] {
        let per: Vec<String> = ["polish", "savee", "serbian"]
            .iter()
            .map(|d| fixture(&format!("rankings/{c}_{d}.csv")))
            .collect();
        let mut a = vec!["select", "--strategy", "lang-indep", "--inputs"];
        a.extend(per.iter().map(String::as_str));
        let w: Value = serde_json::from_str(&stdout(&run(&a))).unwrap();
        let set: Vec<&str> = w["result_labels"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
        assert!(labels.iter().all(|l| set.contains(l)), "{c}: {labels:?} vs {set:?}");
    }
}

#[test]
fn rank_ig_has_84_rows() {
    let o = run(&["rank", "--dataset", dataset().to_str().unwrap(), "--method", "IG"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let labels: Vec<String> = rows.records().map(|r| r.unwrap()[1].to_string()).collect();
    assert_eq!(labels.len(), 84);
    let mut sorted = labels.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), 84);
}

#[test]
fn evaluate_all_knn_kfold() {
    let o = run(&[
        "evaluate",
        "--dataset",
        dataset().to_str().unwrap(),
        "--subset",
        "all",
        "--classifier",
        "knn",
        "--cv",
        "kfold:10",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let acc = v["accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
    assert_eq!(v["n_samples"], 50);
    assert_eq!(v["features"].as_array().unwrap().len(), 84);
}

#[test]
fn rank_knn_is_deterministic_across_runs_and_threads() {
    let d = dataset().to_str().unwrap();
    let a = run(&["rank", "--dataset", d, "--classifier", "knn", "--cv", "kfold:5", "--seed", "7"]);
    let b = run(&["--jobs", "4", "rank", "--dataset", d, "--classifier", "knn", "--cv", "kfold:5", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn synth_then_extract_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut out = vec![];
    for (i, jobs) in ["1", "3"].iter().enumerate() {
        let corpus = dir.path().join(format!("c{i}"));
        let csv = dir.path().join(format!("d{i}.csv"));
        let o = run(&["--jobs", jobs, "synth", "--out", corpus.to_str().unwrap(), "--per-class", "2", "--seed", "11"]);
        assert!(o.status.success());
        let o = run(&[
            "--jobs",
            jobs,
            "extract",
            "--manifest",
            corpus.join("manifest.csv").to_str().unwrap(),
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        out.push(std::fs::read(csv).unwrap());
    }
    assert_eq!(out[0], out[1]);
}

#[test]
fn extract_reports_unreadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    assert!(run(&["synth", "--out", corpus.to_str().unwrap(), "--per-class", "1"]).status.success());
    std::fs::write(corpus.join("broken.wav"), b"not a wav").unwrap();
    let manifest = corpus.join("manifest.csv");
    let mut text = std::fs::read_to_string(&manifest).unwrap();
    let corpus_id = text.lines().nth(1).unwrap().split(',').next().unwrap().to_string();
    text.push_str(&format!("{corpus_id},broken.wav,anger\n"));
    std::fs::write(&manifest, text).unwrap();
    let csv = dir.path().join("d.csv");
    let o = run(&["extract", "--manifest", manifest.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = error_json(&o);
    assert_eq!(v["error"], "extraction_failures");
    assert_eq!(v["details"].as_array().unwrap().len(), 1);
    let rows = std::fs::read_to_string(csv).unwrap().lines().count();
    assert_eq!(rows, 1 + 5);
}

#[test]
fn spectrogram_writes_square_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    assert!(run(&["synth", "--out", corpus.to_str().unwrap(), "--per-class", "1"]).status.success());
    let img = dir.path().join("s.pgm");
    let wav = corpus.join("fear/fear_000.wav");
    let o = run(&["spectrogram", "--wav", wav.to_str().unwrap(), "--out", img.to_str().unwrap(), "--side", "64"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(img).unwrap();
    assert!(bytes.starts_with(b"P5\n64 64\n255\n"));
    assert_eq!(bytes.len(), 13 + 64 * 64);
}

#[test]
fn train_writes_loadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let o = run(&[
        "train",
        "--dataset",
        dataset().to_str().unwrap(),
        "--subset",
        "x21,x24",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(model).unwrap()).unwrap();
    assert!(v.is_object());
}

#[test]
fn config_env_var_is_read() {
    let o = bin()
        .env("VOCALSEL_CONFIG", "/nonexistent/extract.cfg")
        .args(["extract", "--manifest", "/nonexistent/m.csv", "--out", "/tmp/x.csv"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let v: Value = error_json(&o);
    assert_eq!(v["error"], "io");
}
