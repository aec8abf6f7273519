use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn imbrisk(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imbrisk"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn positive_rate(path: &Path) -> (f64, usize) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let t = header.iter().position(|h| *h == "target").unwrap();
    let (mut pos, mut n) = (0usize, 0usize);
    for l in lines {
        n += 1;
        if l.split(',').nth(t).unwrap() == "1" {
            pos += 1;
        }
    }
    (pos as f64 / n as f64, n)
}

const SMALL: &str = r#"
seed = 17
output = "run"
[synthetic]
n = 300
d = 4
[grid]
folds = 3
ratios = [0.3, 0.5]
methods = ["RUS", "SMOTE"]
[linear]
lambda_grid = [0.01]
[bagging]
n_estimators = 4
[boosting]
n_estimators = 4
"#;

#[test]
fn help_for_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["generate", "preprocess", "resample", "train", "score", "experiment", "report"] {
        let out = imbrisk(&[sub, "--help"], dir.path());
        ok(&out);
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
    }
    assert_eq!(imbrisk(&["bogus"], dir.path()).status.code(), Some(1));
}

#[test]
fn generate_is_deterministic_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    ok(&imbrisk(&["generate", "--seed", "5", "-o", "a.csv"], dir.path()));
    ok(&imbrisk(&["generate", "--seed", "5", "-o", "b.csv"], dir.path()));
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    let (rate, n) = positive_rate(&dir.path().join("a.csv"));
    assert_eq!(n, 1000);
    assert!((rate - 0.074).abs() < 1e-12);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next().unwrap().split(',').count(), 11);

    let out = imbrisk(&["generate", "--seed", "5", "--positive-rate", "0", "-o", "c.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("positive_rate"));
    let out = imbrisk(&["generate", "-o", "c.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn resample_hits_ratio_and_rejects_unknown_methods() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&imbrisk(&["generate", "--seed", "2", "-o", "demo.csv"], d));
    ok(&imbrisk(
        &["resample", "-i", "demo.csv", "--method", "SMOTE", "--ratio", "0.5", "--seed", "3", "-o", "smote.csv"],
        d,
    ));
    let (rate, n) = positive_rate(&d.join("smote.csv"));
    assert!((rate - 0.5).abs() <= 1.0 / n as f64);

    let out = imbrisk(
        &["resample", "-i", "demo.csv", "--method", "FANCY", "--ratio", "0.5", "--seed", "3", "-o", "x.csv"],
        d,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!d.join("x.csv").exists());

    let cfg = SMALL.replace("[synthetic]\nn = 300\nd = 4\n", "[data]\npath = \"smote.csv\"\n");
    fs::write(d.join("cfg.toml"), cfg).unwrap();
    ok(&imbrisk(&["experiment", "-c", "cfg.toml"], d));
    assert!(d.join("run/report.json").exists());
}

#[test]
fn experiment_writes_layout_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("cfg.toml"), SMALL).unwrap();
    ok(&imbrisk(&["experiment", "-c", "cfg.toml", "--workers", "1"], d));
    let run = d.join("run");
    for f in ["report.json", "grid.csv", "importance.csv", "optimal_model.json", "scores.csv"] {
        assert!(run.join(f).exists(), "{f} missing");
    }
    assert!(!run.join("INCOMPLETE").exists());
    assert_eq!(fs::read_dir(run.join("pca")).unwrap().count(), 3);
    assert!(fs::read_dir(run.join("roc")).unwrap().count() >= 4);
    let grid = fs::read_to_string(run.join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 3 * (1 + 4) + 2);

    let report: serde_json::Value = serde_json::from_slice(&fs::read(run.join("report.json")).unwrap()).unwrap();
    let label = report["optimal_model"]["label"].as_str().unwrap();
    assert!(label.starts_with("LR_") || label.starts_with("L1LR_") || label.starts_with("DT_"));
    assert!(label.contains('%'));

    ok(&imbrisk(&["experiment", "-c", "cfg.toml", "--workers", "3", "-o", "run2"], d));
    assert_eq!(
        fs::read(run.join("report.json")).unwrap(),
        fs::read(d.join("run2/report.json")).unwrap()
    );

    let out = imbrisk(&["report", "run"], d);
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains(label));
}

#[test]
fn score_reproduces_run_scores_and_names_missing_columns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&imbrisk(&["generate", "--seed", "17", "--n", "300", "--d", "4", "-o", "data.csv"], d));
    let cfg = SMALL.replace("[synthetic]\nn = 300\nd = 4\n", "[data]\npath = \"data.csv\"\n");
    fs::write(d.join("cfg.toml"), cfg).unwrap();
    ok(&imbrisk(&["experiment", "-c", "cfg.toml"], d));
    ok(&imbrisk(&["score", "-m", "run/optimal_model.json", "-i", "data.csv", "-o", "scored.csv"], d));

    let scored = fs::read_to_string(d.join("scored.csv")).unwrap();
    let input = fs::read_to_string(d.join("data.csv")).unwrap();
    let run_scores = fs::read_to_string(d.join("run/scores.csv")).unwrap();
    assert_eq!(scored.lines().count(), input.lines().count());
    for ((s, i), r) in scored.lines().zip(input.lines()).zip(run_scores.lines()).skip(1) {
        let (prefix, score) = s.rsplit_once(',').unwrap();
        assert_eq!(prefix, i);
        assert_eq!(score, r.rsplit_once(',').unwrap().1);
    }
    assert!(scored.lines().next().unwrap().ends_with(",score"));

    let narrow: String = input
        .lines()
        .map(|l| l.split(',').skip(1).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(d.join("narrow.csv"), narrow).unwrap();
    let out = imbrisk(&["score", "-m", "run/optimal_model.json", "-i", "narrow.csv", "-o", "bad.csv"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x1"));
}

#[test]
fn train_and_preprocess_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&imbrisk(&["generate", "--seed", "4", "--n", "200", "--d", "3", "-o", "data.csv"], d));
    ok(&imbrisk(
        &[
            "train", "-i", "data.csv", "--seed", "1", "--classifier", "DT", "--ensemble", "boosting", "--method", "SMOTE",
            "--ratio", "0.5", "-o", "m.json",
        ],
        d,
    ));
    let model: serde_json::Value = serde_json::from_slice(&fs::read(d.join("m.json")).unwrap()).unwrap();
    assert_eq!(model["label"], "DT_SMOTE_50%_boosting");
    let out = imbrisk(&["train", "-i", "data.csv", "--seed", "1", "--classifier", "SVM", "-o", "m2.json"], d);
    assert_eq!(out.status.code(), Some(1));

    ok(&imbrisk(&["preprocess", "-i", "data.csv", "-o", "pre.csv", "--stats", "stats.json"], d));
    let stats: serde_json::Value = serde_json::from_slice(&fs::read(d.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["kept_names"].as_array().unwrap().len(), 3);

    let out = imbrisk(&["experiment", "--seed", "1", "-o", "r", "-i", "missing.csv"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(d.join("r/INCOMPLETE").exists());
}
