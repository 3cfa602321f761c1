//! CLI contract tests: schema selection, idempotence, failure reporting,
//! and exit codes, all through the real binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn kgain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgain")).args(args).output().expect("failed to run kgain")
}

fn run_ok(args: &[&str]) -> Output {
    let out = kgain(args);
    assert!(
        out.status.success(),
        "kgain {:?} exited with {:?}\nstdout:\n{}\nstderr:\n{}",
        args,
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// A 12-session corpus plus a config pointing at it.
fn setup() -> (TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let spec = root.join("spec.json");
    std::fs::write(
        &spec,
        r#"{
  "n_sessions": 12,
  "frames_per_session": 2,
  "effect_map": [{"feature": "c_word", "direction": 1.0, "strength": 1.0}],
  "noise_level": 0.25,
  "seed": 99
}
"#,
    )
    .unwrap();
    let corpus = root.join("corpus");
    run_ok(&["synth", "--spec", spec.to_str().unwrap(), "--out", corpus.to_str().unwrap()]);
    let config = root.join("config.toml");
    std::fs::write(
        &config,
        format!(
            r#"corpus_root = "{}"
seed = 5
repetitions = 2
folds = 3

[grid]
n_trees = [25]
max_depth = [0]
min_samples_split = [2]
max_features = ["sqrt"]
"#,
            corpus.display()
        ),
    )
    .unwrap();
    (dir, corpus, config)
}

fn header_columns(features_csv: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(features_csv).unwrap();
    text.lines().next().unwrap().split(',').map(|s| s.to_string()).collect()
}

#[test]
fn mi_extract_writes_exactly_13_feature_columns() {
    let (_dir, _corpus, config) = setup();
    let out = config.parent().unwrap().join("out_mi");
    run_ok(&[
        "extract",
        "--config",
        config.to_str().unwrap(),
        "--features",
        "mi",
        "--out",
        out.to_str().unwrap(),
    ]);
    let columns = header_columns(&out.join("features.csv"));
    assert_eq!(columns[0], "participant_id");
    assert_eq!(columns.len(), 14);
    assert_eq!(
        &columns[1..],
        [
            "mm_heading",
            "mm_menubar",
            "mm_contentlist",
            "mm_text",
            "mm_image",
            "mm_background",
            "mm_avg_imgsize",
            "img_infovis",
            "img_infographic",
            "img_indoor",
            "img_map",
            "img_outdoor",
            "img_techdraw"
        ]
    );
}

#[test]
fn ti_extract_writes_text_columns_only() {
    let (_dir, _corpus, config) = setup();
    let out = config.parent().unwrap().join("out_ti");
    run_ok(&[
        "extract",
        "--config",
        config.to_str().unwrap(),
        "--features",
        "ti",
        "--out",
        out.to_str().unwrap(),
    ]);
    let columns = header_columns(&out.join("features.csv"));
    assert_eq!(columns[0], "participant_id");
    assert!(columns.len() > 1);
    for col in &columns[1..] {
        assert!(
            col.starts_with("c_") || col.starts_with("h_") || col.starts_with("l_"),
            "unexpected TI column {col}"
        );
    }
    assert_eq!(columns.last().unwrap(), "l_AllPunc");
    assert!(columns.iter().any(|c| c == "l_nature"));
}

#[test]
fn extract_reruns_are_byte_identical() {
    let (_dir, _corpus, config) = setup();
    let root = config.parent().unwrap();
    let out = root.join("out");
    run_ok(&["extract", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let first = std::fs::read(out.join("features.csv")).unwrap();
    run_ok(&["extract", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let second = std::fs::read(out.join("features.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn train_echoes_chosen_params_and_rejects_missing_labels() {
    let (_dir, _corpus, config) = setup();
    let out = config.parent().unwrap().join("out");
    let args = ["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    run_ok(&[&["extract"], &args[..]].concat());
    run_ok(&[&["label"], &args[..]].concat());
    let train = run_ok(&[&["train"], &args[..]].concat());
    let stdout = String::from_utf8_lossy(&train.stdout);
    assert!(stdout.contains("best params: n_trees=25"), "missing params echo:\n{stdout}");

    // drop one labeled participant; training must now fail and say who
    let labels_path = out.join("labels.csv");
    let labels = std::fs::read_to_string(&labels_path).unwrap();
    let kept: Vec<&str> = labels.lines().collect();
    let dropped = kept[kept.len() - 1].split(',').next().unwrap().to_string();
    std::fs::write(&labels_path, format!("{}\n", kept[..kept.len() - 1].join("\n"))).unwrap();
    let fail = kgain(&[&["train"], &args[..]].concat());
    assert!(!fail.status.success());
    let stderr = String::from_utf8_lossy(&fail.stderr);
    assert!(
        stderr.contains("no label for participant") && stderr.contains(&dropped),
        "unhelpful mismatch error:\n{stderr}"
    );
}

#[test]
fn importance_scores_sum_to_one() {
    let (_dir, _corpus, config) = setup();
    let out = config.parent().unwrap().join("out");
    let args = ["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    for cmd in ["extract", "label", "train", "importance"] {
        run_ok(&[&[cmd], &args[..]].concat());
    }
    let csv = std::fs::read_to_string(out.join("importance.csv")).unwrap();
    let total: f64 = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-9, "importance sums to {total}");
}

#[test]
fn failed_session_is_reported_and_exits_nonzero() {
    let (_dir, corpus, config) = setup();
    // strand s0003 on navigation pages only; its extraction must fail
    std::fs::write(
        corpus.join("s0003").join("timeline.csv"),
        "start_ms,end_ms,url\n0,60000,https://www.google.com/search?q=s0003\n",
    )
    .unwrap();
    let out = config.parent().unwrap().join("out");
    let result = kgain(&[
        "extract",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!result.status.success());
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("s0003"), "failure does not name the session:\n{stderr}");

    // surviving rows are still written
    let text = std::fs::read_to_string(out.join("features.csv")).unwrap();
    assert_eq!(text.lines().count(), 12, "expected header plus 11 surviving rows");
    assert!(!text.contains("s0003"));
}

#[test]
fn flag_overrides_reach_the_pipeline() {
    let (_dir, _corpus, config) = setup();
    let root = config.parent().unwrap();
    let out = root.join("out");
    let args = ["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    run_ok(&[&["extract", "--dwell-weighted"], &args[..]].concat());
    run_ok(&[&["label"], &args[..]].concat());

    // nested evaluation re-tunes per fold and still renders all three rows
    let eval = run_ok(&[&["evaluate", "--nested"], &args[..]].concat());
    let stdout = String::from_utf8_lossy(&eval.stdout);
    for row in ["MI&TI", "TI", "MI"] {
        assert!(stdout.contains(row), "missing row {row}:\n{stdout}");
    }

    // a different seed must change the trained model
    run_ok(&[&["train", "--seed", "5"], &args[..]].concat());
    let model_a = std::fs::read(out.join("model.json")).unwrap();
    run_ok(&[&["train", "--seed", "6"], &args[..]].concat());
    let model_b = std::fs::read(out.join("model.json")).unwrap();
    assert_ne!(model_a, model_b);

    // and the manifest must echo the resolved seed
    let manifest = std::fs::read_to_string(out.join("run-manifest-train.json")).unwrap();
    assert!(manifest.contains("\"seed\": 6"), "manifest does not echo the seed:\n{manifest}");
}

#[test]
fn warnings_do_not_change_the_exit_code() {
    let (_dir, corpus, config) = setup();
    // make one indexed page unreadable; the loader warns and moves on
    let pages = corpus.join("s0001").join("pages");
    let index = std::fs::read_to_string(pages.join("index.csv")).unwrap();
    let nav_file = index
        .lines()
        .find(|l| l.contains("google"))
        .and_then(|l| l.rsplit(',').next())
        .unwrap();
    std::fs::remove_file(pages.join(nav_file)).unwrap();

    let out = config.parent().unwrap().join("out");
    let result = run_ok(&[
        "extract",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("warning:"), "expected a loader warning:\n{stderr}");
}
