use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pedfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pedfuse")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TINY: [&str; 8] = ["--encoder-hidden", "4", "--decoder-hidden", "4", "--max-epochs", "2", "--seed", "3"];

fn tiny_corpus(root: &Path) -> PathBuf {
    let corpus = root.join("corpus");
    let o = pedfuse(&["generate", "--kinds", "all", "--n", "3", "--seed", "7", "--out", s(&corpus)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    corpus
}

fn train(corpus: &Path, out: &Path, cue: &str) {
    let mut args = vec!["train", "--corpus", s(corpus), "--out", s(out), "--cue", cue];
    args.extend(TINY);
    let o = pedfuse(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn generate_writes_scenes_manifest_and_map() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("corpus");
    let o = pedfuse(&["generate", "--kinds", "all", "--n", "50", "--seed", "7", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tracks = std::fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "tracks"))
        .count();
    assert_eq!(tracks, 150);
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.starts_with("pedfuse-corpus v1"));
    assert!(out.join("map.txt").is_file());
}

#[test]
fn generate_rejects_unknown_kind_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("corpus");
    let o = pedfuse(&["generate", "--kinds", "vehicle_yields,flying", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("flying"));
    assert!(!out.exists());
}

#[test]
fn missing_config_is_a_usage_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = pedfuse(&["train", "--config", "missing.cfg", "--corpus", s(dir.path()), "--out", s(&dir.path().join("o"))]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("missing.cfg"), "{}", stderr(&o));
}

#[test]
fn unknown_flags_and_subcommands_are_rejected() {
    assert_eq!(code(&pedfuse(&["generate", "--out", "x", "--bogus"])), 2);
    assert_eq!(code(&pedfuse(&["frobnicate"])), 2);
    assert_eq!(code(&pedfuse(&[])), 2);
}

#[test]
fn invalid_flag_values_fail_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = tiny_corpus(dir.path());
    let out = dir.path().join("out");
    let o = pedfuse(&["train", "--corpus", s(&corpus), "--out", s(&out), "--batch-size", "0"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(!out.exists());
    let o = pedfuse(&["generate", "--noise", "-1", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn help_lists_flags_with_units() {
    let o = pedfuse(&["--help"]);
    assert_eq!(code(&o), 0);
    for sub in ["generate", "train", "evaluate", "gradcheck", "plot", "experiment"] {
        assert!(stdout(&o).contains(sub), "top-level help lacks {sub}");
    }
    let train = stdout(&pedfuse(&["train", "--help"]));
    for flag in ["--learning-rate", "--batch-size", "--max-epochs", "--patience", "--encoder-hidden", "--clip-norm"] {
        assert!(train.contains(flag), "train help lacks {flag}");
    }
    for unit in ["[count]", "[units]", "[integer]"] {
        assert!(train.contains(unit), "train help lacks {unit}");
    }
    assert!(stdout(&pedfuse(&["generate", "--help"])).contains("[m]"));
    assert!(stdout(&pedfuse(&["gradcheck", "--help"])).contains("[parameter units]"));
}

#[test]
fn gradcheck_reports_and_exits_on_tolerance() {
    let o = pedfuse(&["gradcheck", "--hidden", "3", "--seed", "1", "--cue", "method2"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("max relative error"));
    let o = pedfuse(&["gradcheck", "--hidden", "3", "--cue", "baseline", "--tolerance", "1e-300"]);
    assert_eq!(code(&o), 4);
    let o = pedfuse(&["gradcheck", "--step", "0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn train_evaluate_plot_round() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = tiny_corpus(dir.path());
    let (base, fused) = (dir.path().join("base"), dir.path().join("fused"));
    train(&corpus, &base, "baseline");
    train(&corpus, &fused, "method2");
    for f in ["model.ckpt", "history.tsv", "split.txt", "config.txt"] {
        assert!(fused.join(f).is_file(), "missing {f}");
    }
    let config = std::fs::read_to_string(fused.join("config.txt")).unwrap();
    assert!(config.contains("max_epochs = 2"), "{config}");

    let report = dir.path().join("report");
    let o = pedfuse(&[
        "evaluate",
        "--corpus",
        s(&corpus),
        "--checkpoint",
        s(&base.join("model.ckpt")),
        "--checkpoint",
        s(&fused.join("model.ckpt")),
        "--out",
        s(&report),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tsv = std::fs::read_to_string(report.join("report.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 3);

    let svg = dir.path().join("bev.svg");
    let o = pedfuse(&[
        "plot",
        "--corpus",
        s(&corpus),
        "--checkpoint",
        s(&fused.join("model.ckpt")),
        "--baseline",
        s(&base.join("model.ckpt")),
        "--out",
        s(&svg),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") || text.starts_with("<?xml"));

    let o = pedfuse(&[
        "plot",
        "--corpus",
        s(&corpus),
        "--checkpoint",
        s(&fused.join("model.ckpt")),
        "--sample",
        "100000",
        "--out",
        s(&dir.path().join("none.svg")),
    ]);
    assert_eq!(code(&o), 2);
    assert!(!dir.path().join("none.svg").exists());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = tiny_corpus(dir.path());
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "max_epochs = 1\npatience = 4\nencoder_hidden = 3\ndecoder_hidden = 3\n").unwrap();
    let out = dir.path().join("out");
    let o = pedfuse(&["train", "--corpus", s(&corpus), "--out", s(&out), "--config", s(&cfg), "--patience", "7"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let echoed = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(echoed.contains("max_epochs = 1"));
    assert!(echoed.contains("patience = 7"));
    assert!(echoed.contains("encoder_hidden = 3"));
}

#[test]
fn evaluate_against_another_corpus_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = tiny_corpus(dir.path());
    let model = dir.path().join("m");
    train(&corpus, &model, "method1");
    let other = dir.path().join("other");
    let o = pedfuse(&["generate", "--n", "5", "--seed", "8", "--out", s(&other)]);
    assert_eq!(code(&o), 0);
    let report = dir.path().join("report");
    let o = pedfuse(&["evaluate", "--corpus", s(&other), "--checkpoint", s(&model.join("model.ckpt")), "--out", s(&report)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error: ["));
    assert!(!report.exists());
}

#[test]
fn corrupt_track_file_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = tiny_corpus(dir.path());
    std::fs::write(corpus.join("scenario_0000.tracks"), "not a track file\n").unwrap();
    let out = dir.path().join("out");
    let mut args = vec!["train", "--corpus", s(&corpus), "--out", s(&out)];
    args.extend(TINY);
    let o = pedfuse(&args);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("scenario_0000.tracks"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn experiment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = tiny_corpus(dir.path());
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let mut args = vec!["experiment", "--corpus", s(&corpus), "--out", s(&out)];
        args.extend(TINY);
        let o = pedfuse(&args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let text = std::fs::read_to_string(out.join("report.tsv")).unwrap();
        assert_eq!(text.lines().count(), 4);
        reports.push(text);
        for cue in ["baseline", "method1", "method2"] {
            assert!(out.join(cue).join("model.ckpt").is_file());
        }
    }
    assert_eq!(reports[0], reports[1]);
}
