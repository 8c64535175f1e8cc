//! End-to-end tests of the `textsum` binary: subcommands, config files,
//! flag overrides and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture_corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/bbc_mini")
}

fn textsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_textsum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn evaluate_writes_a_csv_report() {
    let corpus = fixture_corpus();
    let out = textsum(&[
        "evaluate",
        "--corpus",
        corpus.to_str().unwrap(),
        "--systems",
        "tfidf,gsg,lead,random",
        "--rouge",
        "1,2,L",
        "--budget-ratio",
        "0.2",
        "--seed",
        "7",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "system,variant,precision,recall,f1");
    assert_eq!(lines.len(), 1 + 4 * 3, "4 systems x 3 variants");
    assert!(lines[1].starts_with("tfidf,ROUGE-1,"));
    assert!(lines[12].starts_with("random,ROUGE-L,"));
}

#[test]
fn evaluate_is_byte_deterministic() {
    let corpus = fixture_corpus();
    let args = [
        "evaluate",
        "--corpus",
        corpus.to_str().unwrap(),
        "--budget-count",
        "2",
        "--seed",
        "3",
    ];
    let a = textsum(&args);
    let b = textsum(&args);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let corpus = fixture_corpus();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        format!(
            "# experiment\ncorpus_root = {}\nsystems = lead\nbudget.count = 2\nformat = markdown\n",
            corpus.display()
        ),
    )
    .unwrap();
    let out = textsum(&[
        "evaluate",
        "--config",
        cfg.to_str().unwrap(),
        "--systems",
        "lead,random",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# Mean ROUGE comparison"));
    assert!(text.contains("| lead |"));
    assert!(text.contains("| random |"), "flag did not override the file");
}

#[test]
fn bad_value_is_a_config_error_naming_the_key() {
    let out = textsum(&[
        "evaluate",
        "--corpus",
        "/tmp",
        "--budget-ratio",
        "two",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("budget.ratio"), "stderr: {err}");
}

#[test]
fn unknown_flag_is_a_config_error() {
    let out = textsum(&["evaluate", "--nonsense", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_corpus_is_a_data_error() {
    let out = textsum(&["evaluate", "--corpus", "/no/such/place"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_then_summarize_and_transformer_evaluation() {
    let corpus = fixture_corpus();
    let dir = tempfile::tempdir().unwrap();
    let model_cfg = dir.path().join("model.cfg");
    fs::write(
        &model_cfg,
        "model.d_model = 16\nmodel.n_heads = 2\nmodel.d_ff = 32\nmodel.max_len = 48\n\
         train.steps = 20\ntrain.batch_size = 4\nvocab.min_freq = 1\nvocab.max_size = 400\n",
    )
    .unwrap();
    let ckpt = dir.path().join("model.ckpt");

    let out = textsum(&[
        "train",
        "--corpus",
        corpus.to_str().unwrap(),
        "--config",
        model_cfg.to_str().unwrap(),
        "--pairs",
        "gsg",
        "--out",
        ckpt.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(ckpt.is_file());

    let article = corpus.join("News Articles/tech/001.txt");
    let out = textsum(&[
        "summarize",
        "--model",
        ckpt.to_str().unwrap(),
        "--input",
        article.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let spec = format!("lead,transformer:{}", ckpt.display());
    let out = textsum(&[
        "evaluate",
        "--corpus",
        corpus.to_str().unwrap(),
        "--systems",
        &spec,
        "--budget-count",
        "2",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("transformer,ROUGE-1,"));
}

#[test]
fn summarize_with_each_extractive_system() {
    let article = fixture_corpus().join("News Articles/business/001.txt");
    for system in ["lead", "random", "tfidf", "gsg"] {
        let out = textsum(&[
            "summarize",
            "--system",
            system,
            "--input",
            article.to_str().unwrap(),
            "--budget-count",
            "2",
        ]);
        assert!(out.status.success(), "{system} failed");
        assert!(!stdout(&out).trim().is_empty(), "{system} produced no summary");
    }
}

#[test]
fn report_rerenders_csv_as_markdown() {
    let corpus = fixture_corpus();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("report.csv");
    let out = textsum(&[
        "evaluate",
        "--corpus",
        corpus.to_str().unwrap(),
        "--systems",
        "lead",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = textsum(&["report", "--in", csv.to_str().unwrap(), "--format", "markdown"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("| lead |"));
}

#[test]
fn help_lists_all_subcommands() {
    let out = textsum(&["help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for subcommand in ["evaluate", "train", "summarize", "report"] {
        assert!(text.contains(subcommand));
    }
}
