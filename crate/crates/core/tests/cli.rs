use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stc::cli::{EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION};
use stc::corpus::{load_jsonl, tokenize_corpus, CategorySet, Vocabulary};
use stc::mdp::{Action, EpisodeLog, TaskMode};
use stc::model::Model;
use stc::policy::LinearQ;

fn stc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stc")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_corpus(dir: &Path) -> PathBuf {
    let path = dir.join("corpus.jsonl");
    let out = stc(&["generate", "--out", s(&path), "--docs-per-class", "15", "--seed", "3"]);
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn train(corpus: &Path, out_dir: &Path, method: &str, workers: &str) -> Vec<u8> {
    let out = stc(&[
        "train",
        "--method",
        method,
        "--corpus",
        s(corpus),
        "--seed",
        "5",
        "--output-dir",
        s(out_dir),
        "--workers",
        workers,
    ]);
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
    fs::read(out_dir.join(format!("model-{method}.json"))).unwrap()
}

#[test]
fn convert_cardoso_layout() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.txt");
    let test = dir.path().join("test.txt");
    fs::write(&train, "earn\tprofit rose. shares up\nacq\tcompany bought a rival\n\n").unwrap();
    fs::write(&test, "earn\tnet income fell\ncrude\t   \n").unwrap();
    let out_path = dir.path().join("out.jsonl");
    let out = stc(&["convert", "--layout", "cardoso", "--out", s(&out_path), s(&train), s(&test)]);
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
    let loaded = load_jsonl(&out_path).unwrap();
    assert_eq!(loaded.docs.len(), 3);
    assert_eq!(loaded.docs[0].id, "train-00001");
    assert_eq!(loaded.docs[0].sentences.len(), 2);
    assert_eq!(loaded.docs[2].labels, vec!["earn"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("1 dropped"));
}

#[test]
fn convert_dirs_by_class_layout() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("data");
    for (class, file, text) in [("grain", "1", "Wheat exports grew."), ("zinc", "7", "Zinc output. Prices fell.")] {
        fs::create_dir_all(root.join(class)).unwrap();
        fs::write(root.join(class).join(file), text).unwrap();
    }
    let out_path = dir.path().join("out.jsonl");
    let out = stc(&["convert", "--layout", "dirs-by-class", "--out", s(&out_path), s(&root)]);
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
    let docs = load_jsonl(&out_path).unwrap().docs;
    let ids: Vec<_> = docs.iter().map(|d| d.id.as_str()).collect();
    assert_eq!(ids, ["grain/1", "zinc/7"]);
    assert_eq!(docs[1].sentences.len(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&stc(&["--help"])), EXIT_OK);
    assert_eq!(code(&stc(&["train", "--bogus"])), EXIT_VALIDATION);
    // Missing corpus is a configuration error.
    let missing = dir.path().join("nope.jsonl");
    assert_eq!(
        code(&stc(&["train", "--method", "stc", "--corpus", s(&missing), "--seed", "1"])),
        EXIT_VALIDATION
    );
    // A malformed corpus line is a validation error too.
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "{not json\n").unwrap();
    assert_eq!(
        code(&stc(&["train", "--method", "stc", "--corpus", s(&bad), "--seed", "1", "--output-dir", s(dir.path())])),
        EXIT_VALIDATION
    );
    // A model file that does not exist is a runtime failure.
    let corpus = small_corpus(dir.path());
    let out = stc(&["evaluate", "--model", s(&dir.path().join("none.json")), "--corpus", s(&corpus)]);
    assert_eq!(code(&out), EXIT_RUNTIME);
}

#[test]
fn unknown_config_key_is_rejected_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, format!("corpus = {:?}\nseed = 1\n\n[stc]\nn_state = 10\n", s(&corpus))).unwrap();
    let out = stc(&["experiment", "--config", s(&cfg)]);
    assert_eq!(code(&out), EXIT_VALIDATION);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("n_state"), "{err}");
    assert!(err.contains('5'), "{err}");
}

#[test]
fn training_is_deterministic_and_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    for method in ["stc", "baseline"] {
        let a = train(&corpus, &dir.path().join("a"), method, "1");
        let b = train(&corpus, &dir.path().join("b"), method, "1");
        let c = train(&corpus, &dir.path().join("c"), method, "3");
        assert!(a == b, "{method}: two runs differ");
        assert!(a == c, "{method}: worker count changed the model");
    }
    let tel = fs::read_to_string(dir.path().join("a/telemetry-stc.jsonl")).unwrap();
    assert!(tel.lines().count() >= 1);
}

#[test]
fn trace_of_zero_weights_classifies_first_category_then_stops() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let raw = load_jsonl(&corpus).unwrap().docs;
    let toks = tokenize_corpus(&raw);
    let cats = CategorySet::from_docs(&toks).unwrap();
    let vocab = Vocabulary::build(&toks).unwrap();
    let q = LinearQ::zeros(vocab.len(), cats.len());
    let model = Model::stc(TaskMode::MonoLabel, cats, vocab, q).unwrap();
    let path = dir.path().join("zero.json");
    model.save(&path).unwrap();

    let doc = raw[0].id.clone();
    let out = stc(&["trace", "--model", s(&path), "--corpus", s(&corpus), "--doc", &doc, "--json"]);
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
    let log: EpisodeLog = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(log.actions, vec![Action::Classify(0), Action::Stop]);
    assert_eq!(log.read, 1);

    let text = stc(&["trace", "--model", s(&path), "--corpus", s(&corpus), "--doc", &doc]);
    let text = String::from_utf8_lossy(&text.stdout);
    assert!(text.contains(&format!("classify:{}", model.categories.name(0))), "{text}");

    let unknown = stc(&["trace", "--model", s(&path), "--corpus", s(&corpus), "--doc", "no-such-doc"]);
    assert_ne!(code(&unknown), EXIT_OK);
}

#[test]
fn evaluate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path());
    let run = dir.path().join("run");
    let out = stc(&[
        "train",
        "--method",
        "stc",
        "--corpus",
        s(&corpus),
        "--seed",
        "2",
        "--train-fraction",
        "0.5",
        "--output-dir",
        s(&run),
    ]);
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
    let eval_dir = dir.path().join("eval");
    let out = stc(&[
        "evaluate",
        "--model",
        s(&run.join("model-stc.json")),
        "--corpus",
        s(&corpus),
        "--split",
        s(&run.join("split.json")),
        "--out",
        s(&eval_dir),
    ]);
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["n_documents"], 30);
    let micro = summary["micro_f1"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&micro));
    for f in ["metrics.json", "predictions.jsonl", "episodes.jsonl", "histogram.csv"] {
        assert!(eval_dir.join(f).exists(), "{f} missing");
    }
    let preds = fs::read_to_string(eval_dir.join("predictions.jsonl")).unwrap();
    assert_eq!(preds.lines().count(), 30);
}
