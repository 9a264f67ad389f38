use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn acsqg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acsqg"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Value {
    let out = acsqg(args);
    assert!(
        out.status.success(),
        "acsqg {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap_or(Value::Null)
}

/// Small config with absolute paths so it runs from any directory.
fn small_config(dir: &Path) -> PathBuf {
    let text = format!(
        r#"seed = 5

[paths]
work_dir = "{work}"
corpus = "{corpus}"
corpus_format = "squad"
sentences = "{sentences}"

[construct]
dev_fraction = 0.0

[seq2seq]
scalar = "f32"
vocab_size = 300
word_dim = 8
feature_dim = 4
enc_hidden = 8
style_dim = 4
attn_dim = 8
maxout_dim = 8
epochs = 2
batch_size = 32
beam_width = 2
epoch_checkpoints = false

[lm]
epochs = 1
batch_size = 4
"#,
        work = dir.join("work").display(),
        corpus = data("mini_squad.json").display(),
        sentences = data("sentences.txt").display(),
    );
    let path = dir.join("small.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn write(path: &Path, lines: &[&str]) {
    std::fs::write(path, lines.join("\n") + "\n").unwrap();
}

#[test]
fn show_config_round_trips_overrides() {
    let out = acsqg(&["show-config", "--seed", "99", "--work-dir", "/tmp/elsewhere"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed: toml::Table = text.parse().unwrap();
    assert_eq!(parsed["seed"].as_integer(), Some(99));
    assert_eq!(parsed["paths"]["work_dir"].as_str(), Some("/tmp/elsewhere"));
    assert!(parsed.contains_key("seq2seq"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "seed = 1\n[seq2seq]\nhidden_size = 4\n").unwrap();
    let out = acsqg(&["--config", path.to_str().unwrap(), "show-config"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("hidden_size"));
}

#[test]
fn evaluate_on_files() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen.jsonl");
    let reference = dir.path().join("ref.jsonl");
    let report = dir.path().join("eval.json");
    write(&gen, &[
        r#"{"id":"a","question":"who built the mill ?"}"#,
        r#"{"id":"b","question":"when did it open ?"}"#,
    ]);
    write(&reference, &[
        r#"{"id":"b","question":"when did it open ?"}"#,
        r#"{"id":"a","question":"who built the mill ?"}"#,
    ]);
    let v = ok(&["evaluate", "--gen", gen.to_str().unwrap(), "--ref", reference.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(v["sample_count"], 2);
    assert!((v["bleu_4"].as_f64().unwrap() - 100.0).abs() < 1e-9);
    assert!((v["rouge_l"].as_f64().unwrap() - 100.0).abs() < 1e-9);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(saved, v);

    write(&reference, &[r#"{"id":"a","question":"who built the mill ?"}"#]);
    let out = acsqg(&["evaluate", "--gen", gen.to_str().unwrap(), "--ref", reference.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unmatched"));
}

#[test]
fn filter_needs_adapters_flag() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    write(&input, &[]);
    let out = acsqg(&["filter", "--in", input.to_str().unwrap(), "--out", dir.path().join("o.jsonl").to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--stub-adapters"));
}

#[test]
fn staged_run_then_file_mode() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let c = config.to_str().unwrap();
    let work = dir.path().join("work");

    let mut duplicates = 0;
    for stage in ["construct", "learn-dist", "sample", "train-s2s", "generate", "filter", "evaluate"] {
        let v = ok(&["--config", c, stage]);
        assert_eq!(v["stage"], stage, "{v}");
        if stage == "filter" {
            duplicates = v["counts"]["duplicates"].as_u64().unwrap() as usize;
        }
    }
    for f in ["records.jsonl", "sampler.json", "inputs.jsonl", "generated.jsonl", "kept.jsonl", "dropped.jsonl", "eval.json"] {
        assert!(work.join(f).exists(), "{f} missing");
    }
    let line_count = |p: &Path| std::fs::read_to_string(p).unwrap().lines().filter(|l| !l.trim().is_empty()).count();
    let generated = line_count(&work.join("generated.jsonl"));
    assert!(generated > 0);
    assert_eq!(line_count(&work.join("kept.jsonl")) + line_count(&work.join("dropped.jsonl")) + duplicates, generated);

    // File mode on the stage outputs.
    let w = |f: &str| work.join(f).to_str().unwrap().to_string();
    let o = |f: &str| dir.path().join(f).to_str().unwrap().to_string();
    let v = ok(&["learn-dist", "--records", &w("records.jsonl"), "--out", &o("sampler.json")]);
    assert!(v["records"].as_u64().unwrap() > 0);
    assert_eq!(std::fs::read(o("sampler.json")).unwrap(), std::fs::read(w("sampler.json")).unwrap());

    ok(&["--config", c, "sample", "--model", &o("sampler.json"), "--out", &o("inputs.jsonl")]);
    assert_eq!(std::fs::read(o("inputs.jsonl")).unwrap(), std::fs::read(w("inputs.jsonl")).unwrap());

    let v = ok(&[
        "--config", c, "generate", "--backend", "s2s", "--model", &w("s2s"), "--inputs", &o("inputs.jsonl"), "--out", &o("gen.jsonl"),
    ]);
    assert_eq!(v["generated"].as_u64().unwrap() as usize, generated);

    let v = ok(&["filter", "--in", &o("gen.jsonl"), "--out", &o("kept.jsonl"), "--dropped", &o("dropped.jsonl"), "--stub-adapters"]);
    assert_eq!(v["input"].as_u64().unwrap() as usize, generated - duplicates);
    assert_eq!(std::fs::read(o("kept.jsonl")).unwrap(), std::fs::read(w("kept.jsonl")).unwrap());
    assert_eq!(std::fs::read(o("dropped.jsonl")).unwrap(), std::fs::read(w("dropped.jsonl")).unwrap());
}

#[test]
fn stage_without_inputs_reports_missing_dependency() {
    let dir = tempfile::tempdir().unwrap();
    let out = acsqg(&["--work-dir", dir.path().to_str().unwrap(), "sample"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sampler.json"));
}
