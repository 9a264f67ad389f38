use std::path::PathBuf;

use super::*;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn config(work: &Path) -> PipelineConfig {
    let mut c = PipelineConfig::default();
    c.paths.work_dir = work.to_path_buf();
    c.paths.corpus = Some(data("mini_squad.json"));
    c.paths.sentences = Some(data("sentences.txt"));
    c
}

#[test]
fn defaults() {
    let c = PipelineConfig::default();
    assert_eq!((c.sampler.n_answers, c.sampler.n_styles, c.sampler.n_clues), (5, 2, 2));
    assert_eq!((c.lm.epochs, c.lm.batch_size, c.lm.top_p), (4, 2, 0.9));
    assert_eq!(c.filter.threshold, 0.9);
    assert_eq!(c.seq2seq.beam_width, 20);
    assert_eq!((c.sampler.min_sentence_tokens, c.sampler.max_sentence_tokens), (5, 100));
    let back = PipelineConfig::from_toml(&c.to_toml().unwrap()).unwrap();
    assert_eq!(back, c);
    assert!(PipelineConfig::from_toml("seed = 1\n[sampler]\nbogus = 2\n").is_err());
    let partial = PipelineConfig::from_toml("seed = 5\n[lm]\ntop_p = 0.5\n").unwrap();
    assert_eq!((partial.seed, partial.lm.top_p, partial.lm.epochs), (5, 0.5, 4));
}

#[test]
fn stage_names_round_trip() {
    for s in Stage::ALL {
        assert_eq!(s.name().parse::<Stage>().unwrap(), s);
    }
    assert!("train".parse::<Stage>().is_err());
}

#[test]
fn validation_rejects_bad_counts_and_missing_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path());
    c.sampler.n_clues = 0;
    assert!(c.validate().is_err());
    let mut c = config(dir.path());
    c.paths.sentences = Some(dir.path().join("absent.txt"));
    assert!(matches!(c.validate(), Err(Error::Resource { .. })));
}

#[test]
fn sample_before_learn_dist_is_a_dependency_error() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path());
    match run_stage(Stage::Sample, &c) {
        Err(Error::Dependency(p)) => assert!(p.ends_with("sampler.json")),
        other => panic!("expected dependency error, got {other:?}"),
    }
    assert!(matches!(run_stage(Stage::Generate, &c), Err(Error::Dependency(_))));
}

#[test]
fn sampling_is_reproducible_and_capped() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path());
    for s in [Stage::Construct, Stage::LearnDist] {
        run_stage(s, &c).unwrap();
    }
    let first = run_stage(Stage::Sample, &c).unwrap();
    let bytes = std::fs::read(Artifacts::new(dir.path()).inputs()).unwrap();
    run_stage(Stage::Sample, &c).unwrap();
    assert_eq!(bytes, std::fs::read(Artifacts::new(dir.path()).inputs()).unwrap());
    let lines: Vec<InputLine> = read_jsonl(&Artifacts::new(dir.path()).inputs()).unwrap();
    let sentences = first.counts["sentences"].as_u64().unwrap() as usize;
    assert!(sentences >= 100);
    assert!(lines.len() <= 20 * sentences);
    let mut per: BTreeMap<usize, usize> = BTreeMap::new();
    for l in &lines {
        *per.entry(l.sentence_index).or_default() += 1;
        assert!(l.input.sentence.has_chunk(&l.input.answer) && l.input.sentence.has_chunk(&l.input.clue));
    }
    assert!(per.values().all(|&n| n <= 20));
    assert!(per.values().any(|&n| n == 20));
    assert!(Artifacts::new(dir.path()).report(Stage::Sample).exists());
}
