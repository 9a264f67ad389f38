//! Stage orchestration: construct → learn-dist → sample → train-s2s /
//! finetune-lm → generate → filter → evaluate.

mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use config::{
    ConstructSection, CorpusFormat, EvalSplit, EvaluateSection, FilterSection, GenerateSection, GeneratorChoice,
    LmSection, Paths, PipelineConfig, SamplerSection, ScalarKind, Seq2SeqSection,
};

use crate::annotate::{
    annotate, build_related_words, split_sentences, RelatedWordsDict, RuleAnnotator, SynonymTable, WordVectors,
};
use crate::dataset::{build_training_records, read_records, read_sentence_split, read_squad, write_records, QaSample, TrainingRecord};
use crate::error::{Error, Result};
use crate::filter::{dedup_exact, filter_batch, read_samples, write_samples, GeneratedSample, Generator, StubEntailment, StubQa};
use crate::lm::{finetune, nucleus_generate, FinetuneConfig, LmAdapter, RecurrentLm};
use crate::metrics::{evaluate, EvalReport};
use crate::sampler::{sample_inputs, BinSpec, GenerationInput, SampleConfig, SamplerModel};
use crate::scalar::Real;
use crate::seq2seq::{write_atomic, Seq2Seq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Construct,
    LearnDist,
    Sample,
    TrainS2s,
    FinetuneLm,
    Generate,
    Filter,
    Evaluate,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Construct,
        Stage::LearnDist,
        Stage::Sample,
        Stage::TrainS2s,
        Stage::FinetuneLm,
        Stage::Generate,
        Stage::Filter,
        Stage::Evaluate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Construct => "construct",
            Stage::LearnDist => "learn-dist",
            Stage::Sample => "sample",
            Stage::TrainS2s => "train-s2s",
            Stage::FinetuneLm => "finetune-lm",
            Stage::Generate => "generate",
            Stage::Filter => "filter",
            Stage::Evaluate => "evaluate",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown stage {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    pub seed: u64,
    pub seconds: f64,
    pub counts: BTreeMap<String, Value>,
    pub outputs: Vec<PathBuf>,
}

/// File layout under the work directory.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub dir: PathBuf,
}

impl Artifacts {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Artifacts { dir: dir.into() }
    }

    pub fn records(&self) -> PathBuf {
        self.dir.join("records.jsonl")
    }
    pub fn dev_records(&self) -> PathBuf {
        self.dir.join("dev.jsonl")
    }
    pub fn related_words(&self) -> PathBuf {
        self.dir.join("related-words.json")
    }
    pub fn sampler(&self) -> PathBuf {
        self.dir.join("sampler.json")
    }
    pub fn inputs(&self) -> PathBuf {
        self.dir.join("inputs.jsonl")
    }
    pub fn s2s_dir(&self) -> PathBuf {
        self.dir.join("s2s")
    }
    pub fn lm(&self) -> PathBuf {
        self.dir.join("lm.json")
    }
    pub fn generated(&self) -> PathBuf {
        self.dir.join("generated.jsonl")
    }
    pub fn kept(&self) -> PathBuf {
        self.dir.join("kept.jsonl")
    }
    pub fn dropped(&self) -> PathBuf {
        self.dir.join("dropped.jsonl")
    }
    pub fn eval_refs(&self) -> PathBuf {
        self.dir.join("eval-ref.jsonl")
    }
    pub fn eval_hyps(&self, generator: Generator) -> PathBuf {
        self.dir.join(format!("eval-{generator}.jsonl"))
    }
    pub fn eval_report(&self) -> PathBuf {
        self.dir.join("eval.json")
    }
    pub fn report(&self, stage: Stage) -> PathBuf {
        self.dir.join("reports").join(format!("{stage}.json"))
    }
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Dependency(path.to_path_buf()))
    }
}

/// One sampled input with a stable id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputLine {
    pub id: String,
    pub sentence_index: usize,
    #[serde(flatten)]
    pub input: GenerationInput,
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for it in items {
        serde_json::to_writer(&mut buf, it)?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::resource(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), i + 1))))
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_record_file(path: &Path, records: &[TrainingRecord]) -> Result<()> {
    let mut buf = Vec::new();
    write_records(records, &mut buf)?;
    write_atomic(path, &buf)
}

pub fn read_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<QaSample>> {
    match format {
        CorpusFormat::Squad => read_squad(path),
        CorpusFormat::Split => read_sentence_split(path),
    }
}

/// Related-words dictionary from the configured sources; empty (lemma
/// matching only) when none are given.
pub fn load_related_words(config: &PipelineConfig, vocabulary: &BTreeSet<String>) -> Result<RelatedWordsDict> {
    let p = &config.paths;
    if let Some(path) = &p.related_words {
        return RelatedWordsDict::load(path);
    }
    if p.word_vectors.is_none() && p.synonyms.is_none() {
        return Ok(RelatedWordsDict::new(config.construct.neighbors));
    }
    let vectors = match &p.word_vectors {
        Some(v) => WordVectors::from_path(v)?,
        None => WordVectors::default(),
    };
    let synonyms = match &p.synonyms {
        Some(s) => SynonymTable::from_path(s)?,
        None => SynonymTable::default(),
    };
    build_related_words(&vectors, &synonyms, config.construct.neighbors, Some(vocabulary))
}

/// Sentences of a text file: every line is split further on sentence boundaries.
pub fn read_sentences(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::resource(path, e))?;
    let mut out = Vec::new();
    for line in text.lines() {
        let chars: Vec<char> = line.chars().collect();
        for (s, e) in split_sentences(line) {
            let sent: String = chars[s..e].iter().collect();
            if !sent.trim().is_empty() {
                out.push(sent.trim().to_string());
            }
        }
    }
    Ok(out)
}

/// Annotate, length-filter and sample every sentence. Sentence `i` draws
/// from its own stream seeded with `seed + i`.
pub fn sample_sentences(
    sentences: &[String],
    model: &SamplerModel,
    config: &SampleConfig,
    min_tokens: usize,
    max_tokens: usize,
    seed: u64,
) -> (Vec<InputLine>, BTreeMap<String, Value>) {
    let annotator = RuleAnnotator::new();
    let per: Vec<(usize, Option<Vec<InputLine>>, bool)> = sentences
        .par_iter()
        .enumerate()
        .map(|(i, text)| {
            let Ok(sent) = annotate(&annotator, text) else {
                return (i, None, false);
            };
            if sent.len() < min_tokens || sent.len() > max_tokens {
                return (i, None, true);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let lines = sample_inputs(&sent, model, &mut rng, config)
                .into_iter()
                .enumerate()
                .map(|(k, input)| InputLine {
                    id: format!("s{i}-{k}"),
                    sentence_index: i,
                    input,
                })
                .collect();
            (i, Some(lines), true)
        })
        .collect();
    let full = config.n_answers * config.n_styles * config.n_clues;
    let (mut inputs, mut kept, mut failed, mut filtered, mut rich) = (Vec::new(), 0usize, 0usize, 0usize, 0usize);
    for (_, lines, ok) in per {
        match (lines, ok) {
            (Some(l), _) => {
                kept += 1;
                rich += usize::from(l.len() == full);
                inputs.extend(l);
            }
            (None, true) => filtered += 1,
            (None, false) => failed += 1,
        }
    }
    let counts = BTreeMap::from([
        ("sentences".to_string(), json!(sentences.len())),
        ("sentences_sampled".to_string(), json!(kept)),
        ("sentences_length_filtered".to_string(), json!(filtered)),
        ("sentences_annotation_failed".to_string(), json!(failed)),
        ("sentences_with_full_quota".to_string(), json!(rich)),
        ("inputs".to_string(), json!(inputs.len())),
    ]);
    (inputs, counts)
}

#[derive(Deserialize)]
struct ScalarHead {
    scalar: String,
}

fn checkpoint_scalar(path: &Path) -> Result<ScalarKind> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::resource(path, e))?;
    let head: ScalarHead = serde_json::from_str(&text)?;
    match head.scalar.as_str() {
        "f32" => Ok(ScalarKind::F32),
        "f64" => Ok(ScalarKind::F64),
        other => Err(Error::Format(format!("{}: unknown scalar {other:?}", path.display()))),
    }
}

/// Seq2seq model at either width.
pub enum AnySeq2Seq {
    F32(Seq2Seq<f32>),
    F64(Seq2Seq<f64>),
}

impl AnySeq2Seq {
    pub fn load(path: &Path) -> Result<Self> {
        let file = if path.is_dir() { path.join("best.json") } else { path.to_path_buf() };
        require(&file)?;
        Ok(match checkpoint_scalar(&file)? {
            ScalarKind::F32 => AnySeq2Seq::F32(Seq2Seq::load(&file)?),
            ScalarKind::F64 => AnySeq2Seq::F64(Seq2Seq::load(&file)?),
        })
    }

    /// Best beam hypothesis per input (empty string when the beam is empty).
    pub fn generate(&self, inputs: &[&GenerationInput], beam: usize, max_len: usize) -> Result<Vec<String>> {
        fn run<T: Real>(m: &Seq2Seq<T>, inputs: &[&GenerationInput], beam: usize, max_len: usize) -> Result<Vec<String>> {
            inputs
                .par_iter()
                .map(|i| Ok(m.beam_generate(i, beam, max_len)?.into_iter().next().map(|h| h.text).unwrap_or_default()))
                .collect()
        }
        match self {
            AnySeq2Seq::F32(m) => run(m, inputs, beam, max_len),
            AnySeq2Seq::F64(m) => run(m, inputs, beam, max_len),
        }
    }

    pub fn max_question_len(&self) -> usize {
        match self {
            AnySeq2Seq::F32(m) => m.config.max_question_len,
            AnySeq2Seq::F64(m) => m.config.max_question_len,
        }
    }
}

/// Built-in language model at either width.
pub enum AnyLm {
    F32(RecurrentLm<f32>),
    F64(RecurrentLm<f64>),
}

impl AnyLm {
    pub fn load(path: &Path) -> Result<Self> {
        require(path)?;
        Ok(match checkpoint_scalar(path)? {
            ScalarKind::F32 => AnyLm::F32(RecurrentLm::load(path)?),
            ScalarKind::F64 => AnyLm::F64(RecurrentLm::load(path)?),
        })
    }

    pub fn adapter(&self) -> &dyn LmAdapter {
        match self {
            AnyLm::F32(m) => m,
            AnyLm::F64(m) => m,
        }
    }

    /// Input `i` samples with its own stream seeded with `seed + i`.
    pub fn generate(&self, inputs: &[&GenerationInput], p: f64, max_len: usize, seed: u64) -> Result<Vec<String>> {
        let lm = self.adapter();
        let run = |(i, input): (usize, &&GenerationInput)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            nucleus_generate(input, lm, p, max_len, &mut rng)
        };
        inputs.par_iter().enumerate().map(run).collect()
    }
}

pub fn train_s2s<T: Real>(train: &[TrainingRecord], dev: &[TrainingRecord], config: &PipelineConfig, dir: PathBuf) -> Result<Value> {
    let s = &config.seq2seq;
    let tc = s.train_config(config.seed, dir);
    let outcome = crate::seq2seq::train::<T>(train, dev, s.model_config(), &tc)?;
    let examples = outcome.model.examples(train)?;
    Ok(json!({
        "parameters": outcome.model.parameter_count(),
        "vocab": outcome.model.vocab.len(),
        "best_epoch": outcome.best_epoch,
        "train_token_accuracy": outcome.model.token_accuracy(&examples),
        "history": outcome.history,
    }))
}

pub fn finetune_lm<T: Real>(train: &[TrainingRecord], config: &PipelineConfig, out: &Path) -> Result<Value> {
    let mut lm = RecurrentLm::<T>::for_records(train, config.lm.model_config(), config.seed)?;
    let fc = FinetuneConfig {
        epochs: config.lm.epochs,
        batch_size: config.lm.batch_size,
        seed: config.seed,
    };
    let report = finetune(train, &mut lm, &fc)?;
    lm.save(out)?;
    Ok(serde_json::to_value(report)?)
}

pub fn generation_sample(line: &InputLine, question: String, generator: Generator) -> GeneratedSample {
    GeneratedSample::from_input(format!("{}-{generator}", line.id), &line.input, question, generator)
}

/// Questions for each record's gold answer, clue and style.
fn generate_for_records(
    records: &[TrainingRecord],
    generator: Generator,
    config: &PipelineConfig,
    art: &Artifacts,
) -> Result<Vec<String>> {
    let inputs: Vec<GenerationInput> = records
        .iter()
        .map(|r| GenerationInput {
            sentence: r.passage.clone(),
            answer: r.answer.clone(),
            clue: r.clue.clone(),
            style: r.style,
        })
        .collect();
    let refs: Vec<&GenerationInput> = inputs.iter().collect();
    match generator {
        Generator::S2s => {
            let m = AnySeq2Seq::load(&art.s2s_dir())?;
            m.generate(&refs, config.seq2seq.beam_width, m.max_question_len())
        }
        Generator::Lm => AnyLm::load(&art.lm())?.generate(&refs, config.lm.top_p, config.lm.max_len, config.seed),
    }
}

#[derive(Serialize)]
struct IdQuestion<'a> {
    id: String,
    question: &'a str,
}

fn counts(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Run exactly one stage and write its report.
pub fn run_stage(stage: Stage, config: &PipelineConfig) -> Result<StageReport> {
    config.validate()?;
    let art = Artifacts::new(&config.paths.work_dir);
    std::fs::create_dir_all(&art.dir).map_err(|e| Error::resource(&art.dir, e))?;
    let t0 = Instant::now();
    let (counts, outputs) = match stage {
        Stage::Construct => {
            let corpus = config
                .paths
                .corpus
                .as_ref()
                .ok_or_else(|| Error::invalid("paths.corpus is not set"))?;
            let mut samples = read_corpus(corpus, config.paths.corpus_format)?;
            if let Some(n) = config.construct.max_samples {
                samples.truncate(n);
            }
            let vocabulary: BTreeSet<String> = samples
                .iter()
                .flat_map(|s| crate::seq2seq::question_tokens(&s.context).into_iter().chain(crate::seq2seq::question_tokens(&s.question)))
                .collect();
            let dict = load_related_words(config, &vocabulary)?;
            write_atomic(&art.related_words(), dict.to_json()?.as_bytes())?;
            let annotator = RuleAnnotator::new();
            let (mut train, report) = build_training_records(&samples, &annotator, &dict);
            let dev = match &config.paths.dev_corpus {
                Some(path) => build_training_records(&read_corpus(path, config.paths.corpus_format)?, &annotator, &dict).0,
                None => {
                    let mut idx: Vec<usize> = (0..train.len()).collect();
                    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
                    let n_dev = (train.len() as f64 * config.construct.dev_fraction).round() as usize;
                    let dev_set: BTreeSet<usize> = idx[..n_dev].iter().copied().collect();
                    let mut dev = Vec::new();
                    let mut rest = Vec::new();
                    for (i, r) in train.into_iter().enumerate() {
                        if dev_set.contains(&i) {
                            dev.push(r);
                        } else {
                            rest.push(r);
                        }
                    }
                    train = rest;
                    dev
                }
            };
            write_record_file(&art.records(), &train)?;
            write_record_file(&art.dev_records(), &dev)?;
            log::info!("constructed {} records ({} dropped, rate {:.4})", report.emitted, report.dropped, report.drop_rate());
            (
                counts(&[
                    ("samples", json!(report.input)),
                    ("records", json!(report.emitted)),
                    ("dropped", json!(report.dropped)),
                    ("drop_rate", json!(report.drop_rate())),
                    ("drop_reasons", serde_json::to_value(&report.drops)?),
                    ("train_records", json!(train.len())),
                    ("dev_records", json!(dev.len())),
                    ("related_words", json!(dict.len())),
                ]),
                vec![art.records(), art.dev_records(), art.related_words()],
            )
        }
        Stage::LearnDist => {
            require(&art.records())?;
            let records = read_records(art.records())?;
            let model = SamplerModel::learn_with(&records, BinSpec::ANSWER_LENGTH, BinSpec::CLUE_DISTANCE, config.sampler.smoothing)?;
            write_atomic(&art.sampler(), model.to_json()?.as_bytes())?;
            (
                counts(&[
                    ("records", json!(records.len())),
                    ("style_argmax", json!(model.stats.style_argmax())),
                    ("style_marginal", serde_json::to_value(model.style_marginal())?),
                    ("clue_distance_below_8", json!(model.stats.distance_fraction_below(8))),
                ]),
                vec![art.sampler()],
            )
        }
        Stage::Sample => {
            require(&art.sampler())?;
            let path = config
                .paths
                .sentences
                .as_ref()
                .ok_or_else(|| Error::invalid("paths.sentences is not set"))?;
            let model = SamplerModel::load(art.sampler())?;
            let sentences = read_sentences(path)?;
            let s = &config.sampler;
            let (inputs, c) =
                sample_sentences(&sentences, &model, &s.sample_config(), s.min_sentence_tokens, s.max_sentence_tokens, config.seed);
            write_jsonl(&art.inputs(), &inputs)?;
            (c, vec![art.inputs()])
        }
        Stage::TrainS2s => {
            require(&art.records())?;
            let train = read_records(art.records())?;
            let dev = if art.dev_records().exists() { read_records(art.dev_records())? } else { Vec::new() };
            let summary = match config.seq2seq.scalar {
                ScalarKind::F32 => train_s2s::<f32>(&train, &dev, config, art.s2s_dir())?,
                ScalarKind::F64 => train_s2s::<f64>(&train, &dev, config, art.s2s_dir())?,
            };
            (
                counts(&[("train_records", json!(train.len())), ("dev_records", json!(dev.len())), ("training", summary)]),
                vec![art.s2s_dir().join("best.json")],
            )
        }
        Stage::FinetuneLm => {
            require(&art.records())?;
            let train = read_records(art.records())?;
            let summary = match config.lm.scalar {
                ScalarKind::F32 => finetune_lm::<f32>(&train, config, &art.lm())?,
                ScalarKind::F64 => finetune_lm::<f64>(&train, config, &art.lm())?,
            };
            (counts(&[("train_records", json!(train.len())), ("finetune", summary)]), vec![art.lm()])
        }
        Stage::Generate => {
            require(&art.inputs())?;
            let lines: Vec<InputLine> = read_jsonl(&art.inputs())?;
            let inputs: Vec<&GenerationInput> = lines.iter().map(|l| &l.input).collect();
            let mut samples = Vec::new();
            let choice = config.generate.generator;
            if choice.s2s() {
                let m = AnySeq2Seq::load(&art.s2s_dir())?;
                let qs = m.generate(&inputs, config.seq2seq.beam_width, m.max_question_len())?;
                samples.extend(lines.iter().zip(qs).map(|(l, q)| generation_sample(l, q, Generator::S2s)));
            }
            if choice.lm() {
                let lm = AnyLm::load(&art.lm())?;
                let qs = lm.generate(&inputs, config.lm.top_p, config.lm.max_len, config.seed)?;
                samples.extend(lines.iter().zip(qs).map(|(l, q)| generation_sample(l, q, Generator::Lm)));
            }
            let empty = samples.iter().filter(|s| s.question.trim().is_empty()).count();
            let mut buf = Vec::new();
            write_samples(&samples, &mut buf)?;
            write_atomic(&art.generated(), &buf)?;
            (
                counts(&[("inputs", json!(lines.len())), ("generated", json!(samples.len())), ("empty_questions", json!(empty))]),
                vec![art.generated()],
            )
        }
        Stage::Filter => {
            require(&art.generated())?;
            if config.filter.adapters != "stub" {
                return Err(Error::invalid(format!(
                    "no bundled adapters named {:?}; only \"stub\" ships with this build",
                    config.filter.adapters
                )));
            }
            let mut samples = read_samples(art.generated())?;
            let before = samples.len();
            if config.filter.dedup {
                samples = dedup_exact(samples);
            }
            let deduped = before - samples.len();
            let (kept, dropped, report) = filter_batch(samples, &StubEntailment, &StubQa, config.filter.threshold);
            let (mut kb, mut db) = (Vec::new(), Vec::new());
            write_samples(&kept, &mut kb)?;
            write_samples(&dropped, &mut db)?;
            write_atomic(&art.kept(), &kb)?;
            write_atomic(&art.dropped(), &db)?;
            (
                counts(&[("generated", json!(before)), ("duplicates", json!(deduped)), ("filter", serde_json::to_value(&report)?)]),
                vec![art.kept(), art.dropped()],
            )
        }
        Stage::Evaluate => {
            let mut path = match config.evaluate.split {
                EvalSplit::Dev => art.dev_records(),
                EvalSplit::Train => art.records(),
            };
            require(&path)?;
            let mut records = read_records(&path)?;
            if records.is_empty() && config.evaluate.split == EvalSplit::Dev {
                log::warn!("dev split is empty; evaluating on training records");
                path = art.records();
                require(&path)?;
                records = read_records(&path)?;
            }
            if let Some(n) = config.evaluate.max_records {
                records.truncate(n);
            }
            let refs: Vec<IdQuestion> = records
                .iter()
                .enumerate()
                .map(|(i, r)| IdQuestion {
                    id: format!("r{i}"),
                    question: &r.question,
                })
                .collect();
            write_jsonl(&art.eval_refs(), &refs)?;
            let mut reports: BTreeMap<String, EvalReport> = BTreeMap::new();
            let mut outputs = vec![art.eval_refs()];
            let choice = config.generate.generator;
            for generator in [Generator::S2s, Generator::Lm] {
                let wanted = match generator {
                    Generator::S2s => choice.s2s(),
                    Generator::Lm => choice.lm(),
                };
                if !wanted {
                    continue;
                }
                let qs = generate_for_records(&records, generator, config, &art)?;
                let hyps: Vec<IdQuestion> = qs
                    .iter()
                    .enumerate()
                    .map(|(i, q)| IdQuestion {
                        id: format!("r{i}"),
                        question: q,
                    })
                    .collect();
                write_jsonl(&art.eval_hyps(generator), &hyps)?;
                reports.insert(generator.to_string(), evaluate(art.eval_hyps(generator), art.eval_refs())?);
                outputs.push(art.eval_hyps(generator));
            }
            write_json(&art.eval_report(), &reports)?;
            outputs.push(art.eval_report());
            (
                counts(&[("records", json!(records.len())), ("source", json!(path)), ("reports", serde_json::to_value(&reports)?)]),
                outputs,
            )
        }
    };
    let report = StageReport {
        stage,
        seed: config.seed,
        seconds: t0.elapsed().as_secs_f64(),
        counts,
        outputs,
    };
    write_json(&art.report(stage), &report)?;
    Ok(report)
}

/// Every stage in order; model stages follow the configured generator choice.
pub fn run_all(config: &PipelineConfig) -> Result<Vec<StageReport>> {
    let choice = config.generate.generator;
    Stage::ALL
        .into_iter()
        .filter(|s| match s {
            Stage::TrainS2s => choice.s2s(),
            Stage::FinetuneLm => choice.lm(),
            _ => true,
        })
        .map(|s| {
            log::info!("stage {s}");
            run_stage(s, config)
        })
        .collect()
}

#[cfg(test)]
mod tests;
