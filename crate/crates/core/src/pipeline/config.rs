use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lm::{FinetuneConfig, RnnLmConfig};
use crate::nn::{AdamConfig, ClipMode};
use crate::sampler::SampleConfig;
use crate::seq2seq::{Seq2SeqConfig, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    /// Reading-comprehension JSON (data → paragraphs → qas).
    #[default]
    Squad,
    /// Sentence-level split stem with `.source.txt`, `.target.txt`, `.bio`.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    #[default]
    F32,
    F64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorChoice {
    #[default]
    S2s,
    Lm,
    Both,
}

impl GeneratorChoice {
    pub fn s2s(self) -> bool {
        matches!(self, GeneratorChoice::S2s | GeneratorChoice::Both)
    }

    pub fn lm(self) -> bool {
        matches!(self, GeneratorChoice::Lm | GeneratorChoice::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub work_dir: PathBuf,
    pub corpus: Option<PathBuf>,
    pub corpus_format: CorpusFormat,
    /// Held-out corpus; when absent a fraction of the constructed records is held out.
    pub dev_corpus: Option<PathBuf>,
    /// Unlabeled text, one or more sentences per line.
    pub sentences: Option<PathBuf>,
    /// Prebuilt related-words dictionary (JSON).
    pub related_words: Option<PathBuf>,
    pub word_vectors: Option<PathBuf>,
    pub synonyms: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            work_dir: PathBuf::from("work"),
            corpus: None,
            corpus_format: CorpusFormat::Squad,
            dev_corpus: None,
            sentences: None,
            related_words: None,
            word_vectors: None,
            synonyms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructSection {
    pub dev_fraction: f64,
    pub max_samples: Option<usize>,
    pub neighbors: usize,
}

impl Default for ConstructSection {
    fn default() -> Self {
        ConstructSection {
            dev_fraction: 0.1,
            max_samples: None,
            neighbors: crate::annotate::DEFAULT_NEIGHBORS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSection {
    pub n_answers: usize,
    pub n_styles: usize,
    pub n_clues: usize,
    pub forbid_answer_as_clue: bool,
    pub smoothing: f64,
    pub min_sentence_tokens: usize,
    pub max_sentence_tokens: usize,
}

impl Default for SamplerSection {
    fn default() -> Self {
        let s = SampleConfig::default();
        SamplerSection {
            n_answers: s.n_answers,
            n_styles: s.n_styles,
            n_clues: s.n_clues,
            forbid_answer_as_clue: s.forbid_answer_as_clue,
            smoothing: crate::sampler::DEFAULT_SMOOTHING,
            min_sentence_tokens: 5,
            max_sentence_tokens: 100,
        }
    }
}

impl SamplerSection {
    pub fn sample_config(&self) -> SampleConfig {
        SampleConfig {
            n_answers: self.n_answers,
            n_styles: self.n_styles,
            n_clues: self.n_clues,
            forbid_answer_as_clue: self.forbid_answer_as_clue,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seq2SeqSection {
    pub scalar: ScalarKind,
    pub vocab_size: usize,
    pub word_dim: usize,
    pub feature_dim: usize,
    pub enc_hidden: usize,
    pub style_dim: usize,
    pub attn_dim: usize,
    pub maxout_dim: usize,
    pub dropout: f64,
    pub max_question_len: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub clip: f64,
    pub clip_mode: ClipMode,
    pub beam_width: usize,
    pub epoch_checkpoints: bool,
}

impl Default for Seq2SeqSection {
    fn default() -> Self {
        let m = Seq2SeqConfig::default();
        let t = TrainConfig::default();
        Seq2SeqSection {
            scalar: ScalarKind::F32,
            vocab_size: m.vocab_size,
            word_dim: m.word_dim,
            feature_dim: m.feature_dim,
            enc_hidden: m.enc_hidden,
            style_dim: m.style_dim,
            attn_dim: m.attn_dim,
            maxout_dim: m.maxout_dim,
            dropout: m.dropout,
            max_question_len: m.max_question_len,
            epochs: t.epochs,
            batch_size: t.batch_size,
            lr: t.optimizer.lr,
            beta1: t.optimizer.beta1,
            beta2: t.optimizer.beta2,
            clip: t.optimizer.clip,
            clip_mode: t.optimizer.clip_mode,
            beam_width: 20,
            epoch_checkpoints: t.epoch_checkpoints,
        }
    }
}

impl Seq2SeqSection {
    pub fn model_config(&self) -> Seq2SeqConfig {
        Seq2SeqConfig {
            vocab_size: self.vocab_size,
            word_dim: self.word_dim,
            feature_dim: self.feature_dim,
            enc_hidden: self.enc_hidden,
            style_dim: self.style_dim,
            attn_dim: self.attn_dim,
            maxout_dim: self.maxout_dim,
            dropout: self.dropout,
            max_question_len: self.max_question_len,
        }
    }

    pub fn train_config(&self, seed: u64, checkpoint_dir: PathBuf) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            optimizer: AdamConfig {
                lr: self.lr,
                beta1: self.beta1,
                beta2: self.beta2,
                clip: self.clip,
                clip_mode: self.clip_mode,
                ..AdamConfig::default()
            },
            seed,
            checkpoint_dir: Some(checkpoint_dir),
            epoch_checkpoints: self.epoch_checkpoints,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmSection {
    pub scalar: ScalarKind,
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    pub max_context: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub top_p: f64,
    pub max_len: usize,
}

impl Default for LmSection {
    fn default() -> Self {
        let m = RnnLmConfig::default();
        let f = FinetuneConfig::default();
        LmSection {
            scalar: ScalarKind::F32,
            vocab_size: m.vocab_size,
            embed_dim: m.embed_dim,
            hidden: m.hidden,
            max_context: m.max_context,
            lr: m.optimizer.lr,
            epochs: f.epochs,
            batch_size: f.batch_size,
            top_p: 0.9,
            max_len: 30,
        }
    }
}

impl LmSection {
    pub fn model_config(&self) -> RnnLmConfig {
        RnnLmConfig {
            vocab_size: self.vocab_size,
            embed_dim: self.embed_dim,
            hidden: self.hidden,
            max_context: self.max_context,
            optimizer: AdamConfig {
                lr: self.lr,
                ..AdamConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSection {
    pub generator: GeneratorChoice,
}

impl Default for GenerateSection {
    fn default() -> Self {
        GenerateSection {
            generator: GeneratorChoice::S2s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSection {
    pub threshold: f64,
    /// Only "stub" is bundled.
    pub adapters: String,
    pub dedup: bool,
}

impl Default for FilterSection {
    fn default() -> Self {
        FilterSection {
            threshold: crate::filter::DEFAULT_THRESHOLD,
            adapters: "stub".into(),
            dedup: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EvalSplit {
    #[default]
    Dev,
    Train,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub split: EvalSplit,
    pub max_records: Option<usize>,
}

/// Everything a pipeline run needs. Relative paths are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub paths: Paths,
    pub construct: ConstructSection,
    pub sampler: SamplerSection,
    pub seq2seq: Seq2SeqSection,
    pub lm: LmSection,
    pub generate: GenerateSection,
    pub filter: FilterSection,
    pub evaluate: EvaluateSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 17,
            paths: Paths::default(),
            construct: ConstructSection::default(),
            sampler: SamplerSection::default(),
            seq2seq: Seq2SeqSection::default(),
            lm: LmSection::default(),
            generate: GenerateSection::default(),
            filter: FilterSection::default(),
            evaluate: EvaluateSection::default(),
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Format(format!("config: {e}")))
    }

    /// Parse `path` and resolve relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::resource(path, e))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let p = &mut self.paths;
        resolve(base, &mut p.work_dir);
        for opt in [
            &mut p.corpus,
            &mut p.dev_corpus,
            &mut p.sentences,
            &mut p.related_words,
            &mut p.word_vectors,
            &mut p.synonyms,
        ] {
            if let Some(x) = opt.as_mut() {
                resolve(base, x);
            }
        }
    }

    /// Counts positive, rates in range, and every configured input present.
    pub fn validate(&self) -> Result<()> {
        let s = &self.sampler;
        if s.n_answers == 0 || s.n_styles == 0 || s.n_clues == 0 {
            return Err(Error::invalid("sampler counts must be positive"));
        }
        if s.min_sentence_tokens > s.max_sentence_tokens {
            return Err(Error::invalid("min_sentence_tokens exceeds max_sentence_tokens"));
        }
        if !(0.0..1.0).contains(&self.construct.dev_fraction) {
            return Err(Error::invalid("dev_fraction must lie in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.filter.threshold) {
            return Err(Error::invalid("filter threshold must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.lm.top_p) {
            return Err(Error::invalid("top_p must lie in [0, 1]"));
        }
        if self.seq2seq.beam_width == 0 || self.lm.batch_size == 0 || self.seq2seq.batch_size == 0 {
            return Err(Error::invalid("beam width and batch sizes must be positive"));
        }
        self.seq2seq.model_config().validate()?;
        let p = &self.paths;
        for path in [&p.dev_corpus, &p.sentences, &p.related_words, &p.word_vectors, &p.synonyms].into_iter().flatten() {
            if !path.exists() {
                return Err(Error::resource(path, "configured input does not exist"));
            }
        }
        if let Some(c) = &p.corpus {
            let probe = match p.corpus_format {
                CorpusFormat::Squad => c.clone(),
                CorpusFormat::Split => PathBuf::from(format!("{}.source.txt", c.display())),
            };
            if !probe.exists() {
                return Err(Error::resource(probe, "configured corpus does not exist"));
            }
        }
        Ok(())
    }
}
