//! Copy-augmented BiGRU encoder–decoder conditioned on answer, clue and style.

mod beam;
mod checkpoint;
pub(crate) use checkpoint::write_atomic;
mod features;
mod forward;
mod params;
mod train;
mod vocab;

pub use beam::Hypothesis;
pub use checkpoint::CHECKPOINT_FORMAT;
pub use features::{ner_index, question_tokens, Example, Target, NER_TAGS};
pub use forward::maxout;
pub use params::{Params, Seq2SeqConfig};
pub use train::{train, EpochReport, TrainConfig, TrainOutcome};
pub use vocab::{reduce_vocabulary, Vocab, BOS, EOS, PAD, RESERVED, UNK};

use ndarray::{s, Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::annotate::WordVectors;
use crate::dataset::Style;
use crate::error::{Error, Result};
use crate::nn::{GruCache, Tensors};
use crate::sampler::GenerationInput;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Seq2Seq<T: Real> {
    pub config: Seq2SeqConfig,
    pub vocab: Vocab,
    pub params: Params<T>,
}

/// Decoder state between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeState<T> {
    pub s: Array1<T>,
    /// Previous attentional context c_{t-1}.
    pub c: Array1<T>,
    /// Emitted ids; ids ≥ vocab size address source positions (`vocab + i`).
    pub prefix: Vec<usize>,
    pub log_prob: f64,
}

/// Result of one decoder step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput<T> {
    /// Mixed distribution over vocabulary ids followed by source positions.
    pub distribution: Array1<T>,
    pub generation: Array1<T>,
    pub gate: T,
    pub attention: Array1<T>,
    pub state: DecodeState<T>,
}

impl<T: Real> Seq2Seq<T> {
    pub fn new(config: Seq2SeqConfig, vocab: Vocab, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = Params::new(&config, vocab.len(), &mut rng);
        Ok(Seq2Seq { config, vocab, params })
    }

    /// Overwrite word-embedding rows with pretrained vectors where available.
    pub fn load_word_vectors(&mut self, vectors: &WordVectors) -> Result<usize> {
        if vectors.dim() != self.config.word_dim {
            return Err(Error::Model(format!(
                "word vectors have {} dims, model expects {}",
                vectors.dim(),
                self.config.word_dim
            )));
        }
        let mut hits = 0;
        for (id, tok) in self.vocab.tokens().iter().enumerate().skip(RESERVED.len()) {
            if let Some(v) = vectors.get(tok) {
                for (dst, src) in self.params.word_emb.row_mut(id).iter_mut().zip(v) {
                    *dst = T::lit(f64::from(*src));
                }
                hits += 1;
            }
        }
        Ok(hits)
    }

    pub fn example(&self, input: &GenerationInput) -> Result<Example> {
        Example::from_input(input, &self.vocab)
    }

    /// Encoder states, one 2×hidden row per token.
    pub fn encode(&self, input: &GenerationInput) -> Result<Array2<T>> {
        let ex = self.example(input)?;
        Ok(self.encode_example(&ex, None, false).h)
    }

    pub fn init_decoder(&self, style: Style, encoder_states: &Array2<T>) -> Result<DecodeState<T>> {
        self.check_states(encoder_states)?;
        Ok(DecodeState {
            s: self.initial_state(style.index(), encoder_states),
            c: Array1::zeros(self.config.context_dim()),
            prefix: Vec::new(),
            log_prob: 0.0,
        })
    }

    fn check_states(&self, h: &Array2<T>) -> Result<()> {
        if h.nrows() == 0 {
            return Err(Error::invalid("encoder states are empty"));
        }
        if h.ncols() != self.config.context_dim() {
            return Err(Error::Model(format!(
                "encoder states have width {}, expected {}",
                h.ncols(),
                self.config.context_dim()
            )));
        }
        Ok(())
    }

    /// One decoding step from `state` after emitting `prev` (a vocabulary id,
    /// or `vocab + i` for a copy of source position i).
    pub fn decode_step(&self, state: &DecodeState<T>, prev: usize, encoder_states: &Array2<T>) -> Result<StepOutput<T>> {
        self.check_states(encoder_states)?;
        if state.s.len() != self.config.dec_hidden() || state.c.len() != self.config.context_dim() {
            return Err(Error::Model("decoder state has the wrong width".into()));
        }
        let enc = forward::Encoded::from_states(self, encoder_states.clone());
        let mut cache = GruCache::new(1, self.config.dec_hidden());
        let st = self.step(&enc, state.s.view(), state.c.view(), prev, &mut cache, 0, None);
        let v = self.vocab.len();
        let mut dist = Array1::zeros(v + encoder_states.nrows());
        dist.slice_mut(s![..v]).assign(&st.p_gen.mapv(|p| (T::one() - st.g) * p));
        dist.slice_mut(s![v..]).assign(&st.alpha.mapv(|a| st.g * a));
        let mut prefix = state.prefix.clone();
        prefix.push(prev);
        Ok(StepOutput {
            distribution: dist,
            generation: st.p_gen,
            gate: st.g,
            attention: st.alpha,
            state: DecodeState {
                s: st.s,
                c: st.c,
                prefix,
                log_prob: state.log_prob,
            },
        })
    }

    /// Mean teacher-forced loss per target token (no dropout).
    pub fn mean_loss(&self, examples: &[Example]) -> f64 {
        let tokens: usize = examples.iter().map(|e| e.targets.len()).sum();
        let total: f64 = examples.iter().map(|e| self.loss_and_grad(e, None, None)).sum();
        total / tokens.max(1) as f64
    }

    /// Summed loss of one example and its gradient (dropout off).
    pub fn loss_with_gradient(&self, example: &Example) -> (f64, Params<T>) {
        let mut g = Params::zeros(&self.config, self.vocab.len());
        let loss = self.loss_and_grad(example, Some(&mut g), None);
        (loss, g)
    }

    pub fn loss(&self, example: &Example) -> f64 {
        self.loss_and_grad(example, None, None)
    }

    pub fn parameter_count(&self) -> usize {
        self.params.param_count()
    }
}

impl<T: Real> forward::Encoded<T> {
    fn from_states(model: &Seq2Seq<T>, h: Array2<T>) -> Self {
        let proj = h.dot(&model.params.att_wh.t());
        forward::Encoded::new(h, proj)
    }
}

#[cfg(test)]
mod tests;
