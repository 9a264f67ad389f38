use std::collections::HashMap;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::prompt::{Marker, PromptToken, Segment};
use super::{LmAdapter, LmExample};
use crate::dataset::{Style, TrainingRecord};
use crate::error::{Error, Result};
use crate::nn::{softmax, uniform, xavier, Adam, AdamConfig, Gru, GruCache, GruGrads, Tensors};
use crate::scalar::Real;
use crate::seq2seq::{question_tokens, reduce_vocabulary};

pub const RNN_LM_FORMAT: &str = "acsqg-rnnlm/1";
const UNK_TOKEN: &str = "<unk>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RnnLmConfig {
    /// Word types kept besides the markers and `<unk>`.
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    pub max_context: usize,
    pub optimizer: AdamConfig,
}

impl Default for RnnLmConfig {
    fn default() -> Self {
        RnnLmConfig {
            vocab_size: 5000,
            embed_dim: 64,
            hidden: 128,
            max_context: 256,
            optimizer: AdamConfig {
                lr: 3e-3,
                ..AdamConfig::default()
            },
        }
    }
}

/// Markers take ids 0..6, `<unk>` is 6, words follow.
#[derive(Debug, Clone, PartialEq)]
pub struct LmVocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl LmVocab {
    const UNK: usize = Marker::ALL.len();
    const FIRST_WORD: usize = Marker::ALL.len() + 1;

    pub fn new(words: Vec<String>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i + Self::FIRST_WORD))
            .collect();
        LmVocab { words, index }
    }

    pub fn len(&self) -> usize {
        self.words.len() + Self::FIRST_WORD
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn encode(&self, token: &PromptToken) -> usize {
        match token {
            PromptToken::Marker(m) => Marker::ALL.iter().position(|x| x == m).unwrap_or(Self::UNK),
            PromptToken::Word(w) => self.index.get(&w.to_lowercase()).copied().unwrap_or(Self::UNK),
        }
    }

    pub fn decode(&self, id: usize) -> PromptToken {
        if id < Self::UNK {
            PromptToken::Marker(Marker::ALL[id])
        } else if id == Self::UNK || id >= self.len() {
            PromptToken::Word(UNK_TOKEN.to_string())
        } else {
            PromptToken::Word(self.words[id - Self::FIRST_WORD].clone())
        }
    }
}

impl Serialize for LmVocab {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.words.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LmVocab {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(LmVocab::new(Vec::<String>::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RnnLmParams<T> {
    pub emb: Array2<T>,
    pub seg: Array2<T>,
    pub gru: Gru<T>,
    pub w_out: Array2<T>,
    pub b_out: Array1<T>,
}

impl<T: Real> RnnLmParams<T> {
    fn new(vocab: usize, config: &RnnLmConfig, rng: &mut ChaCha8Rng) -> Self {
        RnnLmParams {
            emb: uniform(vocab, config.embed_dim, 0.1, rng),
            seg: uniform(Segment::ALL.len(), config.embed_dim, 0.1, rng),
            gru: Gru::new(config.embed_dim, config.hidden, rng),
            w_out: xavier(vocab, config.hidden, rng),
            b_out: Array1::zeros(vocab),
        }
    }

    fn zeros_like(&self) -> Self {
        RnnLmParams {
            emb: Array2::zeros(self.emb.raw_dim()),
            seg: Array2::zeros(self.seg.raw_dim()),
            gru: Gru::zeros(self.gru.input(), self.gru.hidden()),
            w_out: Array2::zeros(self.w_out.raw_dim()),
            b_out: Array1::zeros(self.b_out.len()),
        }
    }
}

impl<T: Real> Tensors<T> for RnnLmParams<T> {
    fn tensors(&self) -> Vec<(&'static str, ArrayViewD<'_, T>)> {
        vec![
            ("emb", self.emb.view().into_dyn()),
            ("seg", self.seg.view().into_dyn()),
            ("gru.w", self.gru.w.view().into_dyn()),
            ("gru.u", self.gru.u.view().into_dyn()),
            ("gru.b", self.gru.b.view().into_dyn()),
            ("w_out", self.w_out.view().into_dyn()),
            ("b_out", self.b_out.view().into_dyn()),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, ArrayViewMutD<'_, T>)> {
        vec![
            ("emb", self.emb.view_mut().into_dyn()),
            ("seg", self.seg.view_mut().into_dyn()),
            ("gru.w", self.gru.w.view_mut().into_dyn()),
            ("gru.u", self.gru.u.view_mut().into_dyn()),
            ("gru.b", self.gru.b.view_mut().into_dyn()),
            ("w_out", self.w_out.view_mut().into_dyn()),
            ("b_out", self.b_out.view_mut().into_dyn()),
        ]
    }
}

/// Word-level recurrent language model over prompt sequences. Segment
/// embeddings are added to token embeddings before a single GRU layer.
#[derive(Debug, Clone)]
pub struct RecurrentLm<T: Real> {
    pub config: RnnLmConfig,
    pub vocab: LmVocab,
    pub params: RnnLmParams<T>,
    optimizer: Option<Adam<RnnLmParams<T>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct Stored<T> {
    format: String,
    scalar: String,
    config: RnnLmConfig,
    vocab: LmVocab,
    params: RnnLmParams<T>,
}

struct Trace<T> {
    xs: Array2<T>,
    hs: Array2<T>,
    cache: GruCache<T>,
}

impl<T: Real> RecurrentLm<T> {
    pub fn new(config: RnnLmConfig, words: Vec<String>, seed: u64) -> Result<Self> {
        if config.embed_dim == 0 || config.hidden == 0 || config.max_context < 8 {
            return Err(Error::invalid("language model dimensions must be positive and the context at least 8"));
        }
        let vocab = LmVocab::new(words);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = RnnLmParams::new(vocab.len(), &config, &mut rng);
        Ok(RecurrentLm {
            config,
            vocab,
            params,
            optimizer: None,
        })
    }

    /// Vocabulary from passages, questions and style names of `records`.
    pub fn for_records(records: &[TrainingRecord], config: RnnLmConfig, seed: u64) -> Result<Self> {
        let corpus = records.iter().flat_map(|r| {
            r.passage
                .tokens
                .iter()
                .map(|t| t.text.to_lowercase())
                .chain(question_tokens(&r.question))
        });
        let reduced = reduce_vocabulary(corpus, config.vocab_size.max(1))?;
        let mut words: Vec<String> = reduced.tokens()[crate::seq2seq::RESERVED.len()..].to_vec();
        for s in Style::ALL {
            if !words.iter().any(|w| w == s.as_str()) {
                words.push(s.as_str().to_string());
            }
        }
        Self::new(config, words, seed)
    }

    fn run(&self, ids: &[usize], segments: &[Segment]) -> Trace<T> {
        let n = ids.len();
        let p = &self.params;
        let mut xs = Array2::zeros((n, self.config.embed_dim));
        for (t, (&id, seg)) in ids.iter().zip(segments).enumerate() {
            let mut row = xs.row_mut(t);
            row.assign(&p.emb.row(id.min(p.emb.nrows() - 1)));
            row += &p.seg.row(seg.index());
        }
        let a = p.gru.project(xs.view());
        let hd = p.gru.hidden();
        let mut cache = GruCache::new(n, hd);
        let mut hs = Array2::zeros((n, hd));
        let mut h = Array1::zeros(hd);
        for t in 0..n {
            h = p.gru.step(a.row(t), h.view(), &mut cache, t);
            hs.row_mut(t).assign(&h);
        }
        Trace { xs, hs, cache }
    }

    /// Summed loss of one example and, when `grads` is given, its gradient added in.
    fn example_loss(&self, ex: &LmExample, scale: T, grads: Option<&mut RnnLmParams<T>>) -> (f64, usize) {
        let n = ex.ids.len();
        if n < 2 || ex.loss_from + 1 >= n {
            return (0.0, 0);
        }
        let inputs = &ex.ids[..n - 1];
        let trace = self.run(inputs, &ex.segments[..n - 1]);
        let p = &self.params;
        let positions: Vec<usize> = (ex.loss_from..n - 1).collect();
        let hl = trace.hs.select(Axis(0), &positions);
        let mut logits = hl.dot(&p.w_out.t());
        logits += &p.b_out;
        let mut loss = 0.0;
        let mut dlogits = Array2::zeros(logits.raw_dim());
        for (k, &t) in positions.iter().enumerate() {
            let probs = softmax(logits.row(k));
            let y = ex.ids[t + 1];
            loss -= probs[y].as_f64().max(1e-300).ln();
            let mut d = dlogits.row_mut(k);
            d.assign(&probs);
            d[y] -= T::one();
            d *= scale;
        }
        let Some(g) = grads else {
            return (loss, positions.len());
        };
        ndarray::linalg::general_mat_mul(T::one(), &dlogits.t(), &hl, T::one(), &mut g.w_out);
        g.b_out += &dlogits.sum_axis(Axis(0));
        let dhl = dlogits.dot(&p.w_out);
        let steps = n - 1;
        let hd = p.gru.hidden();
        let mut dhs = Array2::<T>::zeros((steps, hd));
        for (k, &t) in positions.iter().enumerate() {
            let mut r = dhs.row_mut(t);
            r += &dhl.row(k);
        }
        let mut gg = GruGrads::new(steps, hd);
        let mut carry = Array1::zeros(hd);
        for t in (0..steps).rev() {
            let d = &dhs.row(t) + &carry;
            carry = p.gru.step_backward(d.view(), &trace.cache, t, &mut gg);
        }
        let dx = p.gru.accumulate(&gg, trace.xs.view(), &trace.cache, &mut g.gru);
        for t in 0..steps {
            let mut e = g.emb.row_mut(inputs[t].min(p.emb.nrows() - 1));
            e += &dx.row(t);
            let mut s = g.seg.row_mut(ex.segments[t].index());
            s += &dx.row(t);
        }
        (loss, positions.len())
    }

    /// Mean loss per target token and its gradient.
    pub fn loss_with_gradient(&self, batch: &[LmExample]) -> (f64, RnnLmParams<T>) {
        let total: usize = batch.iter().map(LmExample::target_count).sum();
        let scale = T::one() / T::lit(total.max(1) as f64);
        let mut grads = self.params.zeros_like();
        let mut loss = 0.0;
        for ex in batch {
            loss += self.example_loss(ex, scale, Some(&mut grads)).0;
        }
        (loss / total.max(1) as f64, grads)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&Stored {
            format: RNN_LM_FORMAT.to_string(),
            scalar: T::NAME.to_string(),
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            params: self.params.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let stored: Stored<T> = serde_json::from_str(text)?;
        if stored.format != RNN_LM_FORMAT {
            return Err(Error::Format(format!("not a language model checkpoint (format {:?})", stored.format)));
        }
        if stored.scalar != T::NAME {
            return Err(Error::Model(format!("checkpoint holds {} parameters, loader expects {}", stored.scalar, T::NAME)));
        }
        let v = stored.vocab.len();
        let (e, h) = (stored.config.embed_dim, stored.config.hidden);
        let p = &stored.params;
        let shapes_ok = p.emb.dim() == (v, e)
            && p.seg.dim() == (Segment::ALL.len(), e)
            && p.gru.w.dim() == (3 * h, e)
            && p.gru.u.dim() == (3 * h, h)
            && p.w_out.dim() == (v, h)
            && p.b_out.len() == v;
        if !shapes_ok {
            return Err(Error::Model("language model parameter shapes do not match its config".into()));
        }
        if !p.all_finite() {
            return Err(Error::Model("language model checkpoint holds non-finite parameters".into()));
        }
        Ok(RecurrentLm {
            config: stored.config,
            vocab: stored.vocab,
            params: stored.params,
            optimizer: None,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::seq2seq::write_atomic(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::resource(path, e))?;
        Self::from_json(&text)
    }
}

impl<T: Real> LmAdapter for RecurrentLm<T> {
    fn name(&self) -> String {
        format!("rnn-lm-{}", T::NAME)
    }

    fn max_context(&self) -> usize {
        self.config.max_context
    }

    fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn encode(&self, token: &PromptToken) -> usize {
        self.vocab.encode(token)
    }

    fn decode(&self, id: usize) -> PromptToken {
        self.vocab.decode(id)
    }

    fn unk_id(&self) -> Option<usize> {
        Some(LmVocab::UNK)
    }

    fn next_token_probs(&self, ids: &[usize], segments: &[Segment]) -> Result<Vec<f64>> {
        if ids.is_empty() || ids.len() != segments.len() {
            return Err(Error::invalid("prefix must be non-empty with one segment per token"));
        }
        let trace = self.run(ids, segments);
        let h = trace.hs.row(ids.len() - 1);
        let logits = self.params.w_out.dot(&h) + &self.params.b_out;
        Ok(softmax(logits.view()).iter().map(|v| v.as_f64()).collect())
    }

    fn train_batch(&mut self, batch: &[LmExample]) -> Result<f64> {
        let (loss, mut grads) = self.loss_with_gradient(batch);
        if !loss.is_finite() || !grads.all_finite() {
            return Err(Error::NonFinite(format!("language model loss {loss}")));
        }
        let config = self.config.optimizer;
        let zeros = self.params.zeros_like();
        let opt = self.optimizer.get_or_insert_with(|| Adam::new(config, zeros));
        opt.update(&mut self.params, &mut grads);
        Ok(loss)
    }

    fn loss(&self, batch: &[LmExample]) -> Result<f64> {
        let (mut sum, mut count) = (0.0, 0);
        for ex in batch {
            let (l, c) = self.example_loss(ex, T::one(), None);
            sum += l;
            count += c;
        }
        Ok(sum / count.max(1) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> RecurrentLm<f64> {
        let config = RnnLmConfig {
            vocab_size: 10,
            embed_dim: 3,
            hidden: 4,
            max_context: 16,
            optimizer: AdamConfig::default(),
        };
        RecurrentLm::new(config, vec!["a".into(), "b".into(), "c".into()], 5).unwrap()
    }

    fn example() -> LmExample {
        LmExample {
            ids: vec![0, 7, 8, 1, 9, 2, 7, 3, 8, 4, 9, 8, 5],
            segments: vec![
                Segment::Passage,
                Segment::Passage,
                Segment::Answer,
                Segment::Clue,
                Segment::Clue,
                Segment::Answer,
                Segment::Answer,
                Segment::Style,
                Segment::Style,
                Segment::Question,
                Segment::Question,
                Segment::Question,
                Segment::Question,
            ],
            loss_from: 9,
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let lm = tiny();
        let ex = example();
        let (_, grads) = lm.loss_with_gradient(std::slice::from_ref(&ex));
        let eps = 1e-5;
        let f = |m: &RecurrentLm<f64>| m.loss_with_gradient(std::slice::from_ref(&ex)).0;
        for (gi, (name, g)) in grads.tensors().into_iter().enumerate() {
            for i in 0..g.len().min(30) {
                let mut plus = lm.clone();
                let mut minus = lm.clone();
                plus.params.tensors_mut()[gi].1.as_slice_mut().unwrap()[i] += eps;
                minus.params.tensors_mut()[gi].1.as_slice_mut().unwrap()[i] -= eps;
                let num = (f(&plus) - f(&minus)) / (2.0 * eps);
                let ana = g.as_slice().unwrap()[i];
                let err = (num - ana).abs() / num.abs().max(ana.abs()).max(1e-6);
                assert!(err < 1e-4, "{name}[{i}]: {ana} vs {num}");
            }
        }
    }

    #[test]
    fn loss_covers_only_question_targets() {
        let lm = tiny();
        let ex = example();
        let mut manual = 0.0;
        for t in ex.loss_from..ex.ids.len() - 1 {
            let p = lm.next_token_probs(&ex.ids[..=t], &ex.segments[..=t]).unwrap();
            manual -= p[ex.ids[t + 1]].ln();
        }
        manual /= ex.target_count() as f64;
        let got = lm.loss(std::slice::from_ref(&ex)).unwrap();
        assert!((got - manual).abs() < 1e-12);
        assert_eq!(ex.target_count(), 3);
    }

    #[test]
    fn distribution_normalised_and_checkpoint_round_trips() {
        let lm = tiny();
        let p = lm.next_token_probs(&[0, 7], &[Segment::Passage, Segment::Passage]).unwrap();
        assert_eq!(p.len(), lm.vocab_size());
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let back = RecurrentLm::<f64>::from_json(&lm.to_json().unwrap()).unwrap();
        assert_eq!(back.params, lm.params);
        assert!(RecurrentLm::<f32>::from_json(&lm.to_json().unwrap()).is_err());
    }

    #[test]
    fn vocab_codes() {
        let v = LmVocab::new(vec!["who".into()]);
        assert_eq!(v.encode(&PromptToken::Marker(Marker::Ques)), 4);
        assert_eq!(v.encode(&PromptToken::Word("Who".into())), 7);
        assert_eq!(v.decode(6), PromptToken::Word("<unk>".into()));
        assert_eq!(v.decode(v.encode(&PromptToken::Marker(Marker::Eos))), PromptToken::Marker(Marker::Eos));
    }
}
