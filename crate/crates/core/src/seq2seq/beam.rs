use std::cmp::Ordering;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::features::{Example, Target};
use super::forward::Step;
use super::vocab::{BOS, EOS, PAD, UNK};
use super::Seq2Seq;
use crate::error::Result;
use crate::nn::GruCache;
use crate::sampler::GenerationInput;
use crate::scalar::Real;

/// A finished beam entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    /// Emitted tokens, end token excluded.
    pub tokens: Vec<String>,
    pub text: String,
    pub log_prob: f64,
    /// `log_prob` divided by the number of decoding steps.
    pub score: f64,
    /// Ended with the end token rather than the length cap.
    pub finished: bool,
}

/// Output ids for one source: vocabulary ids, then one extra id per distinct
/// out-of-vocabulary source word.
pub(crate) struct ExtendedVocab {
    base: usize,
    pos_to_id: Vec<usize>,
    oov: Vec<String>,
}

impl ExtendedVocab {
    pub fn new<T: Real>(model: &Seq2Seq<T>, ex: &Example) -> Self {
        let base = model.vocab.len();
        let mut oov: Vec<String> = Vec::new();
        let mut oov_lower: Vec<String> = Vec::new();
        let pos_to_id = ex
            .source
            .iter()
            .map(|w| {
                if model.vocab.contains(w) {
                    return model.vocab.id(w);
                }
                let lw = w.to_lowercase();
                match oov_lower.iter().position(|o| *o == lw) {
                    Some(k) => base + k,
                    None => {
                        oov_lower.push(lw);
                        oov.push(w.clone());
                        base + oov.len() - 1
                    }
                }
            })
            .collect();
        ExtendedVocab { base, pos_to_id, oov }
    }

    pub fn len(&self) -> usize {
        self.base + self.oov.len()
    }

    pub fn token<'a, T: Real>(&'a self, model: &'a Seq2Seq<T>, id: usize) -> &'a str {
        if id < self.base {
            model.vocab.token(id)
        } else {
            &self.oov[id - self.base]
        }
    }

    pub fn gold(&self, target: &Target) -> usize {
        match target {
            Target::Generate(y) => *y,
            Target::Copy(at) => self.pos_to_id[at[0]],
        }
    }

    /// Word-level mixture (1-g)·P_gen + g·Σ α over positions sharing a word,
    /// with pad/unk/bos removed and the rest renormalised.
    pub fn distribution<T: Real>(&self, st: &Step<T>) -> Array1<T> {
        let mut d = Array1::zeros(self.len());
        let keep = T::one() - st.g;
        for (v, p) in st.p_gen.iter().enumerate() {
            d[v] = keep * *p;
        }
        for (i, a) in st.alpha.iter().enumerate() {
            d[self.pos_to_id[i]] += st.g * *a;
        }
        for id in [PAD, UNK, BOS] {
            d[id] = T::zero();
        }
        let total = d.sum();
        if total > T::zero() {
            d.mapv_inplace(|x| x / total);
        }
        d
    }
}

struct Live<T> {
    s: Array1<T>,
    c: Array1<T>,
    prev: usize,
    ids: Vec<usize>,
    log_prob: f64,
}

/// Indices of the `k` largest entries, ties to the smaller index.
fn top_k<T: Real>(d: &Array1<T>, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d.len()).filter(|&i| d[i] > T::zero()).collect();
    idx.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

impl<T: Real> Seq2Seq<T> {
    /// Beam search; returns up to `beam_width` hypotheses ranked by
    /// length-normalised log-probability.
    pub fn beam_generate(&self, input: &GenerationInput, beam_width: usize, max_len: usize) -> Result<Vec<Hypothesis>> {
        let ex = self.example(input)?;
        Ok(self.beam_search(&ex, beam_width, max_len))
    }

    pub fn greedy(&self, input: &GenerationInput, max_len: usize) -> Result<Option<Hypothesis>> {
        Ok(self.beam_generate(input, 1, max_len)?.into_iter().next())
    }

    pub fn beam_search(&self, ex: &Example, beam_width: usize, max_len: usize) -> Vec<Hypothesis> {
        let beam_width = beam_width.max(1);
        let ext = ExtendedVocab::new(self, ex);
        let enc = self.encode_example(ex, None, false);
        let mut live = vec![Live {
            s: self.initial_state(ex.style.index(), &enc.h),
            c: Array1::zeros(self.config.context_dim()),
            prev: BOS,
            ids: Vec::new(),
            log_prob: 0.0,
        }];
        let mut done: Vec<(Vec<usize>, f64, bool)> = Vec::new();
        let dh = self.config.dec_hidden();
        for _ in 0..max_len {
            let mut steps = Vec::with_capacity(live.len());
            for h in &live {
                let mut cache = GruCache::new(1, dh);
                steps.push(self.step(&enc, h.s.view(), h.c.view(), h.prev, &mut cache, 0, None));
            }
            let mut scored: Vec<(usize, usize, f64)> = Vec::new();
            for (hi, st) in steps.iter().enumerate() {
                let d = ext.distribution(st);
                for id in top_k(&d, beam_width) {
                    scored.push((hi, id, live[hi].log_prob + d[id].as_f64().ln()));
                }
            }
            scored.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
            scored.truncate(beam_width);
            let mut next = Vec::new();
            for (hi, id, lp) in scored {
                let mut ids = live[hi].ids.clone();
                ids.push(id);
                if id == EOS {
                    done.push((ids, lp, true));
                } else {
                    let st = &steps[hi];
                    next.push(Live {
                        s: st.s.clone(),
                        c: st.c.clone(),
                        prev: id,
                        ids,
                        log_prob: lp,
                    });
                }
            }
            live = next;
            if live.is_empty() || done.len() >= beam_width {
                break;
            }
        }
        if done.len() < beam_width {
            done.extend(live.into_iter().map(|h| (h.ids, h.log_prob, false)));
        }
        let mut out: Vec<Hypothesis> = done
            .into_iter()
            .map(|(ids, lp, finished)| {
                let n = ids.len().max(1);
                let tokens: Vec<String> = ids
                    .iter()
                    .filter(|&&id| id != EOS)
                    .map(|&id| ext.token(self, id).to_string())
                    .collect();
                Hypothesis {
                    text: tokens.join(" "),
                    tokens,
                    log_prob: lp,
                    score: lp / n as f64,
                    finished,
                }
            })
            .collect();
        out.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal).then_with(|| a.text.cmp(&b.text)));
        out.truncate(beam_width);
        out
    }

    /// Teacher-forced accuracy of the arg-max word at every target position.
    pub fn token_accuracy(&self, examples: &[Example]) -> f64 {
        let mut right = 0usize;
        let mut total = 0usize;
        let dh = self.config.dec_hidden();
        for ex in examples {
            let ext = ExtendedVocab::new(self, ex);
            let enc = self.encode_example(ex, None, false);
            let mut s = self.initial_state(ex.style.index(), &enc.h);
            let mut c = Array1::zeros(self.config.context_dim());
            for (t, target) in ex.targets.iter().enumerate() {
                let mut cache = GruCache::new(1, dh);
                let st = self.step(&enc, s.view(), c.view(), ex.dec_input[t], &mut cache, 0, None);
                let d = ext.distribution(&st);
                if top_k(&d, 1).first() == Some(&ext.gold(target)) {
                    right += 1;
                }
                total += 1;
                s = st.s;
                c = st.c;
            }
        }
        right as f64 / total.max(1) as f64
    }
}
