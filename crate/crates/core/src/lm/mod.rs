//! Prompt-conditioned question generation with a decoder-only language model.

mod prompt;
mod rnn;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::TrainingRecord;
use crate::error::{Error, Result};
use crate::sampler::GenerationInput;

pub use prompt::{prompt_style, serialize_prompt, Marker, PromptParts, PromptSequence, PromptToken, Segment};
pub use rnn::{LmVocab, RecurrentLm, RnnLmConfig, RnnLmParams, RNN_LM_FORMAT};

/// Token ids of one prompt; the loss covers predictions of tokens after `loss_from`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LmExample {
    pub ids: Vec<usize>,
    pub segments: Vec<Segment>,
    pub loss_from: usize,
}

impl LmExample {
    pub fn target_count(&self) -> usize {
        self.ids.len().saturating_sub(self.loss_from + 1)
    }
}

/// A language model that can be fine-tuned on prompts and queried for
/// next-token distributions.
pub trait LmAdapter: Send + Sync {
    fn name(&self) -> String;
    fn max_context(&self) -> usize;
    fn vocab_size(&self) -> usize;
    fn encode(&self, token: &PromptToken) -> usize;
    fn decode(&self, id: usize) -> PromptToken;

    /// Id emitted for out-of-vocabulary words, if the model has one.
    fn unk_id(&self) -> Option<usize> {
        None
    }

    fn next_token_probs(&self, ids: &[usize], segments: &[Segment]) -> Result<Vec<f64>>;

    /// One optimiser step; returns the mean per-token loss before the update.
    fn train_batch(&mut self, batch: &[LmExample]) -> Result<f64>;

    fn loss(&self, batch: &[LmExample]) -> Result<f64>;
}

/// Encode a prompt, first dropping passage tokens from the right if it
/// exceeds `max_len`. Returns the example and how many tokens were dropped.
pub fn encode_prompt(lm: &dyn LmAdapter, mut seq: PromptSequence, max_len: usize) -> Result<(LmExample, usize)> {
    let dropped = seq.truncate_passage(max_len)?;
    if dropped > 0 {
        log::debug!("prompt truncated by {dropped} passage tokens");
    }
    let loss_from = seq
        .question_start()
        .ok_or_else(|| Error::invalid("prompt lacks a question marker"))?;
    let ids = seq.tokens.iter().map(|t| lm.encode(t)).collect();
    Ok((
        LmExample {
            ids,
            segments: seq.segments,
            loss_from,
        },
        dropped,
    ))
}

pub fn record_input(r: &TrainingRecord) -> GenerationInput {
    GenerationInput {
        sentence: r.passage.clone(),
        answer: r.answer.clone(),
        clue: r.clue.clone(),
        style: r.style,
    }
}

pub fn training_examples(records: &[TrainingRecord], lm: &dyn LmAdapter) -> Result<(Vec<LmExample>, usize)> {
    let mut out = Vec::with_capacity(records.len());
    let mut truncated = 0;
    for r in records {
        let seq = serialize_prompt(&record_input(r), Some(&r.question))?;
        let (ex, dropped) = encode_prompt(lm, seq, lm.max_context())?;
        truncated += usize::from(dropped > 0);
        out.push(ex);
    }
    Ok((out, truncated))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinetuneConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        FinetuneConfig {
            epochs: 4,
            batch_size: 2,
            seed: 17,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneReport {
    pub adapter: String,
    pub examples: usize,
    pub truncated: usize,
    /// Mean training loss per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Fine-tune `lm` on the prompts of `records`, loss restricted to the question.
pub fn finetune(records: &[TrainingRecord], lm: &mut dyn LmAdapter, config: &FinetuneConfig) -> Result<FinetuneReport> {
    if config.batch_size == 0 {
        return Err(Error::invalid("batch size must be at least 1"));
    }
    let (examples, truncated) = training_examples(records, lm)?;
    if examples.is_empty() {
        return Err(Error::invalid("no training records"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let (mut sum, mut batches) = (0.0, 0usize);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<LmExample> = chunk.iter().map(|&i| examples[i].clone()).collect();
            sum += lm.train_batch(&batch)?;
            batches += 1;
        }
        let mean = sum / batches as f64;
        log::info!("lm epoch {} loss {mean:.4}", epoch + 1);
        epoch_losses.push(mean);
    }
    Ok(FinetuneReport {
        adapter: lm.name(),
        examples: examples.len(),
        truncated,
        epoch_losses,
    })
}

/// Smallest set of highest-probability ids whose mass reaches `p`
/// (ties by lower id). Zero-probability ids are never included.
pub fn nucleus_set(probs: &[f64], p: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] > 0.0).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    let total: f64 = order.iter().map(|&i| probs[i]).sum();
    let target = p * total;
    let mut mass = 0.0;
    let mut out = Vec::new();
    for i in order {
        out.push(i);
        mass += probs[i];
        if mass >= target * (1.0 - 1e-12) {
            break;
        }
    }
    out
}

/// Sample a question with nucleus (top-p) sampling. Markers other than the
/// closing one, and the unknown-word id, are never emitted.
pub fn nucleus_generate<R: Rng + ?Sized>(
    input: &GenerationInput,
    lm: &dyn LmAdapter,
    p: f64,
    max_len: usize,
    rng: &mut R,
) -> Result<String> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("nucleus mass {p} outside [0, 1]")));
    }
    let room = lm.max_context().saturating_sub(max_len);
    let (ex, _) = encode_prompt(lm, serialize_prompt(input, None)?, room)?;
    let (mut ids, mut segments) = (ex.ids, ex.segments);
    let eos = lm.encode(&PromptToken::Marker(Marker::Eos));
    let mut banned: Vec<usize> = Marker::ALL
        .iter()
        .filter(|&&m| m != Marker::Eos)
        .map(|&m| lm.encode(&PromptToken::Marker(m)))
        .collect();
    banned.extend(lm.unk_id());
    let mut words = Vec::new();
    for _ in 0..max_len {
        let mut probs = lm.next_token_probs(&ids, &segments)?;
        for &b in &banned {
            if let Some(v) = probs.get_mut(b) {
                *v = 0.0;
            }
        }
        let set = nucleus_set(&probs, p);
        if set.is_empty() {
            break;
        }
        let mass: f64 = set.iter().map(|&i| probs[i]).sum();
        let mut u = rng.gen::<f64>() * mass;
        let mut pick = set[set.len() - 1];
        for &i in &set {
            if u < probs[i] {
                pick = i;
                break;
            }
            u -= probs[i];
        }
        if pick == eos {
            break;
        }
        match lm.decode(pick) {
            PromptToken::Word(w) => words.push(w),
            PromptToken::Marker(_) => break,
        }
        ids.push(pick);
        segments.push(Segment::Question);
    }
    Ok(words.join(" "))
}

#[cfg(test)]
mod tests;
