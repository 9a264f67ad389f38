//! Factorised ⟨answer, style, clue⟩ distributions learned from training
//! records, and seeded sampling of generation inputs from new sentences.

mod model;

pub use model::{BinSpec, FeatureKey, LearnStats, SamplerModel, SelectionRow, StyleRow, DEFAULT_SMOOTHING, MODEL_VERSION};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::annotate::{dependency_distance, AnnotatedSentence, Chunk};
use crate::dataset::Style;
use crate::error::{Error, Result};

/// Sentence plus the sampled answer, clue and style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationInput {
    pub sentence: AnnotatedSentence,
    pub answer: Chunk,
    pub clue: Chunk,
    pub style: Style,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n_answers: usize,
    pub n_styles: usize,
    pub n_clues: usize,
    /// Refuse clues that coincide with the answer span.
    pub forbid_answer_as_clue: bool,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            n_answers: 5,
            n_styles: 2,
            n_clues: 2,
            forbid_answer_as_clue: false,
        }
    }
}

/// Learn the three conditionals from reference records with default bins and smoothing.
pub fn learn_distributions(records: &[crate::dataset::TrainingRecord]) -> Result<SamplerModel> {
    SamplerModel::learn(records)
}

/// Tolerance on the mass of a renormalised distribution.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Renormalise `weights` into a distribution. Fails when nothing has mass.
pub fn normalize(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::NonFinite("sampling weight".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("all sampling weights are zero"));
    }
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mass: f64 = probs.iter().sum();
    assert!(
        (mass - 1.0).abs() <= MASS_TOLERANCE,
        "normalised distribution sums to {mass}"
    );
    Ok(probs)
}

/// Index drawn from the renormalised `weights`.
pub fn draw<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize> {
    let probs = normalize(weights)?;
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return Ok(i);
            }
        }
    }
    Ok(last)
}

/// Up to `k` distinct indices, each drawn from the weights renormalised over
/// the indices not yet taken.
fn draw_distinct<R: Rng + ?Sized>(weights: &[f64], k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let mut w = weights.to_vec();
    let mut picked = Vec::new();
    while picked.len() < k && w.iter().any(|x| *x > 0.0) {
        let i = draw(&w, rng)?;
        picked.push(i);
        w[i] = 0.0;
    }
    Ok(picked)
}

fn answer_weights(sentence: &AnnotatedSentence, model: &SamplerModel) -> Result<Vec<f64>> {
    if sentence.chunks.is_empty() {
        return Err(Error::invalid("sentence has no candidate chunks"));
    }
    Ok(sentence.chunks.iter().map(|c| model.answer_weight(c)).collect())
}

fn clue_weights(sentence: &AnnotatedSentence, answer: &Chunk, model: &SamplerModel) -> Result<Vec<f64>> {
    if sentence.chunks.is_empty() {
        return Err(Error::invalid("sentence has no candidate chunks"));
    }
    sentence
        .chunks
        .iter()
        .map(|c| Ok(model.clue_weight(c, dependency_distance(sentence, c.start, answer.start)?)))
        .collect()
}

pub fn sample_answer<R: Rng + ?Sized>(
    sentence: &AnnotatedSentence,
    model: &SamplerModel,
    rng: &mut R,
) -> Result<Chunk> {
    let w = answer_weights(sentence, model)?;
    Ok(sentence.chunks[draw(&w, rng)?].clone())
}

pub fn sample_style<R: Rng + ?Sized>(answer: &Chunk, model: &SamplerModel, rng: &mut R) -> Result<Style> {
    let row = model.style_row(answer);
    Ok(Style::ALL[draw(&row, rng)?])
}

pub fn sample_clue<R: Rng + ?Sized>(
    sentence: &AnnotatedSentence,
    answer: &Chunk,
    model: &SamplerModel,
    rng: &mut R,
) -> Result<Chunk> {
    let w = clue_weights(sentence, answer, model)?;
    Ok(sentence.chunks[draw(&w, rng)?].clone())
}

/// Distinct answers, then for each answer distinct styles and distinct clues;
/// every (style, clue) pair of an answer becomes one input.
pub fn sample_inputs<R: Rng + ?Sized>(
    sentence: &AnnotatedSentence,
    model: &SamplerModel,
    rng: &mut R,
    config: &SampleConfig,
) -> Vec<GenerationInput> {
    let Ok(aw) = answer_weights(sentence, model) else {
        return Vec::new();
    };
    let Ok(answers) = draw_distinct(&aw, config.n_answers, rng) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for ai in answers {
        let answer = &sentence.chunks[ai];
        let styles = draw_distinct(&model.style_row(answer), config.n_styles, rng).unwrap_or_default();
        let mut cw = clue_weights(sentence, answer, model).unwrap_or_default();
        if config.forbid_answer_as_clue {
            cw[ai] = 0.0;
        }
        let clues = draw_distinct(&cw, config.n_clues, rng).unwrap_or_default();
        for &si in &styles {
            for &ci in &clues {
                out.push(GenerationInput {
                    sentence: sentence.clone(),
                    answer: answer.clone(),
                    clue: sentence.chunks[ci].clone(),
                    style: Style::ALL[si],
                });
            }
        }
    }
    out
}
