//! Answer/clue/style-aware question-answer generation.
//!
//! The pipeline mines clue- and style-annotated training records from a
//! reading-comprehension corpus, learns factorised sampling distributions
//! over ⟨answer, style, clue⟩, generates questions with a copy-augmented
//! recurrent encoder-decoder or a fine-tuned language model, and keeps only
//! pairs that pass an entailment and answer-agreement filter.

pub mod annotate;
pub mod dataset;
pub mod error;
pub mod filter;
pub mod lm;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod sampler;
pub mod scalar;
pub mod seq2seq;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Seq2SeqF32 = seq2seq::Seq2Seq<f32>;
pub type Seq2SeqF64 = seq2seq::Seq2Seq<f64>;
pub type RecurrentLmF32 = lm::RecurrentLm<f32>;
pub type RecurrentLmF64 = lm::RecurrentLm<f64>;
