//! Keep/drop filtering of generated samples with an entailment model and an
//! extractive QA model.

mod f1;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Style;
use crate::error::{Error, Result};
use crate::sampler::GenerationInput;

pub use f1::{normalize_answer, span_f1, span_f1_text};

pub const DEFAULT_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    S2s,
    Lm,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::S2s => "s2s",
            Generator::Lm => "lm",
        })
    }
}

/// Character span of a passage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextSpan {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictReason {
    Kept,
    Entailment,
    SpanF1,
    Undecided,
}

impl fmt::Display for VerdictReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictReason::Kept => "kept",
            VerdictReason::Entailment => "entailment",
            VerdictReason::SpanF1 => "span_f1",
            VerdictReason::Undecided => "undecided",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kept: bool,
    pub reason: VerdictReason,
    /// None when the entailment model failed.
    pub entailment: Option<bool>,
    /// Present iff entailment passed and the QA model answered.
    pub span_f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedSample {
    pub id: String,
    pub passage_text: String,
    pub question: String,
    pub answer_span: TextSpan,
    pub generator: Generator,
    pub style: Style,
    pub clue_span: TextSpan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter_verdict: Option<Verdict>,
}

fn char_span(text: &str, start: usize, end: usize) -> TextSpan {
    TextSpan {
        start,
        end,
        text: text.chars().skip(start).take(end.saturating_sub(start)).collect(),
    }
}

impl GeneratedSample {
    pub fn from_input(id: impl Into<String>, input: &GenerationInput, question: impl Into<String>, generator: Generator) -> Self {
        let s = &input.sentence;
        let span = |start: usize, end: usize| char_span(&s.raw_text, s.tokens[start].start_char, s.tokens[end - 1].end_char);
        GeneratedSample {
            id: id.into(),
            passage_text: s.raw_text.clone(),
            question: question.into(),
            answer_span: span(input.answer.start, input.answer.end),
            generator,
            style: input.style,
            clue_span: span(input.clue.start, input.clue.end),
            filter_verdict: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.passage_text.chars().count();
        for (what, sp) in [("answer", &self.answer_span), ("clue", &self.clue_span)] {
            if sp.start > sp.end || sp.end > n || char_span(&self.passage_text, sp.start, sp.end).text != sp.text {
                return Err(Error::invalid(format!("{}: {what} span {}..{} does not match the passage", self.id, sp.start, sp.end)));
            }
        }
        if let Some(v) = &self.filter_verdict {
            if v.span_f1.is_some() && v.entailment != Some(true) {
                return Err(Error::invalid(format!("{}: span F1 recorded without passing entailment", self.id)));
            }
        }
        Ok(())
    }

    /// Premise and hypothesis for the entailment model: the passage, and the
    /// question followed by the answer.
    pub fn entailment_pair(&self) -> (&str, String) {
        (&self.passage_text, format!("{} {}", self.question.trim(), self.answer_span.text.trim()))
    }
}

/// Decides whether the passage supports the question–answer pair.
pub trait EntailmentAdapter: Sync {
    fn entails(&self, sample: &GeneratedSample) -> Result<bool>;
}

/// Predicts an answer string for the sample's question over its passage.
pub trait QaAdapter: Sync {
    fn predict(&self, sample: &GeneratedSample) -> Result<String>;
}

/// Rule stand-in: positive iff the question is non-empty and the answer
/// text occurs in the passage (case-insensitive).
#[derive(Debug, Clone, Copy, Default)]
pub struct StubEntailment;

impl EntailmentAdapter for StubEntailment {
    fn entails(&self, sample: &GeneratedSample) -> Result<bool> {
        let answer = sample.answer_span.text.trim().to_lowercase();
        Ok(!sample.question.trim().is_empty() && !answer.is_empty() && sample.passage_text.to_lowercase().contains(&answer))
    }
}

/// Rule stand-in: returns the first exact occurrence of the answer text in
/// the passage, or nothing. It reads the sample's own answer, so it only
/// exercises the plumbing.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubQa;

impl QaAdapter for StubQa {
    fn predict(&self, sample: &GeneratedSample) -> Result<String> {
        let answer = sample.answer_span.text.trim();
        Ok(match sample.passage_text.find(answer) {
            Some(i) if !answer.is_empty() => sample.passage_text[i..i + answer.len()].to_string(),
            _ => String::new(),
        })
    }
}

/// Keep iff entailment is positive and the QA prediction's span F1 against
/// the answer is strictly above `threshold`. Adapter failures leave the
/// sample undecided, which is never kept.
pub fn filter(mut sample: GeneratedSample, ent: &dyn EntailmentAdapter, qa: &dyn QaAdapter, threshold: f64) -> GeneratedSample {
    let undecided = |entailment, error: String| Verdict {
        kept: false,
        reason: VerdictReason::Undecided,
        entailment,
        span_f1: None,
        predicted: None,
        error: Some(error),
    };
    let verdict = match ent.entails(&sample) {
        Err(e) => undecided(None, e.to_string()),
        Ok(false) => Verdict {
            kept: false,
            reason: VerdictReason::Entailment,
            entailment: Some(false),
            span_f1: None,
            predicted: None,
            error: None,
        },
        Ok(true) => match qa.predict(&sample) {
            Err(e) => undecided(Some(true), e.to_string()),
            Ok(pred) => {
                let f = span_f1_text(&sample.answer_span.text, &pred);
                let kept = f > threshold;
                Verdict {
                    kept,
                    reason: if kept { VerdictReason::Kept } else { VerdictReason::SpanF1 },
                    entailment: Some(true),
                    span_f1: Some(f),
                    predicted: Some(pred),
                    error: None,
                }
            }
        },
    };
    sample.filter_verdict = Some(verdict);
    sample
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GeneratorBreakdown {
    pub input: usize,
    pub kept: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub threshold: f64,
    pub input: usize,
    pub kept: usize,
    pub dropped: usize,
    /// kept / input, 0 for empty input
    pub keep_rate: f64,
    pub drop_reasons: BTreeMap<VerdictReason, usize>,
    pub per_generator: BTreeMap<Generator, GeneratorBreakdown>,
}

/// Filter every sample (in parallel, order preserved) and split the result.
pub fn filter_batch(
    samples: Vec<GeneratedSample>,
    ent: &dyn EntailmentAdapter,
    qa: &dyn QaAdapter,
    threshold: f64,
) -> (Vec<GeneratedSample>, Vec<GeneratedSample>, FilterReport) {
    let judged: Vec<GeneratedSample> = samples.into_par_iter().map(|s| filter(s, ent, qa, threshold)).collect();
    let mut report = FilterReport {
        threshold,
        input: judged.len(),
        ..FilterReport::default()
    };
    let (mut kept, mut dropped) = (Vec::new(), Vec::new());
    for s in judged {
        let v = s.filter_verdict.as_ref().expect("verdict set by filter");
        let g = report.per_generator.entry(s.generator).or_default();
        g.input += 1;
        if v.kept {
            g.kept += 1;
            kept.push(s);
        } else {
            *report.drop_reasons.entry(v.reason).or_default() += 1;
            dropped.push(s);
        }
    }
    report.kept = kept.len();
    report.dropped = dropped.len();
    report.keep_rate = if report.input == 0 { 0.0 } else { report.kept as f64 / report.input as f64 };
    (kept, dropped, report)
}

/// Drop samples whose (passage, question, answer) repeats an earlier one.
pub fn dedup_exact(samples: Vec<GeneratedSample>) -> Vec<GeneratedSample> {
    let mut seen = HashSet::new();
    samples
        .into_iter()
        .filter(|s| seen.insert((s.passage_text.clone(), s.question.trim().to_lowercase(), s.answer_span.text.clone())))
        .collect()
}

pub fn write_samples(samples: &[GeneratedSample], mut out: impl Write) -> Result<()> {
    for s in samples {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_samples(path: impl AsRef<Path>) -> Result<Vec<GeneratedSample>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::resource(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: GeneratedSample =
            serde_json::from_str(&line).map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), i + 1)))?;
        s.validate()?;
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
