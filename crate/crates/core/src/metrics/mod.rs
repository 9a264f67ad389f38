//! Corpus BLEU-1..4 and ROUGE-L over generated questions.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotate::tokenize_words;
use crate::error::{Error, Result};

/// Numerator used for an n-gram order with no matches (orders ≥ 2 only).
pub const BLEU_EPSILON: f64 = 0.1;
/// Recall weight of the LCS F-measure.
pub const ROUGE_BETA: f64 = 1.2;

/// Lowercased word and punctuation tokens.
pub fn metric_tokens(text: &str) -> Vec<String> {
    tokenize_words(text).into_iter().map(|(_, _, t)| t.to_lowercase()).collect()
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], k: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= k {
        for w in tokens.windows(k) {
            *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_default() += 1;
        }
    }
    counts
}

/// Corpus BLEU with orders 1..=n (uniform weights) and brevity penalty, 0–100.
/// Higher orders without any match get `BLEU_EPSILON / total` instead of 0;
/// no unigram match at all scores 0.
pub fn bleu_n<S: AsRef<str>>(hypotheses: &[Vec<S>], references: &[Vec<S>], n: usize) -> Result<f64> {
    if hypotheses.len() != references.len() {
        return Err(Error::invalid(format!(
            "{} hypotheses but {} references",
            hypotheses.len(),
            references.len()
        )));
    }
    if !(1..=4).contains(&n) {
        return Err(Error::invalid(format!("BLEU order {n} outside 1..=4")));
    }
    let mut matched = [0usize; 4];
    let mut total = [0usize; 4];
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);
    for (h, r) in hypotheses.iter().zip(references) {
        hyp_len += h.len();
        ref_len += r.len();
        for k in 1..=n {
            let hc = ngram_counts(h, k);
            let rc = ngram_counts(r, k);
            for (g, c) in &hc {
                matched[k - 1] += (*c).min(rc.get(g).copied().unwrap_or(0));
                total[k - 1] += c;
            }
        }
    }
    if hyp_len == 0 || matched[0] == 0 {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    for k in 0..n {
        let p = if matched[k] > 0 {
            matched[k] as f64 / total[k] as f64
        } else {
            BLEU_EPSILON / total[k].max(1) as f64
        };
        log_sum += p.ln();
    }
    let bp = if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    Ok(100.0 * bp * (log_sum / n as f64).exp())
}

pub fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS F-measure with recall weight `ROUGE_BETA`, 0–100.
pub fn rouge_l<S: AsRef<str>>(hypothesis: &[S], reference: &[S]) -> Result<f64> {
    if hypothesis.is_empty() || reference.is_empty() {
        return Err(Error::invalid("ROUGE-L needs non-empty hypothesis and reference"));
    }
    let lcs = lcs_len(hypothesis, reference);
    if lcs == 0 {
        return Ok(0.0);
    }
    let r = lcs as f64 / reference.len() as f64;
    let p = lcs as f64 / hypothesis.len() as f64;
    let b2 = ROUGE_BETA * ROUGE_BETA;
    Ok(100.0 * (1.0 + b2) * p * r / (r + b2 * p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub bleu_1: f64,
    pub bleu_2: f64,
    pub bleu_3: f64,
    pub bleu_4: f64,
    pub rouge_l: f64,
    pub sample_count: usize,
    pub bleu_smoothing: String,
    pub rouge_beta: f64,
}

/// Metrics over aligned hypothesis/reference strings.
pub fn evaluate_pairs<S: AsRef<str>>(hypotheses: &[S], references: &[S]) -> Result<EvalReport> {
    if hypotheses.len() != references.len() {
        return Err(Error::invalid("hypothesis and reference counts differ"));
    }
    if hypotheses.is_empty() {
        return Err(Error::invalid("nothing to evaluate"));
    }
    let h: Vec<Vec<String>> = hypotheses.iter().map(|s| metric_tokens(s.as_ref())).collect();
    let r: Vec<Vec<String>> = references.iter().map(|s| metric_tokens(s.as_ref())).collect();
    let mut rouge = 0.0;
    for (a, b) in h.iter().zip(&r) {
        // an empty generation scores 0 against its reference
        rouge += if a.is_empty() || b.is_empty() { 0.0 } else { rouge_l(a, b)? };
    }
    Ok(EvalReport {
        bleu_1: bleu_n(&h, &r, 1)?,
        bleu_2: bleu_n(&h, &r, 2)?,
        bleu_3: bleu_n(&h, &r, 3)?,
        bleu_4: bleu_n(&h, &r, 4)?,
        rouge_l: rouge / h.len() as f64,
        sample_count: h.len(),
        bleu_smoothing: format!("epsilon {BLEU_EPSILON} for unmatched orders >= 2"),
        rouge_beta: ROUGE_BETA,
    })
}

#[derive(Deserialize)]
struct QuestionLine {
    id: String,
    question: String,
}

/// `id -> question` from a JSONL file whose lines carry at least those two fields.
pub fn read_questions(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::resource(path, e))?;
    let mut out = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let q: QuestionLine =
            serde_json::from_str(&line).map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), i + 1)))?;
        if out.insert(q.id.clone(), q.question).is_some() {
            return Err(Error::Format(format!("{}: duplicate id {:?}", path.display(), q.id)));
        }
    }
    Ok(out)
}

/// Pair generated and reference questions by id and score them. Every id
/// must appear in both maps.
pub fn evaluate_maps(generated: &BTreeMap<String, String>, references: &BTreeMap<String, String>) -> Result<EvalReport> {
    let mut offenders: Vec<&str> = generated.keys().filter(|k| !references.contains_key(*k)).map(String::as_str).collect();
    offenders.extend(references.keys().filter(|k| !generated.contains_key(*k)).map(String::as_str));
    if !offenders.is_empty() || generated.is_empty() {
        let shown: Vec<&str> = offenders.iter().take(10).copied().collect();
        return Err(Error::invalid(format!(
            "{} unmatched ids between generated and reference files: {}",
            offenders.len(),
            if shown.is_empty() { "(no ids at all)".to_string() } else { shown.join(", ") }
        )));
    }
    let hyps: Vec<&str> = generated.values().map(String::as_str).collect();
    let refs: Vec<&str> = generated.keys().map(|k| references[k].as_str()).collect();
    evaluate_pairs(&hyps, &refs)
}

pub fn evaluate(gen_file: impl AsRef<Path>, ref_file: impl AsRef<Path>) -> Result<EvalReport> {
    evaluate_maps(&read_questions(gen_file)?, &read_questions(ref_file)?)
}
