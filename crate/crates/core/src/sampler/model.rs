use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotate::{dependency_distance, Chunk, Pos};
use crate::dataset::{Style, TrainingRecord};
use crate::error::{Error, Result};

pub const MODEL_VERSION: u32 = 1;

/// Equal-width bins over `[0, max_value]`; larger values clamp into the last bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinSpec {
    pub max_value: usize,
    pub bin_count: usize,
}

impl BinSpec {
    pub const ANSWER_LENGTH: BinSpec = BinSpec { max_value: 30, bin_count: 10 };
    pub const CLUE_DISTANCE: BinSpec = BinSpec { max_value: 20, bin_count: 10 };

    pub fn new(max_value: usize, bin_count: usize) -> Result<Self> {
        if bin_count == 0 || max_value == 0 {
            return Err(Error::invalid("bin spec needs a positive cap and at least one bin"));
        }
        Ok(BinSpec { max_value, bin_count })
    }

    pub fn bin(&self, value: usize) -> usize {
        (value.min(self.max_value) * self.bin_count / self.max_value).min(self.bin_count - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureKey {
    pub pos: Pos,
    pub ner: String,
    /// Length or distance bin; absent for style keys.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin: Option<usize>,
}

/// How often chunks with a key were chosen, out of how many candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    #[serde(flatten)]
    pub key: FeatureKey,
    pub selected: u64,
    pub candidates: u64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleRow {
    #[serde(flatten)]
    pub key: FeatureKey,
    pub counts: BTreeMap<Style, u64>,
    pub probabilities: BTreeMap<Style, f64>,
}

/// Marginals kept for inspection.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearnStats {
    pub records: usize,
    pub style_counts: BTreeMap<Style, u64>,
    /// exact clue→answer dependency distance → count
    pub clue_distance_counts: BTreeMap<usize, u64>,
}

impl LearnStats {
    pub fn style_argmax(&self) -> Option<Style> {
        self.style_counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(s, _)| *s)
    }

    /// Fraction of clue–answer distances strictly below `limit`.
    pub fn distance_fraction_below(&self, limit: usize) -> f64 {
        let total: u64 = self.clue_distance_counts.values().sum();
        if total == 0 {
            return 0.0;
        }
        let below: u64 = self.clue_distance_counts.range(..limit).map(|(_, c)| c).sum();
        below as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerModel {
    pub version: u32,
    pub smoothing: f64,
    pub answer_bins: BinSpec,
    pub clue_bins: BinSpec,
    pub answer_table: Vec<SelectionRow>,
    pub style_table: Vec<StyleRow>,
    pub clue_table: Vec<SelectionRow>,
    pub stats: LearnStats,
    #[serde(skip)]
    index: Index,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Index {
    answer: BTreeMap<FeatureKey, f64>,
    style: BTreeMap<FeatureKey, Vec<f64>>,
    clue: BTreeMap<FeatureKey, f64>,
}

pub const DEFAULT_SMOOTHING: f64 = 0.1;

#[derive(Default)]
struct Counts {
    selected: u64,
    candidates: u64,
}

fn chunk_key(c: &Chunk, bin: Option<usize>) -> FeatureKey {
    FeatureKey {
        pos: c.pos,
        ner: c.ner.clone(),
        bin,
    }
}

impl SamplerModel {
    /// Count answer, style and clue features over `records` with the default
    /// bins and smoothing.
    pub fn learn(records: &[TrainingRecord]) -> Result<Self> {
        Self::learn_with(records, BinSpec::ANSWER_LENGTH, BinSpec::CLUE_DISTANCE, DEFAULT_SMOOTHING)
    }

    pub fn learn_with(
        records: &[TrainingRecord],
        answer_bins: BinSpec,
        clue_bins: BinSpec,
        smoothing: f64,
    ) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::invalid("cannot learn distributions from zero records"));
        }
        if !(smoothing > 0.0 && smoothing.is_finite()) {
            return Err(Error::invalid("smoothing must be positive"));
        }
        let mut answers: BTreeMap<FeatureKey, Counts> = BTreeMap::new();
        let mut clues: BTreeMap<FeatureKey, Counts> = BTreeMap::new();
        let mut styles: BTreeMap<FeatureKey, BTreeMap<Style, u64>> = BTreeMap::new();
        let mut stats = LearnStats {
            records: records.len(),
            ..Default::default()
        };
        for r in records {
            let p = &r.passage;
            for c in &p.chunks {
                let a = answers
                    .entry(chunk_key(c, Some(answer_bins.bin(c.length))))
                    .or_default();
                a.candidates += 1;
                a.selected += u64::from(c.same_span(&r.answer));

                let d = dependency_distance(p, c.start, r.answer.start)?;
                let k = clues.entry(chunk_key(c, Some(clue_bins.bin(d)))).or_default();
                k.candidates += 1;
                k.selected += u64::from(c.same_span(&r.clue));
            }
            *styles
                .entry(chunk_key(&r.answer, None))
                .or_default()
                .entry(r.style)
                .or_default() += 1;
            *stats.style_counts.entry(r.style).or_default() += 1;
            let d = dependency_distance(p, r.clue.start, r.answer.start)?;
            *stats.clue_distance_counts.entry(d).or_default() += 1;
        }

        let selection = |m: BTreeMap<FeatureKey, Counts>| -> Vec<SelectionRow> {
            m.into_iter()
                .map(|(key, c)| SelectionRow {
                    probability: (c.selected as f64 + smoothing) / (c.candidates as f64 + 2.0 * smoothing),
                    key,
                    selected: c.selected,
                    candidates: c.candidates,
                })
                .collect()
        };
        let style_table = styles
            .into_iter()
            .map(|(key, counts)| {
                let total: u64 = counts.values().sum();
                let denom = total as f64 + smoothing * Style::ALL.len() as f64;
                let probabilities = Style::ALL
                    .iter()
                    .map(|s| (*s, (counts.get(s).copied().unwrap_or(0) as f64 + smoothing) / denom))
                    .collect();
                StyleRow {
                    key,
                    counts,
                    probabilities,
                }
            })
            .collect();
        let mut model = SamplerModel {
            version: MODEL_VERSION,
            smoothing,
            answer_bins,
            clue_bins,
            answer_table: selection(answers),
            style_table,
            clue_table: selection(clues),
            stats,
            index: Index::default(),
        };
        model.reindex();
        Ok(model)
    }

    fn reindex(&mut self) {
        self.index = Index {
            answer: self.answer_table.iter().map(|r| (r.key.clone(), r.probability)).collect(),
            clue: self.clue_table.iter().map(|r| (r.key.clone(), r.probability)).collect(),
            style: self
                .style_table
                .iter()
                .map(|r| {
                    let row = Style::ALL
                        .iter()
                        .map(|s| r.probabilities.get(s).copied().unwrap_or(0.0))
                        .collect();
                    (r.key.clone(), row)
                })
                .collect(),
        };
    }

    /// Smoothed prior for a key never seen in training.
    fn unseen_selection(&self) -> f64 {
        0.5
    }

    pub fn answer_weight(&self, chunk: &Chunk) -> f64 {
        let key = chunk_key(chunk, Some(self.answer_bins.bin(chunk.length)));
        self.index.answer.get(&key).copied().unwrap_or(self.unseen_selection())
    }

    pub fn clue_weight(&self, chunk: &Chunk, distance: usize) -> f64 {
        let key = chunk_key(chunk, Some(self.clue_bins.bin(distance)));
        self.index.clue.get(&key).copied().unwrap_or(self.unseen_selection())
    }

    /// P(style | POS, NER of the answer), indexed like [`Style::ALL`].
    pub fn style_row(&self, answer: &Chunk) -> Vec<f64> {
        self.index
            .style
            .get(&chunk_key(answer, None))
            .cloned()
            .unwrap_or_else(|| vec![1.0 / Style::ALL.len() as f64; Style::ALL.len()])
    }

    /// Style marginal over the reference records.
    pub fn style_marginal(&self) -> BTreeMap<Style, f64> {
        let total: u64 = self.stats.style_counts.values().sum();
        self.stats
            .style_counts
            .iter()
            .map(|(s, c)| (*s, *c as f64 / total.max(1) as f64))
            .collect()
    }

    /// Override or add a table entry; used to build crafted models.
    pub fn set_answer_weight(&mut self, pos: Pos, ner: &str, length_bin: usize, p: f64) {
        set_row(&mut self.answer_table, pos, ner, length_bin, p);
        self.reindex();
    }

    pub fn set_clue_weight(&mut self, pos: Pos, ner: &str, distance_bin: usize, p: f64) {
        set_row(&mut self.clue_table, pos, ner, distance_bin, p);
        self.reindex();
    }

    pub fn set_style_row(&mut self, pos: Pos, ner: &str, probabilities: BTreeMap<Style, f64>) {
        let key = FeatureKey { pos, ner: ner.to_string(), bin: None };
        self.style_table.retain(|r| r.key != key);
        self.style_table.push(StyleRow {
            key,
            counts: BTreeMap::new(),
            probabilities,
        });
        self.style_table.sort_by(|a, b| a.key.cmp(&b.key));
        self.reindex();
    }

    /// Model with empty tables: every key falls back to smoothing.
    pub fn empty() -> Self {
        SamplerModel {
            version: MODEL_VERSION,
            smoothing: DEFAULT_SMOOTHING,
            answer_bins: BinSpec::ANSWER_LENGTH,
            clue_bins: BinSpec::CLUE_DISTANCE,
            answer_table: Vec::new(),
            style_table: Vec::new(),
            clue_table: Vec::new(),
            stats: LearnStats::default(),
            index: Index::default(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut model: SamplerModel = serde_json::from_str(text)?;
        if model.version != MODEL_VERSION {
            return Err(Error::Format(format!(
                "sampler model version {} (expected {MODEL_VERSION})",
                model.version
            )));
        }
        model.reindex();
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::resource(path, e))?;
        Self::from_json(&text)
    }
}

fn set_row(table: &mut Vec<SelectionRow>, pos: Pos, ner: &str, bin: usize, p: f64) {
    let key = FeatureKey {
        pos,
        ner: ner.to_string(),
        bin: Some(bin),
    };
    table.retain(|r| r.key != key);
    table.push(SelectionRow {
        key,
        selected: 0,
        candidates: 0,
        probability: p,
    });
    table.sort_by(|a, b| a.key.cmp(&b.key));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_clamp() {
        let b = BinSpec::ANSWER_LENGTH;
        assert_eq!(b.bin(0), 0);
        assert_eq!(b.bin(2), 0);
        assert_eq!(b.bin(3), 1);
        assert_eq!(b.bin(29), 9);
        assert_eq!(b.bin(30), 9);
        assert_eq!(b.bin(300), 9);
        assert_eq!(BinSpec::CLUE_DISTANCE.bin(21), 9);
        assert!(BinSpec::new(10, 0).is_err());
    }

    #[test]
    fn empty_records_rejected() {
        assert!(SamplerModel::learn(&[]).is_err());
    }

    #[test]
    fn unseen_style_is_uniform() {
        let m = SamplerModel::empty();
        let c = Chunk {
            start: 0,
            end: 1,
            text: "x".into(),
            pos: Pos::Noun,
            ner: "UNK".into(),
            length: 1,
        };
        let row = m.style_row(&c);
        assert_eq!(row.len(), 9);
        assert!(row.iter().all(|p| (p - 1.0 / 9.0).abs() < 1e-15));
    }
}
