//! Related-words dictionary used to detect rephrased ("soft-copied") words.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::lexicon;
use super::Pos;
use crate::error::{Error, Result};

/// Number of vector neighbours merged into each entry unless configured otherwise.
pub const DEFAULT_NEIGHBORS: usize = 5;

/// Dense word vectors read from whitespace-separated text
/// (`word v1 v2 ...` per line; a `count dim` header line is skipped).
#[derive(Debug, Clone, Default)]
pub struct WordVectors {
    words: Vec<String>,
    index: HashMap<String, usize>,
    /// unit-normalised rows
    rows: Vec<Vec<f32>>,
    dim: usize,
}

impl WordVectors {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::resource(path, e))?;
        Self::from_reader(BufReader::new(file)).map_err(|e| match e {
            Error::Io(io) => Error::resource(path, io),
            other => other,
        })
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut vectors = WordVectors::default();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let values: std::result::Result<Vec<f32>, _> = parts.map(str::parse::<f32>).collect();
            let values = values.map_err(|e| Error::Format(format!("vector line {}: {e}", lineno + 1)))?;
            if lineno == 0 && values.len() == 1 && word.parse::<usize>().is_ok() {
                continue;
            }
            if values.is_empty() {
                return Err(Error::Format(format!("vector line {} has no components", lineno + 1)));
            }
            vectors.push(word, values)?;
        }
        Ok(vectors)
    }

    pub fn push(&mut self, word: &str, mut values: Vec<f32>) -> Result<()> {
        if self.dim == 0 {
            self.dim = values.len();
        } else if values.len() != self.dim {
            return Err(Error::Format(format!(
                "vector for {word:?} has {} components, expected {}",
                values.len(),
                self.dim
            )));
        }
        let key = word.to_lowercase();
        if self.index.contains_key(&key) {
            return Ok(());
        }
        let norm = values.iter().map(|v| v * v).sum::<f32>().sqrt();
        if norm > 0.0 {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        self.index.insert(key.clone(), self.words.len());
        self.words.push(key);
        self.rows.push(values);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index
            .get(&word.to_lowercase())
            .map(|&i| self.rows[i].as_slice())
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Top-`n` cosine neighbours of `word`, excluding itself. Ties resolve by
    /// word order.
    pub fn nearest(&self, word: &str, n: usize) -> Vec<String> {
        let Some(&qi) = self.index.get(&word.to_lowercase()) else {
            return Vec::new();
        };
        let q = &self.rows[qi];
        let mut scored: Vec<(f32, &str)> = self
            .rows
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != qi)
            .map(|(i, r)| (dot(q, r), self.words[i].as_str()))
            .collect();
        scored.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.1.cmp(b.1))
        });
        scored.into_iter().take(n).map(|(_, w)| w.to_string()).collect()
    }
}

fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Source of synonyms for a lowercased word.
pub trait SynonymSource {
    fn synonyms(&self, word: &str) -> Vec<String>;

    /// Words that have an entry; these get dictionary rows even without vectors.
    fn headwords(&self) -> Vec<String> {
        Vec::new()
    }
}

/// Synonym lists from text: `word syn1 syn2 ...` per line (tabs, spaces or
/// commas). Lines starting with `#` are comments.
#[derive(Debug, Clone, Default)]
pub struct SynonymTable {
    entries: BTreeMap<String, BTreeSet<String>>,
}

impl SynonymTable {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::resource(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn parse(text: &str) -> Self {
        let mut table = SynonymTable::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut words = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|w| !w.is_empty())
                .map(str::to_lowercase);
            if let Some(head) = words.next() {
                table.entries.entry(head).or_default().extend(words);
            }
        }
        table
    }

    pub fn insert(&mut self, word: &str, synonyms: &[&str]) {
        self.entries
            .entry(word.to_lowercase())
            .or_default()
            .extend(synonyms.iter().map(|s| s.to_lowercase()));
    }
}

impl SynonymSource for SynonymTable {
    fn synonyms(&self, word: &str) -> Vec<String> {
        self.entries
            .get(&word.to_lowercase())
            .map(|s| s.iter().cloned().collect())
            .unwrap_or_default()
    }

    fn headwords(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RelatedWordsDict {
    pub neighbor_count: usize,
    entries: BTreeMap<String, BTreeSet<String>>,
}

impl RelatedWordsDict {
    pub fn new(neighbor_count: usize) -> Self {
        RelatedWordsDict {
            neighbor_count,
            entries: BTreeMap::new(),
        }
    }

    /// Add `related` to R(word); the word itself is never stored in its own set.
    pub fn insert(&mut self, word: &str, related: impl IntoIterator<Item = String>) {
        let key = word.to_lowercase();
        let set = self.entries.entry(key.clone()).or_default();
        for r in related {
            let r = r.to_lowercase();
            if r != key && !r.is_empty() {
                set.insert(r);
            }
        }
    }

    /// R(w), case-normalised; empty for unknown words.
    pub fn related(&self, word: &str) -> impl Iterator<Item = &str> {
        self.entries
            .get(&word.to_lowercase())
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
    }

    pub fn contains(&self, word: &str, candidate: &str) -> bool {
        self.entries
            .get(&word.to_lowercase())
            .map(|s| s.contains(&candidate.to_lowercase()))
            .unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::resource(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// R(w) = synonyms(w) ∪ top-`neighbors` vector neighbours of w, for every word
/// in the vector vocabulary (or only `restrict_to`, when given) plus every
/// synonym headword.
pub fn build_related_words(
    vectors: &WordVectors,
    synonyms: &dyn SynonymSource,
    neighbors: usize,
    restrict_to: Option<&BTreeSet<String>>,
) -> Result<RelatedWordsDict> {
    if neighbors == 0 {
        return Err(Error::invalid("neighbour count must be at least 1"));
    }
    let mut dict = RelatedWordsDict::new(neighbors);
    let mut queries: BTreeSet<String> = match restrict_to {
        Some(words) => words.iter().map(|w| w.to_lowercase()).collect(),
        None => vectors.words().iter().cloned().collect(),
    };
    queries.extend(synonyms.headwords());
    for word in &queries {
        let mut related: Vec<String> = synonyms.synonyms(word);
        related.extend(vectors.nearest(word, neighbors));
        if !related.is_empty() {
            dict.insert(word, related);
        }
    }
    Ok(dict)
}

fn lemma_forms(word: &str) -> [String; 3] {
    [
        word.to_string(),
        lexicon::lemmatize(word, Pos::Noun),
        lexicon::lemmatize(word, Pos::Verb),
    ]
}

/// True iff either word is in the other's related set, or both share a lemma.
pub fn is_soft_copy(question_word: &str, passage_word: &str, dict: &RelatedWordsDict) -> bool {
    let q = question_word.trim().to_lowercase();
    let p = passage_word.trim().to_lowercase();
    if q.is_empty() || p.is_empty() {
        return false;
    }
    if dict.contains(&p, &q) || dict.contains(&q, &p) {
        return true;
    }
    let qf = lemma_forms(&q);
    let pf = lemma_forms(&p);
    qf.iter().any(|a| pf.contains(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_vectors() -> WordVectors {
        // age·old is the largest cosine among the three pairs
        let text = "age 1.0 0.9 0.0\nold 0.9 1.0 0.1\nmovie 0.0 0.1 1.0\n";
        WordVectors::from_reader(text.as_bytes()).unwrap()
    }

    #[test]
    fn nearest_neighbour_by_cosine() {
        let v = toy_vectors();
        assert_eq!(v.nearest("age", 1), vec!["old"]);
        assert_eq!(v.nearest("movie", 1), vec!["old"]);
        let dict = build_related_words(&v, &SynonymTable::default(), 1, None).unwrap();
        assert!(dict.contains("age", "old"));
    }

    #[test]
    fn missing_word_has_empty_set() {
        let dict = build_related_words(&toy_vectors(), &SynonymTable::default(), 1, None).unwrap();
        assert_eq!(dict.related("zebra").count(), 0);
    }

    #[test]
    fn word_never_related_to_itself() {
        let mut syn = SynonymTable::default();
        syn.insert("big", &["big", "large"]);
        let dict = build_related_words(&toy_vectors(), &syn, 5, None).unwrap();
        assert!(dict.contains("big", "large"));
        assert!(!dict.contains("big", "big"));
        for w in ["age", "old", "movie"] {
            assert!(!dict.contains(w, w));
        }
    }

    #[test]
    fn header_line_skipped_and_dims_checked() {
        let v = WordVectors::from_reader("2 2\na 1 0\nb 0 1\n".as_bytes()).unwrap();
        assert_eq!(v.len(), 2);
        assert!(WordVectors::from_reader("a 1 0\nb 0 1 1\n".as_bytes()).is_err());
    }

    #[test]
    fn unreadable_file_is_resource_error() {
        assert!(matches!(
            WordVectors::from_path("/nonexistent/vectors.txt"),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn soft_copy_rules() {
        let mut dict = RelatedWordsDict::new(1);
        dict.insert("age", ["old".to_string()]);
        assert!(is_soft_copy("old", "age", &dict));
        assert!(is_soft_copy("age", "old", &dict));
        assert!(is_soft_copy("Award", "award", &RelatedWordsDict::default()));
        assert!(is_soft_copy("awards", "award", &RelatedWordsDict::default()));
        assert!(!is_soft_copy("old", "movie", &RelatedWordsDict::default()));
    }
}
