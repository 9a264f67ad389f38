use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const BOS: usize = 2;
pub const EOS: usize = 3;
pub const RESERVED: [&str; 4] = ["<pad>", "<unk>", "<bos>", "<eos>"];

/// Reduced generation vocabulary. Ids 0..4 are reserved (pad, unk, bos, eos);
/// the remaining ids follow descending frequency. Tokens are lowercased.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn from_tokens(words: Vec<String>) -> Result<Self> {
        let mut tokens: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        let mut index: HashMap<String, usize> = tokens.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        for w in words {
            let w = w.to_lowercase();
            if index.contains_key(&w) {
                return Err(Error::Format(format!("duplicate vocabulary token {w:?}")));
            }
            index.insert(w.clone(), tokens.len());
            tokens.push(w);
        }
        Ok(Vocab { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Id of `word` (case-insensitive), or UNK.
    pub fn id(&self, word: &str) -> usize {
        self.get(word).unwrap_or(UNK)
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(&word.to_lowercase()).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.get(word).is_some_and(|i| i >= RESERVED.len())
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

impl Serialize for Vocab {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.tokens[RESERVED.len()..].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocab {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let words = Vec::<String>::deserialize(d)?;
        Vocab::from_tokens(words).map_err(serde::de::Error::custom)
    }
}

/// The `n_v` most frequent tokens (ties broken lexicographically) plus the reserved ids.
pub fn reduce_vocabulary<I, S>(corpus: I, n_v: usize) -> Result<Vocab>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if n_v < 1 {
        return Err(Error::invalid("vocabulary size must be at least 1"));
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut seen = false;
    for tok in corpus {
        seen = true;
        let t = tok.as_ref().to_lowercase();
        if t.is_empty() || RESERVED.contains(&t.as_str()) {
            continue;
        }
        *counts.entry(t).or_default() += 1;
    }
    if !seen {
        return Err(Error::invalid("cannot build a vocabulary from an empty corpus"));
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Vocab::from_tokens(ranked.into_iter().take(n_v).map(|(w, _)| w).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_top_n_plus_reserved() {
        let v = reduce_vocabulary(["a", "b", "b", "c", "c", "c"], 2).unwrap();
        assert_eq!(v.len(), 2 + RESERVED.len());
        assert_eq!(v.token(4), "c");
        assert_eq!(v.token(5), "b");
        assert_eq!(v.id("a"), UNK);
    }

    #[test]
    fn ties_go_lexicographic() {
        let v = reduce_vocabulary(["zeta", "alpha", "mid"], 1).unwrap();
        assert_eq!(v.token(4), "alpha");
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(reduce_vocabulary(["a"], 0).is_err());
        assert!(reduce_vocabulary(Vec::<String>::new(), 5).is_err());
    }

    #[test]
    fn ids_dense_and_serde_round_trip() {
        let v = reduce_vocabulary(["The", "the", "cat"], 10).unwrap();
        for (i, t) in v.tokens().iter().enumerate() {
            assert_eq!(v.get(t), Some(i));
        }
        assert_eq!(v.id("THE"), 4);
        let back: Vocab = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(back, v);
    }
}
