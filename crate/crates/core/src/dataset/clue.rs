//! Clue chunk identification by overlap scoring.

use std::collections::HashMap;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use crate::annotate::{
    is_function_word, is_soft_copy, tokenize_words, AnnotatedSentence, Chunk, RelatedWordsDict,
};
use crate::error::{Error, Result};

/// Per-chunk overlap evidence; `total` is the plain sum of the four counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClueScore {
    pub chunk: Chunk,
    pub token_overlap: usize,
    pub stem_overlap: usize,
    pub soft_copy_overlap: usize,
    pub contained: usize,
    pub total: usize,
}

/// English Snowball (Porter2) stems.
pub fn stem(word: &str) -> String {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER
        .get_or_init(|| Stemmer::create(Algorithm::English))
        .stem(&word.to_lowercase())
        .into_owned()
}

/// Lowercased content words of free text (function words and punctuation removed).
pub fn content_tokens(text: &str) -> Vec<String> {
    tokenize_words(text)
        .into_iter()
        .map(|(_, _, t)| t.to_lowercase())
        .filter(|t| t.chars().any(char::is_alphanumeric) && !is_function_word(t))
        .collect()
}

fn multiset_overlap(a: &[String], b: &[String]) -> usize {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for w in b {
        *counts.entry(w.as_str()).or_default() += 1;
    }
    let mut n = 0;
    for w in a {
        if let Some(c) = counts.get_mut(w.as_str()) {
            if *c > 0 {
                *c -= 1;
                n += 1;
            }
        }
    }
    n
}

fn normalized_words(text: &str) -> String {
    let words: Vec<String> = tokenize_words(text)
        .into_iter()
        .map(|(_, _, t)| t.to_lowercase())
        .collect();
    format!(" {} ", words.join(" "))
}

/// Score every candidate chunk of `passage` against `question` and return the
/// best one with the full table. Ties go to the earlier, then shorter, chunk.
///
/// The answer is part of the input tuple but does not enter the score.
pub fn extract_clue(
    passage: &AnnotatedSentence,
    question: &str,
    _answer: &Chunk,
    dict: &RelatedWordsDict,
) -> Result<(Chunk, Vec<ClueScore>)> {
    if passage.chunks.is_empty() {
        return Err(Error::invalid("passage has no candidate chunks"));
    }
    let q_tokens = content_tokens(question);
    let q_stems: Vec<String> = q_tokens.iter().map(|t| stem(t)).collect();
    let q_norm = normalized_words(question);

    let scores: Vec<ClueScore> = passage
        .chunks
        .iter()
        .map(|chunk| {
            let c_tokens: Vec<String> = passage.tokens[chunk.start..chunk.end]
                .iter()
                .filter(|t| t.is_content)
                .map(|t| t.lower())
                .collect();
            let c_stems: Vec<String> = c_tokens.iter().map(|t| stem(t)).collect();
            let token_overlap = multiset_overlap(&c_tokens, &q_tokens);
            let stem_overlap = multiset_overlap(&c_stems, &q_stems);
            let soft_copy_overlap = c_tokens
                .iter()
                .filter(|c| q_tokens.iter().any(|q| is_soft_copy(q, c, dict)))
                .count();
            let c_norm = normalized_words(&chunk.text);
            let contained = usize::from(c_norm.trim() != "" && q_norm.contains(&c_norm));
            ClueScore {
                chunk: chunk.clone(),
                token_overlap,
                stem_overlap,
                soft_copy_overlap,
                contained,
                total: token_overlap + stem_overlap + soft_copy_overlap + contained,
            }
        })
        .collect();

    let best = scores
        .iter()
        .max_by(|a, b| {
            a.total
                .cmp(&b.total)
                .then_with(|| b.chunk.start.cmp(&a.chunk.start))
                .then_with(|| b.chunk.length.cmp(&a.chunk.length))
        })
        .map(|s| s.chunk.clone())
        .expect("non-empty chunk list");
    Ok((best, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::testing::sentence;
    use crate::annotate::Pos;

    fn selina() -> AnnotatedSentence {
        // Selina left her hometown at the age of 18 .
        sentence(&[
            ("Selina", Pos::Propn, 1),
            ("left", Pos::Verb, 1),
            ("her", Pos::Pron, 3),
            ("hometown", Pos::Noun, 1),
            ("at", Pos::Adp, 6),
            ("the", Pos::Det, 6),
            ("age", Pos::Noun, 1),
            ("of", Pos::Adp, 8),
            ("18", Pos::Num, 6),
            (".", Pos::Punct, 1),
        ])
    }

    #[test]
    fn stems() {
        assert_eq!(stem("Running"), "run");
        assert_eq!(stem("awards"), "award");
    }

    #[test]
    fn soft_copy_lifts_age_over_hometown() {
        let s = selina();
        let mut dict = RelatedWordsDict::new(5);
        dict.insert("age", ["old".to_string()]);
        let answer = s.find_chunk(8, 9).unwrap().clone();
        let (_, table) = extract_clue(&s, "How old was Selina when she left?", &answer, &dict).unwrap();
        let score = |text: &str| table.iter().find(|c| c.chunk.text == text).unwrap().total;
        let age = table
            .iter()
            .filter(|c| c.chunk.text.contains("age"))
            .map(|c| c.total)
            .max()
            .unwrap();
        assert!(age > score("her hometown"));
        assert_eq!(score("her hometown"), 0);
    }

    #[test]
    fn totals_are_sums() {
        let s = selina();
        let answer = s.chunks[0].clone();
        let (best, table) =
            extract_clue(&s, "Where did Selina go at the age of 18?", &answer, &RelatedWordsDict::default()).unwrap();
        assert!(s.has_chunk(&best));
        for c in &table {
            assert_eq!(c.total, c.token_overlap + c.stem_overlap + c.soft_copy_overlap + c.contained);
        }
    }

    #[test]
    fn containment_flag_wins_when_nothing_else_overlaps() {
        // only function words in the chunk, so overlap counts are zero
        let s = sentence(&[
            ("it", Pos::Pron, 1),
            ("rained", Pos::Verb, 1),
            (".", Pos::Punct, 1),
        ]);
        let (best, table) =
            extract_clue(&s, "Did it snow?", &s.chunks[0], &RelatedWordsDict::default()).unwrap();
        assert_eq!(best.text, "it");
        let it = table.iter().find(|c| c.chunk.text == "it").unwrap();
        assert_eq!((it.contained, it.total), (1, 1));
    }

    #[test]
    fn empty_candidates_rejected() {
        let mut s = selina();
        let answer = s.chunks[0].clone();
        s.chunks.clear();
        assert!(extract_clue(&s, "Who?", &answer, &RelatedWordsDict::default()).is_err());
    }
}
