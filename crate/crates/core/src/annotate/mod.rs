//! Token / chunk / dependency data model and the annotators that produce it.
//!
//! Every downstream component consumes [`AnnotatedSentence`]. Annotators only
//! have to produce tokens (text, offsets, POS, NER, lemma, head); candidate
//! chunks and content-word flags are derived here so they are identical no
//! matter which annotator ran.

mod cache;
mod conllu;
mod lexicon;
mod related;
mod rules;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cache::CachedAnnotator;
pub use conllu::ConlluAnnotator;
pub use related::{
    build_related_words, is_soft_copy, RelatedWordsDict, SynonymSource, SynonymTable,
    WordVectors, DEFAULT_NEIGHBORS,
};
pub use rules::{split_sentences, tokenize_words, RuleAnnotator};

/// NER tag used for tokens and chunks that are not part of a named entity.
pub const NO_ENTITY: &str = "UNK";

/// Longest dependency subtree admitted as a candidate chunk.
pub const MAX_SUBTREE_CHUNK: usize = 30;

/// Coarse universal part-of-speech tagset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Pos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl Pos {
    pub const ALL: [Pos; 17] = [
        Pos::Adj,
        Pos::Adp,
        Pos::Adv,
        Pos::Aux,
        Pos::Cconj,
        Pos::Det,
        Pos::Intj,
        Pos::Noun,
        Pos::Num,
        Pos::Part,
        Pos::Pron,
        Pos::Propn,
        Pos::Punct,
        Pos::Sconj,
        Pos::Sym,
        Pos::Verb,
        Pos::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Adj => "ADJ",
            Pos::Adp => "ADP",
            Pos::Adv => "ADV",
            Pos::Aux => "AUX",
            Pos::Cconj => "CCONJ",
            Pos::Det => "DET",
            Pos::Intj => "INTJ",
            Pos::Noun => "NOUN",
            Pos::Num => "NUM",
            Pos::Part => "PART",
            Pos::Pron => "PRON",
            Pos::Propn => "PROPN",
            Pos::Punct => "PUNCT",
            Pos::Sconj => "SCONJ",
            Pos::Sym => "SYM",
            Pos::Verb => "VERB",
            Pos::X => "X",
        }
    }

    /// Closed-class categories: never content words.
    pub fn is_closed_class(self) -> bool {
        matches!(
            self,
            Pos::Det
                | Pos::Adp
                | Pos::Cconj
                | Pos::Sconj
                | Pos::Pron
                | Pos::Aux
                | Pos::Part
                | Pos::Punct
                | Pos::Sym
        )
    }

    pub fn index(self) -> usize {
        Pos::ALL.iter().position(|&p| p == self).unwrap_or(16)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = Error;

    /// Accepts universal tags and the common Penn Treebank tags.
    fn from_str(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase();
        if let Some(p) = Pos::ALL.iter().find(|p| p.as_str() == upper) {
            return Ok(*p);
        }
        let pos = match upper.as_str() {
            "CONJ" => Pos::Cconj,
            "NN" | "NNS" => Pos::Noun,
            "NNP" | "NNPS" => Pos::Propn,
            "VB" | "VBD" | "VBG" | "VBN" | "VBP" | "VBZ" => Pos::Verb,
            "MD" => Pos::Aux,
            "JJ" | "JJR" | "JJS" => Pos::Adj,
            "RB" | "RBR" | "RBS" | "WRB" => Pos::Adv,
            "IN" => Pos::Adp,
            "CC" => Pos::Cconj,
            "DT" | "PDT" | "WDT" => Pos::Det,
            "PRP" | "PRP$" | "WP" | "WP$" | "EX" => Pos::Pron,
            "CD" => Pos::Num,
            "RP" | "TO" | "POS" => Pos::Part,
            "UH" => Pos::Intj,
            "." | "," | ":" | "``" | "''" | "-LRB-" | "-RRB-" | "HYPH" | "NFP" => Pos::Punct,
            "$" | "#" => Pos::Sym,
            "FW" | "LS" | "XX" | "ADD" | "GW" => Pos::X,
            _ => return Err(Error::invalid(format!("unknown POS tag {s:?}"))),
        };
        Ok(pos)
    }
}

impl From<Pos> for String {
    fn from(p: Pos) -> String {
        p.as_str().to_string()
    }
}

impl TryFrom<String> for Pos {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub text: String,
    pub lemma: String,
    pub pos: Pos,
    pub ner: String,
    pub is_content: bool,
    pub head_index: usize,
    /// Character (not byte) offsets into the raw sentence text, end exclusive.
    pub start_char: usize,
    pub end_char: usize,
}

impl Token {
    pub fn is_root(&self) -> bool {
        self.head_index == self.index
    }

    pub fn lower(&self) -> String {
        self.text.to_lowercase()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chunk {
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub pos: Pos,
    pub ner: String,
    pub length: usize,
}

impl Chunk {
    pub fn span(&self) -> (usize, usize) {
        (self.start, self.end)
    }

    pub fn contains_token(&self, index: usize) -> bool {
        self.start <= index && index < self.end
    }

    pub fn same_span(&self, other: &Chunk) -> bool {
        self.span() == other.span()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub raw_text: String,
    pub tokens: Vec<Token>,
    pub chunks: Vec<Chunk>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paragraph_id: Option<String>,
}

/// Anything that can turn raw text into annotated tokens.
///
/// Implementations must be deterministic for a fixed version and safe to call
/// from several threads at once.
pub trait Annotator: Send + Sync {
    /// Identifier written into caches; bump it whenever output can change.
    fn id(&self) -> String;

    /// Produce tokens with text, offsets, lemma, POS, NER and head filled in.
    /// `is_content` is recomputed by [`annotate`] and may be left false.
    fn annotate_tokens(&self, raw_text: &str) -> Result<Vec<Token>>;
}

/// Annotate one sentence: tokens from `annotator`, then content flags and
/// candidate chunks.
pub fn annotate(annotator: &dyn Annotator, raw_text: &str) -> Result<AnnotatedSentence> {
    if raw_text.trim().is_empty() {
        return Err(Error::invalid("cannot annotate empty text"));
    }
    let mut tokens = annotator.annotate_tokens(raw_text)?;
    if tokens.is_empty() {
        return Err(Error::Annotation(format!(
            "annotator {} produced no tokens",
            annotator.id()
        )));
    }
    for t in tokens.iter_mut() {
        t.is_content = is_content_word(t);
    }
    let mut sentence = AnnotatedSentence {
        raw_text: raw_text.to_string(),
        tokens,
        chunks: Vec::new(),
        paragraph_id: None,
    };
    sentence.validate()?;
    sentence.chunks = candidate_chunks(&sentence);
    Ok(sentence)
}

impl AnnotatedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn root(&self) -> Option<usize> {
        self.tokens.iter().position(|t| t.is_root())
    }

    /// Check token and chunk invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.tokens.len();
        let mut roots = 0;
        for (i, t) in self.tokens.iter().enumerate() {
            if t.index != i {
                return Err(Error::Annotation(format!(
                    "token {i} carries index {}",
                    t.index
                )));
            }
            if t.head_index >= n {
                return Err(Error::Annotation(format!(
                    "token {i} has head {} outside sentence of {n}",
                    t.head_index
                )));
            }
            if t.is_root() {
                roots += 1;
            }
        }
        if roots != 1 {
            return Err(Error::Annotation(format!("expected one root, found {roots}")));
        }
        // every token must reach the root without looping
        for i in 0..n {
            let mut cur = i;
            let mut steps = 0;
            while !self.tokens[cur].is_root() {
                cur = self.tokens[cur].head_index;
                steps += 1;
                if steps > n {
                    return Err(Error::Annotation(format!("head cycle through token {i}")));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for c in &self.chunks {
            if !(c.start < c.end && c.end <= n && c.length == c.end - c.start) {
                return Err(Error::Annotation(format!(
                    "chunk {:?} outside token bounds",
                    c.span()
                )));
            }
            if !seen.insert(c.span()) {
                return Err(Error::Annotation(format!("duplicate chunk {:?}", c.span())));
            }
        }
        Ok(())
    }

    /// Surface text of tokens `[start, end)`, cut from the raw text so spacing
    /// is preserved.
    pub fn span_text(&self, start: usize, end: usize) -> String {
        if start >= end || end > self.tokens.len() {
            return String::new();
        }
        let from = self.tokens[start].start_char;
        let to = self.tokens[end - 1].end_char;
        self.raw_text.chars().skip(from).take(to - from).collect()
    }

    /// Syntactic head of a span: the first token whose head lies outside it.
    pub fn span_head(&self, start: usize, end: usize) -> usize {
        (start..end)
            .find(|&i| {
                let h = self.tokens[i].head_index;
                self.tokens[i].is_root() || h < start || h >= end
            })
            .unwrap_or(start)
    }

    /// Build a chunk for `[start, end)`; POS and NER come from the span head.
    pub fn make_chunk(&self, start: usize, end: usize) -> Chunk {
        let head = &self.tokens[self.span_head(start, end)];
        Chunk {
            start,
            end,
            text: self.span_text(start, end),
            pos: head.pos,
            ner: head.ner.clone(),
            length: end - start,
        }
    }

    pub fn find_chunk(&self, start: usize, end: usize) -> Option<&Chunk> {
        self.chunks.iter().find(|c| c.start == start && c.end == end)
    }

    pub fn has_chunk(&self, chunk: &Chunk) -> bool {
        self.find_chunk(chunk.start, chunk.end).is_some()
    }

    pub fn children(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.tokens
            .iter()
            .filter(move |t| t.head_index == index && t.index != index)
            .map(|t| t.index)
    }
}

/// False iff the token is closed-class or a stop word.
pub fn is_content_word(token: &Token) -> bool {
    if token.pos.is_closed_class() {
        return false;
    }
    let lower = token.text.to_lowercase();
    if lexicon::is_stop_word(&lower) {
        return false;
    }
    lower.chars().any(|c| c.is_alphanumeric())
}

/// True for closed-class words and stop words given without context.
pub fn is_function_word(word: &str) -> bool {
    let lower = word.to_lowercase();
    lexicon::pos_of_closed(&lower).is_some() || lexicon::is_stop_word(&lower)
}

/// Noun chunks ∪ named-entity spans ∪ dependency subtrees, deduplicated and
/// sorted by (start, end).
///
/// Subtrees are taken only for non-root content-word heads, must be contiguous, are
/// trimmed of edge punctuation and leading conjunctions, must not sit inside a
/// noun chunk or entity, and may not exceed [`MAX_SUBTREE_CHUNK`] tokens.
pub fn candidate_chunks(sentence: &AnnotatedSentence) -> Vec<Chunk> {
    let tokens = &sentence.tokens;
    let n = tokens.len();
    let mut spans: BTreeSet<(usize, usize)> = BTreeSet::new();

    let phrases: Vec<(usize, usize)> = noun_chunk_spans(sentence)
        .into_iter()
        .chain(entity_spans(tokens))
        .collect();
    spans.extend(phrases.iter().copied());
    // fragments strictly inside a noun chunk or entity are not phrases of their own
    let inside_phrase = |s: usize, e: usize| {
        phrases
            .iter()
            .any(|&(ps, pe)| ps <= s && e <= pe && (ps, pe) != (s, e))
    };

    let subtree_members = subtree_members(sentence);
    for (head, members) in subtree_members.iter().enumerate() {
        // the root's subtree is the whole sentence, not a chunk
        if !tokens[head].is_content || tokens[head].is_root() {
            continue;
        }
        let lo = *members.iter().next().unwrap();
        let hi = *members.iter().next_back().unwrap() + 1;
        if members.len() != hi - lo {
            continue;
        }
        if let Some((s, e)) = trim_edges(tokens, lo, hi) {
            if e - s <= MAX_SUBTREE_CHUNK && !inside_phrase(s, e) {
                spans.insert((s, e));
            }
        }
    }

    if spans.is_empty() {
        spans.extend((0..n).filter(|&i| tokens[i].is_content).map(|i| (i, i + 1)));
    }
    if spans.is_empty() {
        spans.extend(
            (0..n)
                .filter(|&i| tokens[i].pos != Pos::Punct)
                .map(|i| (i, i + 1)),
        );
    }
    if spans.is_empty() {
        spans.extend((0..n).map(|i| (i, i + 1)));
    }

    spans
        .into_iter()
        .map(|(s, e)| sentence.make_chunk(s, e))
        .collect()
}

fn trim_edges(tokens: &[Token], mut s: usize, mut e: usize) -> Option<(usize, usize)> {
    while s < e && matches!(tokens[s].pos, Pos::Punct | Pos::Cconj) {
        s += 1;
    }
    while e > s && tokens[e - 1].pos == Pos::Punct {
        e -= 1;
    }
    (s < e).then_some((s, e))
}

fn subtree_members(sentence: &AnnotatedSentence) -> Vec<BTreeSet<usize>> {
    let n = sentence.tokens.len();
    let mut members = vec![BTreeSet::new(); n];
    for i in 0..n {
        let mut cur = i;
        let mut steps = 0;
        loop {
            members[cur].insert(i);
            if sentence.tokens[cur].is_root() || steps > n {
                break;
            }
            cur = sentence.tokens[cur].head_index;
            steps += 1;
        }
    }
    members
}

/// Base noun phrases: maximal runs of nominal material ending in a nominal
/// head, optionally opened by a determiner or possessive pronoun.
fn noun_chunk_spans(sentence: &AnnotatedSentence) -> Vec<(usize, usize)> {
    let tokens = &sentence.tokens;
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let start = i;
        let mut last_nominal = None;
        let mut j = i;
        while j < tokens.len() {
            let t = &tokens[j];
            let fits = match t.pos {
                Pos::Det => j == start || last_nominal.is_none(),
                Pos::Pron => j == start && lexicon::is_possessive_pronoun(&t.lower()),
                Pos::Adj | Pos::Num | Pos::Noun | Pos::Propn => true,
                Pos::Part => t.text == "'s" || t.text == "'",
                Pos::Adv => last_nominal.is_none() && j > start,
                _ => false,
            };
            if !fits {
                break;
            }
            if matches!(t.pos, Pos::Noun | Pos::Propn | Pos::Num) {
                last_nominal = Some(j);
            }
            j += 1;
        }
        match last_nominal {
            Some(last) => {
                out.push((start, last + 1));
                i = last + 1;
            }
            None => {
                // bare personal pronouns are noun chunks too
                if tokens[i].pos == Pos::Pron && !lexicon::is_possessive_pronoun(&tokens[i].lower())
                {
                    out.push((i, i + 1));
                }
                i += 1;
            }
        }
    }
    out
}

/// Maximal runs of tokens sharing one NER label.
fn entity_spans(tokens: &[Token]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i].ner == NO_ENTITY {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < tokens.len() && tokens[j].ner == tokens[i].ner {
            j += 1;
        }
        out.push((i, j));
        i = j;
    }
    out
}

/// Undirected shortest-path length between two tokens of the dependency tree.
pub fn dependency_distance(sentence: &AnnotatedSentence, i: usize, j: usize) -> Result<usize> {
    let n = sentence.tokens.len();
    if i >= n || j >= n {
        return Err(Error::invalid(format!(
            "token index ({i}, {j}) out of range for sentence of {n} tokens"
        )));
    }
    if i == j {
        return Ok(0);
    }
    let mut adjacency = vec![Vec::new(); n];
    for t in &sentence.tokens {
        if !t.is_root() {
            adjacency[t.index].push(t.head_index);
            adjacency[t.head_index].push(t.index);
        }
    }
    let mut dist = vec![usize::MAX; n];
    dist[i] = 0;
    let mut queue = VecDeque::from([i]);
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                if v == j {
                    return Ok(dist[v]);
                }
                queue.push_back(v);
            }
        }
    }
    Err(Error::Annotation(format!(
        "tokens {i} and {j} are not connected"
    )))
}


#[cfg(test)]
mod tests {
    use super::testing::sentence;
    use super::*;

    fn four_token() -> AnnotatedSentence {
        // "cats chase small mice": chase is root, cats and mice hang off it
        sentence(&[
            ("cats", Pos::Noun, 1),
            ("chase", Pos::Verb, 1),
            ("small", Pos::Adj, 3),
            ("mice", Pos::Noun, 1),
        ])
    }

    #[test]
    fn distance_identity_and_one_edge() {
        let s = four_token();
        assert_eq!(dependency_distance(&s, 2, 2).unwrap(), 0);
        assert_eq!(dependency_distance(&s, 0, 1).unwrap(), 1);
        assert_eq!(dependency_distance(&s, 1, 0).unwrap(), 1);
    }

    #[test]
    fn distance_through_shared_head() {
        let s = four_token();
        // cats and mice share the head "chase"
        assert_eq!(dependency_distance(&s, 0, 3).unwrap(), 2);
        assert_eq!(dependency_distance(&s, 0, 2).unwrap(), 3);
    }

    #[test]
    fn distance_out_of_range() {
        let s = four_token();
        assert!(matches!(
            dependency_distance(&s, 0, 9),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn content_words() {
        let s = sentence(&[
            ("the", Pos::Det, 1),
            ("award", Pos::Noun, 2),
            ("won", Pos::Verb, 2),
        ]);
        assert!(!s.tokens[0].is_content);
        assert!(s.tokens[1].is_content);
        assert!(s.tokens[2].is_content);
    }

    #[test]
    fn single_token_fallback_chunk() {
        let s = sentence(&[("Run", Pos::Verb, 0), (".", Pos::Punct, 0)]);
        assert!(s.chunks.iter().any(|c| c.text == "Run"));
        assert!(s.chunks.iter().all(|c| c.text != "."));
    }

    #[test]
    fn punctuation_only_sentence_still_has_chunks() {
        let s = sentence(&[("?", Pos::Punct, 0), ("!", Pos::Punct, 0)]);
        assert!(!s.chunks.is_empty());
    }

    #[test]
    fn chunk_pos_from_head() {
        let s = sentence(&[
            ("the", Pos::Det, 1),
            ("movie", Pos::Noun, 2),
            ("ended", Pos::Verb, 2),
        ]);
        let c = s.find_chunk(0, 2).expect("noun chunk");
        assert_eq!(c.text, "the movie");
        assert_eq!(c.pos, Pos::Noun);
        assert_eq!(c.length, 2);
    }

    #[test]
    fn penn_tags_map_to_universal() {
        assert_eq!("NNP".parse::<Pos>().unwrap(), Pos::Propn);
        assert_eq!("VBD".parse::<Pos>().unwrap(), Pos::Verb);
        assert_eq!("propn".parse::<Pos>().unwrap(), Pos::Propn);
        assert!("BOGUS".parse::<Pos>().is_err());
    }

    #[test]
    fn validate_rejects_two_roots() {
        let mut s = four_token();
        s.tokens[0].head_index = 0;
        assert!(s.validate().is_err());
    }
}
