use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::Style;
use crate::error::{Error, Result};
use crate::sampler::GenerationInput;
use crate::seq2seq::question_tokens;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Marker {
    Bos,
    Clue,
    Ans,
    Style,
    Ques,
    Eos,
}

impl Marker {
    pub const ALL: [Marker; 6] = [Marker::Bos, Marker::Clue, Marker::Ans, Marker::Style, Marker::Ques, Marker::Eos];

    pub fn as_str(self) -> &'static str {
        match self {
            Marker::Bos => "<bos>",
            Marker::Clue => "<clue>",
            Marker::Ans => "<ans>",
            Marker::Style => "<style>",
            Marker::Ques => "<ques>",
            Marker::Eos => "<eos>",
        }
    }

    pub fn parse(s: &str) -> Option<Marker> {
        Marker::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    Passage,
    Clue,
    Answer,
    Style,
    Question,
}

impl Segment {
    pub const ALL: [Segment; 5] = [Segment::Passage, Segment::Clue, Segment::Answer, Segment::Style, Segment::Question];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PromptToken {
    Marker(Marker),
    Word(String),
}

impl fmt::Display for PromptToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PromptToken::Marker(m) => f.write_str(m.as_str()),
            PromptToken::Word(w) => f.write_str(w),
        }
    }
}

/// `<bos> passage <clue> clue <ans> answer <style> style <ques> [question <eos>]`
/// with one segment label per token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSequence {
    pub tokens: Vec<PromptToken>,
    pub segments: Vec<Segment>,
}

/// The pieces a prompt was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptParts {
    pub passage: Vec<String>,
    pub passage_segments: Vec<Segment>,
    pub clue: Vec<String>,
    pub answer: Vec<String>,
    pub style: String,
    pub question: Option<Vec<String>>,
}

impl PromptSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn push(&mut self, token: PromptToken, segment: Segment) {
        self.tokens.push(token);
        self.segments.push(segment);
    }

    pub fn position(&self, marker: Marker) -> Option<usize> {
        self.tokens.iter().position(|t| *t == PromptToken::Marker(marker))
    }

    /// Index of the `<ques>` marker; training loss starts after it.
    pub fn question_start(&self) -> Option<usize> {
        self.position(Marker::Ques)
    }

    pub fn has_question(&self) -> bool {
        self.position(Marker::Eos).is_some()
    }

    /// Drop passage tokens from the right until the sequence fits.
    /// Returns how many were removed.
    pub fn truncate_passage(&mut self, max_len: usize) -> Result<usize> {
        if self.len() <= max_len {
            return Ok(0);
        }
        let clue = self.position(Marker::Clue).ok_or_else(|| Error::invalid("prompt lacks a clue marker"))?;
        let passage_len = clue - 1;
        let excess = self.len() - max_len;
        if excess > passage_len {
            return Err(Error::invalid(format!(
                "prompt needs {} tokens beyond the passage but the context holds {max_len}",
                self.len() - passage_len
            )));
        }
        self.tokens.drain(clue - excess..clue);
        self.segments.drain(clue - excess..clue);
        Ok(excess)
    }

    /// Space-joined token text.
    pub fn to_text(&self) -> String {
        self.tokens.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
    }

    /// Recover the parts, checking marker order.
    pub fn deserialize(&self) -> Result<PromptParts> {
        let pos = |m: Marker| self.position(m).ok_or_else(|| Error::Format(format!("prompt lacks {}", m.as_str())));
        let (bos, clue, ans, style, ques) = (pos(Marker::Bos)?, pos(Marker::Clue)?, pos(Marker::Ans)?, pos(Marker::Style)?, pos(Marker::Ques)?);
        let eos = self.position(Marker::Eos);
        let ordered = bos == 0 && bos < clue && clue < ans && ans < style && style < ques && eos.is_none_or(|e| e == self.len() - 1 && e > ques);
        if !ordered {
            return Err(Error::Format("prompt markers out of order".into()));
        }
        let words = |lo: usize, hi: usize| -> Result<Vec<String>> {
            self.tokens[lo..hi]
                .iter()
                .map(|t| match t {
                    PromptToken::Word(w) => Ok(w.clone()),
                    PromptToken::Marker(m) => Err(Error::Format(format!("unexpected {}", m.as_str()))),
                })
                .collect()
        };
        let style_words = words(style + 1, ques)?;
        Ok(PromptParts {
            passage: words(1, clue)?,
            passage_segments: self.segments[1..clue].to_vec(),
            clue: words(clue + 1, ans)?,
            answer: words(ans + 1, style)?,
            style: style_words.join(" "),
            question: eos.map(|e| words(ques + 1, e)).transpose()?,
        })
    }
}

/// Build the prompt for `input`; with a question the sequence is closed by `<eos>`.
pub fn serialize_prompt(input: &GenerationInput, question: Option<&str>) -> Result<PromptSequence> {
    let sent = &input.sentence;
    let n = sent.tokens.len();
    for (what, c) in [("answer", &input.answer), ("clue", &input.clue)] {
        if c.start >= c.end || c.end > n {
            return Err(Error::invalid(format!("{what} span {}..{} lies outside the passage", c.start, c.end)));
        }
    }
    let mut seq = PromptSequence {
        tokens: Vec::new(),
        segments: Vec::new(),
    };
    seq.push(PromptToken::Marker(Marker::Bos), Segment::Passage);
    for (i, t) in sent.tokens.iter().enumerate() {
        let seg = if input.answer.contains_token(i) {
            Segment::Answer
        } else if input.clue.contains_token(i) {
            Segment::Clue
        } else {
            Segment::Passage
        };
        seq.push(PromptToken::Word(t.text.clone()), seg);
    }
    seq.push(PromptToken::Marker(Marker::Clue), Segment::Clue);
    for t in &sent.tokens[input.clue.start..input.clue.end] {
        seq.push(PromptToken::Word(t.text.clone()), Segment::Clue);
    }
    seq.push(PromptToken::Marker(Marker::Ans), Segment::Answer);
    for t in &sent.tokens[input.answer.start..input.answer.end] {
        seq.push(PromptToken::Word(t.text.clone()), Segment::Answer);
    }
    seq.push(PromptToken::Marker(Marker::Style), Segment::Style);
    seq.push(PromptToken::Word(input.style.as_str().to_string()), Segment::Style);
    seq.push(PromptToken::Marker(Marker::Ques), Segment::Question);
    if let Some(q) = question {
        for w in question_tokens(q) {
            seq.push(PromptToken::Word(w), Segment::Question);
        }
        seq.push(PromptToken::Marker(Marker::Eos), Segment::Question);
    }
    Ok(seq)
}

/// Parse the style word of a prompt.
pub fn prompt_style(parts: &PromptParts) -> Result<Style> {
    parts.style.parse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::testing::sentence;
    use crate::annotate::Pos;

    fn input() -> GenerationInput {
        let s = sentence(&[
            ("Selina", Pos::Propn, 1),
            ("left", Pos::Verb, 1),
            ("at", Pos::Adp, 3),
            ("18", Pos::Num, 1),
        ]);
        let answer = s.find_chunk(3, 4).cloned().unwrap_or_else(|| s.make_chunk(3, 4));
        let clue = s.make_chunk(0, 1);
        GenerationInput {
            sentence: s,
            answer,
            clue,
            style: Style::How,
        }
    }

    #[test]
    fn modes_and_segments() {
        let gen = serialize_prompt(&input(), None).unwrap();
        assert_eq!(gen.tokens.last(), Some(&PromptToken::Marker(Marker::Ques)));
        assert_eq!(gen.to_text(), "<bos> Selina left at 18 <clue> Selina <ans> 18 <style> how <ques>");
        assert_eq!(&gen.segments[1..5], &[Segment::Clue, Segment::Passage, Segment::Passage, Segment::Answer]);
        let train = serialize_prompt(&input(), Some("How old was Selina?")).unwrap();
        assert_eq!(train.tokens.last(), Some(&PromptToken::Marker(Marker::Eos)));
        let parts = train.deserialize().unwrap();
        assert_eq!(parts.question.unwrap(), vec!["how", "old", "was", "selina", "?"]);
        assert_eq!(parts.answer, vec!["18"]);
        assert_eq!(prompt_style(&train.deserialize().unwrap()).unwrap(), Style::How);
    }

    #[test]
    fn span_outside_passage_rejected() {
        let mut i = input();
        i.answer.end = 9;
        assert!(serialize_prompt(&i, None).is_err());
    }

    #[test]
    fn truncation_keeps_conditioning() {
        let mut p = serialize_prompt(&input(), Some("How old?")).unwrap();
        let before = p.deserialize().unwrap();
        let removed = p.truncate_passage(p.len() - 2).unwrap();
        assert_eq!(removed, 2);
        let after = p.deserialize().unwrap();
        assert_eq!(after.passage, vec!["Selina", "left"]);
        assert_eq!((after.clue, after.answer, after.question), (before.clue, before.answer, before.question));
        assert!(p.truncate_passage(3).is_err());
    }
}
