use crate::annotate::{tokenize_words, AnnotatedSentence, Chunk, Pos};
use crate::dataset::{Style, TrainingRecord};
use crate::error::{Error, Result};
use crate::sampler::GenerationInput;

use super::vocab::{Vocab, BOS, EOS, UNK};

/// Entity labels with their own embedding row; anything else shares the last row.
pub const NER_TAGS: [&str; 20] = [
    "UNK", "PERSON", "NORP", "FAC", "ORG", "GPE", "LOC", "PRODUCT", "EVENT", "WORK_OF_ART", "LAW",
    "LANGUAGE", "DATE", "TIME", "PERCENT", "MONEY", "QUANTITY", "ORDINAL", "CARDINAL", "MISC",
];

pub fn ner_index(tag: &str) -> usize {
    NER_TAGS
        .iter()
        .position(|t| *t == tag)
        .unwrap_or(NER_TAGS.len() - 1)
}

/// Gold decoding target for one question position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    /// Score against the generation distribution.
    Generate(usize),
    /// Score against the summed attention of these source positions.
    Copy(Vec<usize>),
}

/// Encoder features and (optionally) decoder targets for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    /// Source tokens as written.
    pub source: Vec<String>,
    pub word: Vec<usize>,
    pub ner: Vec<usize>,
    pub pos: Vec<usize>,
    pub content: Vec<usize>,
    pub answer: Vec<usize>,
    pub clue: Vec<usize>,
    pub style: Style,
    /// Gold question tokens (lowercased), empty at inference.
    pub question: Vec<String>,
    /// Decoder inputs: BOS followed by the question ids.
    pub dec_input: Vec<usize>,
    /// One target per question token, plus EOS.
    pub targets: Vec<Target>,
}

pub fn question_tokens(question: &str) -> Vec<String> {
    tokenize_words(question)
        .into_iter()
        .map(|(_, _, t)| t.to_lowercase())
        .collect()
}

fn inside(c: &Chunk, i: usize) -> usize {
    usize::from(c.contains_token(i))
}

impl Example {
    pub fn encode(sentence: &AnnotatedSentence, answer: &Chunk, clue: &Chunk, style: Style, vocab: &Vocab) -> Result<Self> {
        if sentence.tokens.is_empty() {
            return Err(Error::invalid("cannot encode an empty sentence"));
        }
        let toks = &sentence.tokens;
        Ok(Example {
            source: toks.iter().map(|t| t.text.clone()).collect(),
            word: toks.iter().map(|t| vocab.id(&t.text)).collect(),
            ner: toks.iter().map(|t| ner_index(&t.ner)).collect(),
            pos: toks.iter().map(|t| t.pos.index()).collect(),
            content: toks.iter().map(|t| usize::from(t.is_content)).collect(),
            answer: (0..toks.len()).map(|i| inside(answer, i)).collect(),
            clue: (0..toks.len()).map(|i| inside(clue, i)).collect(),
            style,
            question: Vec::new(),
            dec_input: vec![BOS],
            targets: Vec::new(),
        })
    }

    pub fn from_input(input: &GenerationInput, vocab: &Vocab) -> Result<Self> {
        Self::encode(&input.sentence, &input.answer, &input.clue, input.style, vocab)
    }

    pub fn from_record(record: &TrainingRecord, vocab: &Vocab, max_question_len: usize) -> Result<Self> {
        let mut ex = Self::encode(&record.passage, &record.answer, &record.clue, record.style, vocab)?;
        let mut q = question_tokens(&record.question);
        q.truncate(max_question_len);
        ex.with_question(q, vocab);
        Ok(ex)
    }

    /// Attach gold question tokens: in-vocabulary words are generated,
    /// out-of-vocabulary words found in the source are copied, the rest map to UNK.
    pub fn with_question(&mut self, question: Vec<String>, vocab: &Vocab) {
        let lower: Vec<String> = self.source.iter().map(|s| s.to_lowercase()).collect();
        self.targets = question
            .iter()
            .map(|q| {
                if vocab.contains(q) {
                    return Target::Generate(vocab.id(q));
                }
                let at: Vec<usize> = lower
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| *s == q)
                    .map(|(i, _)| i)
                    .collect();
                if at.is_empty() {
                    Target::Generate(UNK)
                } else {
                    Target::Copy(at)
                }
            })
            .chain(std::iter::once(Target::Generate(EOS)))
            .collect();
        self.dec_input = std::iter::once(BOS)
            .chain(question.iter().map(|q| vocab.id(q)))
            .collect();
        self.question = question;
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

pub const POS_COUNT: usize = Pos::ALL.len();

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::testing::sentence;
    use crate::seq2seq::vocab::reduce_vocabulary;

    #[test]
    fn copy_aware_targets() {
        let s = sentence(&[("Selina", Pos::Propn, 1), ("left", Pos::Verb, 1), ("home", Pos::Noun, 1)]);
        let vocab = reduce_vocabulary(["when", "did", "left"], 10).unwrap();
        let mut ex = Example::encode(&s, &s.chunks[0], &s.chunks[0], Style::When, &vocab).unwrap();
        ex.with_question(question_tokens("When did Selina leave?"), &vocab);
        assert_eq!(
            ex.targets,
            vec![
                Target::Generate(vocab.id("when")),
                Target::Generate(vocab.id("did")),
                Target::Copy(vec![0]),
                Target::Generate(UNK),
                Target::Generate(UNK),
                Target::Generate(EOS),
            ]
        );
        assert_eq!(ex.dec_input.len(), ex.targets.len());
        assert_eq!(ex.dec_input[0], BOS);
        assert_eq!(ex.word[1], vocab.id("left"));
        assert_eq!(ex.word[0], UNK);
    }

    #[test]
    fn unknown_ner_shares_last_row() {
        assert_eq!(ner_index("UNK"), 0);
        assert_eq!(ner_index("SOMETHING"), NER_TAGS.len() - 1);
    }
}
