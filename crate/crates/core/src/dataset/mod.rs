//! Builds ⟨passage, question, answer, clue, style⟩ records from QA corpora.

mod clue;
mod ingest;
mod records;
mod style;

pub use clue::{content_tokens, extract_clue, stem, ClueScore};
pub use ingest::{parse_sentence_split, parse_squad, read_sentence_split, read_squad, QaSample};
pub use records::{
    align_answer, build_training_records, read_records, write_records, BuildReport, DropReason,
    RecordLine, SpanRef, TrainingRecord,
};
pub use style::{classify_style, Style, YES_NO_WORDS};
