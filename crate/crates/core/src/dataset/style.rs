use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::annotate::tokenize_words;
use crate::error::{Error, Result};

/// The nine question styles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Style {
    Who,
    Where,
    When,
    Why,
    Which,
    What,
    How,
    YesNo,
    Other,
}

impl Style {
    pub const ALL: [Style; 9] = [
        Style::Who,
        Style::Where,
        Style::When,
        Style::Why,
        Style::Which,
        Style::What,
        Style::How,
        Style::YesNo,
        Style::Other,
    ];

    /// Wh-styles in the order they are tested.
    const WH: [Style; 7] = [
        Style::Who,
        Style::Where,
        Style::When,
        Style::Why,
        Style::Which,
        Style::What,
        Style::How,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Style::Who => "who",
            Style::Where => "where",
            Style::When => "when",
            Style::Why => "why",
            Style::Which => "which",
            Style::What => "what",
            Style::How => "how",
            Style::YesNo => "yes-no",
            Style::Other => "other",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Style> {
        Style::ALL.get(i).copied()
    }
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Style {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Style::ALL
            .iter()
            .copied()
            .find(|st| st.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown style {s:?}")))
    }
}

/// First words that mark a yes/no question.
pub const YES_NO_WORDS: [&str; 19] = [
    "am", "is", "was", "were", "are", "does", "do", "did", "have", "had", "has", "could", "can",
    "shall", "should", "will", "would", "may", "might",
];

/// Rule-based style: the first wh-word contained in the question (tested in
/// fixed order), else yes-no when the first word is an auxiliary, else other.
pub fn classify_style(question: &str) -> Result<Style> {
    let words: Vec<String> = tokenize_words(question)
        .into_iter()
        .map(|(_, _, t)| t.to_lowercase())
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .collect();
    if words.is_empty() {
        return Err(Error::invalid("cannot classify an empty question"));
    }
    for style in Style::WH {
        if words.iter().any(|w| w == style.as_str()) {
            return Ok(style);
        }
    }
    if YES_NO_WORDS.contains(&words[0].as_str()) {
        return Ok(Style::YesNo);
    }
    Ok(Style::Other)
}
