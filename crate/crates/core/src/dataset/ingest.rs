//! Reading question/answer corpora into flat samples.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// One (context, question, answer) triple. `answer_start` is a character
/// offset into `context`; `context_id` groups samples sharing a context.
#[derive(Debug, Clone, PartialEq)]
pub struct QaSample {
    pub id: String,
    pub context_id: String,
    pub context: String,
    pub question: String,
    pub answer_text: String,
    pub answer_start: usize,
}

#[derive(Deserialize)]
struct SquadFile {
    data: Vec<SquadArticle>,
}

#[derive(Deserialize)]
struct SquadArticle {
    #[serde(default)]
    title: String,
    paragraphs: Vec<SquadParagraph>,
}

#[derive(Deserialize)]
struct SquadParagraph {
    context: String,
    qas: Vec<SquadQa>,
}

#[derive(Deserialize)]
struct SquadQa {
    id: String,
    question: String,
    answers: Vec<SquadAnswer>,
}

#[derive(Deserialize)]
struct SquadAnswer {
    text: String,
    answer_start: usize,
}

/// Parse SQuAD v1.1 JSON. Only the first answer of each question is kept;
/// questions without answers are skipped.
pub fn parse_squad(json: &str) -> Result<Vec<QaSample>> {
    let file: SquadFile = serde_json::from_str(json)?;
    let mut out = Vec::new();
    for (a, article) in file.data.into_iter().enumerate() {
        for (p, para) in article.paragraphs.into_iter().enumerate() {
            let context_id = format!("{}#{a}.{p}", article.title);
            for qa in para.qas {
                let Some(ans) = qa.answers.into_iter().next() else { continue };
                out.push(QaSample {
                    id: qa.id,
                    context_id: context_id.clone(),
                    context: para.context.clone(),
                    question: qa.question,
                    answer_text: ans.text,
                    answer_start: ans.answer_start,
                });
            }
        }
    }
    Ok(out)
}

pub fn read_squad(path: impl AsRef<Path>) -> Result<Vec<QaSample>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::resource(path, e))?;
    parse_squad(&text).map_err(|e| match e {
        Error::Json(j) => Error::Format(format!("{}: {j}", path.display())),
        other => other,
    })
}

/// Parse the sentence-level split format: parallel lines of tokenized
/// sentences, questions and B/I/O answer tags (one tag per sentence token).
pub fn parse_sentence_split(source: &str, target: &str, bio: &str, prefix: &str) -> Result<Vec<QaSample>> {
    let src: Vec<&str> = source.lines().collect();
    let tgt: Vec<&str> = target.lines().collect();
    let tags: Vec<&str> = bio.lines().collect();
    if src.len() != tgt.len() || src.len() != tags.len() {
        return Err(Error::Format(format!(
            "split files disagree in length: {} sources, {} targets, {} tag lines",
            src.len(),
            tgt.len(),
            tags.len()
        )));
    }
    let mut out = Vec::with_capacity(src.len());
    for (i, ((s, q), b)) in src.iter().zip(&tgt).zip(&tags).enumerate() {
        let words: Vec<&str> = s.split_whitespace().collect();
        let labels: Vec<&str> = b.split_whitespace().collect();
        if words.len() != labels.len() {
            return Err(Error::Format(format!(
                "line {}: {} tokens but {} tags",
                i + 1,
                words.len(),
                labels.len()
            )));
        }
        let context = words.join(" ");
        let mut offset = 0;
        let mut span: Option<(usize, usize)> = None;
        for (w, l) in words.iter().zip(&labels) {
            let len = w.chars().count();
            if l.starts_with('B') || l.starts_with('I') {
                span = Some(match span {
                    None => (offset, offset + len),
                    Some((st, _)) => (st, offset + len),
                });
            }
            offset += len + 1;
        }
        let (answer_start, answer_end) = span.unwrap_or((0, 0));
        let answer_text: String = context
            .chars()
            .skip(answer_start)
            .take(answer_end - answer_start)
            .collect();
        out.push(QaSample {
            id: format!("{prefix}{i}"),
            context_id: format!("{prefix}{i}"),
            context,
            question: q.trim().to_string(),
            answer_text,
            answer_start,
        });
    }
    Ok(out)
}

/// Read `<stem>.source.txt`, `<stem>.target.txt` and `<stem>.bio`.
pub fn read_sentence_split(stem: impl AsRef<Path>) -> Result<Vec<QaSample>> {
    let stem = stem.as_ref();
    let read = |suffix: &str| {
        let mut p = stem.as_os_str().to_owned();
        p.push(suffix);
        let p = std::path::PathBuf::from(p);
        std::fs::read_to_string(&p).map_err(|e| Error::resource(&p, e))
    };
    let prefix = stem
        .file_name()
        .map(|s| format!("{}:", s.to_string_lossy()))
        .unwrap_or_default();
    parse_sentence_split(&read(".source.txt")?, &read(".target.txt")?, &read(".bio")?, &prefix)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squad_first_answer_only() {
        let json = r#"{"version":"1.1","data":[{"title":"T","paragraphs":[{"context":"Paris is big.",
            "qas":[{"id":"q1","question":"What is big?","answers":[{"text":"Paris","answer_start":0},{"text":"x","answer_start":3}]},
                   {"id":"q2","question":"None?","answers":[]}]}]}]}"#;
        let s = parse_squad(json).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].answer_text.as_str(), s[0].answer_start), ("Paris", 0));
    }

    #[test]
    fn malformed_squad_is_error() {
        assert!(parse_squad("{\"data\": 3}").is_err());
    }

    #[test]
    fn sentence_split_offsets() {
        let s = parse_sentence_split(
            "selina left at 18 .\n",
            "how old was she ?\n",
            "O O O B O\n",
            "dev:",
        )
        .unwrap();
        assert_eq!(s[0].answer_text, "18");
        assert_eq!(s[0].answer_start, 15);
        assert_eq!(s[0].id, "dev:0");
        assert!(parse_sentence_split("a b\n", "q\n", "O\n", "").is_err());
        assert!(parse_sentence_split("a\nb\n", "q\n", "O\n", "").is_err());
    }
}
