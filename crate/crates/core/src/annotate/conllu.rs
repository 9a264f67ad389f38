//! Adapter for annotations produced offline by an external parser and stored
//! as CoNLL-U. Entity labels are read from `NER=` in the MISC column.

use std::collections::HashMap;
use std::path::Path;

use super::{lexicon, Annotator, Pos, Token, NO_ENTITY};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Row {
    form: String,
    lemma: String,
    pos: Pos,
    head: usize,
    ner: String,
}

#[derive(Debug, Clone, Default)]
pub struct ConlluAnnotator {
    name: String,
    sentences: HashMap<String, Vec<Row>>,
}

impl ConlluAnnotator {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::resource(path, e))?;
        let mut ann = Self::parse(&text)?;
        ann.name = format!("conllu:{}", path.display());
        Ok(ann)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sentences = HashMap::new();
        let mut current_text: Option<String> = None;
        let mut rows: Vec<Row> = Vec::new();
        let mut flush = |t: &mut Option<String>, rows: &mut Vec<Row>| -> Result<()> {
            if rows.is_empty() {
                return Ok(());
            }
            let key = match t.take() {
                Some(k) => k,
                None => rows.iter().map(|r| r.form.as_str()).collect::<Vec<_>>().join(" "),
            };
            sentences.insert(key, std::mem::take(rows));
            Ok(())
        };
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() {
                flush(&mut current_text, &mut rows)?;
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(t) = comment.trim().strip_prefix("text =") {
                    current_text = Some(t.trim().to_string());
                }
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 10 {
                return Err(Error::Format(format!(
                    "line {}: expected 10 tab-separated columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            // multiword ranges and empty nodes carry no tree position
            if cols[0].contains('-') || cols[0].contains('.') {
                continue;
            }
            let head: usize = cols[6].parse().map_err(|_| {
                Error::Format(format!("line {}: bad HEAD {:?}", lineno + 1, cols[6]))
            })?;
            let pos = cols[3]
                .parse::<Pos>()
                .or_else(|_| cols[4].parse::<Pos>())
                .unwrap_or(Pos::X);
            let ner = cols[9]
                .split('|')
                .find_map(|kv| kv.strip_prefix("NER="))
                .map(|v| v.trim_start_matches("B-").trim_start_matches("I-").to_string())
                .filter(|v| v != "O" && !v.is_empty())
                .unwrap_or_else(|| NO_ENTITY.to_string());
            let lemma = if cols[2] == "_" {
                lexicon::lemmatize(&cols[1].to_lowercase(), pos)
            } else {
                cols[2].to_string()
            };
            rows.push(Row {
                form: cols[1].to_string(),
                lemma,
                pos,
                head,
                ner,
            });
        }
        flush(&mut current_text, &mut rows)?;
        Ok(ConlluAnnotator {
            name: "conllu".to_string(),
            sentences,
        })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

impl Annotator for ConlluAnnotator {
    fn id(&self) -> String {
        self.name.clone()
    }

    fn annotate_tokens(&self, raw_text: &str) -> Result<Vec<Token>> {
        let rows = self.sentences.get(raw_text.trim()).ok_or_else(|| {
            Error::Annotation(format!("no CoNLL-U analysis for {raw_text:?}"))
        })?;
        let chars: Vec<char> = raw_text.chars().collect();
        let mut cursor = 0;
        let mut tokens = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let form: Vec<char> = row.form.chars().collect();
            let start = (cursor..=chars.len().saturating_sub(form.len()))
                .find(|&s| chars[s..s + form.len()] == form[..])
                .ok_or_else(|| {
                    Error::Annotation(format!("token {:?} not found in {raw_text:?}", row.form))
                })?;
            cursor = start + form.len();
            tokens.push(Token {
                index: i,
                text: row.form.clone(),
                lemma: row.lemma.clone(),
                pos: row.pos,
                ner: row.ner.clone(),
                is_content: false,
                head_index: if row.head == 0 { i } else { row.head - 1 },
                start_char: start,
                end_char: cursor,
            });
        }
        Ok(tokens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::annotate;

    const SAMPLE: &str = "# text = Selina left home.\n\
1\tSelina\tSelina\tPROPN\tNNP\t_\t2\tnsubj\t_\tNER=PERSON\n\
2\tleft\tleave\tVERB\tVBD\t_\t0\troot\t_\t_\n\
3\thome\thome\tNOUN\tNN\t_\t2\tobj\t_\tSpaceAfter=No\n\
4\t.\t.\tPUNCT\t.\t_\t2\tpunct\t_\t_\n\n";

    #[test]
    fn reads_tree_and_entities() {
        let ann = ConlluAnnotator::parse(SAMPLE).unwrap();
        let s = annotate(&ann, "Selina left home.").unwrap();
        assert_eq!(s.tokens.len(), 4);
        assert_eq!(s.root(), Some(1));
        assert_eq!(s.tokens[0].ner, "PERSON");
        assert_eq!(s.tokens[3].start_char, 16);
        assert!(s.chunks.iter().any(|c| c.text == "Selina"));
    }

    #[test]
    fn unknown_sentence_is_annotation_error() {
        let ann = ConlluAnnotator::parse(SAMPLE).unwrap();
        assert!(matches!(
            annotate(&ann, "Something else."),
            Err(Error::Annotation(_))
        ));
    }

    #[test]
    fn wrong_column_count_is_format_error() {
        assert!(matches!(
            ConlluAnnotator::parse("1\tx\tx\n"),
            Err(Error::Format(_))
        ));
    }
}
