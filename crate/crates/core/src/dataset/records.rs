use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::clue::extract_clue;
use super::ingest::QaSample;
use super::style::{classify_style, Style};
use crate::annotate::{annotate, split_sentences, AnnotatedSentence, Annotator, Chunk, RelatedWordsDict};
use crate::error::{Error, Result};

/// ⟨passage, question, answer, clue, style⟩ with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRecord {
    pub passage: AnnotatedSentence,
    pub question: String,
    pub answer: Chunk,
    pub clue: Chunk,
    pub style: Style,
    pub source_id: String,
}

impl TrainingRecord {
    pub fn validate(&self) -> Result<()> {
        if !self.passage.has_chunk(&self.answer) {
            return Err(Error::invalid(format!("{}: answer is not a candidate chunk", self.source_id)));
        }
        if !self.passage.has_chunk(&self.clue) {
            return Err(Error::invalid(format!("{}: clue is not a candidate chunk", self.source_id)));
        }
        Ok(())
    }
}

/// Token span plus its surface text, as written to record files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanRef {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

impl From<&Chunk> for SpanRef {
    fn from(c: &Chunk) -> Self {
        SpanRef {
            start: c.start,
            end: c.end,
            text: c.text.clone(),
        }
    }
}

/// One line of a record file. The full annotation rides along so later
/// stages do not need to re-run the annotator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordLine {
    pub passage_text: String,
    pub question: String,
    pub answer: SpanRef,
    pub clue: SpanRef,
    pub style: Style,
    pub source_id: String,
    pub annotation: AnnotatedSentence,
}

impl From<&TrainingRecord> for RecordLine {
    fn from(r: &TrainingRecord) -> Self {
        RecordLine {
            passage_text: r.passage.raw_text.clone(),
            question: r.question.clone(),
            answer: SpanRef::from(&r.answer),
            clue: SpanRef::from(&r.clue),
            style: r.style,
            source_id: r.source_id.clone(),
            annotation: r.passage.clone(),
        }
    }
}

impl TryFrom<RecordLine> for TrainingRecord {
    type Error = Error;
    fn try_from(line: RecordLine) -> Result<Self> {
        line.annotation.validate()?;
        let chunk = |s: &SpanRef, what: &str| {
            line.annotation
                .find_chunk(s.start, s.end)
                .cloned()
                .ok_or_else(|| Error::Format(format!("{}: {what} span {}..{} is not a chunk", line.source_id, s.start, s.end)))
        };
        let answer = chunk(&line.answer, "answer")?;
        let clue = chunk(&line.clue, "clue")?;
        Ok(TrainingRecord {
            passage: line.annotation,
            question: line.question,
            answer,
            clue,
            style: line.style,
            source_id: line.source_id,
        })
    }
}

pub fn write_records(records: &[TrainingRecord], mut out: impl Write) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, &RecordLine::from(r))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<TrainingRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::resource(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RecordLine = serde_json::from_str(&line)
            .map_err(|e| Error::Format(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(TrainingRecord::try_from(rec)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// The stated offset does not point at the answer text and the text is absent.
    AnswerNotFound,
    /// The answer lies outside every sentence or straddles two.
    OutsideSentence,
    EmptyQuestion,
    AnnotationFailed,
    /// No candidate chunk overlaps the answer span by half both ways.
    NoAlignedChunk,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub input: usize,
    pub emitted: usize,
    pub dropped: usize,
    pub drops: BTreeMap<DropReason, usize>,
}

impl BuildReport {
    pub fn drop_rate(&self) -> f64 {
        if self.input == 0 {
            0.0
        } else {
            self.dropped as f64 / self.input as f64
        }
    }
}

fn char_slice(s: &str, start: usize, end: usize) -> String {
    s.chars().skip(start).take(end.saturating_sub(start)).collect()
}

/// Character range of the answer, trusting the offset when it matches and
/// otherwise taking the occurrence nearest to it.
fn locate_answer(context: &str, text: &str, start: usize) -> Option<(usize, usize)> {
    let len = text.chars().count();
    if len == 0 {
        return None;
    }
    if char_slice(context, start, start + len) == text {
        return Some((start, start + len));
    }
    let chars: Vec<char> = context.chars().collect();
    let needle: Vec<char> = text.chars().collect();
    (0..chars.len().saturating_sub(len - 1))
        .filter(|&i| chars[i..i + len] == needle[..])
        .min_by_key(|&i| i.abs_diff(start))
        .map(|i| (i, i + len))
}

/// Candidate chunk with the largest token overlap with `[start, end)` among
/// those covering at least half of the span and at least half of themselves.
pub fn align_answer(sentence: &AnnotatedSentence, start: usize, end: usize) -> Option<Chunk> {
    let span_len = end.saturating_sub(start);
    if span_len == 0 {
        return None;
    }
    sentence
        .chunks
        .iter()
        .filter_map(|c| {
            let overlap = c.end.min(end).saturating_sub(c.start.max(start));
            (2 * overlap >= span_len && 2 * overlap >= c.length && overlap > 0).then_some((overlap, c))
        })
        .max_by(|(oa, a), (ob, b)| {
            oa.cmp(ob)
                .then_with(|| b.length.cmp(&a.length))
                .then_with(|| b.start.cmp(&a.start))
        })
        .map(|(_, c)| c.clone())
}

type Outcome = std::result::Result<TrainingRecord, DropReason>;

fn build_one(
    sample: &QaSample,
    sentences: &[(usize, usize)],
    parsed: &mut HashMap<(usize, usize), Option<AnnotatedSentence>>,
    annotator: &dyn Annotator,
    dict: &RelatedWordsDict,
) -> Outcome {
    let style = classify_style(&sample.question).map_err(|_| DropReason::EmptyQuestion)?;
    let (a0, a1) = locate_answer(&sample.context, &sample.answer_text, sample.answer_start)
        .ok_or(DropReason::AnswerNotFound)?;
    let &(s0, s1) = sentences
        .iter()
        .find(|&&(s0, s1)| s0 <= a0 && a1 <= s1)
        .ok_or(DropReason::OutsideSentence)?;
    let passage = parsed
        .entry((s0, s1))
        .or_insert_with(|| annotate(annotator, &char_slice(&sample.context, s0, s1)).ok())
        .as_ref()
        .ok_or(DropReason::AnnotationFailed)?;
    let (r0, r1) = (a0 - s0, a1 - s0);
    let covered: Vec<usize> = passage
        .tokens
        .iter()
        .filter(|t| t.start_char < r1 && t.end_char > r0)
        .map(|t| t.index)
        .collect();
    let (Some(&t0), Some(&t1)) = (covered.first(), covered.last()) else {
        return Err(DropReason::NoAlignedChunk);
    };
    let answer = align_answer(passage, t0, t1 + 1).ok_or(DropReason::NoAlignedChunk)?;
    let (clue, _) = extract_clue(passage, &sample.question, &answer, dict).map_err(|_| DropReason::NoAlignedChunk)?;
    Ok(TrainingRecord {
        passage: passage.clone(),
        question: sample.question.trim().to_string(),
        answer,
        clue,
        style,
        source_id: sample.id.clone(),
    })
}

/// Turn QA samples into training records. Samples sharing a context are
/// processed together (each sentence is annotated once); groups run in
/// parallel and results keep input order. Failures are counted, never fatal.
pub fn build_training_records(
    samples: &[QaSample],
    annotator: &dyn Annotator,
    dict: &RelatedWordsDict,
) -> (Vec<TrainingRecord>, BuildReport) {
    let mut groups: Vec<&[QaSample]> = Vec::new();
    let mut start = 0;
    for i in 1..=samples.len() {
        if i == samples.len() || samples[i].context_id != samples[start].context_id {
            groups.push(&samples[start..i]);
            start = i;
        }
    }
    let outcomes: Vec<Vec<Outcome>> = groups
        .par_iter()
        .map(|group| {
            let sentences = split_sentences(&group[0].context);
            let mut parsed = HashMap::new();
            group
                .iter()
                .map(|s| {
                    if s.context != group[0].context {
                        let own = split_sentences(&s.context);
                        return build_one(s, &own, &mut HashMap::new(), annotator, dict);
                    }
                    build_one(s, &sentences, &mut parsed, annotator, dict)
                })
                .collect()
        })
        .collect();

    let mut report = BuildReport {
        input: samples.len(),
        ..Default::default()
    };
    let mut records = Vec::new();
    for (sample, outcome) in samples.iter().zip(outcomes.into_iter().flatten()) {
        match outcome {
            Ok(r) => records.push(r),
            Err(reason) => {
                log::debug!("dropped {}: {reason:?}", sample.id);
                *report.drops.entry(reason).or_default() += 1;
                report.dropped += 1;
            }
        }
    }
    report.emitted = records.len();
    log::info!(
        "constructed {} records from {} samples ({} dropped)",
        report.emitted,
        report.input,
        report.dropped
    );
    (records, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::RuleAnnotator;

    fn sample(id: &str, context: &str, question: &str, answer: &str, start: usize) -> QaSample {
        QaSample {
            id: id.into(),
            context_id: "c".into(),
            context: context.into(),
            question: question.into(),
            answer_text: answer.into(),
            answer_start: start,
        }
    }

    const CTX: &str = "Paris is the capital of France. Selina left her hometown at the age of 18.";

    #[test]
    fn builds_and_counts() {
        let samples = vec![
            sample("a", CTX, "How old was Selina when she left?", "18", 71),
            sample("b", CTX, "What is the capital of France?", "Paris", 0),
            sample("c", CTX, "Where?", "Berlin", 3),
            sample("d", CTX, "Which?", "France. Selina", 24),
        ];
        let (recs, report) = build_training_records(&samples, &RuleAnnotator, &RelatedWordsDict::default());
        assert_eq!(report.input, 4);
        assert_eq!(report.emitted + report.dropped, 4);
        assert_eq!(report.drops.get(&DropReason::AnswerNotFound), Some(&1));
        assert_eq!(report.drops.get(&DropReason::OutsideSentence), Some(&1));
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].source_id, "a");
        assert_eq!(recs[0].style, Style::When);
        assert_eq!(recs[1].answer.text, "Paris");
        for r in &recs {
            r.validate().unwrap();
        }
    }

    #[test]
    fn wrong_offset_recovers_nearest_occurrence() {
        assert_eq!(locate_answer("a b a b", "b", 5), Some((6, 7)));
        assert_eq!(locate_answer("a b a b", "b", 3), Some((2, 3)));
        assert_eq!(locate_answer("abc", "z", 0), None);
    }

    #[test]
    fn round_trip_jsonl() {
        let samples = vec![sample("a", CTX, "How old was Selina when she left?", "18", 71)];
        let (recs, _) = build_training_records(&samples, &RuleAnnotator, &RelatedWordsDict::default());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        write_records(&recs, std::fs::File::create(&path).unwrap()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        for key in ["passage_text", "question", "answer", "clue", "style", "source_id"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(read_records(&path).unwrap(), recs);
    }
}
