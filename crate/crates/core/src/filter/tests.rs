use proptest::prelude::*;

use super::*;
use crate::error::Error;

struct Ent(Option<bool>);

impl EntailmentAdapter for Ent {
    fn entails(&self, _: &GeneratedSample) -> Result<bool> {
        self.0.ok_or_else(|| Error::Model("entailment model unavailable".into()))
    }
}

struct Qa(Option<String>);

impl QaAdapter for Qa {
    fn predict(&self, _: &GeneratedSample) -> Result<String> {
        self.0.clone().ok_or_else(|| Error::Model("qa model unavailable".into()))
    }
}

fn words(n: usize) -> String {
    (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ")
}

fn sample(answer: &str, generator: Generator) -> GeneratedSample {
    let passage = format!("It was {answer} in the end.");
    GeneratedSample {
        id: "s1".into(),
        answer_span: TextSpan {
            start: 7,
            end: 7 + answer.chars().count(),
            text: answer.to_string(),
        },
        clue_span: TextSpan {
            start: 0,
            end: 2,
            text: "It".into(),
        },
        passage_text: passage,
        question: "What was it?".into(),
        generator,
        style: Style::What,
        filter_verdict: None,
    }
}

#[test]
fn entailment_negative_is_dropped() {
    let s = filter(sample("x", Generator::S2s), &Ent(Some(false)), &Qa(Some("x".into())), 0.9);
    let v = s.filter_verdict.unwrap();
    assert!(!v.kept);
    assert_eq!(v.reason, VerdictReason::Entailment);
    assert_eq!(v.reason.to_string(), "entailment");
    assert_eq!(v.span_f1, None);
}

#[test]
fn threshold_is_strict() {
    // 19 of 21 gold tokens predicted: F1 = 38/40 = 0.95
    let s = filter(sample(&words(21), Generator::S2s), &Ent(Some(true)), &Qa(Some(words(19))), 0.9);
    let v = s.filter_verdict.unwrap();
    assert!(v.kept);
    assert!((v.span_f1.unwrap() - 0.95).abs() < 1e-12);
    // 9 of 11: F1 = 18/20 = 0.9 exactly
    let s = filter(sample(&words(11), Generator::S2s), &Ent(Some(true)), &Qa(Some(words(9))), 0.9);
    let v = s.filter_verdict.unwrap();
    assert_eq!(v.span_f1, Some(0.9));
    assert!(!v.kept);
    assert_eq!(v.reason, VerdictReason::SpanF1);
}

#[test]
fn adapter_failure_is_undecided_never_kept() {
    for (e, q) in [(Ent(None), Qa(Some("x".into()))), (Ent(Some(true)), Qa(None))] {
        let v = filter(sample("x", Generator::Lm), &e, &q, 0.0).filter_verdict.unwrap();
        assert!(!v.kept);
        assert_eq!(v.reason, VerdictReason::Undecided);
        assert!(v.error.is_some());
    }
}

#[test]
fn batch_reports() {
    let (k, d, r) = filter_batch(Vec::new(), &StubEntailment, &StubQa, 0.9);
    assert!(k.is_empty() && d.is_empty());
    assert_eq!(r.keep_rate, 0.0);
    let batch = vec![sample("a", Generator::S2s), sample("b", Generator::Lm)];
    let (k, d, r) = filter_batch(batch, &Ent(Some(false)), &StubQa, 0.9);
    assert_eq!((k.len(), d.len(), r.keep_rate), (0, 2, 0.0));
    assert_eq!(r.drop_reasons[&VerdictReason::Entailment], 2);
    assert_eq!(r.per_generator[&Generator::Lm].input, 1);
}

#[test]
fn stubs_keep_consistent_samples() {
    let s = sample("the red fox", Generator::S2s);
    s.validate().unwrap();
    let (k, _, r) = filter_batch(vec![s.clone()], &StubEntailment, &StubQa, 0.9);
    assert_eq!(k.len(), 1);
    assert_eq!(r.keep_rate, 1.0);
    let mut bad = s.clone();
    bad.answer_span.text = "fox".into();
    assert!(bad.validate().is_err());
    assert_eq!(dedup_exact(vec![s.clone(), s]).len(), 1);
}

#[test]
fn entailment_pair_concatenates() {
    let s = sample("x", Generator::S2s);
    let (premise, hyp) = s.entailment_pair();
    assert_eq!(premise, "It was x in the end.");
    assert_eq!(hyp, "What was it? x");
}

#[test]
fn jsonl_round_trip() {
    let s = filter(sample("x", Generator::Lm), &StubEntailment, &StubQa, 0.9);
    let mut buf = Vec::new();
    write_samples(std::slice::from_ref(&s), &mut buf).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.jsonl");
    std::fs::write(&path, buf).unwrap();
    assert_eq!(read_samples(&path).unwrap(), vec![s]);
}

proptest! {
    #[test]
    fn monotone_in_threshold_and_partitions(
        specs in prop::collection::vec((any::<bool>(), 1usize..8, 0usize..8), 0..20),
        t1 in 0.0f64..1.0,
        dt in 0.0f64..0.5,
    ) {
        struct ByAnswer;
        impl EntailmentAdapter for ByAnswer {
            fn entails(&self, s: &GeneratedSample) -> Result<bool> {
                Ok(!s.question.starts_with('!'))
            }
        }
        impl QaAdapter for ByAnswer {
            fn predict(&self, s: &GeneratedSample) -> Result<String> {
                let k: usize = s.id.parse().unwrap();
                Ok(s.answer_span.text.split(' ').take(k).collect::<Vec<_>>().join(" "))
            }
        }
        let samples: Vec<GeneratedSample> = specs
            .iter()
            .map(|&(ent, n, k)| {
                let mut s = sample(&words(n), if k % 2 == 0 { Generator::S2s } else { Generator::Lm });
                s.id = k.to_string();
                if !ent {
                    s.question = "!".into();
                }
                s
            })
            .collect();
        let (k1, d1, r1) = filter_batch(samples.clone(), &ByAnswer, &ByAnswer, t1);
        let (k2, _, _) = filter_batch(samples.clone(), &ByAnswer, &ByAnswer, t1 + dt);
        prop_assert_eq!(k1.len() + d1.len(), samples.len());
        prop_assert_eq!(r1.kept + r1.dropped, r1.input);
        for (a, b) in filter_batch(samples.clone(), &ByAnswer, &ByAnswer, t1).0.iter().zip(&k1) {
            prop_assert_eq!(a, b);
        }
        let kept_hi: Vec<&GeneratedSample> = k2.iter().collect();
        for s in &kept_hi {
            prop_assert!(k1.iter().any(|x| x.id == s.id && x.answer_span == s.answer_span && x.question == s.question));
        }
        prop_assert!(k2.len() <= k1.len());
    }
}
