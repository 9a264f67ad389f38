use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::annotate::{Pos, RelatedWordsDict, RuleAnnotator};
use crate::annotate::testing::sentence;
use crate::dataset::{build_training_records, Style};
use crate::nn::AdamConfig;
use crate::synth::synthetic_corpus;

fn records(n: usize) -> Vec<TrainingRecord> {
    let (r, _) = build_training_records(&synthetic_corpus(n, 3), &RuleAnnotator::new(), &RelatedWordsDict::default());
    r
}

fn small_config() -> RnnLmConfig {
    RnnLmConfig {
        vocab_size: 400,
        embed_dim: 24,
        hidden: 48,
        max_context: 96,
        optimizer: AdamConfig {
            lr: 1e-2,
            ..AdamConfig::default()
        },
    }
}

#[test]
fn memorises_a_single_record() {
    let recs = records(1);
    let mut lm = RecurrentLm::<f64>::for_records(&recs, small_config(), 1).unwrap();
    let cfg = FinetuneConfig {
        epochs: 200,
        batch_size: 1,
        seed: 2,
    };
    let report = finetune(&recs, &mut lm, &cfg).unwrap();
    assert!(report.epoch_losses.last().unwrap() < &0.05, "{:?}", report.epoch_losses.last());
    let input = record_input(&recs[0]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let q = nucleus_generate(&input, &lm, 0.0, 30, &mut rng).unwrap();
    assert_eq!(q, crate::seq2seq::question_tokens(&recs[0].question).join(" "));
}

#[test]
fn finetune_lowers_loss_and_reports_defaults() {
    assert_eq!(FinetuneConfig::default().epochs, 4);
    assert_eq!(FinetuneConfig::default().batch_size, 2);
    let recs = records(40);
    let mut lm = RecurrentLm::<f32>::for_records(&recs, small_config(), 1).unwrap();
    let (examples, _) = training_examples(&recs, &lm).unwrap();
    let before = lm.loss(&examples).unwrap();
    finetune(&recs, &mut lm, &FinetuneConfig::default()).unwrap();
    let after = lm.loss(&examples).unwrap();
    assert!(after < before, "{before} -> {after}");
}

#[test]
fn overlong_prompt_truncated_not_rejected() {
    let recs = records(1);
    let mut config = small_config();
    let (probe, _) = training_examples(&recs, &RecurrentLm::<f64>::for_records(&recs, config.clone(), 1).unwrap()).unwrap();
    let passage = recs[0].passage.tokens.len();
    config.max_context = probe[0].ids.len() - 2;
    assert!(passage > 2);
    let mut lm = RecurrentLm::<f64>::for_records(&recs, config, 1).unwrap();
    let report = finetune(&recs, &mut lm, &FinetuneConfig { epochs: 1, ..Default::default() }).unwrap();
    assert_eq!(report.truncated, 1);
}

#[test]
fn greedy_limit_ignores_seed_and_sampling_is_seeded() {
    let recs = records(5);
    let lm = RecurrentLm::<f64>::for_records(&recs, small_config(), 4).unwrap();
    let input = record_input(&recs[0]);
    let g1 = nucleus_generate(&input, &lm, 0.0, 12, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let g2 = nucleus_generate(&input, &lm, 1e-9, 12, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
    assert_eq!(g1, g2);
    let s1 = nucleus_generate(&input, &lm, 0.9, 12, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let s2 = nucleus_generate(&input, &lm, 0.9, 12, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    assert_eq!(s1, s2);
    assert!(nucleus_generate(&input, &lm, 1.5, 12, &mut ChaCha8Rng::seed_from_u64(5)).is_err());
}

#[test]
fn nucleus_edge_cases() {
    let probs = [0.1, 0.5, 0.0, 0.4];
    assert_eq!(nucleus_set(&probs, 0.0), vec![1]);
    assert_eq!(nucleus_set(&probs, 1.0), vec![1, 3, 0]);
    assert_eq!(nucleus_set(&probs, 0.9), vec![1, 3]);
    assert_eq!(nucleus_set(&probs, 0.91), vec![1, 3, 0]);
}

fn style_strategy() -> impl Strategy<Value = Style> {
    (0..Style::ALL.len()).prop_map(|i| Style::ALL[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nucleus_set_is_minimal(raw in prop::collection::vec(0.0f64..1.0, 1..20), p in 0.0f64..=1.0) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-6);
        let probs: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let set = nucleus_set(&probs, p);
        let mass: f64 = set.iter().map(|&i| probs[i]).sum();
        prop_assert!(mass >= p - 1e-9);
        let smallest = set.iter().map(|&i| probs[i]).fold(f64::INFINITY, f64::min);
        prop_assert!(mass - smallest < p + 1e-9 || set.len() == 1);
        let outside_max = (0..probs.len()).filter(|i| !set.contains(i)).map(|i| probs[i]).fold(0.0, f64::max);
        prop_assert!(outside_max <= smallest);
    }

    #[test]
    fn segments_follow_spans(n in 2usize..12, a in 0usize..12, al in 1usize..4, c in 0usize..12, cl in 1usize..4, style in style_strategy(), q in "[a-z]{1,6}( [a-z]{1,6}){0,5}") {
        let words: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        let parts: Vec<(&str, Pos, usize)> = words.iter().map(|w| (w.as_str(), Pos::Noun, 0)).collect();
        let s = sentence(&parts);
        let (a, c) = (a % n, c % n);
        let answer = s.make_chunk(a, (a + al).min(n));
        let clue = s.make_chunk(c, (c + cl).min(n));
        let input = GenerationInput { sentence: s, answer: answer.clone(), clue: clue.clone(), style };
        let seq = serialize_prompt(&input, Some(&q)).unwrap();
        for i in 0..n {
            let expect = if answer.contains_token(i) { Segment::Answer } else if clue.contains_token(i) { Segment::Clue } else { Segment::Passage };
            prop_assert_eq!(seq.segments[i + 1], expect);
        }
        let parts = seq.deserialize().unwrap();
        prop_assert_eq!(parts.passage, words.clone());
        prop_assert_eq!(parts.answer, words[answer.start..answer.end].to_vec());
        prop_assert_eq!(parts.clue, words[clue.start..clue.end].to_vec());
        prop_assert_eq!(prompt_style(&seq.deserialize().unwrap()).unwrap(), style);
        prop_assert_eq!(parts.question.unwrap().join(" "), q.clone());
        let gen = serialize_prompt(&input, None).unwrap();
        prop_assert_eq!(gen.tokens.last(), Some(&PromptToken::Marker(Marker::Ques)));
        prop_assert_eq!(&seq.tokens[..gen.len()], &gen.tokens[..]);
    }

    #[test]
    fn markers_never_generated(seed in 0u64..1000, p in 0.05f64..=1.0) {
        let s = sentence(&[("Ann", Pos::Propn, 1), ("sang", Pos::Verb, 1), ("loudly", Pos::Adv, 1)]);
        let input = GenerationInput { answer: s.make_chunk(2, 3), clue: s.make_chunk(0, 1), sentence: s, style: Style::How };
        let words: Vec<String> = ["how", "did", "ann", "sing", "?"].iter().map(|w| w.to_string()).collect();
        let lm = RecurrentLm::<f32>::new(small_config(), words, seed).unwrap();
        let out = nucleus_generate(&input, &lm, p, 10, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        for m in Marker::ALL {
            prop_assert!(!out.split(' ').any(|w| w == m.as_str()));
        }
        prop_assert!(!out.contains("<unk>"));
    }
}
