use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::annotate::testing::sentence;
use crate::annotate::Pos;
use crate::nn::Tensors;

pub(crate) fn toy_config() -> Seq2SeqConfig {
    Seq2SeqConfig {
        vocab_size: 10,
        word_dim: 4,
        feature_dim: 2,
        enc_hidden: 3,
        style_dim: 2,
        attn_dim: 3,
        maxout_dim: 2,
        dropout: 0.0,
        max_question_len: 10,
    }
}

fn toy() -> (Seq2Seq<f64>, Example) {
    let s = sentence(&[("Selina", Pos::Propn, 1), ("left", Pos::Verb, 1), ("home", Pos::Noun, 1)]);
    let vocab = reduce_vocabulary(["when", "did", "left", "?"], 10).unwrap();
    let mut model = Seq2Seq::<f64>::new(toy_config(), vocab, 5).unwrap();
    // push parameters away from the near-linear regime around zero
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (_, mut t) in model.params.tensors_mut() {
        t.mapv_inplace(|v| v + rng.gen_range(-0.5..0.5));
    }
    let mut ex = Example::encode(&s, &s.chunks[0], &s.chunks[1], Style::When, &model.vocab).unwrap();
    ex.with_question(question_tokens("When did Selina leave ?"), &model.vocab);
    assert!(ex.targets.iter().any(|t| matches!(t, Target::Copy(_))));
    (model, ex)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

#[test]
fn gradients_match_central_differences_for_every_group() {
    let (model, ex) = toy();
    let (_, grad) = model.loss_with_gradient(&ex);
    let eps = 1e-5;
    let names: Vec<&str> = grad.tensors().iter().map(|(n, _)| *n).collect();
    let mut worst = 0.0f64;
    for (gi, name) in names.iter().enumerate() {
        let len = grad.tensors()[gi].1.len();
        let mut checked = 0;
        for k in 0..len {
            let analytic = grad.tensors()[gi].1.iter().nth(k).copied().unwrap();
            let eval = |d: f64| {
                let mut m = model.clone();
                let mut ts = m.params.tensors_mut();
                *ts[gi].1.iter_mut().nth(k).unwrap() += d;
                drop(ts);
                m.loss(&ex)
            };
            let numeric = (eval(eps) - eval(-eps)) / (2.0 * eps);
            let err = rel_err(analytic, numeric);
            worst = worst.max(err);
            assert!(err <= 1e-4, "{name}[{k}]: analytic {analytic} numeric {numeric} (rel {err})");
            checked += 1;
            if checked >= 40 {
                break;
            }
        }
    }
    assert!(worst <= 1e-4);
}

#[test]
fn distributions_normalise() {
    let (model, ex) = toy();
    let enc = model.encode_example(&ex, None, false);
    let mut state = model.init_decoder(Style::When, &enc.h).unwrap();
    let mut prev = BOS;
    for _ in 0..4 {
        let out = model.decode_step(&state, prev, &enc.h).unwrap();
        assert!((out.attention.sum() - 1.0).abs() < 1e-6);
        assert!((out.generation.sum() - 1.0).abs() < 1e-6);
        assert!((out.distribution.sum() - 1.0).abs() < 1e-6);
        assert!(out.distribution.iter().all(|p| *p >= 0.0));
        assert!(out.gate > 0.0 && out.gate < 1.0);
        prev = out.distribution.iter().enumerate().fold(0, |b, (i, p)| if *p > out.distribution[b] { i } else { b });
        state = out.state;
    }
}

#[test]
fn maxout_halves_and_takes_pair_max() {
    let (m, choice) = maxout(array![1.0, -2.0, 0.5, 3.0, -1.0, -1.5].view());
    assert_eq!(m, array![1.0, 3.0, -1.0]);
    assert_eq!(choice, vec![0, 3, 4]);
}

#[test]
fn encoder_shapes_and_determinism() {
    let (model, ex) = toy();
    let a = model.encode_example(&ex, None, false).h;
    let b = model.encode_example(&ex, None, false).h;
    assert_eq!(a.dim(), (3, 2 * model.config.enc_hidden));
    assert_eq!(a, b);
}

#[test]
fn forward_states_change_from_perturbed_position_onward() {
    let (model, ex) = toy();
    let base = model.encode_example(&ex, None, false).h;
    let mut ex2 = ex.clone();
    ex2.answer[1] = 1 - ex2.answer[1];
    let pert = model.encode_example(&ex2, None, false).h;
    let hd = model.config.enc_hidden;
    assert_eq!(base.slice(ndarray::s![0, ..hd]), pert.slice(ndarray::s![0, ..hd]));
    for t in 1..3 {
        assert_ne!(base.slice(ndarray::s![t, ..hd]), pert.slice(ndarray::s![t, ..hd]));
    }
}

#[test]
fn init_decoder_properties() {
    let (mut model, ex) = toy();
    let h = model.encode_example(&ex, None, false).h;
    let sd = model.config.style_dim;
    let a = model.init_decoder(Style::Who, &h).unwrap();
    let b = model.init_decoder(Style::What, &h).unwrap();
    assert_ne!(a.s, b.s);
    assert!(a.s.slice(ndarray::s![sd..]).iter().all(|v| v.abs() < 1.0));
    model.params.w0.fill(0.0);
    model.params.b0.fill(0.0);
    let z = model.init_decoder(Style::Who, &h).unwrap();
    assert!(z.s.slice(ndarray::s![sd..]).iter().all(|v| *v == 0.0));
    assert!(model.init_decoder(Style::Who, &Array2::zeros((0, 6))).is_err());
    assert!(matches!(model.init_decoder(Style::Who, &Array2::zeros((2, 5))), Err(crate::Error::Model(_))));
}

#[test]
fn beam_contracts() {
    let (model, ex) = toy();
    let hyps = model.beam_search(&ex, 5, 6);
    assert!(!hyps.is_empty() && hyps.len() <= 5);
    for w in hyps.windows(2) {
        assert!(w[0].score >= w[1].score);
    }
    for h in &hyps {
        assert!(h.finished || h.tokens.len() == 6);
        for t in &h.tokens {
            assert!(model.vocab.contains(t) || ex.source.contains(t) || t == "<eos>", "{t}");
        }
    }
    assert_eq!(model.beam_search(&ex, 5, 6), hyps);
}

#[test]
fn checkpoint_round_trip_and_scalar_guard() {
    let (model, _) = toy();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    model.save(&path).unwrap();
    assert_eq!(Seq2Seq::<f64>::load(&path).unwrap(), model);
    assert!(matches!(Seq2Seq::<f32>::load(&path), Err(crate::Error::Model(_))));
}
