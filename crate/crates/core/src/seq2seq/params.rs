use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::features::{NER_TAGS, POS_COUNT};
use crate::dataset::Style;
use crate::error::{Error, Result};
use crate::nn::{uniform, xavier, Gru, Tensors};
use crate::scalar::Real;

/// Layer widths and regularisation of the encoder–decoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seq2SeqConfig {
    /// N_V: generation vocabulary size, reserved ids excluded.
    pub vocab_size: usize,
    pub word_dim: usize,
    pub feature_dim: usize,
    /// Per direction.
    pub enc_hidden: usize,
    pub style_dim: usize,
    pub attn_dim: usize,
    /// Readout width after maxout (the readout itself is twice this).
    pub maxout_dim: usize,
    pub dropout: f64,
    pub max_question_len: usize,
}

impl Default for Seq2SeqConfig {
    fn default() -> Self {
        Seq2SeqConfig {
            vocab_size: 2000,
            word_dim: 300,
            feature_dim: 16,
            enc_hidden: 512,
            style_dim: 16,
            attn_dim: 512,
            maxout_dim: 256,
            dropout: 0.1,
            max_question_len: 30,
        }
    }
}

impl Seq2SeqConfig {
    /// Word vector plus five feature embeddings.
    pub fn input_dim(&self) -> usize {
        self.word_dim + 5 * self.feature_dim
    }

    pub fn context_dim(&self) -> usize {
        2 * self.enc_hidden
    }

    /// Style embedding concatenated with the projected encoder state.
    pub fn dec_hidden(&self) -> usize {
        self.style_dim + self.enc_hidden
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            self.vocab_size,
            self.word_dim,
            self.feature_dim,
            self.enc_hidden,
            self.style_dim,
            self.attn_dim,
            self.maxout_dim,
            self.max_question_len,
        ];
        if dims.contains(&0) {
            return Err(Error::invalid("all seq2seq dimensions must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid("dropout must lie in [0, 1)"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Every trainable tensor of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Params<T> {
    pub word_emb: Array2<T>,
    pub ner_emb: Array2<T>,
    pub pos_emb: Array2<T>,
    pub content_emb: Array2<T>,
    pub answer_emb: Array2<T>,
    pub clue_emb: Array2<T>,
    pub enc_fwd: Gru<T>,
    pub enc_bwd: Gru<T>,
    /// s_l = tanh(W_0 h⃖_1 + b_0)
    pub w0: Array2<T>,
    pub b0: Array1<T>,
    /// h_s, one row per style
    pub style_emb: Array2<T>,
    pub dec: Gru<T>,
    pub att_ws: Array2<T>,
    pub att_wh: Array2<T>,
    pub att_v: Array1<T>,
    pub w_rw: Array2<T>,
    pub w_rc: Array2<T>,
    pub w_rs: Array2<T>,
    pub w_o: Array2<T>,
    pub copy_ws: Array1<T>,
    pub copy_wc: Array1<T>,
    pub copy_b: Array1<T>,
}

const EMB_SCALE: f64 = 0.1;

impl<T: Real> Params<T> {
    pub fn new<R: Rng + ?Sized>(cfg: &Seq2SeqConfig, vocab_len: usize, rng: &mut R) -> Self {
        let (e, f, h, a, d) = (cfg.word_dim, cfg.feature_dim, cfg.enc_hidden, cfg.attn_dim, cfg.maxout_dim);
        let dh = cfg.dec_hidden();
        let ctx = cfg.context_dim();
        let vec = |n: usize, rng: &mut R| uniform::<T, R>(1, n, EMB_SCALE, rng).row(0).to_owned();
        Params {
            word_emb: uniform(vocab_len, e, EMB_SCALE, rng),
            ner_emb: uniform(NER_TAGS.len(), f, EMB_SCALE, rng),
            pos_emb: uniform(POS_COUNT, f, EMB_SCALE, rng),
            content_emb: uniform(2, f, EMB_SCALE, rng),
            answer_emb: uniform(2, f, EMB_SCALE, rng),
            clue_emb: uniform(2, f, EMB_SCALE, rng),
            enc_fwd: Gru::new(cfg.input_dim(), h, rng),
            enc_bwd: Gru::new(cfg.input_dim(), h, rng),
            w0: xavier(h, h, rng),
            b0: Array1::zeros(h),
            style_emb: uniform(Style::ALL.len(), cfg.style_dim, EMB_SCALE, rng),
            dec: Gru::new(e + ctx, dh, rng),
            att_ws: xavier(a, dh, rng),
            att_wh: xavier(a, ctx, rng),
            att_v: vec(a, rng),
            w_rw: xavier(2 * d, e, rng),
            w_rc: xavier(2 * d, ctx, rng),
            w_rs: xavier(2 * d, dh, rng),
            w_o: xavier(vocab_len, d, rng),
            copy_ws: vec(dh, rng),
            copy_wc: vec(ctx, rng),
            copy_b: Array1::zeros(1),
        }
    }

    pub fn zeros(cfg: &Seq2SeqConfig, vocab_len: usize) -> Self {
        let mut p = Self::zeros_shaped(cfg, vocab_len);
        p.zero();
        p
    }

    fn zeros_shaped(cfg: &Seq2SeqConfig, vocab_len: usize) -> Self {
        let (e, f, h, a, d) = (cfg.word_dim, cfg.feature_dim, cfg.enc_hidden, cfg.attn_dim, cfg.maxout_dim);
        let dh = cfg.dec_hidden();
        let ctx = cfg.context_dim();
        let z2 = |r, c| Array2::zeros((r, c));
        Params {
            word_emb: z2(vocab_len, e),
            ner_emb: z2(NER_TAGS.len(), f),
            pos_emb: z2(POS_COUNT, f),
            content_emb: z2(2, f),
            answer_emb: z2(2, f),
            clue_emb: z2(2, f),
            enc_fwd: Gru::zeros(cfg.input_dim(), h),
            enc_bwd: Gru::zeros(cfg.input_dim(), h),
            w0: z2(h, h),
            b0: Array1::zeros(h),
            style_emb: z2(Style::ALL.len(), cfg.style_dim),
            dec: Gru::zeros(e + ctx, dh),
            att_ws: z2(a, dh),
            att_wh: z2(a, ctx),
            att_v: Array1::zeros(a),
            w_rw: z2(2 * d, e),
            w_rc: z2(2 * d, ctx),
            w_rs: z2(2 * d, dh),
            w_o: z2(vocab_len, d),
            copy_ws: Array1::zeros(dh),
            copy_wc: Array1::zeros(ctx),
            copy_b: Array1::zeros(1),
        }
    }

    /// Every tensor has the shape implied by `cfg` and the vocabulary size.
    pub fn check_shapes(&self, cfg: &Seq2SeqConfig, vocab_len: usize) -> Result<()> {
        let expect = Self::zeros_shaped(cfg, vocab_len);
        for ((name, got), (_, want)) in self.tensors().into_iter().zip(expect.tensors()) {
            if got.shape() != want.shape() {
                return Err(Error::Model(format!(
                    "parameter {name} has shape {:?}, expected {:?}",
                    got.shape(),
                    want.shape()
                )));
            }
        }
        Ok(())
    }
}

impl<T: Real> Tensors<T> for Params<T> {
    fn tensors(&self) -> Vec<(&'static str, ArrayViewD<'_, T>)> {
        vec![
            ("word_emb", self.word_emb.view().into_dyn()),
            ("ner_emb", self.ner_emb.view().into_dyn()),
            ("pos_emb", self.pos_emb.view().into_dyn()),
            ("content_emb", self.content_emb.view().into_dyn()),
            ("answer_emb", self.answer_emb.view().into_dyn()),
            ("clue_emb", self.clue_emb.view().into_dyn()),
            ("enc_fwd.w", self.enc_fwd.w.view().into_dyn()),
            ("enc_fwd.u", self.enc_fwd.u.view().into_dyn()),
            ("enc_fwd.b", self.enc_fwd.b.view().into_dyn()),
            ("enc_bwd.w", self.enc_bwd.w.view().into_dyn()),
            ("enc_bwd.u", self.enc_bwd.u.view().into_dyn()),
            ("enc_bwd.b", self.enc_bwd.b.view().into_dyn()),
            ("w0", self.w0.view().into_dyn()),
            ("b0", self.b0.view().into_dyn()),
            ("style_emb", self.style_emb.view().into_dyn()),
            ("dec.w", self.dec.w.view().into_dyn()),
            ("dec.u", self.dec.u.view().into_dyn()),
            ("dec.b", self.dec.b.view().into_dyn()),
            ("att_ws", self.att_ws.view().into_dyn()),
            ("att_wh", self.att_wh.view().into_dyn()),
            ("att_v", self.att_v.view().into_dyn()),
            ("w_rw", self.w_rw.view().into_dyn()),
            ("w_rc", self.w_rc.view().into_dyn()),
            ("w_rs", self.w_rs.view().into_dyn()),
            ("w_o", self.w_o.view().into_dyn()),
            ("copy_ws", self.copy_ws.view().into_dyn()),
            ("copy_wc", self.copy_wc.view().into_dyn()),
            ("copy_b", self.copy_b.view().into_dyn()),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, ArrayViewMutD<'_, T>)> {
        vec![
            ("word_emb", self.word_emb.view_mut().into_dyn()),
            ("ner_emb", self.ner_emb.view_mut().into_dyn()),
            ("pos_emb", self.pos_emb.view_mut().into_dyn()),
            ("content_emb", self.content_emb.view_mut().into_dyn()),
            ("answer_emb", self.answer_emb.view_mut().into_dyn()),
            ("clue_emb", self.clue_emb.view_mut().into_dyn()),
            ("enc_fwd.w", self.enc_fwd.w.view_mut().into_dyn()),
            ("enc_fwd.u", self.enc_fwd.u.view_mut().into_dyn()),
            ("enc_fwd.b", self.enc_fwd.b.view_mut().into_dyn()),
            ("enc_bwd.w", self.enc_bwd.w.view_mut().into_dyn()),
            ("enc_bwd.u", self.enc_bwd.u.view_mut().into_dyn()),
            ("enc_bwd.b", self.enc_bwd.b.view_mut().into_dyn()),
            ("w0", self.w0.view_mut().into_dyn()),
            ("b0", self.b0.view_mut().into_dyn()),
            ("style_emb", self.style_emb.view_mut().into_dyn()),
            ("dec.w", self.dec.w.view_mut().into_dyn()),
            ("dec.u", self.dec.u.view_mut().into_dyn()),
            ("dec.b", self.dec.b.view_mut().into_dyn()),
            ("att_ws", self.att_ws.view_mut().into_dyn()),
            ("att_wh", self.att_wh.view_mut().into_dyn()),
            ("att_v", self.att_v.view_mut().into_dyn()),
            ("w_rw", self.w_rw.view_mut().into_dyn()),
            ("w_rc", self.w_rc.view_mut().into_dyn()),
            ("w_rs", self.w_rs.view_mut().into_dyn()),
            ("w_o", self.w_o.view_mut().into_dyn()),
            ("copy_ws", self.copy_ws.view_mut().into_dyn()),
            ("copy_wc", self.copy_wc.view_mut().into_dyn()),
            ("copy_b", self.copy_b.view_mut().into_dyn()),
        ]
    }
}
