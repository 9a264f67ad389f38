//! Encoder, decoder step and the hand-derived backward pass.

use ndarray::{concatenate, s, Array1, Array2, ArrayView1, Axis};
use rand_chacha::ChaCha8Rng;

use super::features::{Example, Target};
use super::params::Params;
use super::vocab::UNK;
use super::Seq2Seq;
use crate::nn::{dropout_mask, sigmoid, softmax, softmax_backward, GruCache, GruGrads};
use crate::scalar::Real;

pub(crate) type DropRng = ChaCha8Rng;

pub(crate) struct EncCache<T> {
    x: Array2<T>,
    mask: Array2<T>,
    fwd: GruCache<T>,
    bwd: GruCache<T>,
}

/// Encoder output for one sentence.
pub(crate) struct Encoded<T> {
    /// h_i = [h⃗_i; h⃖_i], one row per token
    pub h: Array2<T>,
    /// W_h h_i, reused by every attention step
    pub proj: Array2<T>,
    cache: Option<EncCache<T>>,
}

impl<T> Encoded<T> {
    pub fn new(h: Array2<T>, proj: Array2<T>) -> Self {
        Encoded { h, proj, cache: None }
    }
}

/// Everything one decoder step computes.
pub(crate) struct Step<T> {
    pub x: Array1<T>,
    pub s: Array1<T>,
    pub tau: Array2<T>,
    pub alpha: Array1<T>,
    pub c: Array1<T>,
    pub choice: Vec<usize>,
    pub m: Array1<T>,
    pub mask: Array1<T>,
    pub p_gen: Array1<T>,
    pub g: T,
}

/// Pairwise max over (r_{2j}, r_{2j+1}); returns values and winning indices.
pub fn maxout<T: Real>(r: ArrayView1<T>) -> (Array1<T>, Vec<usize>) {
    let d = r.len() / 2;
    let mut m = Array1::zeros(d);
    let mut choice = Vec::with_capacity(d);
    for j in 0..d {
        let (a, b) = (r[2 * j], r[2 * j + 1]);
        if b > a {
            m[j] = b;
            choice.push(2 * j + 1);
        } else {
            m[j] = a;
            choice.push(2 * j);
        }
    }
    (m, choice)
}

impl<T: Real> Seq2Seq<T> {
    fn embed_source(&self, ex: &Example) -> Array2<T> {
        let p = &self.params;
        let rows: Vec<Array1<T>> = (0..ex.len())
            .map(|i| {
                concatenate(
                    Axis(0),
                    &[
                        p.word_emb.row(ex.word[i]),
                        p.ner_emb.row(ex.ner[i]),
                        p.pos_emb.row(ex.pos[i]),
                        p.content_emb.row(ex.content[i]),
                        p.answer_emb.row(ex.answer[i]),
                        p.clue_emb.row(ex.clue[i]),
                    ],
                )
                .expect("embedding widths agree")
            })
            .collect();
        let views: Vec<_> = rows.iter().map(|r| r.view().insert_axis(Axis(0))).collect();
        concatenate(Axis(0), &views).expect("rows agree")
    }

    pub(crate) fn encode_example(&self, ex: &Example, mut rng: Option<&mut DropRng>, keep_cache: bool) -> Encoded<T> {
        let p = &self.params;
        let len = ex.len();
        let hd = self.config.enc_hidden;
        let mut x = self.embed_source(ex);
        let mut mask = Array2::from_elem(x.raw_dim(), T::one());
        if let Some(rng) = rng.as_deref_mut() {
            for mut row in mask.rows_mut() {
                row.assign(&dropout_mask::<T, _>(row.len(), self.config.dropout, rng));
            }
            x *= &mask;
        }
        let af = p.enc_fwd.project(x.view());
        let ab = p.enc_bwd.project(x.view());
        let mut fwd = GruCache::new(len, hd);
        let mut bwd = GruCache::new(len, hd);
        let mut h = Array2::zeros((len, 2 * hd));
        let mut state = Array1::zeros(hd);
        for t in 0..len {
            state = p.enc_fwd.step(af.row(t), state.view(), &mut fwd, t);
            h.slice_mut(s![t, ..hd]).assign(&state);
        }
        let mut state = Array1::zeros(hd);
        for k in 0..len {
            let i = len - 1 - k;
            state = p.enc_bwd.step(ab.row(i), state.view(), &mut bwd, k);
            h.slice_mut(s![i, hd..]).assign(&state);
        }
        let proj = h.dot(&p.att_wh.t());
        Encoded {
            h,
            proj,
            cache: keep_cache.then_some(EncCache { x, mask, fwd, bwd }),
        }
    }

    /// s_0 = [h_s; tanh(W_0 h⃖_1 + b_0)]
    pub(crate) fn initial_state(&self, style_index: usize, h: &Array2<T>) -> Array1<T> {
        let p = &self.params;
        let hd = self.config.enc_hidden;
        let first_bwd = h.slice(s![0, hd..]);
        let pre: Array1<T> = p.w0.dot(&first_bwd) + &p.b0;
        let s_l = pre.mapv(T::tanh);
        concatenate(Axis(0), &[p.style_emb.row(style_index), s_l.view()]).expect("widths agree")
    }

    pub(crate) fn step(
        &self,
        enc: &Encoded<T>,
        s_prev: ArrayView1<T>,
        c_prev: ArrayView1<T>,
        y_prev: usize,
        cache: &mut GruCache<T>,
        t: usize,
        rng: Option<&mut DropRng>,
    ) -> Step<T> {
        let p = &self.params;
        let y = if y_prev < p.word_emb.nrows() { y_prev } else { UNK };
        let x = concatenate(Axis(0), &[p.word_emb.row(y), c_prev.view()]).expect("widths agree");
        let a = p.dec.w.dot(&x) + &p.dec.b;
        let s = p.dec.step(a.view(), s_prev, cache, t);

        let q = p.att_ws.dot(&s);
        let mut tau = enc.proj.clone();
        tau += &q;
        tau.mapv_inplace(T::tanh);
        let e = tau.dot(&p.att_v);
        let alpha = softmax(e.view());
        let c = enc.h.t().dot(&alpha);

        let emb = x.slice(s![..self.config.word_dim]);
        let r = p.w_rw.dot(&emb) + p.w_rc.dot(&c) + p.w_rs.dot(&s);
        let (mut m, choice) = maxout(r.view());
        let mask = match rng {
            Some(rng) => dropout_mask(m.len(), self.config.dropout, rng),
            None => Array1::from_elem(m.len(), T::one()),
        };
        m *= &mask;
        let p_gen = softmax(p.w_o.dot(&m).view());
        let g = sigmoid(p.copy_ws.dot(&s) + p.copy_wc.dot(&c) + p.copy_b[0]);
        Step {
            x,
            s,
            tau,
            alpha,
            c,
            choice,
            m,
            mask,
            p_gen,
            g,
        }
    }

    /// Teacher-forced negative log-likelihood of the example's targets (summed
    /// over tokens). When `grads` is given, adds dLoss/dθ into it.
    pub(crate) fn loss_and_grad(&self, ex: &Example, grads: Option<&mut Params<T>>, mut rng: Option<&mut DropRng>) -> f64 {
        let cfg = &self.config;
        let want_grad = grads.is_some();
        let enc = self.encode_example(ex, rng.as_deref_mut(), want_grad);
        let steps = ex.targets.len();
        let dh = cfg.dec_hidden();
        let s0 = self.initial_state(ex.style.index(), &enc.h);

        let mut cache = GruCache::new(steps, dh);
        let mut s_prev = s0.clone();
        let mut c_prev = Array1::zeros(cfg.context_dim());
        let mut trace = Vec::with_capacity(steps);
        let mut loss = 0.0;
        let tiny = T::min_positive_value();
        for t in 0..steps {
            let st = self.step(&enc, s_prev.view(), c_prev.view(), ex.dec_input[t], &mut cache, t, rng.as_deref_mut());
            let q = match &ex.targets[t] {
                Target::Generate(y) => (T::one() - st.g) * st.p_gen[*y],
                Target::Copy(at) => st.g * at.iter().map(|&i| st.alpha[i]).sum::<T>(),
            };
            loss -= q.max(tiny).ln().as_f64();
            s_prev = st.s.clone();
            c_prev = st.c.clone();
            trace.push(st);
        }
        if let Some(grads) = grads {
            self.backward(ex, &enc, &s0, &cache, &trace, grads);
        }
        loss
    }

    fn backward(&self, ex: &Example, enc: &Encoded<T>, s0: &Array1<T>, cache: &GruCache<T>, trace: &[Step<T>], g: &mut Params<T>) {
        let cfg = &self.config;
        let p = &self.params;
        let steps = trace.len();
        let (e_dim, hd, ctx, dh) = (cfg.word_dim, cfg.enc_hidden, cfg.context_dim(), cfg.dec_hidden());
        let len = ex.len();
        let vocab = p.w_o.nrows();

        let stack = |f: &dyn Fn(&Step<T>) -> ArrayView1<T>| -> Array2<T> {
            let views: Vec<_> = trace.iter().map(|st| f(st).insert_axis(Axis(0))).collect();
            concatenate(Axis(0), &views).expect("rows agree")
        };
        let xs = stack(&|st| st.x.view());
        let ss = stack(&|st| st.s.view());
        let cs = stack(&|st| st.c.view());
        let ms = stack(&|st| st.m.view());

        let mut d_logits = Array2::zeros((steps, vocab));
        let mut d_r = Array2::zeros((steps, 2 * cfg.maxout_dim));
        let mut d_q = Array2::zeros((steps, cfg.attn_dim));
        let mut d_proj = Array2::<T>::zeros((len, cfg.attn_dim));
        let mut d_h = Array2::<T>::zeros((len, ctx));
        let mut dec_grads = GruGrads::new(steps, dh);

        let mut ds_next = Array1::<T>::zeros(dh);
        let mut dc_next = Array1::<T>::zeros(ctx);
        for t in (0..steps).rev() {
            let st = &trace[t];
            let mut d_alpha = Array1::<T>::zeros(len);
            let d_gate_pre;
            match &ex.targets[t] {
                Target::Generate(y) => {
                    let mut row = d_logits.row_mut(t);
                    row.assign(&st.p_gen);
                    row[*y] -= T::one();
                    d_gate_pre = st.g;
                }
                Target::Copy(at) => {
                    let beta: T = at.iter().map(|&i| st.alpha[i]).sum::<T>().max(T::min_positive_value());
                    for &i in at {
                        d_alpha[i] -= T::one() / beta;
                    }
                    d_gate_pre = st.g - T::one();
                }
            }

            // readout and maxout
            let d_m = p.w_o.t().dot(&d_logits.row(t)) * &st.mask;
            {
                let mut row = d_r.row_mut(t);
                for (j, &k) in st.choice.iter().enumerate() {
                    row[k] = d_m[j];
                }
            }
            let d_rt = d_r.row(t);
            let mut d_s = p.w_rs.t().dot(&d_rt) + &ds_next;
            d_s.scaled_add(d_gate_pre, &p.copy_ws);
            let mut d_c = p.w_rc.t().dot(&d_rt) + &dc_next;
            d_c.scaled_add(d_gate_pre, &p.copy_wc);
            let d_emb_readout = p.w_rw.t().dot(&d_rt);
            g.copy_ws.scaled_add(d_gate_pre, &st.s);
            g.copy_wc.scaled_add(d_gate_pre, &st.c);
            g.copy_b[0] += d_gate_pre;

            // context and attention
            d_alpha += &enc.h.dot(&d_c);
            for i in 0..len {
                let a = st.alpha[i];
                d_h.row_mut(i).scaled_add(a, &d_c);
            }
            let d_e = softmax_backward(st.alpha.view(), d_alpha.view());
            g.att_v += &st.tau.t().dot(&d_e);
            let mut d_pre = st.tau.mapv(|v| T::one() - v * v);
            for (i, mut row) in d_pre.rows_mut().into_iter().enumerate() {
                let de = d_e[i];
                ndarray::Zip::from(&mut row).and(&p.att_v).for_each(|x, &v| *x *= de * v);
            }
            d_proj += &d_pre;
            let dq = d_pre.sum_axis(Axis(0));
            d_s += &p.att_ws.t().dot(&dq);
            d_q.row_mut(t).assign(&dq);

            // decoder recurrence
            ds_next = p.dec.step_backward(d_s.view(), cache, t, &mut dec_grads);
            let dx = p.dec.input_grad(&dec_grads, t);
            dc_next = dx.slice(s![e_dim..]).to_owned();
            let y_prev = ex.dec_input[t];
            let y = if y_prev < vocab { y_prev } else { UNK };
            let mut wrow = g.word_emb.row_mut(y);
            wrow += &dx.slice(s![..e_dim]);
            wrow += &d_emb_readout;
        }

        // batched weight gradients of the decoder side
        let embs = xs.slice(s![.., ..e_dim]);
        let gm = |acc: &mut Array2<T>, a: &Array2<T>, b: ndarray::ArrayView2<T>| {
            ndarray::linalg::general_mat_mul(T::one(), &a.t(), &b, T::one(), acc);
        };
        gm(&mut g.w_o, &d_logits, ms.view());
        gm(&mut g.w_rw, &d_r, embs);
        gm(&mut g.w_rc, &d_r, cs.view());
        gm(&mut g.w_rs, &d_r, ss.view());
        gm(&mut g.att_ws, &d_q, ss.view());
        p.dec.accumulate_weights(&dec_grads, xs.view(), cache, &mut g.dec);
        gm(&mut g.att_wh, &d_proj, enc.h.view());
        d_h += &d_proj.dot(&p.att_wh);

        // decoder initialisation
        let sd = cfg.style_dim;
        {
            let mut row = g.style_emb.row_mut(ex.style.index());
            row += &ds_next.slice(s![..sd]);
        }
        let s_l = s0.slice(s![sd..]);
        let d_pre = &ds_next.slice(s![sd..]) * &s_l.mapv(|v| T::one() - v * v);
        let first_bwd = enc.h.slice(s![0, hd..]);
        crate::nn::add_outer(&mut g.w0, d_pre.view(), first_bwd);
        g.b0 += &d_pre;
        {
            let mut row = d_h.slice_mut(s![0, hd..]);
            row += &p.w0.t().dot(&d_pre);
        }

        // encoder
        let cache = enc.cache.as_ref().expect("encoder cache kept for backward");
        let mut fg = GruGrads::new(len, hd);
        let mut carry = Array1::<T>::zeros(hd);
        for t in (0..len).rev() {
            let dht = &d_h.slice(s![t, ..hd]) + &carry;
            carry = p.enc_fwd.step_backward(dht.view(), &cache.fwd, t, &mut fg);
        }
        let mut bg = GruGrads::new(len, hd);
        let mut carry = Array1::<T>::zeros(hd);
        for k in (0..len).rev() {
            let i = len - 1 - k;
            let dht = &d_h.slice(s![i, hd..]) + &carry;
            carry = p.enc_bwd.step_backward(dht.view(), &cache.bwd, k, &mut bg);
        }
        let mut dx = p.enc_fwd.accumulate(&fg, cache.x.view(), &cache.fwd, &mut g.enc_fwd);
        let dxb = p.enc_bwd.accumulate(&bg, cache.x.slice(s![..;-1, ..]), &cache.bwd, &mut g.enc_bwd);
        dx += &dxb.slice(s![..;-1, ..]);
        dx *= &cache.mask;

        let f = cfg.feature_dim;
        for i in 0..len {
            let row = dx.row(i);
            let add = |table: &mut Array2<T>, idx: usize, lo: usize, hi: usize| {
                let mut r = table.row_mut(idx);
                r += &row.slice(s![lo..hi]);
            };
            add(&mut g.word_emb, ex.word[i], 0, e_dim);
            let mut off = e_dim;
            for (table, idx) in [
                (&mut g.ner_emb, ex.ner[i]),
                (&mut g.pos_emb, ex.pos[i]),
                (&mut g.content_emb, ex.content[i]),
                (&mut g.answer_emb, ex.answer[i]),
                (&mut g.clue_emb, ex.clue[i]),
            ] {
                add(table, idx, off, off + f);
                off += f;
            }
        }
    }
}
