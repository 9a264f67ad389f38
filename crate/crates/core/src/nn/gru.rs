use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, xavier};
use crate::scalar::Real;

/// GRU cell with gates stacked as [update z; reset r; candidate n]:
/// z = σ(W_z x + U_z h + b_z), r = σ(W_r x + U_r h + b_r),
/// n = tanh(W_n x + b_n + r ⊙ U_n h), h' = (1 − z) ⊙ n + z ⊙ h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Gru<T> {
    pub w: Array2<T>,
    pub u: Array2<T>,
    pub b: Array1<T>,
}

/// Activations of one sequence, one row per step.
#[derive(Debug, Clone)]
pub struct GruCache<T> {
    pub h_prev: Array2<T>,
    pub z: Array2<T>,
    pub r: Array2<T>,
    pub n: Array2<T>,
    pub uh_n: Array2<T>,
}

impl<T: Real> GruCache<T> {
    pub fn new(steps: usize, hidden: usize) -> Self {
        let z = || Array2::zeros((steps, hidden));
        GruCache {
            h_prev: z(),
            z: z(),
            r: z(),
            n: z(),
            uh_n: z(),
        }
    }
}

/// Stacked pre-activation gradients, one row per step, ready for batched
/// weight-gradient products.
#[derive(Debug, Clone)]
pub struct GruGrads<T> {
    /// dL/d(W x + b)
    pub d_a: Array2<T>,
    /// dL/d(U h)
    pub d_uh: Array2<T>,
}

impl<T: Real> Gru<T> {
    pub fn new<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let mut u = Array2::zeros((3 * hidden, hidden));
        for g in 0..3 {
            u.slice_mut(s![g * hidden..(g + 1) * hidden, ..])
                .assign(&xavier::<T, R>(hidden, hidden, rng));
        }
        Gru {
            w: xavier(3 * hidden, input, rng),
            u,
            b: Array1::zeros(3 * hidden),
        }
    }

    pub fn zeros(input: usize, hidden: usize) -> Self {
        Gru {
            w: Array2::zeros((3 * hidden, input)),
            u: Array2::zeros((3 * hidden, hidden)),
            b: Array1::zeros(3 * hidden),
        }
    }

    pub fn hidden(&self) -> usize {
        self.u.ncols()
    }

    pub fn input(&self) -> usize {
        self.w.ncols()
    }

    /// Input projections W x + b for every row of `xs`.
    pub fn project(&self, xs: ArrayView2<T>) -> Array2<T> {
        let mut a = xs.dot(&self.w.t());
        a += &self.b;
        a
    }

    /// One step from a precomputed input projection; records activations in row `t` of `cache`.
    pub fn step(&self, a: ArrayView1<T>, h: ArrayView1<T>, cache: &mut GruCache<T>, t: usize) -> Array1<T> {
        let hd = self.hidden();
        let uh = self.u.dot(&h);
        let mut out = Array1::zeros(hd);
        for k in 0..hd {
            let z = sigmoid(a[k] + uh[k]);
            let r = sigmoid(a[hd + k] + uh[hd + k]);
            let n = (a[2 * hd + k] + r * uh[2 * hd + k]).tanh();
            out[k] = (T::one() - z) * n + z * h[k];
            cache.z[[t, k]] = z;
            cache.r[[t, k]] = r;
            cache.n[[t, k]] = n;
            cache.uh_n[[t, k]] = uh[2 * hd + k];
        }
        cache.h_prev.row_mut(t).assign(&h);
        out
    }

    /// Backward through step `t` given dL/dh'. Writes the step's rows of
    /// `grads` and returns dL/dh (recurrent part only).
    pub fn step_backward(&self, dh_out: ArrayView1<T>, cache: &GruCache<T>, t: usize, grads: &mut GruGrads<T>) -> Array1<T> {
        let hd = self.hidden();
        let mut dh = Array1::zeros(hd);
        for k in 0..hd {
            let (z, r, n) = (cache.z[[t, k]], cache.r[[t, k]], cache.n[[t, k]]);
            let hp = cache.h_prev[[t, k]];
            let g = dh_out[k];
            let dn_pre = g * (T::one() - z) * (T::one() - n * n);
            let dz_pre = g * (hp - n) * z * (T::one() - z);
            let dr_pre = dn_pre * cache.uh_n[[t, k]] * r * (T::one() - r);
            grads.d_a[[t, k]] = dz_pre;
            grads.d_a[[t, hd + k]] = dr_pre;
            grads.d_a[[t, 2 * hd + k]] = dn_pre;
            grads.d_uh[[t, k]] = dz_pre;
            grads.d_uh[[t, hd + k]] = dr_pre;
            grads.d_uh[[t, 2 * hd + k]] = dn_pre * r;
            dh[k] = g * z;
        }
        dh += &self.u.t().dot(&grads.d_uh.row(t));
        dh
    }

    /// Accumulate weight gradients into `into` from stacked rows.
    pub fn accumulate_weights(&self, grads: &GruGrads<T>, xs: ArrayView2<T>, cache: &GruCache<T>, into: &mut Gru<T>) {
        ndarray::linalg::general_mat_mul(T::one(), &grads.d_a.t(), &xs, T::one(), &mut into.w);
        ndarray::linalg::general_mat_mul(T::one(), &grads.d_uh.t(), &cache.h_prev, T::one(), &mut into.u);
        into.b += &grads.d_a.sum_axis(Axis(0));
    }

    /// As [`Gru::accumulate_weights`], also returning dL/dx rows.
    pub fn accumulate(&self, grads: &GruGrads<T>, xs: ArrayView2<T>, cache: &GruCache<T>, into: &mut Gru<T>) -> Array2<T> {
        self.accumulate_weights(grads, xs, cache, into);
        grads.d_a.dot(&self.w)
    }

    /// dL/dx for step `t` alone.
    pub fn input_grad(&self, grads: &GruGrads<T>, t: usize) -> Array1<T> {
        self.w.t().dot(&grads.d_a.row(t))
    }
}

impl<T: Real> GruGrads<T> {
    pub fn new(steps: usize, hidden: usize) -> Self {
        GruGrads {
            d_a: Array2::zeros((steps, 3 * hidden)),
            d_uh: Array2::zeros((steps, 3 * hidden)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// L = Σ_t c · h_t over a short sequence.
    fn run(gru: &Gru<f64>, xs: &Array2<f64>, h0: &Array1<f64>, c: &Array1<f64>) -> (f64, GruCache<f64>, Vec<Array1<f64>>) {
        let a = gru.project(xs.view());
        let mut cache = GruCache::new(xs.nrows(), gru.hidden());
        let mut h = h0.clone();
        let mut loss = 0.0;
        let mut hs = Vec::new();
        for t in 0..xs.nrows() {
            h = gru.step(a.row(t), h.view(), &mut cache, t);
            loss += c.dot(&h);
            hs.push(h.clone());
        }
        (loss, cache, hs)
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gru: Gru<f64> = Gru::new(4, 3, &mut rng);
        let xs = super::super::uniform::<f64, _>(5, 4, 1.0, &mut rng);
        let h0 = Array1::from_vec(vec![0.1, -0.2, 0.3]);
        let c = Array1::from_vec(vec![1.0, -0.5, 0.25]);
        let (_, cache, _) = run(&gru, &xs, &h0, &c);
        let mut grads = GruGrads::new(5, 3);
        let mut dh = Array1::zeros(3);
        for t in (0..5).rev() {
            let g = &dh + &c;
            dh = gru.step_backward(g.view(), &cache, t, &mut grads);
        }
        let mut dp = Gru::zeros(4, 3);
        let dx = gru.accumulate(&grads, xs.view(), &cache, &mut dp);

        let eps = 1e-6;
        let check = |analytic: f64, f: &dyn Fn(f64) -> f64| {
            let num = (f(eps) - f(-eps)) / (2.0 * eps);
            assert!((num - analytic).abs() <= 1e-7 * (1.0 + num.abs()), "{num} vs {analytic}");
        };
        for (i, j) in [(0, 0), (4, 2), (8, 3)] {
            check(dp.w[[i, j]], &|d| {
                let mut g = gru.clone();
                g.w[[i, j]] += d;
                run(&g, &xs, &h0, &c).0
            });
        }
        for (i, j) in [(1, 1), (7, 2)] {
            check(dp.u[[i, j]], &|d| {
                let mut g = gru.clone();
                g.u[[i, j]] += d;
                run(&g, &xs, &h0, &c).0
            });
        }
        check(dp.b[6], &|d| {
            let mut g = gru.clone();
            g.b[6] += d;
            run(&g, &xs, &h0, &c).0
        });
        check(dx[[2, 1]], &|d| {
            let mut x = xs.clone();
            x[[2, 1]] += d;
            run(&gru, &x, &h0, &c).0
        });
        check(dh[0], &|d| {
            let mut h = h0.clone();
            h[0] += d;
            run(&gru, &xs, &h, &c).0
        });
    }
}
