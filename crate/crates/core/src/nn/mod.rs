//! Small dense building blocks with explicit backward passes.

mod adam;
mod gru;

pub use adam::{clip_gradients, Adam, AdamConfig, ClipMode};
pub use gru::{Gru, GruCache, GruGrads};

use ndarray::{Array1, Array2, ArrayView1, ArrayViewD, ArrayViewMutD, Zip};
use rand::Rng;

use crate::scalar::Real;

pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Numerically stable softmax.
pub fn softmax<T: Real>(x: ArrayView1<T>) -> Array1<T> {
    let max = x.iter().copied().fold(T::neg_infinity(), T::max);
    let mut out = x.mapv(|v| (v - max).exp());
    let sum = out.sum();
    out.mapv_inplace(|v| v / sum);
    out
}

/// Backward of softmax: given y = softmax(x) and dL/dy, return dL/dx.
pub fn softmax_backward<T: Real>(y: ArrayView1<T>, dy: ArrayView1<T>) -> Array1<T> {
    let dot = y.dot(&dy);
    Zip::from(&y).and(&dy).map_collect(|&yi, &di| yi * (di - dot))
}

/// Uniform(-a, a) initialised matrix with a = sqrt(6 / (rows + cols)).
pub fn xavier<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<T> {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || T::lit(rng.gen_range(-a..a)))
}

pub fn uniform<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, a: f64, rng: &mut R) -> Array2<T> {
    Array2::from_shape_simple_fn((rows, cols), || T::lit(rng.gen_range(-a..a)))
}

/// Inverted-dropout mask: entries are 0 or 1/(1-p).
pub fn dropout_mask<T: Real, R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Array1<T> {
    if p <= 0.0 {
        return Array1::from_elem(len, T::one());
    }
    let keep = T::lit(1.0 / (1.0 - p));
    Array1::from_shape_simple_fn(len, || if rng.gen::<f64>() < p { T::zero() } else { keep })
}

/// Outer-product accumulate: `acc += a ⊗ b`.
pub fn add_outer<T: Real>(acc: &mut Array2<T>, a: ArrayView1<T>, b: ArrayView1<T>) {
    let a2 = a.insert_axis(ndarray::Axis(1));
    let b2 = b.insert_axis(ndarray::Axis(0));
    ndarray::linalg::general_mat_mul(T::one(), &a2, &b2, T::one(), acc);
}

/// Named parameter tensors, visited in a fixed order.
pub trait Tensors<T: Real> {
    fn tensors(&self) -> Vec<(&'static str, ArrayViewD<'_, T>)>;
    fn tensors_mut(&mut self) -> Vec<(&'static str, ArrayViewMutD<'_, T>)>;

    fn zero(&mut self) {
        for (_, mut t) in self.tensors_mut() {
            t.fill(T::zero());
        }
    }

    fn param_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    fn all_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }

    /// `self += other * scale`
    fn axpy(&mut self, other: &Self, scale: T) {
        let src = other.tensors();
        for ((_, mut dst), (_, s)) in self.tensors_mut().into_iter().zip(src) {
            dst.scaled_add(scale, &s);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn softmax_sums_to_one_and_is_stable() {
        let y = softmax(array![1000.0f64, 1001.0, 999.0].view());
        assert!((y.sum() - 1.0).abs() < 1e-12);
        assert!(y.iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn softmax_backward_matches_finite_difference() {
        let x = array![0.3f64, -1.2, 0.7];
        let w = array![1.0f64, 2.0, -0.5];
        let f = |x: &Array1<f64>| softmax(x.view()).dot(&w);
        let g = softmax_backward(softmax(x.view()).view(), w.view());
        for i in 0..3 {
            let mut p = x.clone();
            let mut m = x.clone();
            p[i] += 1e-6;
            m[i] -= 1e-6;
            let num = (f(&p) - f(&m)) / 2e-6;
            assert!((num - g[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn sigmoid_extremes() {
        assert!(sigmoid(-800.0f64) >= 0.0);
        assert!(sigmoid(800.0f64) <= 1.0);
        assert!((sigmoid(0.0f32) - 0.5).abs() < 1e-7);
    }

    #[test]
    fn outer_product() {
        let mut m = Array2::<f64>::zeros((2, 3));
        add_outer(&mut m, array![1.0, 2.0].view(), array![1.0, 0.0, -1.0].view());
        assert_eq!(m, array![[1.0, 0.0, -1.0], [2.0, 0.0, -2.0]]);
    }
}
