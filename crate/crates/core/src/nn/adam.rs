use serde::{Deserialize, Serialize};

use super::Tensors;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClipMode {
    /// Clamp every gradient entry into [-clip, clip].
    Value,
    /// Rescale each parameter tensor whose L2 norm exceeds `clip`.
    GroupNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub clip: f64,
    pub clip_mode: ClipMode,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.8,
            beta2: 0.999,
            eps: 1e-8,
            clip: 5.0,
            clip_mode: ClipMode::Value,
        }
    }
}

/// Adam with bias correction. `P` is a parameter container whose moment
/// buffers have the same layout.
#[derive(Debug, Clone)]
pub struct Adam<P> {
    pub config: AdamConfig,
    m: P,
    v: P,
    step: i32,
}

pub fn clip_gradients<T: Real, P: Tensors<T>>(grads: &mut P, clip: f64, mode: ClipMode) {
    let c = T::lit(clip);
    for (_, mut g) in grads.tensors_mut() {
        match mode {
            ClipMode::Value => g.mapv_inplace(|x| x.max(-c).min(c)),
            ClipMode::GroupNorm => {
                let norm = g.iter().map(|x| *x * *x).sum::<T>().sqrt();
                if norm > c {
                    let s = c / norm;
                    g.mapv_inplace(|x| x * s);
                }
            }
        }
    }
}

impl<P> Adam<P> {
    pub fn new<T: Real>(config: AdamConfig, zeros: P) -> Self
    where
        P: Tensors<T> + Clone,
    {
        Adam {
            config,
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }

    /// Clip `grads` in place, then update `params`.
    pub fn update<T: Real>(&mut self, params: &mut P, grads: &mut P)
    where
        P: Tensors<T>,
    {
        clip_gradients(grads, self.config.clip, self.config.clip_mode);
        self.step += 1;
        let c = &self.config;
        let (b1, b2) = (T::lit(c.beta1), T::lit(c.beta2));
        let bc1 = T::lit(1.0 - c.beta1.powi(self.step));
        let bc2 = T::lit(1.0 - c.beta2.powi(self.step));
        let lr = T::lit(c.lr);
        let eps = T::lit(c.eps);
        let gs = grads.tensors();
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        for ((((_, mut p), (_, g)), (_, mut m)), (_, mut v)) in params.tensors_mut().into_iter().zip(gs).zip(ms).zip(vs) {
            ndarray::Zip::from(&mut p)
                .and(&g)
                .and(&mut m)
                .and(&mut v)
                .for_each(|p, &g, m, v| {
                    *m = b1 * *m + (T::one() - b1) * g;
                    *v = b2 * *v + (T::one() - b2) * g * g;
                    let mh = *m / bc1;
                    let vh = *v / bc2;
                    *p -= lr * mh / (vh.sqrt() + eps);
                });
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1, ArrayViewD, ArrayViewMutD};

    #[derive(Clone)]
    struct Two {
        a: Array1<f64>,
        b: Array1<f64>,
    }

    impl Tensors<f64> for Two {
        fn tensors(&self) -> Vec<(&'static str, ArrayViewD<'_, f64>)> {
            vec![("a", self.a.view().into_dyn()), ("b", self.b.view().into_dyn())]
        }
        fn tensors_mut(&mut self) -> Vec<(&'static str, ArrayViewMutD<'_, f64>)> {
            vec![("a", self.a.view_mut().into_dyn()), ("b", self.b.view_mut().into_dyn())]
        }
    }

    #[test]
    fn value_clip_bounds_entries() {
        let mut g = Two { a: array![10.0, -7.0, 1.0], b: array![0.5] };
        clip_gradients(&mut g, 5.0, ClipMode::Value);
        assert_eq!(g.a, array![5.0, -5.0, 1.0]);
        assert_eq!(g.b, array![0.5]);
    }

    #[test]
    fn group_norm_clip_bounds_total_norm() {
        let mut g = Two { a: array![30.0, 40.0], b: array![100.0] };
        clip_gradients(&mut g, 5.0, ClipMode::GroupNorm);
        let total: f64 = g.tensors().iter().flat_map(|(_, t)| t.iter().map(|x| x * x).collect::<Vec<_>>()).sum::<f64>().sqrt();
        assert!(total <= 5.0 * 2.0 + 1e-12);
        assert!((g.a[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn minimises_a_quadratic() {
        let mut p = Two { a: array![3.0, -2.0], b: array![1.0] };
        let zeros = Two { a: Array1::zeros(2), b: Array1::zeros(1) };
        let mut opt = Adam::new(AdamConfig { lr: 0.05, ..Default::default() }, zeros.clone());
        for _ in 0..2000 {
            let mut g = Two { a: &p.a * 2.0, b: &p.b * 2.0 };
            opt.update(&mut p, &mut g);
        }
        assert!(p.a.iter().chain(p.b.iter()).all(|x| x.abs() < 1e-2));
    }
}
