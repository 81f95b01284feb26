use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// One-vs-rest linear SVM trained with Pegasos stochastic subgradient steps.
///
/// The bias is learned as the weight of an implicit constant feature, so it
/// is regularized together with the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm<T> {
    pub dim: usize,
    /// Flat `n_classes x dim`.
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> LinearSvm<T> {
    pub fn fit(
        rows: &[Vec<T>],
        labels: &[usize],
        n_classes: usize,
        lambda: f64,
        epochs: usize,
        seed: u64,
    ) -> Self {
        let dim = rows[0].len();
        let lam = T::lit(lambda);
        let radius = T::lit(1.0 / lambda.sqrt());
        let mut weights = vec![T::zero(); n_classes * dim];
        let mut bias = vec![T::zero(); n_classes];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..rows.len()).collect();
        let mut t = 0usize;

        for _ in 0..epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = T::one() / (lam * T::from_count(t));
                let shrink = T::one() - eta * lam;
                let x = &rows[i];
                for c in 0..n_classes {
                    let w = &mut weights[c * dim..(c + 1) * dim];
                    let b = &mut bias[c];
                    let y = if labels[i] == c { T::one() } else { -T::one() };
                    let margin = y * (w.iter().zip(x).map(|(&wi, &xi)| wi * xi).sum::<T>() + *b);
                    for wi in w.iter_mut() {
                        *wi *= shrink;
                    }
                    *b *= shrink;
                    if margin < T::one() {
                        for (wi, &xi) in w.iter_mut().zip(x) {
                            *wi += eta * y * xi;
                        }
                        *b += eta * y;
                    }
                    let norm = (w.iter().map(|&v| v * v).sum::<T>() + *b * *b).sqrt();
                    if norm > radius {
                        let s = radius / norm;
                        w.iter_mut().for_each(|v| *v *= s);
                        *b *= s;
                    }
                }
            }
        }
        Self { dim, weights, bias }
    }

    pub fn margins(&self, x: &[T]) -> Vec<T> {
        self.bias
            .iter()
            .enumerate()
            .map(|(c, &b)| {
                let w = &self.weights[c * self.dim..(c + 1) * self.dim];
                w.iter().zip(x).map(|(&wi, &xi)| wi * xi).sum::<T>() + b
            })
            .collect()
    }

    /// Softmax over the per-class margins.
    pub fn predict_proba(&self, x: &[T]) -> Vec<T> {
        let m = self.margins(x);
        let max = m.iter().copied().fold(T::neg_infinity(), T::max);
        let exps: Vec<T> = m.iter().map(|&v| (v - max).exp()).collect();
        let total: T = exps.iter().copied().sum();
        exps.into_iter().map(|e| e / total).collect()
    }
}
