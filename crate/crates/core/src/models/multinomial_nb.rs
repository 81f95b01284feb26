use serde::{Deserialize, Serialize};

use crate::scalar::{log_sum_exp, Scalar};

/// Multinomial naive Bayes over non-negative counts with additive smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialNb<T> {
    pub dim: usize,
    pub class_log_prior: Vec<T>,
    /// Flat `n_classes x dim` term log-likelihoods.
    pub feature_log_prob: Vec<T>,
}

impl<T: Scalar> MultinomialNb<T> {
    pub fn fit(rows: &[Vec<T>], labels: &[usize], n_classes: usize, alpha: f64) -> Self {
        let dim = rows[0].len();
        let n = T::from_count(rows.len());
        let alpha = T::lit(alpha);
        let mut class_log_prior = Vec::with_capacity(n_classes);
        let mut feature_log_prob = Vec::with_capacity(n_classes * dim);
        for c in 0..n_classes {
            let mut counts = vec![T::zero(); dim];
            let mut nc = 0usize;
            for (row, _) in rows.iter().zip(labels).filter(|&(_, &l)| l == c) {
                nc += 1;
                for (acc, &v) in counts.iter_mut().zip(row) {
                    *acc += v;
                }
            }
            class_log_prior.push((T::from_count(nc) / n).ln());
            let total = counts.iter().copied().sum::<T>() + alpha * T::from_count(dim);
            feature_log_prob.extend(counts.into_iter().map(|v| ((v + alpha) / total).ln()));
        }
        Self {
            dim,
            class_log_prior,
            feature_log_prob,
        }
    }

    pub fn predict_proba(&self, x: &[T]) -> Vec<T> {
        let jll: Vec<T> = self
            .class_log_prior
            .iter()
            .enumerate()
            .map(|(c, &prior)| {
                let row = &self.feature_log_prob[c * self.dim..(c + 1) * self.dim];
                prior + row.iter().zip(x).map(|(&lp, &v)| lp * v).sum::<T>()
            })
            .collect();
        let norm = log_sum_exp(&jll);
        jll.into_iter().map(|v| (v - norm).exp()).collect()
    }
}
