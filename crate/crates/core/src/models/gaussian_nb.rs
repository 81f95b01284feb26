use serde::{Deserialize, Serialize};

use crate::scalar::{log_sum_exp, Scalar};

/// Gaussian naive Bayes; means and variances are flat `n_classes x dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb<T> {
    pub dim: usize,
    pub priors: Vec<T>,
    pub means: Vec<T>,
    pub variances: Vec<T>,
}

impl<T: Scalar> GaussianNb<T> {
    /// `var_smoothing` is multiplied by the largest per-feature variance of
    /// the whole training set and added to every class variance.
    pub fn fit(rows: &[Vec<T>], labels: &[usize], n_classes: usize, var_smoothing: f64) -> Self {
        let dim = rows[0].len();
        let n = T::from_count(rows.len());

        let max_var = (0..dim)
            .map(|j| {
                let m = rows.iter().map(|r| r[j]).sum::<T>() / n;
                rows.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<T>() / n
            })
            .fold(T::zero(), T::max);
        let mut epsilon = T::lit(var_smoothing) * max_var;
        if epsilon <= T::zero() {
            epsilon = T::lit(var_smoothing.max(f64::MIN_POSITIVE));
        }

        let mut priors = Vec::with_capacity(n_classes);
        let mut means = Vec::with_capacity(n_classes * dim);
        let mut variances = Vec::with_capacity(n_classes * dim);
        for c in 0..n_classes {
            let members: Vec<&Vec<T>> = rows
                .iter()
                .zip(labels)
                .filter(|&(_, &l)| l == c)
                .map(|(r, _)| r)
                .collect();
            let nc = T::from_count(members.len());
            priors.push(nc / n);
            for j in 0..dim {
                let m = members.iter().map(|r| r[j]).sum::<T>() / nc;
                let v = members.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<T>() / nc;
                means.push(m);
                variances.push(v + epsilon);
            }
        }
        Self {
            dim,
            priors,
            means,
            variances,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.priors.len()
    }

    pub fn joint_log_likelihood(&self, x: &[T]) -> Vec<T> {
        let two_pi = T::lit(2.0 * std::f64::consts::PI);
        let half = T::lit(0.5);
        (0..self.n_classes())
            .map(|c| {
                let off = c * self.dim;
                let ll: T = (0..self.dim)
                    .map(|j| {
                        let var = self.variances[off + j];
                        let d = x[j] - self.means[off + j];
                        -half * ((two_pi * var).ln() + d * d / var)
                    })
                    .sum();
                self.priors[c].ln() + ll
            })
            .collect()
    }

    pub fn predict_proba(&self, x: &[T]) -> Vec<T> {
        let jll = self.joint_log_likelihood(x);
        let norm = log_sum_exp(&jll);
        jll.into_iter().map(|v| (v - norm).exp()).collect()
    }
}
