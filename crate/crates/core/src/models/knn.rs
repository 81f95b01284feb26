use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Exhaustive k-nearest-neighbour vote over a stored training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn<T> {
    pub k: usize,
    pub dim: usize,
    pub n_classes: usize,
    /// Flat `n x dim`.
    pub points: Vec<T>,
    pub labels: Vec<usize>,
}

impl<T: Scalar> Knn<T> {
    pub fn fit(rows: &[Vec<T>], labels: &[usize], n_classes: usize, k: usize) -> Self {
        Self {
            k,
            dim: rows[0].len(),
            n_classes,
            points: rows.iter().flatten().copied().collect(),
            labels: labels.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Training indices of the nearest neighbours; equal distances resolve to
    /// the lower training index.
    pub fn neighbours(&self, x: &[T]) -> Vec<usize> {
        let mut dist: Vec<(T, usize)> = self
            .points
            .chunks_exact(self.dim)
            .enumerate()
            .map(|(i, p)| {
                let d2: T = p.iter().zip(x).map(|(&a, &b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        dist.into_iter()
            .take(self.k.min(self.len()))
            .map(|(_, i)| i)
            .collect()
    }

    /// Laplace-smoothed vote fractions `(votes + 1) / (k + C)`.
    pub fn predict_proba(&self, x: &[T]) -> Vec<T> {
        let nb = self.neighbours(x);
        let mut votes = vec![0usize; self.n_classes];
        for &i in &nb {
            votes[self.labels[i]] += 1;
        }
        let denom = T::from_count(nb.len() + self.n_classes);
        votes
            .into_iter()
            .map(|v| T::from_count(v + 1) / denom)
            .collect()
    }
}
