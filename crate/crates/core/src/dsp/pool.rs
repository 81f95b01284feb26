use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolOptions {
    /// Append first-order frame deltas before pooling.
    pub deltas: bool,
}

impl Default for PoolOptions {
    fn default() -> Self {
        Self { deltas: true }
    }
}

/// Pools an MFCC matrix into one clip-level vector with deltas enabled.
///
/// Layout: column means followed by column population standard deviations,
/// where the columns are the static coefficients then their deltas
/// (`4 * n_mfcc` values).
pub fn pool<T: Scalar>(frames: &[Vec<T>]) -> Result<FeatureVector<T>> {
    pool_with(frames, PoolOptions::default())
}

pub fn pool_with<T: Scalar>(frames: &[Vec<T>], opts: PoolOptions) -> Result<FeatureVector<T>> {
    let Some(first) = frames.first() else {
        return Err(Error::invalid("cannot pool an empty frame matrix"));
    };
    let width = first.len();
    if width == 0 || frames.iter().any(|f| f.len() != width) {
        return Err(Error::invalid("frame matrix is empty or ragged"));
    }

    let mut columns: Vec<Vec<T>> = (0..width)
        .map(|c| frames.iter().map(|f| f[c]).collect())
        .collect();
    if opts.deltas {
        for c in 0..width {
            let delta = std::iter::once(T::zero())
                .chain(columns[c].windows(2).map(|w| w[1] - w[0]))
                .collect();
            columns.push(delta);
        }
    }

    let n = T::from_count(frames.len());
    let means: Vec<T> = columns
        .iter()
        .map(|col| col.iter().copied().sum::<T>() / n)
        .collect();
    let stds = columns.iter().zip(&means).map(|(col, &m)| {
        let var = col.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / n;
        var.sqrt()
    });
    let values = means.iter().copied().chain(stds).collect();
    FeatureVector::new(values, FeatureKind::MfccPooled)
}
