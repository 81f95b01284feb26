use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::valence::{valence_class, Valence};

/// Strict majority of the per-classifier decisions; a tie is settled by the
/// mean of `probs`.
pub fn majority_vote<T: Scalar>(decisions: &[Valence], probs: &[T]) -> Result<Valence> {
    if decisions.is_empty() || decisions.len() != probs.len() {
        return Err(Error::invalid(
            "majority vote needs equal-length, non-empty decisions and probabilities",
        ));
    }
    let pleasant = decisions.iter().filter(|&&d| d == Valence::Pleasant).count();
    let unpleasant = decisions.len() - pleasant;
    Ok(match pleasant.cmp(&unpleasant) {
        std::cmp::Ordering::Greater => Valence::Pleasant,
        std::cmp::Ordering::Less => Valence::Unpleasant,
        std::cmp::Ordering::Equal => {
            let mean = probs.iter().copied().sum::<T>() / T::from_count(probs.len());
            valence_class(mean)
        }
    })
}

/// Majority vote over probabilities thresholded at 0.5.
pub fn majority_vote_probs<T: Scalar>(probs: &[T]) -> Result<Valence> {
    let decisions: Vec<Valence> = probs.iter().map(|&p| valence_class(p)).collect();
    majority_vote(&decisions, probs)
}

/// Convex combination of per-classifier probabilities. Weights must be
/// non-negative with a positive sum; they are normalized here.
pub fn weighted_average<T: Scalar>(probs: &[T], weights: &[T]) -> Result<T> {
    if probs.is_empty() || probs.len() != weights.len() {
        return Err(Error::invalid("weighted average needs aligned, non-empty inputs"));
    }
    if weights.iter().any(|&w| w < T::zero()) {
        return Err(Error::invalid("ensemble weights must be non-negative"));
    }
    let total: T = weights.iter().copied().sum();
    if total.is_nan() || total <= T::zero() {
        return Err(Error::invalid("ensemble weights must not all be zero"));
    }
    Ok(probs.iter().zip(weights).map(|(&p, &w)| p * w).sum::<T>() / total)
}
