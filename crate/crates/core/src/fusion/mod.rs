//! Decision fusion over per-classifier valence probabilities.

mod bernstein;
mod layer;
pub mod synthetic;
mod vote;

pub use bernstein::{bernstein_disparity, empirical_bernstein_radius, DisparityReport};
pub use layer::{
    fusion_loss, gradient, train_fusion, train_fusion_traced, FusionConfig, FusionInput,
    FusionModel, FusionTrace, Gradient, LossBreakdown, TrainingMeta, FUSION_SCHEMA_VERSION,
};
pub use vote::{majority_vote, majority_vote_probs, weighted_average};
