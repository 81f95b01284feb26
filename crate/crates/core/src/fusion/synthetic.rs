//! Seeded "complementary experts" fusion data.
//!
//! Two classifiers, two groups. Classifier 1 reports the true label with
//! probability `informative` for group A and uniform noise on `noise` for
//! group B; classifier 2 is the mirror image. With unequal group sizes an
//! unweighted learner leans on the majority group's expert.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FusionInput;
use crate::labels::Group;
use crate::scalar::Scalar;
use crate::valence::Valence;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplementaryExperts {
    pub n_a: usize,
    pub n_b: usize,
    /// Probability the informed expert assigns to the true label.
    pub informative: f64,
    /// Range of the uninformed expert's output.
    pub noise: (f64, f64),
}

impl Default for ComplementaryExperts {
    fn default() -> Self {
        Self {
            n_a: 300,
            n_b: 100,
            informative: 0.9,
            noise: (0.3, 0.7),
        }
    }
}

impl ComplementaryExperts {
    pub fn generate<T: Scalar>(&self, seed: u64) -> Vec<FusionInput<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let groups = std::iter::repeat_n(Group::A, self.n_a).chain(std::iter::repeat_n(Group::B, self.n_b));
        groups
            .map(|group| {
                let label = if rng.random_bool(0.5) {
                    Valence::Pleasant
                } else {
                    Valence::Unpleasant
                };
                let informed = match label {
                    Valence::Pleasant => self.informative,
                    Valence::Unpleasant => 1.0 - self.informative,
                };
                let noise = rng.random_range(self.noise.0..=self.noise.1);
                let p = match group {
                    Group::A => [informed, noise],
                    Group::B => [noise, informed],
                };
                FusionInput::new(p.iter().map(|&v| T::lit(v)).collect(), group, Some(label))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let g = ComplementaryExperts::default();
        let a = g.generate::<f64>(5);
        assert_eq!(a.len(), 400);
        assert_eq!(a.iter().filter(|r| r.group == Group::B).count(), 100);
        assert_eq!(a, g.generate::<f64>(5));
        assert_ne!(a, g.generate::<f64>(6));
        for r in &a {
            let informed = if r.group == Group::A { r.p[0] } else { r.p[1] };
            let expected = if r.label == Some(Valence::Pleasant) { 0.9 } else { 0.1 };
            assert!((informed - expected).abs() < 1e-12);
        }
    }
}
