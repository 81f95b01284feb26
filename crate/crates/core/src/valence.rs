//! Binary pleasant/unpleasant projection of emotion distributions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::EmotionLabel;
use crate::models::ClassDistribution;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Valence {
    Pleasant,
    Unpleasant,
}

impl Valence {
    /// Pleasant iff `p >= 0.5`.
    pub fn from_probability<T: Scalar>(p_pleasant: T) -> Self {
        if p_pleasant >= T::lit(0.5) {
            Valence::Pleasant
        } else {
            Valence::Unpleasant
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Valence::Pleasant => "pleasant",
            Valence::Unpleasant => "unpleasant",
        }
    }

    /// 1 for pleasant, 0 for unpleasant.
    pub fn indicator<T: Scalar>(self) -> T {
        match self {
            Valence::Pleasant => T::one(),
            Valence::Unpleasant => T::zero(),
        }
    }
}

impl fmt::Display for Valence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Valence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pleasant" => Ok(Valence::Pleasant),
            "unpleasant" => Ok(Valence::Unpleasant),
            other => Err(Error::format(format!("unknown valence `{other}`"))),
        }
    }
}

pub fn valence_class<T: Scalar>(p_pleasant: T) -> Valence {
    Valence::from_probability(p_pleasant)
}

/// Partition of the emotion taxonomy into pleasant and unpleasant labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValenceMapping {
    pleasant: [bool; 8],
}

impl Default for ValenceMapping {
    fn default() -> Self {
        use EmotionLabel::*;
        Self::new(&[Neutral, Calm, Happy, Surprised]).expect("default partition is valid")
    }
}

impl ValenceMapping {
    /// Everything not listed is unpleasant; both sides must be non-empty.
    pub fn new(pleasant: &[EmotionLabel]) -> Result<Self> {
        let mut set = [false; 8];
        for l in pleasant {
            set[l.index()] = true;
        }
        let n = set.iter().filter(|&&b| b).count();
        if n == 0 || n == set.len() {
            return Err(Error::Config(
                "valence mapping needs at least one pleasant and one unpleasant label".into(),
            ));
        }
        Ok(Self { pleasant: set })
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let labels = names
            .iter()
            .map(|n| n.as_ref().parse::<EmotionLabel>())
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Config(e.to_string()))?;
        Self::new(&labels)
    }

    pub fn is_pleasant(&self, label: EmotionLabel) -> bool {
        self.pleasant[label.index()]
    }

    pub fn of(&self, label: EmotionLabel) -> Valence {
        if self.is_pleasant(label) {
            Valence::Pleasant
        } else {
            Valence::Unpleasant
        }
    }

    pub fn pleasant_labels(&self) -> Vec<EmotionLabel> {
        EmotionLabel::ALL
            .into_iter()
            .filter(|&l| self.is_pleasant(l))
            .collect()
    }

    pub fn unpleasant_labels(&self) -> Vec<EmotionLabel> {
        EmotionLabel::ALL
            .into_iter()
            .filter(|&l| !self.is_pleasant(l))
            .collect()
    }

    /// The mapping with both sides exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            pleasant: self.pleasant.map(|b| !b),
        }
    }

    /// Total probability mass on pleasant labels, clamped to `[0, 1]`.
    pub fn to_valence<T: Scalar>(&self, dist: &ClassDistribution<T>) -> T {
        let p: T = dist
            .classes
            .iter()
            .zip(&dist.probs)
            .filter(|(l, _)| self.is_pleasant(**l))
            .map(|(_, &p)| p)
            .sum();
        p.max(T::zero()).min(T::one())
    }
}

impl Serialize for ValenceMapping {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.pleasant_labels().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ValenceMapping {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let labels = Vec::<EmotionLabel>::deserialize(d)?;
        Self::new(&labels).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use EmotionLabel::*;

    #[test]
    fn pure_and_uniform_distributions() {
        let m = ValenceMapping::default();
        assert_eq!(m.to_valence(&ClassDistribution::<f64>::one_hot(Happy)), 1.0);
        assert_eq!(m.to_valence(&ClassDistribution::<f64>::one_hot(Angry)), 0.0);
        assert!((m.to_valence(&ClassDistribution::<f64>::uniform()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn default_partition() {
        let m = ValenceMapping::default();
        assert_eq!(m.pleasant_labels(), vec![Neutral, Calm, Happy, Surprised]);
        assert_eq!(m.unpleasant_labels(), vec![Sad, Angry, Fearful, Disgust]);
    }

    #[test]
    fn class_threshold_and_tie() {
        assert_eq!(valence_class(0.7f64), Valence::Pleasant);
        assert_eq!(valence_class(0.3f64), Valence::Unpleasant);
        assert_eq!(valence_class(0.5f64), Valence::Pleasant);
    }

    #[test]
    fn degenerate_partitions_rejected() {
        assert!(ValenceMapping::new(&[]).is_err());
        assert!(ValenceMapping::new(&EmotionLabel::ALL).is_err());
        assert!(ValenceMapping::from_names(&["happy", "joyful"]).is_err());
    }

    #[test]
    fn serde_as_label_list() {
        let m = ValenceMapping::from_names(&["happy", "calm"]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"["calm","happy"]"#);
        assert_eq!(serde_json::from_str::<ValenceMapping>(&s).unwrap(), m);
    }

    fn distribution() -> impl Strategy<Value = ClassDistribution<f64>> {
        prop::collection::vec(0.0f64..1.0, 8).prop_filter_map("non-zero", |w| {
            let total: f64 = w.iter().sum();
            (total > 1e-6).then(|| ClassDistribution {
                classes: EmotionLabel::ALL.to_vec(),
                probs: w.iter().map(|v| v / total).collect(),
            })
        })
    }

    proptest! {
        #[test]
        fn swapping_sides_complements(d in distribution(), mask in 1u8..255) {
            let labels: Vec<_> = EmotionLabel::ALL
                .into_iter()
                .filter(|l| mask & (1 << l.index()) != 0)
                .collect();
            let m = ValenceMapping::new(&labels).unwrap();
            let p = m.to_valence(&d);
            let q = m.swapped().to_valence(&d);
            prop_assert!((p + q - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn linear_in_distribution(a in distribution(), b in distribution(), t in 0.0f64..1.0) {
            let m = ValenceMapping::default();
            let mix = ClassDistribution {
                classes: a.classes.clone(),
                probs: a.probs.iter().zip(&b.probs).map(|(x, y)| t * x + (1.0 - t) * y).collect(),
            };
            let lhs = m.to_valence(&mix);
            let rhs = t * m.to_valence(&a) + (1.0 - t) * m.to_valence(&b);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
    }
}
