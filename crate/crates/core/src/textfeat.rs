//! Tokenization and term-frequency / TF-IDF vectors.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureVector};
use crate::scalar::Scalar;

/// Lowercases and splits on anything that is not a Unicode letter or number.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
}

impl Vocabulary {
    /// Keeps every term whose document frequency is at least `min_df`.
    pub fn build<S: AsRef<str>>(corpus: &[Vec<S>], min_df: usize) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::invalid("cannot build a vocabulary from an empty corpus"));
        }
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in corpus {
            let unique: BTreeSet<&str> = doc.iter().map(AsRef::as_ref).collect();
            for term in unique {
                *df.entry(term).or_default() += 1;
            }
        }
        let (terms, df) = df
            .into_iter()
            .filter(|&(_, n)| n >= min_df.max(1))
            .map(|(t, n)| (t.to_owned(), n))
            .unzip();
        Ok(Self {
            terms,
            df,
            n_docs: corpus.len(),
        })
    }

    /// Rebuilds from stored parts, checking the sort/df invariants.
    pub fn from_parts(terms: Vec<String>, df: Vec<usize>, n_docs: usize) -> Result<Self> {
        if terms.len() != df.len() {
            return Err(Error::format("vocabulary terms and df differ in length"));
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::format("vocabulary terms must be unique and sorted"));
        }
        if df.iter().any(|&d| d == 0 || d > n_docs) {
            return Err(Error::format("document frequency out of range"));
        }
        Ok(Self { terms, df, n_docs })
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn df(&self) -> &[usize] {
        &self.df
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    pub fn df_of(&self, term: &str) -> Option<usize> {
        self.index_of(term).map(|i| self.df[i])
    }

    /// Smoothed inverse document frequency, `ln((1 + n) / (1 + df)) + 1`.
    pub fn idf<T: Scalar>(&self, index: usize) -> T {
        let ratio = (1 + self.n_docs) as f64 / (1 + self.df[index]) as f64;
        T::lit(ratio.ln() + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorizeMode {
    Tf,
    #[default]
    Tfidf,
}

/// Maps tokens onto vocabulary coordinates. Out-of-vocabulary tokens are
/// ignored; tfidf output is L2-normalized unless it is all zeros.
pub fn vectorize<T: Scalar, S: AsRef<str>>(
    tokens: &[S],
    vocab: &Vocabulary,
    mode: VectorizeMode,
) -> FeatureVector<T> {
    let mut counts = vec![T::zero(); vocab.len()];
    for token in tokens {
        if let Some(i) = vocab.index_of(token.as_ref()) {
            counts[i] += T::one();
        }
    }
    if mode == VectorizeMode::Tfidf {
        for (i, c) in counts.iter_mut().enumerate() {
            *c *= vocab.idf::<T>(i);
        }
        let norm = counts.iter().map(|&c| c * c).sum::<T>().sqrt();
        if norm > T::zero() {
            counts.iter_mut().for_each(|c| *c /= norm);
        }
    }
    // an empty vocabulary still yields a usable one-slot zero vector
    if counts.is_empty() {
        counts.push(T::zero());
    }
    FeatureVector {
        values: counts,
        kind: FeatureKind::Tfidf,
    }
}
