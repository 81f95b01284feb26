//! Lightweight per-modality classifiers with probability outputs.

mod gaussian_nb;
mod knn;
mod multinomial_nb;
mod persist;
mod standardize;
mod svm;

pub use gaussian_nb::GaussianNb;
pub use knn::Knn;
pub use multinomial_nb::MultinomialNb;
pub(crate) use persist::check_schema as persist_check_schema;
pub use persist::{load_model, save_model, MODEL_SCHEMA_VERSION};
pub use standardize::Standardizer;
pub use svm::LinearSvm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::labels::EmotionLabel;
use crate::scalar::{argmax, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    GaussianNb,
    MultinomialNb,
    Knn,
    LinearSvm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::GaussianNb,
        ModelKind::MultinomialNb,
        ModelKind::Knn,
        ModelKind::LinearSvm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::GaussianNb => "gaussian-nb",
            ModelKind::MultinomialNb => "multinomial-nb",
            ModelKind::Knn => "knn",
            ModelKind::LinearSvm => "linear-svm",
        }
    }

    fn standardizes(self) -> bool {
        self != ModelKind::MultinomialNb
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown model kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    /// Gaussian NB variance smoothing, relative to the largest feature variance.
    pub var_smoothing: f64,
    /// Multinomial NB additive smoothing.
    pub alpha: f64,
    pub k: usize,
    pub svm_lambda: f64,
    pub svm_epochs: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            var_smoothing: 1e-9,
            alpha: 1.0,
            k: 5,
            svm_lambda: 1e-4,
            svm_epochs: 20,
        }
    }
}

/// Probabilities aligned with `classes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution<T> {
    pub classes: Vec<EmotionLabel>,
    pub probs: Vec<T>,
}

impl<T: Scalar> ClassDistribution<T> {
    pub fn new(classes: Vec<EmotionLabel>, probs: Vec<T>) -> Result<Self> {
        if classes.len() != probs.len() || classes.is_empty() {
            return Err(Error::invalid("distribution classes and probs must align"));
        }
        if probs.iter().any(|&p| !(p >= T::zero() && p <= T::one())) {
            return Err(Error::invalid("probabilities must lie in [0, 1]"));
        }
        let total: T = probs.iter().copied().sum();
        if (total - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { classes, probs })
    }

    /// Point mass on one label over the full taxonomy.
    pub fn one_hot(label: EmotionLabel) -> Self {
        let probs = EmotionLabel::ALL
            .iter()
            .map(|&l| if l == label { T::one() } else { T::zero() })
            .collect();
        Self {
            classes: EmotionLabel::ALL.to_vec(),
            probs,
        }
    }

    pub fn uniform() -> Self {
        let p = T::one() / T::from_count(EmotionLabel::ALL.len());
        Self {
            classes: EmotionLabel::ALL.to_vec(),
            probs: vec![p; EmotionLabel::ALL.len()],
        }
    }

    pub fn prob(&self, label: EmotionLabel) -> T {
        self.classes
            .iter()
            .position(|&l| l == label)
            .map_or(T::zero(), |i| self.probs[i])
    }

    /// Most probable label; ties resolve to the lower class index.
    pub fn argmax(&self) -> EmotionLabel {
        self.classes[argmax(&self.probs)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "kebab-case")]
pub enum ModelParams<T> {
    GaussianNb(GaussianNb<T>),
    MultinomialNb(MultinomialNb<T>),
    Knn(Knn<T>),
    LinearSvm(LinearSvm<T>),
}

impl<T: Scalar> ModelParams<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::GaussianNb(_) => ModelKind::GaussianNb,
            ModelParams::MultinomialNb(_) => ModelKind::MultinomialNb,
            ModelParams::Knn(_) => ModelKind::Knn,
            ModelParams::LinearSvm(_) => ModelKind::LinearSvm,
        }
    }
}

/// A fitted classifier. Immutable after training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel<T> {
    pub(crate) classes: Vec<EmotionLabel>,
    pub(crate) dim: usize,
    pub(crate) standardizer: Option<Standardizer<T>>,
    pub(crate) params: ModelParams<T>,
}

impl<T: Scalar> TrainedModel<T> {
    /// Fits a classifier. When `classes` is `None` the class set is the
    /// labels present in `data`, in taxonomy order.
    pub fn train(
        kind: ModelKind,
        data: &[(FeatureVector<T>, EmotionLabel)],
        classes: Option<&[EmotionLabel]>,
        hyper: &Hyperparams,
        seed: u64,
    ) -> Result<Self> {
        let Some((first, _)) = data.first() else {
            return Err(Error::InsufficientData("training set is empty".into()));
        };
        let dim = first.dim();
        if let Some(i) = data.iter().position(|(x, _)| x.dim() != dim) {
            return Err(Error::invalid(format!(
                "example {i} has dim {}, expected {dim}",
                data[i].0.dim()
            )));
        }

        let mut classes: Vec<EmotionLabel> = match classes {
            Some(c) => c.to_vec(),
            None => data.iter().map(|(_, l)| *l).collect(),
        };
        classes.sort();
        classes.dedup();
        for c in &classes {
            if !data.iter().any(|(_, l)| l == c) {
                return Err(Error::InsufficientData(format!("no examples of class `{c}`")));
            }
        }
        let mut labels = Vec::with_capacity(data.len());
        for (_, l) in data {
            let idx = classes.binary_search(l).map_err(|_| {
                Error::invalid(format!("label `{l}` is not in the declared class set"))
            })?;
            labels.push(idx);
        }
        let n_classes = classes.len();

        let raw: Vec<&[T]> = data.iter().map(|(x, _)| x.values.as_slice()).collect();
        let standardizer = kind.standardizes().then(|| Standardizer::fit(&raw));
        let rows: Vec<Vec<T>> = match &standardizer {
            Some(s) => raw.iter().map(|x| s.apply(x)).collect(),
            None => raw.iter().map(|x| x.to_vec()).collect(),
        };

        let params = match kind {
            ModelKind::GaussianNb => ModelParams::GaussianNb(GaussianNb::fit(
                &rows,
                &labels,
                n_classes,
                hyper.var_smoothing,
            )),
            ModelKind::MultinomialNb => {
                if let Some(i) = rows.iter().position(|r| r.iter().any(|&v| v < T::zero())) {
                    return Err(Error::invalid(format!(
                        "multinomial-nb needs non-negative features (example {i})"
                    )));
                }
                ModelParams::MultinomialNb(MultinomialNb::fit(
                    &rows,
                    &labels,
                    n_classes,
                    hyper.alpha,
                ))
            }
            ModelKind::Knn => {
                if hyper.k == 0 {
                    return Err(Error::Config("knn needs k >= 1".into()));
                }
                ModelParams::Knn(Knn::fit(&rows, &labels, n_classes, hyper.k))
            }
            ModelKind::LinearSvm => {
                if hyper.svm_lambda.is_nan() || hyper.svm_lambda <= 0.0 {
                    return Err(Error::Config("svm lambda must be positive".into()));
                }
                ModelParams::LinearSvm(LinearSvm::fit(
                    &rows,
                    &labels,
                    n_classes,
                    hyper.svm_lambda,
                    hyper.svm_epochs,
                    seed,
                ))
            }
        };
        Ok(Self {
            classes,
            dim,
            standardizer,
            params,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }

    pub fn classes(&self) -> &[EmotionLabel] {
        &self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn standardizer(&self) -> Option<&Standardizer<T>> {
        self.standardizer.as_ref()
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn predict_proba(&self, x: &FeatureVector<T>) -> Result<ClassDistribution<T>> {
        self.predict_proba_slice(&x.values)
    }

    pub fn predict_proba_slice(&self, x: &[T]) -> Result<ClassDistribution<T>> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!(
                "feature dim {} does not match model dim {}",
                x.len(),
                self.dim
            )));
        }
        let z = match &self.standardizer {
            Some(s) => s.apply(x),
            None => x.to_vec(),
        };
        let probs = match &self.params {
            ModelParams::GaussianNb(m) => m.predict_proba(&z),
            ModelParams::MultinomialNb(m) => {
                if z.iter().any(|&v| v < T::zero()) {
                    return Err(Error::invalid("multinomial-nb needs non-negative features"));
                }
                m.predict_proba(&z)
            }
            ModelParams::Knn(m) => m.predict_proba(&z),
            ModelParams::LinearSvm(m) => m.predict_proba(&z),
        };
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::Numerical("non-finite class probability".into()));
        }
        Ok(ClassDistribution {
            classes: self.classes.clone(),
            probs,
        })
    }

    pub fn predict(&self, x: &FeatureVector<T>) -> Result<EmotionLabel> {
        Ok(self.predict_proba(x)?.argmax())
    }
}
