//! Classifier bundles and the model-set directory a session serves from.
//!
//! Directory layout:
//! - `<name>.classifier.json`: featurizer + trained classifier
//! - `fusion.json`: fairness-trained fusion layer
//! - `fusion-baseline.json`: fusion layer trained without the fairness term
//! - `modelset.json`: classifier order used as fusion input order

use std::path::Path;

use moodspring_core::data::Modality;
use moodspring_core::dsp::{pool_with, resample, AudioClip, MfccConfig, MfccExtractor, PoolOptions, CANONICAL_RATE};
use moodspring_core::fusion::FusionModel;
use moodspring_core::models::{load_model, save_model, TrainedModel};
use moodspring_core::textfeat::{tokenize, vectorize, VectorizeMode, Vocabulary};
use moodspring_core::valence::ValenceMapping;
use moodspring_core::{Error as CoreError, FeatureKind, FeatureVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Result, ServiceError};

pub const BUNDLE_SCHEMA_VERSION: u32 = 1;
pub const CLASSIFIER_SUFFIX: &str = ".classifier.json";
pub const FUSION_FILE: &str = "fusion.json";
pub const BASELINE_FILE: &str = "fusion-baseline.json";
pub const INDEX_FILE: &str = "modelset.json";

/// Persisted description of how raw input becomes a feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum FeaturizerSpec {
    Mfcc { mfcc: MfccConfig, deltas: bool },
    Text { vocabulary: Vocabulary, mode: VectorizeMode },
    Embedding { dim: usize },
}

impl FeaturizerSpec {
    pub fn modality(&self) -> Modality {
        match self {
            FeaturizerSpec::Mfcc { .. } => Modality::Audio,
            FeaturizerSpec::Text { .. } => Modality::Text,
            FeaturizerSpec::Embedding { .. } => Modality::Embedding,
        }
    }
}

/// Runtime featurizer; audio keeps its FFT plan and filterbank.
pub enum Featurizer {
    Audio { extractor: MfccExtractor<f64>, deltas: bool },
    Text { vocabulary: Vocabulary, mode: VectorizeMode },
    Embedding { dim: usize },
}

impl Featurizer {
    pub fn build(spec: &FeaturizerSpec) -> Result<Self> {
        Ok(match spec {
            FeaturizerSpec::Mfcc { mfcc, deltas } => Featurizer::Audio {
                extractor: MfccExtractor::new(mfcc.clone(), CANONICAL_RATE)?,
                deltas: *deltas,
            },
            FeaturizerSpec::Text { vocabulary, mode } => Featurizer::Text {
                vocabulary: vocabulary.clone(),
                mode: *mode,
            },
            FeaturizerSpec::Embedding { dim } => Featurizer::Embedding { dim: *dim },
        })
    }

    pub fn text(&self, text: &str) -> Result<FeatureVector<f64>> {
        match self {
            Featurizer::Text { vocabulary, mode } => Ok(vectorize(&tokenize(text), vocabulary, *mode)),
            _ => Err(ServiceError::Config("classifier does not take text".into())),
        }
    }

    /// Resamples to the canonical rate, then MFCC and pooling.
    pub fn audio(&self, clip: &AudioClip<f64>) -> Result<FeatureVector<f64>> {
        match self {
            Featurizer::Audio { extractor, deltas } => {
                let clip = resample(clip, CANONICAL_RATE)?;
                let frames = extractor.compute(&clip)?;
                Ok(pool_with(&frames, PoolOptions { deltas: *deltas })?)
            }
            _ => Err(ServiceError::Config("classifier does not take audio".into())),
        }
    }

    pub fn embedding(&self, v: FeatureVector<f64>) -> Result<FeatureVector<f64>> {
        match self {
            Featurizer::Embedding { dim } if *dim == v.dim() && v.kind == FeatureKind::ExternalEmbedding => Ok(v),
            Featurizer::Embedding { dim } => Err(CoreError::InvalidInput(format!(
                "embedding has dim {}, classifier expects {dim}",
                v.dim()
            ))
            .into()),
            _ => Err(ServiceError::Config("classifier does not take embeddings".into())),
        }
    }
}

/// One trained per-modality classifier with its featurizer.
pub struct Classifier {
    pub name: String,
    pub spec: FeaturizerSpec,
    pub featurizer: Featurizer,
    pub model: TrainedModel<f64>,
}

#[derive(Serialize, Deserialize)]
struct BundleDoc {
    schema_version: u32,
    kind: String,
    name: String,
    featurizer: FeaturizerSpec,
    model: Value,
}

impl Classifier {
    pub fn new(name: impl Into<String>, spec: FeaturizerSpec, model: TrainedModel<f64>) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            featurizer: Featurizer::build(&spec)?,
            spec,
            model,
        })
    }

    pub fn modality(&self) -> Modality {
        self.spec.modality()
    }

    /// Pleasant probability mass for an already featurized input.
    pub fn p_pleasant(&self, x: &FeatureVector<f64>, mapping: &ValenceMapping) -> Result<f64> {
        Ok(mapping.to_valence(&self.model.predict_proba(x)?))
    }

    pub fn to_json(&self) -> Vec<u8> {
        let model: Value = serde_json::from_slice(&save_model(&self.model)).expect("model document is JSON");
        let doc = BundleDoc {
            schema_version: BUNDLE_SCHEMA_VERSION,
            kind: "classifier".into(),
            name: self.name.clone(),
            featurizer: self.spec.clone(),
            model,
        };
        serde_json::to_vec_pretty(&doc).expect("bundle serializes")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let doc: BundleDoc = serde_json::from_slice(bytes)
            .map_err(|e| CoreError::format(format!("invalid classifier bundle: {e}")))?;
        if doc.schema_version != BUNDLE_SCHEMA_VERSION || doc.kind != "classifier" {
            return Err(CoreError::format(format!(
                "unsupported bundle (kind `{}`, schema {}; expected classifier, schema {BUNDLE_SCHEMA_VERSION})",
                doc.kind, doc.schema_version
            ))
            .into());
        }
        let model = load_model(&serde_json::to_vec(&doc.model).expect("value serializes"))?;
        Self::new(doc.name, doc.featurizer, model)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexDoc {
    schema_version: u32,
    classifiers: Vec<String>,
}

/// Immutable set of models shared by every session.
pub struct ModelSet {
    pub classifiers: Vec<Classifier>,
    pub fusion: Option<FusionModel<f64>>,
    pub baseline: Option<FusionModel<f64>>,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| ServiceError::Io(format!("{}: {e}", path.display())))
}

impl ModelSet {
    pub fn new(classifiers: Vec<Classifier>) -> Self {
        Self {
            classifiers,
            fusion: None,
            baseline: None,
        }
    }

    pub fn with_fusion(mut self, fusion: FusionModel<f64>) -> Self {
        self.fusion = Some(fusion);
        self
    }

    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let index_path = dir.join(INDEX_FILE);
        let names: Vec<String> = if index_path.is_file() {
            let doc: IndexDoc = serde_json::from_slice(&read(&index_path)?)
                .map_err(|e| CoreError::format(format!("invalid {INDEX_FILE}: {e}")))?;
            doc.classifiers
        } else {
            let mut names = Vec::new();
            for entry in std::fs::read_dir(dir)? {
                let name = entry?.file_name().to_string_lossy().into_owned();
                if let Some(stem) = name.strip_suffix(CLASSIFIER_SUFFIX) {
                    names.push(stem.to_owned());
                }
            }
            names.sort();
            names
        };
        if names.is_empty() {
            return Err(ServiceError::Config(format!("no classifiers in {}", dir.display())));
        }
        let classifiers = names
            .iter()
            .map(|n| Classifier::from_json(&read(&dir.join(format!("{n}{CLASSIFIER_SUFFIX}")))?))
            .collect::<Result<Vec<_>>>()?;
        let load_fusion = |file: &str| -> Result<Option<FusionModel<f64>>> {
            let p = dir.join(file);
            if !p.is_file() {
                return Ok(None);
            }
            Ok(Some(FusionModel::from_json(&read(&p)?)?))
        };
        let set = Self {
            classifiers,
            fusion: load_fusion(FUSION_FILE)?,
            baseline: load_fusion(BASELINE_FILE)?,
        };
        for f in [&set.fusion, &set.baseline].into_iter().flatten() {
            set.check_fusion(f)?;
        }
        Ok(set)
    }

    /// Writes classifier bundles, fusion layers present, and the index.
    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for c in &self.classifiers {
            std::fs::write(dir.join(format!("{}{CLASSIFIER_SUFFIX}", c.name)), c.to_json())?;
        }
        if let Some(f) = &self.fusion {
            std::fs::write(dir.join(FUSION_FILE), f.to_json())?;
        }
        if let Some(f) = &self.baseline {
            std::fs::write(dir.join(BASELINE_FILE), f.to_json())?;
        }
        self.write_index(dir)
    }

    pub fn write_index(&self, dir: &Path) -> Result<()> {
        let doc = IndexDoc {
            schema_version: BUNDLE_SCHEMA_VERSION,
            classifiers: self.classifiers.iter().map(|c| c.name.clone()).collect(),
        };
        std::fs::write(dir.join(INDEX_FILE), serde_json::to_vec_pretty(&doc).expect("index serializes"))?;
        Ok(())
    }

    /// Writes one classifier bundle into `dir` and lists it in the index,
    /// replacing any classifier of the same name. Fusion layers in `dir` are
    /// removed since their weights no longer match the classifier set.
    pub fn add_classifier(dir: impl AsRef<Path>, classifier: &Classifier) -> Result<Vec<String>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let index_path = dir.join(INDEX_FILE);
        let mut names: Vec<String> = if index_path.is_file() {
            let doc: IndexDoc = serde_json::from_slice(&read(&index_path)?)
                .map_err(|e| CoreError::format(format!("invalid {INDEX_FILE}: {e}")))?;
            doc.classifiers
        } else {
            Vec::new()
        };
        if !names.contains(&classifier.name) {
            names.push(classifier.name.clone());
        }
        std::fs::write(dir.join(format!("{}{CLASSIFIER_SUFFIX}", classifier.name)), classifier.to_json())?;
        for file in [FUSION_FILE, BASELINE_FILE] {
            let p = dir.join(file);
            if p.is_file() {
                std::fs::remove_file(p)?;
            }
        }
        let doc = IndexDoc {
            schema_version: BUNDLE_SCHEMA_VERSION,
            classifiers: names.clone(),
        };
        std::fs::write(index_path, serde_json::to_vec_pretty(&doc).expect("index serializes"))?;
        Ok(names)
    }

    fn check_fusion(&self, f: &FusionModel<f64>) -> Result<()> {
        if f.inputs() != self.classifiers.len() {
            return Err(ServiceError::Config(format!(
                "fusion layer takes {} inputs but the model set has {} classifiers",
                f.inputs(),
                self.classifiers.len()
            )));
        }
        Ok(())
    }

    pub fn fusion(&self) -> Result<&FusionModel<f64>> {
        let f = self
            .fusion
            .as_ref()
            .ok_or_else(|| ServiceError::Config(format!("model set has no {FUSION_FILE}")))?;
        self.check_fusion(f)?;
        Ok(f)
    }

    pub fn has_modality(&self, m: Modality) -> bool {
        self.classifiers.iter().any(|c| c.modality() == m)
    }

    pub fn len(&self) -> usize {
        self.classifiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classifiers.is_empty()
    }
}
