//! Manifest-driven training and evaluation behind the CLI.

use std::collections::HashMap;
use std::path::PathBuf;

use moodspring_core::data::{load_embedding_table, read_wav, EmbeddingTable, Manifest, ManifestRow, Modality};
use moodspring_core::dsp::{AudioClip, MfccConfig};
use moodspring_core::fusion::{train_fusion, FusionConfig, FusionInput};
use moodspring_core::models::{Hyperparams, ModelKind, TrainedModel};
use moodspring_core::textfeat::{tokenize, VectorizeMode, Vocabulary};
use moodspring_core::valence::ValenceMapping;
use moodspring_core::{Error as CoreError, FeatureVector};

use crate::error::{Result, ServiceError};
use crate::evaluate::{evaluate_rows, EvalRow, EvaluationReport};
use crate::modelset::{Classifier, Featurizer, FeaturizerSpec, ModelSet};
use crate::session::NEUTRAL_P;

/// Options for fitting one classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub modality: Modality,
    pub kind: ModelKind,
    pub hyper: Hyperparams,
    pub seed: u64,
    pub min_df: usize,
    pub text_mode: VectorizeMode,
    pub mfcc: MfccConfig,
}

impl TrainOptions {
    pub fn new(modality: Modality, kind: ModelKind) -> Self {
        Self {
            modality,
            kind,
            hyper: Hyperparams::default(),
            seed: 0,
            min_df: 1,
            text_mode: VectorizeMode::Tfidf,
            mfcc: MfccConfig::default(),
        }
    }

    pub fn name(&self) -> String {
        format!("{}-{}", self.modality, self.kind.as_str())
    }
}

/// Loads manifest sources, caching embedding tables by path.
#[derive(Default)]
pub struct SourceLoader {
    tables: HashMap<PathBuf, EmbeddingTable<f64>>,
}

impl SourceLoader {
    pub fn audio(&self, manifest: &Manifest, row: &ManifestRow) -> Result<AudioClip<f64>> {
        Ok(read_wav(manifest.resolve(&row.source))?)
    }

    pub fn embedding(&mut self, manifest: &Manifest, row: &ManifestRow) -> Result<FeatureVector<f64>> {
        let (table, id) = row
            .embedding_ref()
            .ok_or_else(|| CoreError::format(format!("row `{}`: embedding source must be `path#id`", row.id)))?;
        let path = manifest.resolve(table);
        if !self.tables.contains_key(&path) {
            let t = load_embedding_table(&path)?;
            self.tables.insert(path.clone(), t);
        }
        self.tables[&path]
            .get(id)
            .ok_or_else(|| CoreError::format(format!("row `{}`: no embedding `{id}` in {}", row.id, path.display())).into())
    }

    /// Features for a row the classifier can take.
    pub fn featurize(&mut self, manifest: &Manifest, row: &ManifestRow, f: &Featurizer) -> Result<FeatureVector<f64>> {
        match row.modality {
            Modality::Text => f.text(&row.source),
            Modality::Audio => f.audio(&self.audio(manifest, row)?),
            Modality::Embedding => f.embedding(self.embedding(manifest, row)?),
        }
    }
}

pub fn train_classifier(manifest: &Manifest, opts: &TrainOptions) -> Result<Classifier> {
    let rows: Vec<&ManifestRow> = manifest.of_modality(opts.modality).collect();
    if rows.is_empty() {
        return Err(CoreError::InsufficientData(format!("manifest has no {} rows", opts.modality)).into());
    }
    let mut loader = SourceLoader::default();
    let spec = match opts.modality {
        Modality::Text => {
            let docs: Vec<Vec<String>> = rows.iter().map(|r| tokenize(&r.source)).collect();
            FeaturizerSpec::Text {
                vocabulary: Vocabulary::build(&docs, opts.min_df)?,
                mode: opts.text_mode,
            }
        }
        Modality::Audio => FeaturizerSpec::Mfcc {
            mfcc: opts.mfcc.clone(),
            deltas: true,
        },
        Modality::Embedding => FeaturizerSpec::Embedding {
            dim: loader.embedding(manifest, rows[0])?.dim(),
        },
    };
    let featurizer = Featurizer::build(&spec)?;
    let data = rows
        .iter()
        .map(|r| Ok((loader.featurize(manifest, r, &featurizer)?, r.emotion)))
        .collect::<Result<Vec<_>>>()?;
    let model = TrainedModel::train(opts.kind, &data, None, &opts.hyper, opts.seed)?;
    Classifier::new(opts.name(), spec, model)
}

/// Per-classifier `p_pleasant` for every row; classifiers of another
/// modality contribute the neutral value.
pub fn eval_rows(manifest: &Manifest, models: &ModelSet, mapping: &ValenceMapping) -> Result<Vec<EvalRow>> {
    let mut loader = SourceLoader::default();
    let mut audio_cache: Option<(String, AudioClip<f64>)> = None;
    manifest
        .rows
        .iter()
        .map(|row| {
            let mut p = Vec::with_capacity(models.len());
            let mut available = Vec::with_capacity(models.len());
            for c in &models.classifiers {
                if c.modality() != row.modality {
                    p.push(NEUTRAL_P);
                    available.push(false);
                    continue;
                }
                let x = if row.modality == Modality::Audio {
                    if audio_cache.as_ref().is_none_or(|(id, _)| id != &row.id) {
                        audio_cache = Some((row.id.clone(), loader.audio(manifest, row)?));
                    }
                    c.featurizer.audio(&audio_cache.as_ref().expect("just filled").1)?
                } else {
                    loader.featurize(manifest, row, &c.featurizer)?
                };
                p.push(c.p_pleasant(&x, mapping)?);
                available.push(true);
            }
            Ok(EvalRow {
                p,
                available,
                group: row.group,
                label: mapping.of(row.emotion),
            })
        })
        .collect()
}

/// Trains the fairness fusion layer with `cfg` and a baseline with the same
/// settings and no fairness term.
pub fn train_fusion_pair(
    manifest: &Manifest,
    models: &mut ModelSet,
    mapping: &ValenceMapping,
    cfg: &FusionConfig,
) -> Result<()> {
    let inputs: Vec<FusionInput<f64>> = eval_rows(manifest, models, mapping)?
        .into_iter()
        .map(|r| FusionInput::new(r.p, r.group, Some(r.label)))
        .collect();
    models.fusion = Some(train_fusion(&inputs, cfg)?);
    let baseline = FusionConfig {
        lambda: 0.0,
        ..cfg.clone()
    };
    models.baseline = Some(train_fusion(&inputs, &baseline)?);
    Ok(())
}

pub fn evaluate_manifest(
    manifest: &Manifest,
    models: &ModelSet,
    mapping: &ValenceMapping,
    delta: f64,
) -> Result<EvaluationReport> {
    let fusion = models.fusion()?;
    let baseline = models
        .baseline
        .as_ref()
        .ok_or_else(|| ServiceError::Config("model set has no baseline fusion layer".into()))?;
    let rows = eval_rows(manifest, models, mapping)?;
    let names: Vec<String> = models.classifiers.iter().map(|c| c.name.clone()).collect();
    evaluate_rows(&rows, &names, fusion, baseline, delta)
}
