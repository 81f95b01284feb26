use serde::{Deserialize, Serialize};

use super::{ModelParams, Standardizer, TrainedModel};
use crate::error::{Error, Result};
use crate::labels::EmotionLabel;
use crate::scalar::Scalar;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct ModelDocument<T> {
    schema_version: u32,
    #[serde(flatten)]
    params: ModelParams<T>,
    classes: Vec<EmotionLabel>,
    dim: usize,
    standardizer: Option<Standardizer<T>>,
}

/// Reads and checks `schema_version` before anything else.
pub(crate) fn check_schema(bytes: &[u8], supported: u32) -> Result<serde_json::Value> {
    let value: serde_json::Value = serde_json::from_slice(bytes)
        .map_err(|e| Error::format(format!("corrupt payload: {e}")))?;
    let version = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::format("missing schema_version"))?;
    if version != u64::from(supported) {
        return Err(Error::format(format!(
            "unsupported schema_version {version} (this build reads version {supported})"
        )));
    }
    Ok(value)
}

pub fn save_model<T: Scalar>(model: &TrainedModel<T>) -> Vec<u8> {
    let doc = ModelDocument {
        schema_version: MODEL_SCHEMA_VERSION,
        params: model.params.clone(),
        classes: model.classes.clone(),
        dim: model.dim,
        standardizer: model.standardizer.clone(),
    };
    serde_json::to_vec_pretty(&doc).expect("model serializes")
}

pub fn load_model<T: Scalar>(bytes: &[u8]) -> Result<TrainedModel<T>> {
    let value = check_schema(bytes, MODEL_SCHEMA_VERSION)?;
    let doc: ModelDocument<T> = serde_json::from_value(value)
        .map_err(|e| Error::format(format!("invalid model document: {e}")))?;
    validate(&doc)?;
    Ok(TrainedModel {
        classes: doc.classes,
        dim: doc.dim,
        standardizer: doc.standardizer,
        params: doc.params,
    })
}

fn validate<T: Scalar>(doc: &ModelDocument<T>) -> Result<()> {
    let (c, d) = (doc.classes.len(), doc.dim);
    let bad = |what: &str| Err(Error::format(format!("parameter shape mismatch: {what}")));
    if c == 0 || d == 0 {
        return bad("empty class set or zero dim");
    }
    if doc.classes.windows(2).any(|w| w[0] >= w[1]) {
        return bad("classes must be unique and in taxonomy order");
    }
    if let Some(s) = &doc.standardizer {
        if s.mean.len() != d || s.std.len() != d || s.std.iter().any(|&v| v.is_nan() || v <= T::zero()) {
            return bad("standardizer");
        }
    }
    let finite = |xs: &[T]| xs.iter().all(|v| v.is_finite());
    let ok = match &doc.params {
        ModelParams::GaussianNb(m) => {
            m.dim == d
                && m.priors.len() == c
                && m.means.len() == c * d
                && m.variances.len() == c * d
                && m.variances.iter().all(|&v| v > T::zero())
                && finite(&m.means)
        }
        ModelParams::MultinomialNb(m) => {
            m.dim == d
                && m.class_log_prior.len() == c
                && m.feature_log_prob.len() == c * d
                && finite(&m.feature_log_prob)
        }
        ModelParams::Knn(m) => {
            m.dim == d
                && m.n_classes == c
                && m.k > 0
                && !m.labels.is_empty()
                && m.points.len() == m.labels.len() * d
                && m.labels.iter().all(|&l| l < c)
                && finite(&m.points)
        }
        ModelParams::LinearSvm(m) => {
            m.dim == d
                && m.weights.len() == c * d
                && m.bias.len() == c
                && finite(&m.weights)
                && finite(&m.bias)
        }
    };
    if ok {
        Ok(())
    } else {
        bad(doc.params.kind().as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureKind, FeatureVector};
    use crate::models::{Hyperparams, ModelKind};
    use EmotionLabel::{Calm, Fearful, Happy};

    fn data() -> Vec<(FeatureVector<f64>, EmotionLabel)> {
        let pts = [
            ([0.1, 0.9, 0.3], Happy),
            ([0.2, 0.8, 0.1], Happy),
            ([1.7, 0.1, 0.4], Fearful),
            ([1.5, 0.3, 0.2], Fearful),
            ([0.9, 0.5, 2.2], Calm),
            ([1.1, 0.4, 2.0], Calm),
        ];
        pts.iter()
            .map(|(x, l)| (FeatureVector::new(x.to_vec(), FeatureKind::Tfidf).unwrap(), *l))
            .collect()
    }

    #[test]
    fn every_kind_round_trips_bitwise() {
        let probes = [[0.3, 0.3, 0.3], [1.6, 0.2, 0.3], [0.123456789, 7.0, 1e-7]];
        for kind in ModelKind::ALL {
            let m = TrainedModel::train(kind, &data(), None, &Hyperparams::default(), 11).unwrap();
            let back: TrainedModel<f64> = load_model(&save_model(&m)).unwrap();
            assert_eq!(back, m, "{kind}");
            for p in probes {
                let a = m.predict_proba_slice(&p).unwrap();
                let b = back.predict_proba_slice(&p).unwrap();
                assert!(a.probs.iter().zip(&b.probs).all(|(x, y)| x.to_bits() == y.to_bits()));
            }
        }
    }

    #[test]
    fn single_precision_round_trip() {
        let d: Vec<(FeatureVector<f32>, EmotionLabel)> = data()
            .into_iter()
            .map(|(x, l)| {
                let v = x.values.iter().map(|&v| v as f32).collect();
                (FeatureVector::new(v, x.kind).unwrap(), l)
            })
            .collect();
        let m = TrainedModel::train(ModelKind::LinearSvm, &d, None, &Hyperparams::default(), 1)
            .unwrap();
        assert_eq!(load_model::<f32>(&save_model(&m)).unwrap(), m);
    }

    #[test]
    fn document_is_self_describing() {
        let m = TrainedModel::train(ModelKind::Knn, &data(), None, &Hyperparams::default(), 0)
            .unwrap();
        let v: serde_json::Value = serde_json::from_slice(&save_model(&m)).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["kind"], "knn");
        assert_eq!(v["classes"], serde_json::json!(["calm", "happy", "fearful"]));
        assert!(v["parameters"]["points"].is_array());
        assert!(v["standardizer"]["mean"].is_array());
    }

    #[test]
    fn truncated_payload_is_format_error() {
        let m = TrainedModel::train(ModelKind::GaussianNb, &data(), None, &Hyperparams::default(), 0)
            .unwrap();
        let bytes = save_model(&m);
        let err = load_model::<f64>(&bytes[..bytes.len() / 2]).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
    }

    #[test]
    fn unknown_version_names_both_versions() {
        let m = TrainedModel::train(ModelKind::GaussianNb, &data(), None, &Hyperparams::default(), 0)
            .unwrap();
        let mut v: serde_json::Value = serde_json::from_slice(&save_model(&m)).unwrap();
        v["schema_version"] = 7.into();
        let err = load_model::<f64>(&serde_json::to_vec(&v).unwrap()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('7') && msg.contains('1'), "{msg}");
    }

    #[test]
    fn shape_mismatch_is_format_error() {
        let m = TrainedModel::train(ModelKind::LinearSvm, &data(), None, &Hyperparams::default(), 0)
            .unwrap();
        let mut v: serde_json::Value = serde_json::from_slice(&save_model(&m)).unwrap();
        v["parameters"]["bias"] = serde_json::json!([0.0]);
        assert!(load_model::<f64>(&serde_json::to_vec(&v).unwrap()).is_err());
    }
}
