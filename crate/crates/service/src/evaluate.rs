//! Accuracy and certified group disparity for every decision source.

use moodspring_core::fusion::{bernstein_disparity, majority_vote, DisparityReport, FusionModel};
use moodspring_core::valence::Valence;
use moodspring_core::{Error as CoreError, Group};
use serde::Serialize;

use crate::error::Result;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One labelled example as seen by the fusion stage.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub p: Vec<f64>,
    /// Whether each classifier actually saw this example (same modality).
    pub available: Vec<bool>,
    pub group: Group,
    pub label: Valence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceReport {
    pub name: String,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub n: usize,
    pub accuracy: f64,
    /// `None` when a group has fewer than two scored rows.
    pub disparity: Option<DisparityReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub delta: f64,
    pub n_rows: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub sources: Vec<SourceReport>,
}

impl EvaluationReport {
    pub fn source(&self, name: &str) -> Option<&SourceReport> {
        self.sources.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("report serializes");
        out.push(b'\n');
        out
    }
}

fn score(
    name: &str,
    kind: &'static str,
    lambda: Option<f64>,
    outcomes: impl Iterator<Item = (Group, bool)>,
    delta: f64,
) -> SourceReport {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (g, ok) in outcomes {
        match g {
            Group::A => a.push(ok),
            Group::B => b.push(ok),
        }
    }
    let n = a.len() + b.len();
    let hits = a.iter().chain(&b).filter(|&&c| c).count();
    SourceReport {
        name: name.into(),
        kind,
        lambda,
        n,
        accuracy: if n == 0 { 0.0 } else { hits as f64 / n as f64 },
        disparity: bernstein_disparity(&a, &b, delta).ok(),
    }
}

/// Scores each classifier on the rows it saw, then majority vote, the
/// baseline fusion and the fairness fusion on every row.
pub fn evaluate_rows(
    rows: &[EvalRow],
    names: &[String],
    fusion: &FusionModel<f64>,
    baseline: &FusionModel<f64>,
    delta: f64,
) -> Result<EvaluationReport> {
    if rows.is_empty() {
        return Err(CoreError::InvalidInput("evaluation manifest is empty".into()).into());
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CoreError::InvalidInput(format!("delta must lie in (0, 1), got {delta}")).into());
    }
    let mut sources = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let outcomes = rows
            .iter()
            .filter(|r| r.available[i])
            .map(|r| (r.group, Valence::from_probability(r.p[i]) == r.label));
        sources.push(score(name, "classifier", None, outcomes, delta));
    }

    let mut votes = Vec::with_capacity(rows.len());
    for r in rows {
        let probs: Vec<f64> = r.p.iter().zip(&r.available).filter(|(_, &a)| a).map(|(&p, _)| p).collect();
        let decision = if probs.is_empty() {
            Valence::from_probability(0.5)
        } else {
            let classes: Vec<Valence> = probs.iter().map(|&p| Valence::from_probability(p)).collect();
            majority_vote(&classes, &probs)?
        };
        votes.push((r.group, decision == r.label));
    }
    sources.push(score("majority-vote", "majority-vote", None, votes.into_iter(), delta));

    for (name, model) in [("fusion-baseline", baseline), ("fusion", fusion)] {
        let mut outcomes = Vec::with_capacity(rows.len());
        for r in rows {
            outcomes.push((r.group, Valence::from_probability(model.fuse(&r.p)?) == r.label));
        }
        sources.push(score(name, "fusion", Some(model.lambda), outcomes.into_iter(), delta));
    }

    Ok(EvaluationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        delta,
        n_rows: rows.len(),
        n_a: rows.iter().filter(|r| r.group == Group::A).count(),
        n_b: rows.iter().filter(|r| r.group == Group::B).count(),
        sources,
    })
}
