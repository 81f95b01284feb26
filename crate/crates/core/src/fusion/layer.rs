//! Single fully connected fusion layer trained against cross-entropy plus a
//! differentiable group-disparity penalty.
//!
//! For per-example losses `l_i` the objective is
//!
//! ```text
//! L = mean(l) + lambda * U
//! U = softabs(mean_A(l) - mean_B(l))
//!     + sqrt(2 V_A ln(2/delta) / n_A) + sqrt(2 V_B ln(2/delta) / n_B)
//! ```
//!
//! where `V_g` is the biased variance of the losses in group `g` and
//! `softabs(x) = sqrt(x^2 + 1e-8)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::Group;
use crate::models::persist_check_schema;
use crate::scalar::{sigmoid, softplus, Scalar};
use crate::valence::Valence;

pub const FUSION_SCHEMA_VERSION: u32 = 1;

const SOFTABS_EPS: f64 = 1e-8;

/// One row of fusion data: per-classifier `p_pleasant` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionInput<T> {
    pub p: Vec<T>,
    pub group: Group,
    pub label: Option<Valence>,
}

impl<T: Scalar> FusionInput<T> {
    pub fn new(p: Vec<T>, group: Group, label: Option<Valence>) -> Self {
        Self { p, group, label }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    pub lambda: f64,
    pub lr: f64,
    pub epochs: usize,
    pub delta: f64,
    pub seed: u64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            lr: 0.1,
            epochs: 500,
            delta: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Iteration whose parameters were kept (0 is the zero initialization).
    pub best_epoch: usize,
    pub best_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FusionModel<T> {
    pub w: Vec<T>,
    pub b: T,
    pub lambda: f64,
    pub delta: f64,
    pub meta: Option<TrainingMeta>,
}

impl<T: Scalar> FusionModel<T> {
    /// Untrained model with explicit parameters.
    pub fn new(w: Vec<T>, b: T) -> Self {
        Self {
            w,
            b,
            lambda: 0.0,
            delta: 0.05,
            meta: None,
        }
    }

    pub fn zeros(m: usize) -> Self {
        Self::new(vec![T::zero(); m], T::zero())
    }

    pub fn inputs(&self) -> usize {
        self.w.len()
    }

    fn logit(&self, p: &[T]) -> T {
        self.w.iter().zip(p).map(|(&w, &x)| w * x).sum::<T>() + self.b
    }

    /// `sigmoid(w . p + b)`.
    pub fn fuse(&self, p: &[T]) -> Result<T> {
        if p.len() != self.w.len() {
            return Err(Error::invalid(format!(
                "fusion expects {} inputs, got {}",
                self.w.len(),
                p.len()
            )));
        }
        if let Some(i) = p.iter().position(|&x| !(x >= T::zero() && x <= T::one())) {
            return Err(Error::invalid(format!("input {i} is not a probability")));
        }
        Ok(sigmoid(self.logit(p)))
    }

    pub fn to_json(&self) -> Vec<u8> {
        #[derive(Serialize)]
        #[serde(bound = "T: Scalar")]
        struct Doc<'a, T> {
            schema_version: u32,
            kind: &'static str,
            #[serde(flatten)]
            model: &'a FusionModel<T>,
        }
        serde_json::to_vec_pretty(&Doc {
            schema_version: FUSION_SCHEMA_VERSION,
            kind: "fusion",
            model: self,
        })
        .expect("fusion model serializes")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let mut value = persist_check_schema(bytes, FUSION_SCHEMA_VERSION)?;
        if value.get("kind").and_then(|k| k.as_str()) != Some("fusion") {
            return Err(Error::format("document is not a fusion model"));
        }
        if let Some(obj) = value.as_object_mut() {
            obj.remove("schema_version");
            obj.remove("kind");
        }
        let model: Self = serde_json::from_value(value)
            .map_err(|e| Error::format(format!("invalid fusion model: {e}")))?;
        if model.w.is_empty() || !model.w.iter().all(|v| v.is_finite()) || !model.b.is_finite() {
            return Err(Error::format("fusion parameters must be finite and non-empty"));
        }
        Ok(model)
    }
}

/// Loss value with its components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown<T> {
    pub total: T,
    pub cross_entropy: T,
    /// Disparity surrogate `U`; `None` when a group has fewer than two rows.
    pub unfairness: Option<T>,
    pub group_loss_gap: Option<T>,
    /// `U` with the loss gap set to zero.
    pub variance_floor: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient<T> {
    pub dw: Vec<T>,
    pub db: T,
}

struct GroupStats<T> {
    n: usize,
    mean: T,
    var: T,
    d_mean: Vec<T>,
    d_var: Vec<T>,
}

fn validate_batch<T: Scalar>(m: usize, batch: &[FusionInput<T>], lambda: f64, delta: f64) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::invalid("fusion batch is empty"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("fairness weight must be finite and non-negative"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta must lie in (0, 1)"));
    }
    for (i, row) in batch.iter().enumerate() {
        if row.p.len() != m {
            return Err(Error::invalid(format!("row {i} has {} inputs, expected {m}", row.p.len())));
        }
        if row.p.iter().any(|&x| !(x >= T::zero() && x <= T::one())) {
            return Err(Error::invalid(format!("row {i} holds a value outside [0, 1]")));
        }
        if row.label.is_none() {
            return Err(Error::invalid(format!("row {i} has no label")));
        }
    }
    if lambda > 0.0 {
        for g in [Group::A, Group::B] {
            let n = batch.iter().filter(|r| r.group == g).count();
            if n < 2 {
                return Err(Error::InsufficientGroups(format!(
                    "group {g} has {n} rows; fairness training needs at least 2 per group"
                )));
            }
        }
    }
    Ok(())
}

/// Loss and analytic gradient at `(w, b)`. Assumes a validated batch.
fn evaluate<T: Scalar>(
    w: &[T],
    b: T,
    batch: &[FusionInput<T>],
    lambda: f64,
    delta: f64,
) -> (LossBreakdown<T>, Gradient<T>) {
    let m = w.len();
    let n = batch.len();
    // per-example loss and its gradient; last slot is d/db
    let mut losses = Vec::with_capacity(n);
    let mut grads = Vec::with_capacity(n);
    for row in batch {
        let y = row.label.expect("validated").indicator::<T>();
        let z = w.iter().zip(&row.p).map(|(&wi, &x)| wi * x).sum::<T>() + b;
        losses.push(softplus(z) - y * z);
        let r = sigmoid(z) - y;
        let mut g: Vec<T> = row.p.iter().map(|&x| r * x).collect();
        g.push(r);
        grads.push(g);
    }

    let mean_grad = |idx: &[usize]| -> Vec<T> {
        let k = T::from_count(idx.len());
        (0..=m)
            .map(|j| idx.iter().map(|&i| grads[i][j]).sum::<T>() / k)
            .collect()
    };
    let all: Vec<usize> = (0..n).collect();
    let ce = losses.iter().copied().sum::<T>() / T::from_count(n);
    let mut total_grad = mean_grad(&all);

    let stats = |g: Group| -> Option<GroupStats<T>> {
        let idx: Vec<usize> = (0..n).filter(|&i| batch[i].group == g).collect();
        if idx.len() < 2 {
            return None;
        }
        let k = T::from_count(idx.len());
        let mean = idx.iter().map(|&i| losses[i]).sum::<T>() / k;
        let var = idx
            .iter()
            .map(|&i| (losses[i] - mean) * (losses[i] - mean))
            .sum::<T>()
            / k;
        let two = T::lit(2.0);
        let d_var = (0..=m)
            .map(|j| two * idx.iter().map(|&i| (losses[i] - mean) * grads[i][j]).sum::<T>() / k)
            .collect();
        Some(GroupStats {
            n: idx.len(),
            mean,
            var,
            d_mean: mean_grad(&idx),
            d_var,
        })
    };

    let mut breakdown = LossBreakdown {
        total: ce,
        cross_entropy: ce,
        unfairness: None,
        group_loss_gap: None,
        variance_floor: None,
    };

    if let (Some(a), Some(bs)) = (stats(Group::A), stats(Group::B)) {
        let log_term = T::lit((2.0 / delta).ln());
        let two = T::lit(2.0);
        let lam = T::lit(lambda);
        let gap = a.mean - bs.mean;
        let soft = (gap * gap + T::lit(SOFTABS_EPS)).sqrt();
        let mut floor = T::zero();
        let mut d_u: Vec<T> = a
            .d_mean
            .iter()
            .zip(&bs.d_mean)
            .map(|(&da, &db)| gap / soft * (da - db))
            .collect();
        for s in [&a, &bs] {
            let c = (two * log_term / T::from_count(s.n)).sqrt();
            let root = s.var.sqrt();
            floor += c * root;
            // sqrt(V) has no derivative at V = 0; use the zero subgradient
            if root > T::zero() {
                for (du, &dv) in d_u.iter_mut().zip(&s.d_var) {
                    *du += c * dv / (two * root);
                }
            }
        }
        let u = soft + floor;
        breakdown.unfairness = Some(u);
        breakdown.group_loss_gap = Some(gap);
        breakdown.variance_floor = Some(T::lit(SOFTABS_EPS).sqrt() + floor);
        if lambda > 0.0 {
            breakdown.total = ce + lam * u;
            for (g, du) in total_grad.iter_mut().zip(d_u) {
                *g += lam * du;
            }
        }
    }

    let db = total_grad.pop().expect("bias slot");
    (breakdown, Gradient { dw: total_grad, db })
}

/// Loss components of `model` on a labelled batch.
pub fn fusion_loss<T: Scalar>(model: &FusionModel<T>, batch: &[FusionInput<T>], lambda: f64) -> Result<LossBreakdown<T>> {
    validate_batch(model.inputs(), batch, lambda, model.delta)?;
    Ok(evaluate(&model.w, model.b, batch, lambda, model.delta).0)
}

/// Analytic gradient of the full objective with respect to `(w, b)`.
pub fn gradient<T: Scalar>(model: &FusionModel<T>, batch: &[FusionInput<T>], lambda: f64) -> Result<Gradient<T>> {
    validate_batch(model.inputs(), batch, lambda, model.delta)?;
    let (loss, grad) = evaluate(&model.w, model.b, batch, lambda, model.delta);
    if !loss.total.is_finite() || grad.dw.iter().any(|g| !g.is_finite()) || !grad.db.is_finite() {
        return Err(Error::Numerical("non-finite loss or gradient".into()));
    }
    Ok(grad)
}

/// Trained model plus the loss observed before each update and after the
/// last one (`epochs + 1` values).
#[derive(Debug, Clone, PartialEq)]
pub struct FusionTrace<T> {
    pub model: FusionModel<T>,
    pub losses: Vec<T>,
}

/// Full-batch gradient descent from `w = 0, b = 0`, keeping the parameters
/// with the lowest observed loss.
pub fn train_fusion<T: Scalar>(data: &[FusionInput<T>], cfg: &FusionConfig) -> Result<FusionModel<T>> {
    train_fusion_traced(data, cfg).map(|t| t.model)
}

pub fn train_fusion_traced<T: Scalar>(data: &[FusionInput<T>], cfg: &FusionConfig) -> Result<FusionTrace<T>> {
    let m = data.first().map_or(0, |r| r.p.len());
    if m == 0 {
        return Err(Error::invalid("fusion training needs at least one input column"));
    }
    validate_batch(m, data, cfg.lambda, cfg.delta)?;
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
        return Err(Error::Config("learning rate must be positive".into()));
    }

    let lr = T::lit(cfg.lr);
    let mut w = vec![T::zero(); m];
    let mut b = T::zero();
    let mut best = (T::infinity(), w.clone(), b, 0usize);
    let mut losses = Vec::with_capacity(cfg.epochs + 1);

    for epoch in 0..=cfg.epochs {
        let (loss, grad) = evaluate(&w, b, data, cfg.lambda, cfg.delta);
        if !loss.total.is_finite() {
            return Err(Error::Numerical(format!("loss became non-finite at epoch {epoch}")));
        }
        losses.push(loss.total);
        if loss.total < best.0 {
            best = (loss.total, w.clone(), b, epoch);
        }
        if epoch == cfg.epochs {
            break;
        }
        for (wi, gi) in w.iter_mut().zip(&grad.dw) {
            *wi -= lr * *gi;
        }
        b -= lr * grad.db;
    }

    let (best_loss, w, b, best_epoch) = best;
    Ok(FusionTrace {
        model: FusionModel {
            w,
            b,
            lambda: cfg.lambda,
            delta: cfg.delta,
            meta: Some(TrainingMeta {
                lr: cfg.lr,
                epochs: cfg.epochs,
                seed: cfg.seed,
                best_epoch,
                best_loss: best_loss.as_f64(),
            }),
        },
        losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Valence::{Pleasant as P, Unpleasant as U};

    fn row(p: &[f64], g: Group, y: Valence) -> FusionInput<f64> {
        FusionInput::new(p.to_vec(), g, Some(y))
    }

    #[test]
    fn fuse_examples() {
        assert_eq!(FusionModel::<f64>::zeros(3).fuse(&[0.2, 0.9, 1.0]).unwrap(), 0.5);
        let m = FusionModel::<f64>::new(vec![1.0, 1.0], -1.0);
        assert!((m.fuse(&[1.0, 1.0]).unwrap() - 0.731_058_6).abs() < 1e-6);
        let m = FusionModel::<f64>::new(vec![10.0, 10.0], -10.0);
        assert!((m.fuse(&[1.0, 1.0]).unwrap() - 0.999_954_6).abs() < 1e-7);
        assert!(m.fuse(&[1.0]).is_err());
        assert!(m.fuse(&[1.0, 1.5]).is_err());
    }

    #[test]
    fn zero_model_bias_gradient() {
        let batch = vec![
            row(&[0.9, 0.2], Group::A, P),
            row(&[0.1, 0.7], Group::A, U),
            row(&[0.8, 0.4], Group::B, P),
            row(&[0.3, 0.3], Group::B, U),
        ];
        let g = gradient(&FusionModel::zeros(2), &batch, 0.0).unwrap();
        // mean(0.5 - y) over two pleasant and two unpleasant rows
        assert_eq!(g.db, 0.0);
        let skewed = vec![batch[0].clone(), batch[2].clone(), batch[3].clone()];
        let g = gradient(&FusionModel::zeros(2), &skewed, 0.0).unwrap();
        assert!((g.db - (-0.5 - 0.5 + 0.5) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn duplicating_rows_keeps_gradient() {
        let batch = vec![
            row(&[0.9, 0.2], Group::A, P),
            row(&[0.1, 0.7], Group::A, U),
            row(&[0.6, 0.4], Group::A, U),
            row(&[0.8, 0.4], Group::B, P),
            row(&[0.3, 0.3], Group::B, U),
            row(&[0.35, 0.9], Group::B, P),
        ];
        let model = FusionModel::new(vec![0.7, -1.2], 0.3);
        let doubled: Vec<_> = batch.iter().chain(&batch).cloned().collect();
        // the Bernstein terms scale with 1/sqrt(n_g), so the claim holds for lambda = 0
        let a = gradient(&model, &batch, 0.0).unwrap();
        let b = gradient(&model, &doubled, 0.0).unwrap();
        for (x, y) in a.dw.iter().zip(&b.dw) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!((a.db - b.db).abs() < 1e-15);
    }

    #[test]
    fn single_group_with_fairness_is_rejected() {
        let batch = vec![row(&[0.9], Group::A, P), row(&[0.1], Group::A, U)];
        let cfg = FusionConfig::default();
        assert!(matches!(train_fusion(&batch, &cfg), Err(Error::InsufficientGroups(_))));
        let cfg = FusionConfig {
            lambda: 0.0,
            ..FusionConfig::default()
        };
        assert!(train_fusion(&batch, &cfg).is_ok());
    }

    #[test]
    fn unlabelled_rows_are_rejected() {
        let batch = vec![FusionInput::new(vec![0.5], Group::A, None)];
        assert!(gradient(&FusionModel::zeros(1), &batch, 0.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let batch = vec![
            row(&[0.9, 0.2], Group::A, P),
            row(&[0.1, 0.7], Group::A, U),
            row(&[0.8, 0.4], Group::B, P),
            row(&[0.3, 0.3], Group::B, U),
        ];
        let m = train_fusion(&batch, &FusionConfig { epochs: 20, ..Default::default() }).unwrap();
        let back = FusionModel::<f64>::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let v: serde_json::Value = serde_json::from_slice(&m.to_json()).unwrap();
        assert_eq!(v["kind"], "fusion");
        assert_eq!(v["schema_version"], 1);

        let mut v = v;
        v["schema_version"] = 2.into();
        assert!(FusionModel::<f64>::from_json(&serde_json::to_vec(&v).unwrap()).is_err());
        assert!(FusionModel::<f64>::from_json(b"{\"schema_version\":1").is_err());
    }
}
