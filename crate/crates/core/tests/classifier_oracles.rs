use std::f64::consts::PI;

use moodspring_core::models::{load_model, save_model, Hyperparams, ModelKind, TrainedModel};
use moodspring_core::textfeat::{tokenize, vectorize, VectorizeMode, Vocabulary};
use moodspring_core::{EmotionLabel, FeatureKind, FeatureVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO: [EmotionLabel; 2] = [EmotionLabel::Happy, EmotionLabel::Sad];

fn fv(values: Vec<f64>) -> FeatureVector<f64> {
    FeatureVector::new(values, FeatureKind::ExternalEmbedding).unwrap()
}

fn random_set(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<(FeatureVector<f64>, EmotionLabel)> {
    (0..n)
        .map(|i| {
            let label = TWO[i % 2];
            let shift = if i % 2 == 0 { 1.0 } else { -1.0 };
            let x = (0..dim).map(|_| shift + rng.random_range(-2.0..2.0)).collect();
            (fv(x), label)
        })
        .collect()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n)
}

/// Posterior by direct evaluation of prior times product of Gaussian
/// densities, in the z-scored space the model trains in.
fn brute_force_posterior(data: &[(FeatureVector<f64>, EmotionLabel)], x: &[f64]) -> Vec<f64> {
    let dim = x.len();
    let cols: Vec<(f64, f64)> = (0..dim)
        .map(|j| {
            let (m, v) = mean_var(&data.iter().map(|(f, _)| f.values[j]).collect::<Vec<_>>());
            (m, if v > 0.0 { v.sqrt() } else { 1.0 })
        })
        .collect();
    let z = |v: &[f64]| -> Vec<f64> { v.iter().zip(&cols).map(|(a, (m, s))| (a - m) / s).collect() };
    let rows: Vec<(Vec<f64>, EmotionLabel)> = data.iter().map(|(f, l)| (z(&f.values), *l)).collect();
    let max_var = (0..dim)
        .map(|j| mean_var(&rows.iter().map(|(r, _)| r[j]).collect::<Vec<_>>()).1)
        .fold(0.0, f64::max);
    let eps = 1e-9 * max_var;
    let zx = z(x);
    let joint: Vec<f64> = TWO
        .iter()
        .map(|c| {
            let members: Vec<&Vec<f64>> = rows.iter().filter(|(_, l)| l == c).map(|(r, _)| r).collect();
            let prior = members.len() as f64 / rows.len() as f64;
            (0..dim).fold(prior, |acc, j| {
                let (m, v) = mean_var(&members.iter().map(|r| r[j]).collect::<Vec<_>>());
                let v = v + eps;
                acc * (-(zx[j] - m).powi(2) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
            })
        })
        .collect();
    let total: f64 = joint.iter().sum();
    joint.iter().map(|j| j / total).collect()
}

#[test]
fn gaussian_nb_matches_brute_force_bayes() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..10 {
        let dim = 1 + case % 5;
        let data = random_set(&mut rng, 20 + case, dim);
        let model = TrainedModel::train(ModelKind::GaussianNb, &data, None, &Hyperparams::default(), 0).unwrap();
        for _ in 0..10 {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let got = model.predict_proba(&fv(x.clone())).unwrap();
            let want = brute_force_posterior(&data, &x);
            for (c, w) in TWO.iter().zip(&want) {
                assert!((got.prob(*c) - w).abs() < 1e-9, "case {case}: {} vs {w}", got.prob(*c));
            }
        }
    }
}

#[test]
fn knn_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let hyper = Hyperparams::default();
    for case in 0..50 {
        let dim = 1 + case % 4;
        let data = random_set(&mut rng, 12 + case % 7, dim);
        let model = TrainedModel::train(ModelKind::Knn, &data, None, &hyper, 0).unwrap();
        let std = model.standardizer().unwrap();
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();

        let zx = std.apply(&x);
        let mut order: Vec<(f64, usize)> = data
            .iter()
            .enumerate()
            .map(|(i, (f, _))| {
                let zf = std.apply(&f.values);
                (zf.iter().zip(&zx).map(|(a, b)| (a - b).powi(2)).sum(), i)
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = hyper.k.min(data.len());
        let happy = order[..k].iter().filter(|(_, i)| data[*i].1 == TWO[0]).count();
        let want = (happy as f64 + 1.0) / (k as f64 + 2.0);
        let got = model.predict_proba(&fv(x)).unwrap().prob(TWO[0]);
        assert!((got - want).abs() < 1e-12, "case {case}");
    }
}

#[test]
fn svm_separates_linearly_separable_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..5 {
        let dim = 2 + case;
        let normal: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut data = Vec::new();
        while data.len() < 60 {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s: f64 = x.iter().zip(&normal).map(|(a, b)| a * b).sum();
            if s.abs() > 0.2 {
                data.push((fv(x), if s > 0.0 { TWO[0] } else { TWO[1] }));
            }
        }
        let model = TrainedModel::train(ModelKind::LinearSvm, &data, None, &Hyperparams::default(), 1).unwrap();
        for (x, l) in &data {
            assert_eq!(model.predict(x).unwrap(), *l, "case {case}");
        }
    }
}

#[test]
fn text_pipeline_trains_every_kind() {
    let corpus = [
        ("what a lovely sunny day", EmotionLabel::Happy),
        ("i love this lovely song", EmotionLabel::Happy),
        ("such a wonderful happy morning", EmotionLabel::Happy),
        ("i feel so sad and alone", EmotionLabel::Sad),
        ("this is a sad and gloomy day", EmotionLabel::Sad),
        ("tears and sorrow everywhere", EmotionLabel::Sad),
    ];
    let docs: Vec<Vec<String>> = corpus.iter().map(|(t, _)| tokenize(t)).collect();
    let vocab = Vocabulary::build(&docs, 1).unwrap();
    let data: Vec<_> = docs
        .iter()
        .zip(&corpus)
        .map(|(d, (_, l))| (vectorize::<f64, _>(d, &vocab, VectorizeMode::Tfidf), *l))
        .collect();
    // six documents give Pegasos only 120 steps at the default 20 epochs
    let hyper = Hyperparams {
        k: 1,
        svm_epochs: 200,
        ..Hyperparams::default()
    };
    for kind in ModelKind::ALL {
        let model = TrainedModel::train(kind, &data, None, &hyper, 3).unwrap();
        for (x, l) in &data {
            assert_eq!(model.predict(x).unwrap(), *l, "{kind:?}");
        }
        let back: TrainedModel<f64> = load_model(&save_model(&model)).unwrap();
        assert_eq!(save_model(&back), save_model(&model));
        let probe = vectorize::<f64, _>(&tokenize("lovely wonderful love"), &vocab, VectorizeMode::Tfidf);
        assert_eq!(back.predict(&probe).unwrap(), EmotionLabel::Happy, "{kind:?}");
        let empty = vectorize::<f64, _>(&tokenize(""), &vocab, VectorizeMode::Tfidf);
        let dist = back.predict_proba(&empty).unwrap();
        assert!((dist.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn training_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let data = random_set(&mut rng, 40, 3);
    for kind in [ModelKind::GaussianNb, ModelKind::Knn, ModelKind::LinearSvm] {
        let a = TrainedModel::train(kind, &data, None, &Hyperparams::default(), 7).unwrap();
        let b = TrainedModel::train(kind, &data, None, &Hyperparams::default(), 7).unwrap();
        assert_eq!(save_model(&a), save_model(&b));
    }
}
