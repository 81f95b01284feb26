use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Manifest;
use crate::error::{Error, Result};

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

struct Stratum {
    rows: Vec<usize>,
    take: usize,
}

impl Stratum {
    fn bounds(&self) -> (usize, usize) {
        let n = self.rows.len();
        if n >= 2 {
            (1, n - 1)
        } else {
            (0, n)
        }
    }
}

/// Stratified train/test split over `(emotion, group)`.
///
/// Each stratum takes `round_half_up(n * fraction)` test rows, kept within
/// `[1, n - 1]` for strata of two or more; strata are then nudged one row at
/// a time, largest rounding error first, until the test side holds
/// `round_half_up(N * fraction)` rows or no stratum can move. Both outputs
/// keep manifest order.
pub fn split(manifest: &Manifest, test_fraction: f64, seed: u64) -> Result<(Manifest, Manifest)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut by_key: BTreeMap<_, Vec<usize>> = BTreeMap::new();
    for (i, r) in manifest.rows.iter().enumerate() {
        by_key.entry((r.emotion, r.group)).or_default().push(i);
    }
    let mut strata: Vec<Stratum> = by_key
        .into_values()
        .map(|rows| {
            let mut s = Stratum {
                take: round_half_up(rows.len() as f64 * test_fraction),
                rows,
            };
            let (lo, hi) = s.bounds();
            s.take = s.take.clamp(lo, hi);
            s
        })
        .collect();

    let target = round_half_up(manifest.len() as f64 * test_fraction);
    loop {
        let total: usize = strata.iter().map(|s| s.take).sum();
        let error = |s: &Stratum| s.take as f64 - s.rows.len() as f64 * test_fraction;
        let pick = if total > target {
            pick_max(&strata, |s| (s.take > s.bounds().0).then(|| error(s)))
        } else if total < target {
            pick_max(&strata, |s| (s.take < s.bounds().1).then(|| -error(s)))
        } else {
            break;
        };
        match pick {
            Some(i) if total > target => strata[i].take -= 1,
            Some(i) => strata[i].take += 1,
            None => break,
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut is_test = vec![false; manifest.len()];
    for s in &mut strata {
        s.rows.shuffle(&mut rng);
        for &i in &s.rows[..s.take] {
            is_test[i] = true;
        }
    }
    let side = |want: bool| Manifest {
        rows: manifest
            .rows
            .iter()
            .zip(&is_test)
            .filter(|&(_, &t)| t == want)
            .map(|(r, _)| r.clone())
            .collect(),
        base_dir: manifest.base_dir.clone(),
    };
    Ok((side(false), side(true)))
}

/// Index of the largest score; earlier strata win ties.
fn pick_max(strata: &[Stratum], score: impl Fn(&Stratum) -> Option<f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in strata.iter().enumerate() {
        if let Some(v) = score(s) {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ManifestRow, Modality};
    use crate::labels::{EmotionLabel, Group};
    use proptest::prelude::*;

    fn manifest(keys: &[(EmotionLabel, Group)]) -> Manifest {
        Manifest::new(
            keys.iter()
                .enumerate()
                .map(|(i, &(emotion, group))| ManifestRow {
                    id: format!("r{i}"),
                    source: format!("text {i}"),
                    emotion,
                    group,
                    modality: Modality::Text,
                })
                .collect(),
        )
        .unwrap()
    }

    use EmotionLabel::{Happy, Sad};
    use Group::{A, B};

    #[test]
    fn half_split_of_two_strata() {
        let m = manifest(&[(Happy, A), (Happy, A), (Sad, B), (Sad, B)]);
        let (train, test) = split(&m, 0.5, 1).unwrap();
        for side in [&train, &test] {
            assert_eq!(side.len(), 2);
            assert_eq!(side.rows.iter().filter(|r| r.emotion == Happy).count(), 1);
        }
    }

    #[test]
    fn same_seed_same_split() {
        let m = manifest(&[(Happy, A); 9]);
        assert_eq!(split(&m, 0.3, 4).unwrap(), split(&m, 0.3, 4).unwrap());
    }

    #[test]
    fn ten_rows_thirty_percent() {
        let single = manifest(&[(Happy, A); 10]);
        assert_eq!(split(&single, 0.3, 0).unwrap().1.len(), 3);
        // two strata of five each round 1.5 up to 2; the global adjust drops one
        let mut keys = vec![(Happy, A); 5];
        keys.extend([(Sad, B); 5]);
        let (train, test) = split(&manifest(&keys), 0.3, 0).unwrap();
        assert_eq!(test.len(), 3);
        assert_eq!(train.len(), 7);
    }

    #[test]
    fn rejects_bad_fraction() {
        let m = manifest(&[(Happy, A); 4]);
        assert!(split(&m, 0.0, 0).is_err());
        assert!(split(&m, 1.0, 0).is_err());
    }

    fn keys() -> impl Strategy<Value = Vec<(EmotionLabel, Group)>> {
        prop::collection::vec(
            (prop::sample::select(vec![Happy, Sad, EmotionLabel::Calm]), prop::sample::select(vec![A, B])),
            1..60,
        )
    }

    proptest! {
        #[test]
        fn split_partitions_rows(k in keys(), f in 0.05f64..0.95, seed in any::<u64>()) {
            let m = manifest(&k);
            let (train, test) = split(&m, f, seed).unwrap();
            prop_assert_eq!(train.len() + test.len(), m.len());
            let mut ids: Vec<_> = train.rows.iter().chain(&test.rows).map(|r| r.id.clone()).collect();
            ids.sort();
            ids.dedup();
            prop_assert_eq!(ids.len(), m.len());
            // strata of two or more appear on both sides
            let mut counts: BTreeMap<_, (usize, usize)> = BTreeMap::new();
            for r in &train.rows {
                counts.entry((r.emotion, r.group)).or_default().0 += 1;
            }
            for r in &test.rows {
                counts.entry((r.emotion, r.group)).or_default().1 += 1;
            }
            for (tr, te) in counts.values() {
                if tr + te >= 2 {
                    prop_assert!(*tr >= 1 && *te >= 1);
                }
            }
        }
    }
}
