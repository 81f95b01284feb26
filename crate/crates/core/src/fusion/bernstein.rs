use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Empirical Bernstein deviation bound for the mean of `n` samples in
/// `[0, 1]` with sample variance `variance`:
///
/// `sqrt(2 V ln(2/δ) / n) + 7 ln(2/δ) / (3 (n - 1))`
pub fn empirical_bernstein_radius(variance: f64, n: usize, delta: f64) -> f64 {
    let log_term = (2.0 / delta).ln();
    let nf = n as f64;
    (2.0 * variance * log_term / nf).sqrt() + 7.0 * log_term / (3.0 * (nf - 1.0))
}

/// Unbiased sample variance of 0/1 outcomes.
fn sample_variance(correct: &[bool]) -> f64 {
    let n = correct.len() as f64;
    let mean = correct.iter().filter(|&&c| c).count() as f64 / n;
    correct
        .iter()
        .map(|&c| {
            let d = f64::from(u8::from(c)) - mean;
            d * d
        })
        .sum::<f64>()
        / (n - 1.0)
}

/// Group accuracy gap with a certified interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisparityReport {
    pub acc_a: f64,
    pub acc_b: f64,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub bound_a: f64,
    pub bound_b: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub delta: f64,
}

pub fn bernstein_disparity(correct_a: &[bool], correct_b: &[bool], delta: f64) -> Result<DisparityReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    for (name, xs) in [("A", correct_a), ("B", correct_b)] {
        if xs.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "group {name} has {} examples; need at least 2",
                xs.len()
            )));
        }
    }
    let acc = |xs: &[bool]| xs.iter().filter(|&&c| c).count() as f64 / xs.len() as f64;
    let (acc_a, acc_b) = (acc(correct_a), acc(correct_b));
    let bound_a = empirical_bernstein_radius(sample_variance(correct_a), correct_a.len(), delta);
    let bound_b = empirical_bernstein_radius(sample_variance(correct_b), correct_b.len(), delta);
    let point = (acc_a - acc_b).abs();
    Ok(DisparityReport {
        acc_a,
        acc_b,
        point,
        lower: (point - bound_a - bound_b).max(0.0),
        upper: point + bound_a + bound_b,
        bound_a,
        bound_b,
        n_a: correct_a.len(),
        n_b: correct_b.len(),
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_correct_hand_value() {
        let b = empirical_bernstein_radius(0.0, 101, 0.05);
        assert!((b - 0.086_073_8).abs() < 1e-6, "{b}");
        let r = bernstein_disparity(&[true; 101], &[true; 101], 0.05).unwrap();
        assert_eq!(r.point, 0.0);
        assert_eq!(r.lower, 0.0);
        assert!((r.upper - 2.0 * b).abs() < 1e-15);
    }

    #[test]
    fn variance_is_unbiased() {
        // one failure in four: mean 0.75, sum of squares 0.75, / 3
        assert!((sample_variance(&[true, true, true, false]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn too_few_examples() {
        assert!(matches!(
            bernstein_disparity(&[true], &[true, false], 0.05),
            Err(Error::InsufficientData(_))
        ));
        assert!(bernstein_disparity(&[true, true], &[true, false], 1.0).is_err());
    }

    #[test]
    fn interval_brackets_point() {
        let a = [true, true, false, true, true, true, false, true];
        let b = [false, true, false, false, true, false];
        let r = bernstein_disparity(&a, &b, 0.1).unwrap();
        assert!((r.point - (0.75 - 2.0 / 6.0)).abs() < 1e-15);
        assert!(r.lower <= r.point && r.point <= r.upper);
        assert!(r.lower >= 0.0);
    }
}
