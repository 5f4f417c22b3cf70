//! Small statistics helpers: moments and a binned chi-square test.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Minimum expected count per bin before adjacent bins are merged.
pub const MIN_EXPECTED: f64 = 5.0;

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (`n - 1` denominator); 0 for fewer than two values.
pub fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Standard error of the mean of independent replicas.
pub fn std_error(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    sample_sd(v) / (v.len() as f64).sqrt()
}

/// Result of a goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Pearson test of `observed` counts against cell probabilities `probs`.
///
/// Cells are merged left to right until each group expects at least
/// [`MIN_EXPECTED`] counts; a short final group joins its predecessor. An
/// observation in a cell of probability zero gives `p = 0`.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> ChiSquare {
    assert_eq!(observed.len(), probs.len(), "one probability per cell");
    let total: u64 = observed.iter().sum();
    if observed.iter().zip(probs).any(|(&o, &p)| o > 0 && p <= 0.0) {
        return ChiSquare { statistic: f64::INFINITY, df: 0, p_value: 0.0 };
    }
    let n = total as f64;
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut exp, mut obs) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        exp += p * n;
        obs += o as f64;
        if exp >= MIN_EXPECTED {
            groups.push((exp, obs));
            exp = 0.0;
            obs = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += exp;
                last.1 += obs;
            }
            None => groups.push((exp, obs)),
        }
    }
    if groups.len() < 2 {
        return ChiSquare { statistic: 0.0, df: 0, p_value: 1.0 };
    }
    let statistic: f64 = groups.iter().map(|&(e, o)| (o - e).powi(2) / e).sum();
    let df = groups.len() - 1;
    let p_value = ChiSquared::new(df as f64).map(|d| d.sf(statistic)).unwrap_or(0.0);
    ChiSquare { statistic, df, p_value }
}
