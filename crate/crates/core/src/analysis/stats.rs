//! Small statistical toolkit shared by the analyses.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Summary {
    /// Treats the values as independent.
    pub fn iid(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / ((n - 1) as f64 * n as f64)).sqrt()
        };
        Self { mean, stderr, n }
    }

    /// Batch-means standard error for a correlated series; falls back to
    /// [`Summary::iid`] when there are fewer than two values per batch.
    pub fn batched(xs: &[f64], batches: usize) -> Self {
        let n = xs.len();
        if batches < 2 || n < 2 * batches {
            return Self::iid(xs);
        }
        let len = n / batches;
        let means: Vec<f64> = (0..batches).map(|b| xs[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64).collect();
        let s = Self::iid(&means);
        Self { mean: xs.iter().sum::<f64>() / n as f64, stderr: s.stderr, n }
    }
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * nf)) / (1.0 + z2 / nf);
    let half = z / (1.0 + z2 / nf) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_p(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(statistic)
}

/// Two-sample chi-square homogeneity test on histograms. Cells with fewer
/// than 10 combined counts are pooled into one cell.
pub fn chi_square_two_sample<K: Ord + Clone>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> ChiSquare {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    let keys: std::collections::BTreeSet<K> = a.keys().chain(b.keys()).cloned().collect();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for k in keys {
        let x = *a.get(&k).unwrap_or(&0) as f64;
        let y = *b.get(&k).unwrap_or(&0) as f64;
        if x + y < 10.0 {
            pooled.0 += x;
            pooled.1 += y;
        } else {
            cells.push((x, y));
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        cells.push(pooled);
    }
    if na == 0 || nb == 0 || cells.len() < 2 {
        return ChiSquare { statistic: 0.0, dof: 0, p_value: 1.0 };
    }
    let (ka, kb) = ((nb as f64 / na as f64).sqrt(), (na as f64 / nb as f64).sqrt());
    let statistic = cells.iter().map(|&(x, y)| (ka * x - kb * y).powi(2) / (x + y)).sum();
    let dof = cells.len() - 1;
    ChiSquare { statistic, dof, p_value: chi_p(statistic, dof) }
}

/// Goodness of fit of `observed` counts to cell probabilities `expected`;
/// cells with expected count below 5 are pooled.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> ChiSquare {
    let n: u64 = observed.iter().sum();
    let total: f64 = expected.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0;
    let mut pooled = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected) {
        let e = p / total * n as f64;
        if e < 5.0 {
            pooled.0 += o as f64;
            pooled.1 += e;
        } else {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pooled.1 > 0.0 {
        stat += (pooled.0 - pooled.1).powi(2) / pooled.1;
        cells += 1;
    }
    let dof = cells.max(1) - 1;
    ChiSquare { statistic: stat, dof, p_value: chi_p(stat, dof) }
}

/// Weighted isotonic (nondecreasing) regression by pool-adjacent-violators.
pub fn isotonic(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    // blocks of (mean, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 && blocks[blocks.len() - 2].0 > blocks[blocks.len() - 1].0 {
            let (m2, w2, l2) = blocks.pop().unwrap();
            let (m1, w1, l1) = blocks.pop().unwrap();
            let w = w1 + w2;
            let m = if w > 0.0 { (m1 * w1 + m2 * w2) / w } else { 0.5 * (m1 + m2) };
            blocks.push((m, w, l1 + l2));
        }
    }
    blocks.into_iter().flat_map(|(m, _, l)| std::iter::repeat_n(m, l)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_value() {
        // 10/20 at 95%: 0.5 ± 0.2101
        let (lo, hi) = wilson_interval(10, 20, 1.959964);
        assert!((lo - 0.299_298).abs() < 1e-4 && (hi - 0.700_702).abs() < 1e-4, "{lo} {hi}");
        assert_eq!(wilson_interval(0, 0, 1.96), (0.0, 1.0));
        assert!(wilson_interval(0, 500, 1.96).1 < 0.01);
    }

    #[test]
    fn pava() {
        assert_eq!(isotonic(&[1.0, 3.0, 2.0, 4.0], &[1.0; 4]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(isotonic(&[3.0, 2.0, 1.0], &[1.0, 1.0, 2.0]), vec![1.75; 3]);
    }

    #[test]
    fn summaries() {
        let s = Summary::iid(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
        let xs: Vec<f64> = (0..1000).map(|i| (i % 7) as f64).collect();
        let b = Summary::batched(&xs, 50);
        assert_eq!(b.n, 1000);
        assert!((b.mean - Summary::iid(&xs).mean).abs() < 1e-12);
    }

    #[test]
    fn chi_square_identical_histograms() {
        let a: BTreeMap<u32, u64> = [(0, 100), (1, 200), (2, 50)].into_iter().collect();
        let r = chi_square_two_sample(&a, &a);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let b: BTreeMap<u32, u64> = [(0, 200), (1, 100), (2, 50)].into_iter().collect();
        assert!(chi_square_two_sample(&a, &b).p_value < 1e-6);
        assert!((chi_square_gof(&[50, 50], &[0.5, 0.5]).p_value - 1.0).abs() < 1e-12);
    }
}
