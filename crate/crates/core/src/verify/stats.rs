//! Statistical primitives: Wilson intervals and chi-square tests.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::pmf::{LatticePmf, Weight};

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(p)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0);
    assert!((0.0..1.0).contains(&confidence) && confidence > 0.0);
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Chi-square critical value at upper-tail probability `alpha`.
pub fn chi_square_critical(df: f64, alpha: f64) -> f64 {
    ChiSquared::new(df).unwrap().inverse_cdf(1.0 - alpha)
}

/// Upper-tail p-value of a chi-square statistic.
pub fn chi_square_p_value(stat: f64, df: f64) -> f64 {
    if df <= 0.0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

/// Result of a chi-square test.
#[derive(Debug, Clone, Copy)]
pub struct ChiSquareResult {
    pub stat: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Goodness-of-fit test of integer samples against an exact law. Adjacent
/// support points are pooled until every expected count reaches 5; samples
/// outside the support are clamped into the edge bins.
pub fn chi_square_vs_pmf<W: Weight>(samples: &[i64], pmf: &LatticePmf<W>) -> ChiSquareResult {
    let n = samples.len() as f64;
    let lo = pmf.min_support();
    let hi = pmf.max_support();
    let mut observed = vec![0u64; (hi - lo + 1) as usize];
    for &s in samples {
        let idx = (s.clamp(lo, hi) - lo) as usize;
        observed[idx] += 1;
    }
    let mut bins: Vec<(f64, u64)> = Vec::new();
    let mut acc_e = 0.0;
    let mut acc_o = 0u64;
    for (i, &o) in observed.iter().enumerate() {
        acc_e += pmf.prob_at(lo + i as i64).as_f64() * n;
        acc_o += o;
        if acc_e >= 5.0 {
            bins.push((acc_e, acc_o));
            acc_e = 0.0;
            acc_o = 0;
        }
    }
    if acc_e > 0.0 || acc_o > 0 {
        if let Some(last) = bins.last_mut() {
            last.0 += acc_e;
            last.1 += acc_o;
        } else {
            bins.push((acc_e.max(1e-12), acc_o));
        }
    }
    let stat: f64 = bins
        .iter()
        .map(|&(e, o)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let df = bins.len().saturating_sub(1);
    ChiSquareResult {
        stat,
        df,
        p_value: chi_square_p_value(stat, df as f64),
    }
}

/// Pearson independence test on a contingency table (rows × cols of
/// counts). The caller is responsible for binning so expected counts stay
/// reasonable.
pub fn chi_square_independence(table: &[Vec<u64>]) -> ChiSquareResult {
    let rows = table.len();
    let cols = table[0].len();
    let total: u64 = table.iter().flatten().sum();
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64)
        .collect();
    let mut stat = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let e = row_sums[i] * col_sums[j] / total as f64;
            if e > 0.0 {
                let d = table[i][j] as f64 - e;
                stat += d * d / e;
            }
        }
    }
    let df = (rows - 1) * (cols - 1);
    ChiSquareResult {
        stat,
        df,
        p_value: chi_square_p_value(stat, df as f64),
    }
}

/// Bin boundaries that give each bin at least `min_mass` under the law;
/// returns the right-open cut points. Use with [`bin_index`].
pub fn mass_balanced_edges<W: Weight>(pmf: &LatticePmf<W>, min_mass: f64) -> Vec<i64> {
    let mut edges = Vec::new();
    let mut acc = 0.0;
    for (x, w) in pmf.iter() {
        acc += w.as_f64();
        if acc >= min_mass && x < pmf.max_support() {
            edges.push(x);
            acc = 0.0;
        }
    }
    edges
}

/// Index of `x` among the bins delimited by `edges` (x ≤ edge goes left).
pub fn bin_index(edges: &[i64], x: i64) -> usize {
    edges.partition_point(|&e| e < x)
}
