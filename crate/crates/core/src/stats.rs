//! Paired significance testing and configuration ranking.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

/// Conventional significance level used throughout the analyses.
pub const ALPHA: f64 = 0.05;

/// Largest effective sample size for which the null distribution is
/// computed exactly.
pub const EXACT_MAX_N: usize = 20;

/// Absolute differences closer than this are treated as ties, and
/// differences smaller than this as zero. Accuracies live in `[0, 1]`, so
/// this only absorbs rounding noise from subtracting `k/n` fractions.
pub const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} paired observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("non-finite observation")]
    NonFinite,
    #[error("p-value {0} outside [0, 1]")]
    PValueRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMethod {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// `min(T+, T-)`.
    pub statistic: f64,
    pub p_value: f64,
    pub n_effective: usize,
    pub method: TestMethod,
}

/// Midranks of `values` (1-based), grouping values within [`TIE_EPS`] of the
/// smallest member of their run.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut tie_sizes = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let anchor = values[order[start]];
        let mut end = start + 1;
        while end < order.len() && values[order[end]] - anchor <= TIE_EPS {
            end += 1;
        }
        // positions start+1 ..= end share their average
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        tie_sizes.push(end - start);
        start = end;
    }
    (ranks, tie_sizes)
}

/// Two-sided Wilcoxon signed-rank test on paired samples `a`, `b`.
///
/// Zero differences are discarded. Ranks use midranks for ties. With at most
/// [`EXACT_MAX_N`] non-zero differences the p-value comes from the exact
/// permutation distribution of the signed (mid)ranks; otherwise from the
/// normal approximation with tie-corrected variance and continuity
/// correction.
pub fn wilcoxon(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(StatsError::TooShort { needed: 2, got: a.len() });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| d.abs() > TIE_EPS)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(TestResult { statistic: 0.0, p_value: 1.0, n_effective: 0, method: TestMethod::Exact });
    }

    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, tie_sizes) = midranks(&magnitudes);
    // doubled ranks are integral
    let doubled: Vec<u64> = ranks.iter().map(|r| (2.0 * r).round() as u64).collect();
    let total2: u64 = doubled.iter().sum();
    let plus2: u64 = diffs.iter().zip(&doubled).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let w2 = plus2.min(total2 - plus2);
    let statistic = w2 as f64 / 2.0;

    if n <= EXACT_MAX_N {
        let count = lower_tail_count(&doubled, w2);
        let p_value = (2.0 * count as f64 / (1u64 << n) as f64).min(1.0);
        return Ok(TestResult { statistic, p_value, n_effective: n, method: TestMethod::Exact });
    }

    let p_value = normal_p(statistic, n, &tie_sizes);
    Ok(TestResult { statistic, p_value, n_effective: n, method: TestMethod::NormalApproximation })
}

/// Two-sided normal-approximation p-value for `W = min(T+, T-)`.
fn normal_p(statistic: f64, n: usize, tie_sizes: &[usize]) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    if var <= 0.0 {
        return 1.0;
    }
    let correction = if statistic < mean { 0.5 } else { 0.0 };
    let z = (statistic - mean + correction) / var.sqrt();
    (2.0 * Normal::standard().cdf(-z.abs())).min(1.0)
}

/// Number of the `2^n` sign assignments whose doubled positive-rank sum is at
/// most `w2`, by counting subset sums.
fn lower_tail_count(doubled_ranks: &[u64], w2: u64) -> u64 {
    let total: usize = doubled_ranks.iter().sum::<u64>() as usize;
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts[..=(w2 as usize).min(total)].iter().sum()
}

/// Holm step-down adjustment; results are returned in input order.
pub fn holm_adjust(p_values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if let Some(&bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(StatsError::PValueRange(bad));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max(((m - rank) as f64 * p_values[i]).min(1.0));
        adjusted[i] = running;
    }
    Ok(adjusted)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary<T> {
    pub config: T,
    pub mean: f64,
    pub std: f64,
}

/// Sorts by descending mean then ascending standard deviation; remaining
/// ties keep their input order.
pub fn rank_configs<T: Clone>(results: &[ConfigSummary<T>]) -> Vec<ConfigSummary<T>> {
    let mut ranked = results.to_vec();
    ranked.sort_by(|x, y| y.mean.total_cmp(&x.mean).then(x.std.total_cmp(&y.std)));
    ranked
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}
