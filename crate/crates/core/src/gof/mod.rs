//! Goodness-of-fit tests of density estimates against sampled data.

mod errors;
mod kde;

pub use errors::{error_report, ErrorRow, ErrorTable, EstimateErrorEntry, SampleErrorEntry};
pub use kde::{kde, silverman_bandwidth, KDE_POINTS};

use serde::Serialize;
use thiserror::Error;

use crate::engine::EngineError;
use crate::estimate::DensityEstimate;
use crate::specfun::chi2_inv_cdf;

/// Expected frequencies below this are flagged.
pub const MIN_EXPECTED: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GofError {
    #[error("the sample is empty")]
    EmptySample,
    #[error("at least 2 bins are required, got {0}")]
    TooFewBins(usize),
    #[error("significance level {0} must lie in (0, 1)")]
    InvalidAlpha(f64),
    #[error("order {requested} requested but exact moments cover only {available}")]
    OrderNotCovered { requested: usize, available: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TestKind {
    #[serde(rename = "chi_square")]
    ChiSquare,
    #[serde(rename = "ks")]
    KolmogorovSmirnov,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    NotRejected,
    Rejected,
}

impl Verdict {
    /// Not rejected exactly when the statistic is below the critical value.
    pub fn from_statistic(statistic: f64, critical_value: f64) -> Verdict {
        if statistic < critical_value {
            Verdict::NotRejected
        } else {
            Verdict::Rejected
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::NotRejected => "NOT_REJECTED",
            Verdict::Rejected => "REJECTED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub observed: usize,
    pub expected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestResult {
    pub test: TestKind,
    pub statistic: f64,
    pub critical_value: f64,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub bins: Vec<Bin>,
    /// Bins whose expected frequency is below [`MIN_EXPECTED`].
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flagged_bins: Vec<usize>,
}

fn check_alpha(alpha: f64) -> Result<(), GofError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(GofError::InvalidAlpha(alpha))
    }
}

/// `k` equal-width bins over the sample range.
pub fn equal_width_bins(sample: &[f64], k: usize) -> Vec<(f64, f64, usize)> {
    let lo = sample.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = (hi - lo) / k as f64;
    let mut counts = vec![0usize; k];
    for &x in sample {
        let i = if w > 0.0 { ((x - lo) / w) as usize } else { 0 };
        counts[i.min(k - 1)] += 1;
    }
    (0..k)
        .map(|i| {
            let a = lo + w * i as f64;
            let b = if i + 1 == k { hi } else { lo + w * (i + 1) as f64 };
            (a, b, counts[i])
        })
        .collect()
}

/// Which interval the expected frequency of an outer bin integrates over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRule {
    /// Outer bins stop at the sample extremes, so `Σ E_i` falls short of the
    /// sample size by the mass outside `[min, max]`.
    SampleRange,
    /// The first and last bin extend to the support ends; bins partition the
    /// support and observed counts are unchanged.
    #[default]
    OpenTails,
}

/// Pearson's statistic over `k` equal-width bins with open tails;
/// `CV = χ²_{1-α, k-1}`.
pub fn chi_square_test(
    sample: &[f64],
    est: &DensityEstimate,
    k: usize,
    alpha: f64,
) -> Result<TestResult, GofError> {
    chi_square_test_with(sample, est, k, alpha, TailRule::OpenTails)
}

pub fn chi_square_test_with(
    sample: &[f64],
    est: &DensityEstimate,
    k: usize,
    alpha: f64,
    tails: TailRule,
) -> Result<TestResult, GofError> {
    if sample.is_empty() {
        return Err(GofError::EmptySample);
    }
    if k < 2 {
        return Err(GofError::TooFewBins(k));
    }
    check_alpha(alpha)?;
    let n = sample.len() as f64;
    let support = est.support();
    let mut statistic = 0.0;
    let mut flagged_bins = Vec::new();
    let mut bins = Vec::with_capacity(k);
    for (i, (lo, hi, observed)) in equal_width_bins(sample, k).into_iter().enumerate() {
        let (a, b) = match tails {
            TailRule::SampleRange => (lo, hi),
            TailRule::OpenTails => (
                if i == 0 { support.lo.min(lo) } else { lo },
                if i + 1 == k { support.hi.max(hi) } else { hi },
            ),
        };
        let expected = n * (est.cdf(b) - est.cdf(a));
        if expected < MIN_EXPECTED {
            flagged_bins.push(i);
        }
        if expected > 0.0 {
            let d = observed as f64 - expected;
            statistic += d * d / expected;
        }
        bins.push(Bin {
            lo,
            hi,
            observed,
            expected,
        });
    }
    let critical_value = chi2_inv_cdf(1.0 - alpha, (k - 1) as f64);
    Ok(TestResult {
        test: TestKind::ChiSquare,
        statistic,
        critical_value,
        alpha,
        k: Some(k),
        verdict: Verdict::from_statistic(statistic, critical_value),
        bins,
        flagged_bins,
    })
}

/// `sqrt(-ln(α/2) / N)`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / n as f64).sqrt()
}

/// Largest gap between the estimate's cdf and the empirical cdf, taken on
/// both sides of every jump.
pub fn ks_statistic(sample: &[f64], est: &DensityEstimate) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    // Within a run of ties the outer indices give the values on either side
    // of the jump, so scanning every index covers both.
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = est.cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

pub fn ks_test(sample: &[f64], est: &DensityEstimate, alpha: f64) -> Result<TestResult, GofError> {
    if sample.is_empty() {
        return Err(GofError::EmptySample);
    }
    check_alpha(alpha)?;
    let statistic = ks_statistic(sample, est);
    let critical_value = ks_critical_value(sample.len(), alpha);
    Ok(TestResult {
        test: TestKind::KolmogorovSmirnov,
        statistic,
        critical_value,
        alpha,
        k: None,
        verdict: Verdict::from_statistic(statistic, critical_value),
        bins: Vec::new(),
        flagged_bins: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::Support;

    fn uniform01() -> DensityEstimate {
        DensityEstimate::max_entropy_raw(Support::new(0.0, 1.0), vec![0.0])
    }

    #[test]
    fn ks_critical_value_for_thousand() {
        assert!((ks_critical_value(1000, 0.05) - 0.0608).abs() < 5e-4);
    }

    #[test]
    fn chi_square_zero_on_balanced_bins() {
        let sample: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let r = chi_square_test(&sample, &uniform01(), 2, 0.05).unwrap();
        assert_eq!(r.bins[0].observed, 50);
        assert_eq!(r.bins[1].observed, 50);
        assert!((r.bins[0].expected - 50.0).abs() < 1e-12);
        assert!(r.statistic.abs() < 1e-20);
        assert_eq!(r.verdict, Verdict::NotRejected);
        assert!(r.flagged_bins.is_empty());
    }

    #[test]
    fn observed_counts_are_conserved() {
        let sample: Vec<f64> = (0..997).map(|i| ((i * 37) % 101) as f64 / 100.0).collect();
        let r = chi_square_test(&sample, &uniform01(), 15, 0.05).unwrap();
        assert_eq!(r.bins.iter().map(|b| b.observed).sum::<usize>(), 997);
        let e: f64 = r.bins.iter().map(|b| b.expected).sum();
        assert!((e - 997.0).abs() < 1e-9);
        let literal = chi_square_test_with(&sample, &uniform01(), 15, 0.05, TailRule::SampleRange).unwrap();
        let e: f64 = literal.bins.iter().map(|b| b.expected).sum();
        assert!((e - 997.0).abs() < 1e-9, "sample spans the whole support here");
    }

    #[test]
    fn ks_on_own_quantiles() {
        let n = 200;
        let sample: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&sample, &uniform01());
        assert!(d <= 0.5 / n as f64 + 1e-12);
    }

    #[test]
    fn flagged_bins_outside_support() {
        let est = DensityEstimate::max_entropy_raw(Support::new(0.0, 1.0), vec![0.0]);
        let sample = [0.1, 0.2, 5.0];
        let r = chi_square_test(&sample, &est, 3, 0.05).unwrap();
        assert!(!r.flagged_bins.is_empty());
        assert!(r.statistic.is_finite());
    }

    #[test]
    fn verdict_rule() {
        assert_eq!(Verdict::from_statistic(1.0, 2.0), Verdict::NotRejected);
        assert_eq!(Verdict::from_statistic(2.0, 2.0), Verdict::Rejected);
    }
}
