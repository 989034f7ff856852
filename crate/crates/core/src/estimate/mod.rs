//! Density estimates from finitely many moments.

mod density;
mod gram_charlier;
mod lm;
mod maxent;

pub use density::{CdfTable, DensityEstimate, EstimateKind, Standardization, Support, PANELS};
pub use gram_charlier::{fit_gram_charlier, fit_gram_charlier_on, GC_DEFAULT_SIGMAS};
pub use lm::{levenberg_marquardt, LmError, LmOptions, LmOutcome};
pub use maxent::{fit_max_entropy, MaxEntSystem, MeOptions};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moments::MomentSet;
use crate::poly::{rational_to_f64, Rational};

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("variance {0} is not positive")]
    DegenerateVariance(f64),
    #[error("at least {needed} moments are required, got {got}")]
    TooFewMoments { needed: usize, got: usize },
    #[error("support [{lo}, {hi}] is empty or not finite")]
    InvalidSupport { lo: f64, hi: f64 },
    #[error("invalid moments: {0}")]
    InvalidMoments(String),
    #[error("maximum-entropy fit did not converge (residual {:.3e} after {} iterations)", .0.1.residual_norm, .0.1.iterations)]
    FitDiverged(Box<(DensityEstimate, FitDiagnostics)>),
    #[error("the moment equations are singular")]
    SingularSystem,
}

/// Fit quality of an estimate against the moments it was built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
    /// Order 0 (mass) first, then `(estimate - target) / max(1, |target|)`.
    pub constraint_residuals: Vec<f64>,
    pub entropy: f64,
    pub mass: f64,
}

/// Diagnostics computed purely from the estimate, as for a closed-form fit.
pub fn diagnose(est: &DensityEstimate, ms: &MomentSet) -> FitDiagnostics {
    let mass = est.mass();
    let mut constraint_residuals = vec![mass - 1.0];
    for (i, target) in ms.values.iter().enumerate() {
        constraint_residuals.push((est.moment(i as u32 + 1) - target) / target.abs().max(1.0));
    }
    FitDiagnostics {
        iterations: 0,
        residual_norm: constraint_residuals.iter().fold(0.0, |m, r| m.max(r.abs())),
        converged: true,
        constraint_residuals,
        entropy: est.entropy(),
        mass,
    }
}

/// `(μ, σ, [E(z^1) .. E(z^m)])` for `z = (x - μ)/σ`. Central moments are
/// formed in exact arithmetic when the set carries exact values.
pub fn standardized_moments(ms: &MomentSet) -> Result<(f64, f64, Vec<f64>), EstimateError> {
    let m = ms.order();
    if m < 2 {
        return Err(EstimateError::TooFewMoments { needed: 2, got: m });
    }
    let (mu, central): (f64, Vec<f64>) = match &ms.exact {
        Some(exact) => {
            let raw = |i: usize| if i == 0 { Rational::one() } else { exact[i - 1].clone() };
            let mu = raw(1);
            let neg = -mu.clone();
            let central = (1..=m)
                .map(|i| {
                    let mut acc = Rational::zero();
                    let mut binom = Rational::one();
                    for k in 0..=i {
                        if k > 0 {
                            binom = binom * Rational::from_integer((i + 1 - k).into())
                                / Rational::from_integer(k.into());
                        }
                        acc += &binom * raw(k) * num_traits::pow(neg.clone(), i - k);
                    }
                    rational_to_f64(&acc)
                })
                .collect();
            (rational_to_f64(&mu), central)
        }
        None => {
            let mu = ms.mean();
            let central = (1..=m)
                .map(|i| {
                    let mut acc = 0.0;
                    let mut binom = 1.0;
                    for k in 0..=i {
                        if k > 0 {
                            binom = binom * (i + 1 - k) as f64 / k as f64;
                        }
                        acc += binom * ms.raw(k) * (-mu).powi((i - k) as i32);
                    }
                    acc
                })
                .collect();
            (mu, central)
        }
    };
    let var = central[1];
    if !(var > 0.0) || !var.is_finite() {
        return Err(EstimateError::DegenerateVariance(var));
    }
    let sigma = var.sqrt();
    let mut z: Vec<f64> = central
        .iter()
        .enumerate()
        .map(|(i, c)| c / sigma.powi(i as i32 + 1))
        .collect();
    z[0] = 0.0;
    z[1] = 1.0;
    Ok((mu, sigma, z))
}

/// Quartiles by linear interpolation between order statistics.
fn quartiles(sorted: &[f64]) -> (f64, f64) {
    let q = |p: f64| {
        let h = p * (sorted.len() - 1) as f64;
        let i = h.floor() as usize;
        let j = (i + 1).min(sorted.len() - 1);
        sorted[i] + (h - i as f64) * (sorted[j] - sorted[i])
    };
    (q(0.25), q(0.75))
}

/// `[min - 3·IQR, max + 3·IQR]`; `None` for an empty sample or a zero IQR.
pub fn sample_support(xs: &[f64]) -> Option<Support> {
    if xs.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (q1, q3) = quartiles(&sorted);
    let iqr = q3 - q1;
    (iqr > 0.0).then(|| Support::new(sorted[0] - 3.0 * iqr, sorted[sorted.len() - 1] + 3.0 * iqr))
}

/// `μ ± 8σ` from the first two moments.
pub fn moment_support(ms: &MomentSet) -> Result<Support, EstimateError> {
    let var = if ms.order() >= 2 { ms.variance() } else { f64::NAN };
    if !(var > 0.0) {
        return Err(EstimateError::DegenerateVariance(var));
    }
    let (mu, s) = (ms.mean(), var.sqrt());
    Ok(Support::new(mu - 8.0 * s, mu + 8.0 * s))
}

/// The sample rule when it applies, otherwise the moment rule.
pub fn default_support(sample: Option<&[f64]>, ms: &MomentSet) -> Result<Support, EstimateError> {
    match sample.and_then(sample_support) {
        Some(s) => Ok(s),
        None => moment_support(ms),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::Provenance;
    use crate::poly::rational;

    #[test]
    fn exact_central_moments() {
        let mut ms = MomentSet::new("x", 0, vec![1e6, 1e12 + 4.0], Provenance::Propagated);
        ms.exact = Some(vec![rational(1_000_000, 1), rational(1_000_000_000_004, 1)]);
        let (mu, sigma, z) = standardized_moments(&ms).unwrap();
        assert_eq!((mu, sigma), (1e6, 2.0));
        assert_eq!(z, vec![0.0, 1.0]);
    }

    #[test]
    fn support_rules() {
        let ms = MomentSet::new("x", 0, vec![0.0, 1.0], Provenance::External);
        let s = default_support(Some(&[1.0, 2.0, 3.0, 4.0, 5.0]), &ms).unwrap();
        assert_eq!((s.lo, s.hi), (-5.0, 11.0));
        let s = default_support(None, &ms).unwrap();
        assert_eq!((s.lo, s.hi), (-8.0, 8.0));
        let s = default_support(Some(&[2.0, 2.0]), &ms).unwrap();
        assert_eq!((s.lo, s.hi), (-8.0, 8.0));
    }
}
