//! Polynomial families, moment/cumulant conversion, quadrature and the
//! chi-square quantile.

mod gamma;
mod quadrature;

pub use gamma::{chi2_cdf, chi2_inv_cdf, ln_gamma, regularized_gamma_p};
pub use quadrature::{gauss_legendre, CompositeRule, Quadrature, DEFAULT_ORDER};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moments::MomentSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("variance {0} is not positive")]
    DegenerateVariance(f64),
    #[error("at least {0} moments are required")]
    TooFewMoments(usize),
}

/// Probabilists' Hermite polynomial `He_m(x)`.
pub fn hermite_prob(m: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if m == 0 {
        return prev;
    }
    for k in 1..m {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `He_0(x) .. He_m(x)` in one pass.
pub fn hermite_all(m: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if m >= 1 {
        out.push(x);
    }
    for k in 1..m {
        let next = x * out[k] - k as f64 * out[k - 1];
        out.push(next);
    }
}

/// Complete Bell polynomial `B_m(0, 0, κ3, .., κm)`; `higher[0]` is `κ3`.
pub fn bell_reduced(m: usize, higher: &[f64]) -> f64 {
    bell_reduced_all(m, higher)[m]
}

/// `B_0 .. B_m` with the first two arguments zero.
pub fn bell_reduced_all(m: usize, higher: &[f64]) -> Vec<f64> {
    let arg = |j: usize| -> f64 {
        // x_j for j >= 1
        if j <= 2 {
            0.0
        } else {
            higher.get(j - 3).copied().unwrap_or(0.0)
        }
    };
    let mut b = vec![1.0];
    for n in 0..m {
        // B_{n+1} = Σ_i C(n, i) B_{n-i} x_{i+1}
        let mut binom = 1.0;
        let mut acc = 0.0;
        for i in 0..=n {
            if i > 0 {
                binom = binom * (n - i + 1) as f64 / i as f64;
            }
            acc += binom * b[n - i] * arg(i + 1);
        }
        b.push(acc);
    }
    b
}

/// Cumulants `κ1 .. κm`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantVector {
    pub kappa: Vec<f64>,
}

impl CumulantVector {
    pub fn mean(&self) -> f64 {
        self.kappa[0]
    }

    pub fn variance(&self) -> f64 {
        self.kappa[1]
    }

    pub fn order(&self) -> usize {
        self.kappa.len()
    }
}

/// Raw moments to cumulants by the recursion
/// `κ_n = m_n − Σ_{i=1}^{n−1} C(n−1, i−1) κ_i m_{n−i}`.
pub fn cumulants_from_moments(ms: &MomentSet) -> Result<CumulantVector, SpecError> {
    if ms.order() < 2 {
        return Err(SpecError::TooFewMoments(2));
    }
    let kappa = cumulants_from_raw(&ms.values);
    if !(kappa[1] > 0.0) {
        return Err(SpecError::DegenerateVariance(kappa[1]));
    }
    Ok(CumulantVector { kappa })
}

/// The recursion without the variance check.
pub fn cumulants_from_raw(raw: &[f64]) -> Vec<f64> {
    let m = |i: usize| if i == 0 { 1.0 } else { raw[i - 1] };
    let mut kappa: Vec<f64> = Vec::with_capacity(raw.len());
    for n in 1..=raw.len() {
        let mut acc = m(n);
        let mut binom = 1.0; // C(n-1, i-1)
        for i in 1..n {
            if i > 1 {
                binom = binom * (n - i + 1) as f64 / (i - 1) as f64;
            }
            acc -= binom * kappa[i - 1] * m(n - i);
        }
        kappa.push(acc);
    }
    kappa
}

/// Inverse of [`cumulants_from_moments`]: raw moments `E(x^1) .. E(x^m)`.
pub fn moments_from_cumulants(cv: &CumulantVector) -> Vec<f64> {
    let mut raw: Vec<f64> = Vec::with_capacity(cv.kappa.len());
    for n in 1..=cv.kappa.len() {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for i in 1..=n {
            if i > 1 {
                binom = binom * (n - i + 1) as f64 / (i - 1) as f64;
            }
            let m_rest = if n == i { 1.0 } else { raw[n - i - 1] };
            acc += binom * cv.kappa[i - 1] * m_rest;
        }
        raw.push(acc);
    }
    raw
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::Provenance;

    #[test]
    fn hermite_values() {
        assert_eq!(hermite_prob(0, 7.3), 1.0);
        assert_eq!(hermite_prob(2, 3.0), 8.0);
        assert_eq!(hermite_prob(3, 2.0), 2.0);
        let mut all = Vec::new();
        hermite_all(5, 1.5, &mut all);
        for (k, v) in all.iter().enumerate() {
            assert_eq!(*v, hermite_prob(k, 1.5));
        }
    }

    #[test]
    fn bell_values() {
        let k = [0.7, -1.1, 0.4, 2.5];
        assert_eq!(bell_reduced(0, &[]), 1.0);
        assert_eq!(bell_reduced(1, &[]), 0.0);
        assert_eq!(bell_reduced(2, &[]), 0.0);
        assert_eq!(bell_reduced(3, &k), 0.7);
        assert_eq!(bell_reduced(4, &k), -1.1);
        assert_eq!(bell_reduced(5, &k), 0.4);
        assert!((bell_reduced(6, &k) - (2.5 + 10.0 * 0.49)).abs() < 1e-14);
    }

    #[test]
    fn cumulant_examples() {
        let ms = MomentSet::new("r", 100, vec![0.2, 0.28 / 3.0], Provenance::External);
        let cv = cumulants_from_moments(&ms).unwrap();
        assert!((cv.kappa[0] - 0.2).abs() < 1e-15);
        assert!((cv.kappa[1] - 0.16 / 3.0).abs() < 1e-15);

        let sym = MomentSet::new("x", 0, vec![0.0, 1.0, 0.0], Provenance::External);
        assert_eq!(cumulants_from_moments(&sym).unwrap().kappa[2], 0.0);

        // Normal(1.5, 0.4): m3 = μ³ + 3μσ², m4 = μ⁴ + 6μ²σ² + 3σ⁴
        let (mu, s2) = (1.5f64, 0.4f64);
        let gauss = vec![
            mu,
            mu * mu + s2,
            mu.powi(3) + 3.0 * mu * s2,
            mu.powi(4) + 6.0 * mu * mu * s2 + 3.0 * s2 * s2,
        ];
        let k = cumulants_from_raw(&gauss);
        assert!(k[2].abs() < 1e-10 && k[3].abs() < 1e-10);
    }

    #[test]
    fn inverse_map() {
        let m = moments_from_cumulants(&CumulantVector {
            kappa: vec![0.0, 1.0, 1.0],
        });
        assert!((m[2] - 1.0).abs() < 1e-15);
        let m = moments_from_cumulants(&CumulantVector {
            kappa: vec![2.0, 0.5, 0.0, 0.0],
        });
        assert!((m[1] - 4.5).abs() < 1e-15);
        let back = cumulants_from_raw(&m);
        assert!((back[1] - 0.5).abs() < 1e-12 && back[3].abs() < 1e-12);
    }

    #[test]
    fn degenerate_variance() {
        let ms = MomentSet::new("x", 0, vec![1.0, 1.0], Provenance::External);
        assert!(matches!(
            cumulants_from_moments(&ms),
            Err(SpecError::DegenerateVariance(_))
        ));
    }
}
