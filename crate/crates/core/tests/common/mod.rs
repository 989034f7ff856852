//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::prelude::*;

/// `n`-th cumulant from raw moments `m[0] = E X, ..` by the determinant
/// formula: `κ_n = (-1)^{n+1} det M_n`. Row `i` of `M_n` (from 0) is
/// `m_{i+1}, C(i,0) m_i, C(i,1) m_{i-1}, .., C(i,i-1) m_1, 1, 0, ..`.
pub fn cumulant_by_determinant(raw: &[f64], n: usize) -> f64 {
    let m = |k: usize| raw[k - 1];
    let mat = DMatrix::from_fn(n, n, |i, j| {
        if j == 0 {
            m(i + 1)
        } else if j <= i {
            binomial(i, j - 1) * m(i - j + 1)
        } else if j == i + 1 {
            1.0
        } else {
            0.0
        }
    });
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    sign * mat.determinant()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Raw moments `E X^1 .. E X^m` of a Gaussian mixture.
pub fn mixture_moments(components: &[(f64, f64, f64)], m: usize) -> Vec<f64> {
    let total: f64 = components.iter().map(|c| c.0).sum();
    let mut out = vec![0.0; m];
    for &(w, mu, sigma) in components {
        // m_k = μ m_{k-1} + (k-1) σ² m_{k-2}
        let (mut prev, mut cur) = (1.0, mu);
        out[0] += w / total * cur;
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            let next = mu * cur + k as f64 * sigma * sigma * prev;
            prev = cur;
            cur = next;
            *slot += w / total * cur;
        }
    }
    out
}

/// Natural size of `E X^i` for a mixture: `s^i` with `s = max |μ| + 3σ`.
pub fn mixture_scale(components: &[(f64, f64, f64)]) -> f64 {
    components
        .iter()
        .map(|c| c.1.abs() + 3.0 * c.2)
        .fold(0.0, f64::max)
}

pub fn mixture() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.1f64..1.0, -2.0f64..2.0, 0.2f64..1.5), 1..4)
}

pub fn gaussian_pdf(x: f64, mu: f64, sigma2: f64) -> f64 {
    (-(x - mu) * (x - mu) / (2.0 * sigma2)).exp() / (2.0 * std::f64::consts::PI * sigma2).sqrt()
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
