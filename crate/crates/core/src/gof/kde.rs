/// Evaluation points of [`kde`].
pub const KDE_POINTS: usize = 256;

/// `1.06 σ̂ N^{-1/5}`.
pub fn silverman_bandwidth(sample: &[f64]) -> f64 {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = if sample.len() > 1 {
        sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    1.06 * var.sqrt() * n.powf(-0.2)
}

/// Gaussian-kernel density on 256 points spanning the sample range padded by
/// three bandwidths. A constant sample yields a narrow spike at its value.
pub fn kde(sample: &[f64], bandwidth: Option<f64>) -> Vec<(f64, f64)> {
    if sample.is_empty() {
        return Vec::new();
    }
    let lo = sample.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut h = bandwidth.unwrap_or_else(|| silverman_bandwidth(sample));
    if !(h > 0.0) {
        h = 1e-3 * lo.abs().max(1.0);
    }
    let (a, b) = (lo - 3.0 * h, hi + 3.0 * h);
    let step = (b - a) / (KDE_POINTS - 1) as f64;
    let norm = 1.0 / (sample.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    (0..KDE_POINTS)
        .map(|i| {
            let x = a + step * i as f64;
            let y = sample
                .iter()
                .map(|s| {
                    let u = (x - s) / h;
                    (-0.5 * u * u).exp()
                })
                .sum::<f64>()
                * norm;
            (x, y)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapezoid(curve: &[(f64, f64)]) -> f64 {
        curve
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum()
    }

    #[test]
    fn unit_mass() {
        let sample: Vec<f64> = (0..500).map(|i| ((i * 7919) % 1000) as f64 / 250.0).collect();
        let curve = kde(&sample, None);
        assert_eq!(curve.len(), KDE_POINTS);
        assert!((trapezoid(&curve) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn constant_sample_spike() {
        let curve = kde(&[3.0; 10], None);
        let (x, _) = curve
            .iter()
            .copied()
            .fold((0.0, f64::MIN), |best, p| if p.1 > best.1 { p } else { best });
        assert!((x - 3.0).abs() < 1e-3);
        assert!((trapezoid(&curve) - 1.0).abs() < 1e-2);
    }
}
