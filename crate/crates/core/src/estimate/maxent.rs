use nalgebra::{DMatrix, DVector};

use super::density::{DensityEstimate, Standardization, Support, PANELS};
use super::lm::{levenberg_marquardt, LmError, LmOptions};
use super::{diagnose, standardized_moments, EstimateError, FitDiagnostics};
use crate::moments::{moment_validity, MomentSet};
use crate::specfun::{CompositeRule, DEFAULT_ORDER};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeOptions {
    pub lm: LmOptions,
}

/// Moment equations `∫ z^i exp(-Σ ζ_j z^j) dz = μ_i`, `i = 0..m`, in relative
/// form, discretised on a fixed composite rule.
#[derive(Clone, Debug)]
pub struct MaxEntSystem {
    /// `targets[i] = E(z^i)`, `targets[0] = 1`.
    targets: Vec<f64>,
    /// `w_q z_q^k` for `k = 0..=2m`, row per power.
    weighted_powers: Vec<Vec<f64>>,
    nodes: Vec<f64>,
}

impl MaxEntSystem {
    /// `moments` are `E(z^1)..E(z^m)`.
    pub fn new(moments: &[f64], support: Support) -> Self {
        let m = moments.len();
        let rule = CompositeRule::new(support.lo, support.hi, PANELS, DEFAULT_ORDER);
        let (nodes, weights): (Vec<f64>, Vec<f64>) = rule.points().unzip();
        let weighted_powers = (0..=2 * m)
            .map(|k| {
                nodes
                    .iter()
                    .zip(&weights)
                    .map(|(z, w)| w * z.powi(k as i32))
                    .collect()
            })
            .collect();
        let mut targets = vec![1.0];
        targets.extend_from_slice(moments);
        MaxEntSystem {
            targets,
            weighted_powers,
            nodes,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.targets.len()
    }

    fn densities(&self, zeta: &DVector<f64>) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|z| {
                let mut p = 0.0;
                for c in zeta.iter().rev() {
                    p = p * z + c;
                }
                (-p).exp()
            })
            .collect()
    }

    fn power_sums(&self, zeta: &DVector<f64>, upto: usize) -> Vec<f64> {
        let f = self.densities(zeta);
        self.weighted_powers[..=upto]
            .iter()
            .map(|row| row.iter().zip(&f).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn scale(&self, i: usize) -> f64 {
        self.targets[i].abs().max(1.0)
    }

    pub fn residual(&self, zeta: &DVector<f64>) -> DVector<f64> {
        let k = self.unknowns();
        let s = self.power_sums(zeta, k - 1);
        DVector::from_fn(k, |i, _| (s[i] - self.targets[i]) / self.scale(i))
    }

    /// `∂r_i/∂ζ_j = -∫ z^{i+j} pdf / scale_i`.
    pub fn jacobian(&self, zeta: &DVector<f64>) -> DMatrix<f64> {
        let k = self.unknowns();
        let s = self.power_sums(zeta, 2 * (k - 1));
        DMatrix::from_fn(k, k, |i, j| -s[i + j] / self.scale(i))
    }
}

/// Maximum-entropy density on `support` matching every moment in `ms`.
pub fn fit_max_entropy(
    ms: &MomentSet,
    support: Support,
    opts: &MeOptions,
) -> Result<(DensityEstimate, FitDiagnostics), EstimateError> {
    if !support.is_valid() {
        return Err(EstimateError::InvalidSupport {
            lo: support.lo,
            hi: support.hi,
        });
    }
    let m = ms.order();
    if m == 0 {
        return Err(EstimateError::TooFewMoments { needed: 1, got: 0 });
    }
    let (std, z_moments, zeta0) = if m == 1 {
        let mean = ms.mean();
        if !(mean > support.lo && mean < support.hi) {
            return Err(EstimateError::InvalidMoments(format!(
                "mean {} lies outside the support",
                mean
            )));
        }
        let std = Standardization {
            shift: 0.5 * (support.lo + support.hi),
            scale: 0.5 * support.width(),
        };
        // uniform start on [-1, 1]
        (std, vec![(mean - std.shift) / std.scale], vec![2f64.ln(), 0.0])
    } else {
        let report = moment_validity(ms);
        if !report.ok {
            return Err(EstimateError::InvalidMoments(
                report.message.unwrap_or_else(|| "invalid moment sequence".into()),
            ));
        }
        let (mu, sigma, z) = standardized_moments(ms)?;
        let mut zeta0 = vec![0.0; m + 1];
        zeta0[0] = (2.0 * std::f64::consts::PI).sqrt().ln();
        zeta0[2] = 0.5;
        (Standardization { shift: mu, scale: sigma }, z, zeta0)
    };
    let z_support = Support::new(
        (support.lo - std.shift) / std.scale,
        (support.hi - std.shift) / std.scale,
    );
    let system = MaxEntSystem::new(&z_moments, z_support);
    let outcome = levenberg_marquardt(
        |z| system.residual(z),
        |z| system.jacobian(z),
        DVector::from_vec(zeta0),
        &opts.lm,
    );
    let (best, converged) = match outcome {
        Ok(out) => (out, true),
        Err(LmError::MaxIterExceeded(best)) => (*best, false),
        Err(LmError::SingularSystem) | Err(LmError::NonFiniteStart) => {
            return Err(EstimateError::SingularSystem)
        }
    };
    let est = DensityEstimate::max_entropy(support, std, best.x.iter().copied().collect());
    let mut diag = diagnose(&est, ms);
    diag.iterations = best.iterations;
    diag.residual_norm = best.residual_norm;
    diag.converged = converged;
    if converged {
        Ok((est, diag))
    } else {
        Err(EstimateError::FitDiverged(Box::new((est, diag))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::Provenance;

    fn set(values: &[f64]) -> MomentSet {
        MomentSet::new("x", 100, values.to_vec(), Provenance::External)
    }

    #[test]
    fn vasicek_is_gaussian() {
        let ms = set(&[0.2, 7.0 / 75.0]);
        let (est, diag) = fit_max_entropy(&ms, Support::new(-0.8, 1.2), &MeOptions::default()).unwrap();
        assert!(diag.converged);
        let xi = est.xi().unwrap();
        assert!((xi[2].abs() - 9.375).abs() < 1e-2, "{:?}", xi);
        assert!((xi[1].abs() - 3.75).abs() < 1e-2);
        assert!((xi[0].abs() - 0.1717).abs() < 1e-3);
        assert!((est.cdf(0.2) - 0.5).abs() < 5e-3);
        assert!((est.moment(3) - 0.04).abs() < 1e-4);
    }

    #[test]
    fn single_mean_gives_uniform() {
        let (est, _) = fit_max_entropy(&set(&[0.5]), Support::new(0.0, 1.0), &MeOptions::default()).unwrap();
        for x in [0.1, 0.5, 0.9] {
            assert!((est.pdf(x) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn uniform_six_moments() {
        let vals: Vec<f64> = (1..=6).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let (est, diag) = fit_max_entropy(&set(&vals), Support::new(0.0, 1.0), &MeOptions::default()).unwrap();
        assert!(diag.converged);
        for (i, v) in vals.iter().enumerate() {
            assert!((est.moment(i as u32 + 1) - v).abs() / v < 5e-5);
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        let sys = MaxEntSystem::new(&[0.1, 1.2, 0.3], Support::new(-3.0, 4.0));
        let z = DVector::from_vec(vec![0.9, 0.1, 0.45, -0.02]);
        let j = sys.jacobian(&z);
        let h = 1e-6;
        for c in 0..4 {
            let mut up = z.clone();
            let mut dn = z.clone();
            up[c] += h;
            dn[c] -= h;
            let fd = (sys.residual(&up) - sys.residual(&dn)) / (2.0 * h);
            for r in 0..4 {
                assert!((fd[r] - j[(r, c)]).abs() <= 1e-5 * j[(r, c)].abs().max(1e-3));
            }
        }
    }

    #[test]
    fn bad_support_rejected() {
        assert!(matches!(
            fit_max_entropy(&set(&[0.2, 0.1]), Support::new(1.0, 1.0), &MeOptions::default()),
            Err(EstimateError::InvalidSupport { .. })
        ));
    }
}
