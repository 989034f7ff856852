use nalgebra::DMatrix;
use serde::Serialize;

use super::MomentSet;

/// Outcome of [`moment_validity`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    pub ok: bool,
    pub variance: f64,
    /// Size of the first Hankel leading minor found negative, if any.
    pub violated_minor: Option<usize>,
    pub message: Option<String>,
}

const TOLERANCE: f64 = 1e-10;

/// Checks non-negative variance, non-negative even moments and
/// positive semidefiniteness of the Hankel matrices `[E(x^{i+j})]`.
///
/// Minors are taken after scaling by the diagonal so the tolerance is
/// relative to the moment magnitudes.
pub fn moment_validity(ms: &MomentSet) -> ValidityReport {
    let variance = if ms.order() >= 2 { ms.variance() } else { f64::NAN };
    let fail = |minor: Option<usize>, message: String| ValidityReport {
        ok: false,
        variance,
        violated_minor: minor,
        message: Some(message),
    };
    if ms.order() < 2 {
        return fail(None, "at least two moments are required".into());
    }
    if ms.values.iter().any(|v| !v.is_finite()) {
        return fail(None, "non-finite moment".into());
    }
    let scale = ms.raw(2).abs().max(ms.raw(1) * ms.raw(1)).max(f64::MIN_POSITIVE);
    if variance < -TOLERANCE * scale {
        return fail(Some(2), format!("variance {} is negative", variance));
    }
    for i in (2..=ms.order()).step_by(2) {
        if ms.raw(i) < 0.0 {
            return fail(None, format!("even moment E(x^{}) is negative", i));
        }
    }

    let max_k = ms.order() / 2;
    for k in 1..=max_k {
        let size = k + 1;
        let h = DMatrix::from_fn(size, size, |i, j| ms.raw(i + j));
        let d: Vec<f64> = (0..size).map(|i| h[(i, i)].sqrt()).collect();
        if d.iter().any(|v| *v == 0.0) {
            continue;
        }
        let scaled = DMatrix::from_fn(size, size, |i, j| h[(i, j)] / (d[i] * d[j]));
        let det = scaled.determinant();
        if det < -TOLERANCE {
            return fail(
                Some(size),
                format!("Hankel minor of size {} has determinant {:.3e}", size, det),
            );
        }
    }

    ValidityReport {
        ok: true,
        variance,
        violated_minor: None,
        message: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::Provenance;

    fn set(values: &[f64]) -> MomentSet {
        MomentSet::new("x", 0, values.to_vec(), Provenance::External)
    }

    #[test]
    fn vasicek_passes() {
        let r = moment_validity(&set(&[0.2, 0.093333333333]));
        assert!(r.ok);
        assert!((r.variance - 0.0533333333).abs() < 1e-9);
    }

    #[test]
    fn negative_variance_fails() {
        let r = moment_validity(&set(&[1.0, 0.5]));
        assert!(!r.ok);
        assert_eq!(r.violated_minor, Some(2));
        assert!((r.variance + 0.5).abs() < 1e-15);
    }

    #[test]
    fn uniform_prefix_passes() {
        assert!(moment_validity(&set(&[0.5, 1.0 / 3.0, 0.25])).ok);
        assert!(moment_validity(&set(&[0.5, 1.0 / 3.0, 0.25, 0.2])).ok);
    }

    #[test]
    fn bad_fourth_moment_fails() {
        // variance 1 but E(x^4) < E(x^2)^2
        let r = moment_validity(&set(&[0.0, 1.0, 0.0, 0.5]));
        assert!(!r.ok);
        assert_eq!(r.violated_minor, Some(3));
    }
}
