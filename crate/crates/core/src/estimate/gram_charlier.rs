use super::density::{DensityEstimate, Support};
use super::{standardized_moments, EstimateError};
use crate::moments::MomentSet;

/// Width of the default GC support in standard deviations on each side.
pub const GC_DEFAULT_SIGMAS: f64 = 8.0;

/// GC series on `μ ± 8σ`.
pub fn fit_gram_charlier(ms: &MomentSet) -> Result<DensityEstimate, EstimateError> {
    let kappa = cumulants(ms)?;
    let (mu, sigma) = (kappa[0], kappa[1].sqrt());
    let support = Support::new(mu - GC_DEFAULT_SIGMAS * sigma, mu + GC_DEFAULT_SIGMAS * sigma);
    Ok(DensityEstimate::gram_charlier(support, kappa))
}

pub fn fit_gram_charlier_on(ms: &MomentSet, support: Support) -> Result<DensityEstimate, EstimateError> {
    if !support.is_valid() {
        return Err(EstimateError::InvalidSupport {
            lo: support.lo,
            hi: support.hi,
        });
    }
    Ok(DensityEstimate::gram_charlier(support, cumulants(ms)?))
}

/// Cumulants from central moments, so a large mean does not swamp them.
fn cumulants(ms: &MomentSet) -> Result<Vec<f64>, EstimateError> {
    if ms.order() < 2 {
        return Err(EstimateError::TooFewMoments {
            needed: 2,
            got: ms.order(),
        });
    }
    let (mu, sigma, z) = standardized_moments(ms)?;
    let mut kappa = crate::specfun::cumulants_from_raw(&z);
    for (j, k) in kappa.iter_mut().enumerate() {
        *k *= sigma.powi(j as i32 + 1);
    }
    kappa[0] = mu;
    kappa[1] = sigma * sigma;
    Ok(kappa)
}
