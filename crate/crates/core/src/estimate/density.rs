use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::specfun::{bell_reduced_all, gauss_legendre, CompositeRule, DEFAULT_ORDER};

/// Panels of the composite rule used for every integral of an estimate.
pub const PANELS: usize = 64;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Support {
    pub lo: f64,
    pub hi: f64,
}

impl Support {
    pub fn new(lo: f64, hi: f64) -> Self {
        Support { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn shift(&self, c: f64) -> Support {
        Support::new(self.lo + c, self.hi + c)
    }
}

impl From<[f64; 2]> for Support {
    fn from(v: [f64; 2]) -> Self {
        Support::new(v[0], v[1])
    }
}

impl From<Support> for [f64; 2] {
    fn from(s: Support) -> Self {
        [s.lo, s.hi]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimateKind {
    #[serde(rename = "ME")]
    MaxEntropy,
    #[serde(rename = "GC")]
    GramCharlier,
}

impl EstimateKind {
    pub fn label(&self) -> &'static str {
        match self {
            EstimateKind::MaxEntropy => "ME",
            EstimateKind::GramCharlier => "GC",
        }
    }
}

/// Affine map `z = (x - shift) / scale` under which ME multipliers are fitted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub shift: f64,
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq)]
enum Form {
    /// `pdf(x) = exp(-Σ ζ_j z^j) / scale`.
    MaxEntropy { std: Standardization, zeta: Vec<f64> },
    /// `pdf(x) = ψ(x) Σ_j c_j He_j(z)` with `c_j = B_j / (j! σ^j)`.
    GramCharlier {
        kappa: Vec<f64>,
        mu: f64,
        sigma: f64,
        coef: Vec<f64>,
    },
}

/// A density on a bounded support, either maximum-entropy or Gram-Charlier.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityEstimate {
    support: Support,
    form: Form,
    /// `prefix[p]` is the mass of panels `0..p`.
    prefix: Vec<f64>,
}

impl DensityEstimate {
    /// Maximum-entropy density from multipliers fitted in standardized coordinates.
    pub fn max_entropy(support: Support, std: Standardization, zeta: Vec<f64>) -> Self {
        Self::build(support, Form::MaxEntropy { std, zeta })
    }

    /// Maximum-entropy density from multipliers in the original variable.
    pub fn max_entropy_raw(support: Support, xi: Vec<f64>) -> Self {
        Self::max_entropy(support, Standardization { shift: 0.0, scale: 1.0 }, xi)
    }

    /// Truncated Gram-Charlier series for cumulants `κ1..κm` (`κ2 > 0`).
    pub fn gram_charlier(support: Support, kappa: Vec<f64>) -> Self {
        let mu = kappa[0];
        let sigma = kappa[1].sqrt();
        let m = kappa.len();
        let bell = bell_reduced_all(m, kappa.get(2..).unwrap_or(&[]));
        let mut coef = Vec::with_capacity(m + 1);
        let mut fact_pow = 1.0;
        for (j, b) in bell.iter().enumerate() {
            if j > 0 {
                fact_pow *= j as f64 * sigma;
            }
            coef.push(b / fact_pow);
        }
        Self::build(
            support,
            Form::GramCharlier {
                kappa,
                mu,
                sigma,
                coef,
            },
        )
    }

    fn build(support: Support, form: Form) -> Self {
        let mut est = DensityEstimate {
            support,
            form,
            prefix: Vec::new(),
        };
        let rule = est.rule();
        let mut prefix = Vec::with_capacity(PANELS + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for panel in &rule.panels {
            acc += panel.integrate(|x| est.density(x));
            prefix.push(acc);
        }
        est.prefix = prefix;
        est
    }

    pub fn kind(&self) -> EstimateKind {
        match self.form {
            Form::MaxEntropy { .. } => EstimateKind::MaxEntropy,
            Form::GramCharlier { .. } => EstimateKind::GramCharlier,
        }
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// The composite rule shared by all integrals of this estimate.
    pub fn rule(&self) -> CompositeRule {
        CompositeRule::new(self.support.lo, self.support.hi, PANELS, DEFAULT_ORDER)
    }

    /// Multipliers `ξ_0..ξ_m` with `pdf(x) = exp(-Σ ξ_j x^j)`; `None` for GC.
    pub fn xi(&self) -> Option<Vec<f64>> {
        match &self.form {
            Form::MaxEntropy { std, zeta } => Some(unstandardize(zeta, std)),
            Form::GramCharlier { .. } => None,
        }
    }

    pub fn standardization(&self) -> Option<(Standardization, &[f64])> {
        match &self.form {
            Form::MaxEntropy { std, zeta } => Some((*std, zeta)),
            Form::GramCharlier { .. } => None,
        }
    }

    /// Cumulants `κ1..κm` of a GC estimate.
    pub fn cumulants(&self) -> Option<&[f64]> {
        match &self.form {
            Form::GramCharlier { kappa, .. } => Some(kappa),
            Form::MaxEntropy { .. } => None,
        }
    }

    /// Mean and variance of the reference Gaussian of a GC estimate.
    pub fn reference_gaussian(&self) -> Option<(f64, f64)> {
        match &self.form {
            Form::GramCharlier { mu, sigma, .. } => Some((*mu, sigma * sigma)),
            Form::MaxEntropy { .. } => None,
        }
    }

    /// Number of moments the estimate was built from.
    pub fn order(&self) -> usize {
        match &self.form {
            Form::MaxEntropy { zeta, .. } => zeta.len() - 1,
            Form::GramCharlier { kappa, .. } => kappa.len(),
        }
    }

    /// Density formula without the support cut-off.
    fn density(&self, x: f64) -> f64 {
        match &self.form {
            Form::MaxEntropy { std, zeta } => {
                let z = (x - std.shift) / std.scale;
                let mut p = 0.0;
                for c in zeta.iter().rev() {
                    p = p * z + c;
                }
                (-p).exp() / std.scale
            }
            Form::GramCharlier {
                mu, sigma, coef, ..
            } => {
                let z = (x - mu) / sigma;
                let psi = (-0.5 * z * z).exp() / (sigma * SQRT_2PI);
                // Σ c_j He_j(z) with the Hermite recurrence inline
                let (mut prev, mut cur) = (1.0, z);
                let mut sum = coef[0];
                for (j, c) in coef.iter().enumerate().skip(1) {
                    if j > 1 {
                        let next = z * cur - (j - 1) as f64 * prev;
                        prev = cur;
                        cur = next;
                    }
                    sum += c * cur;
                }
                psi * sum
            }
        }
    }

    /// Density at `x`; zero outside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        if self.support.contains(x) {
            self.density(x)
        } else {
            0.0
        }
    }

    /// `∫_l^x pdf`, clamped to 0 below the support and to [`Self::mass`] above.
    pub fn cdf(&self, x: f64) -> f64 {
        let Support { lo, hi } = self.support;
        if x <= lo || x.is_nan() {
            return 0.0;
        }
        if x >= hi {
            return self.mass();
        }
        let h = (hi - lo) / PANELS as f64;
        let p = (((x - lo) / h) as usize).min(PANELS - 1);
        let start = lo + h * p as f64;
        if x <= start {
            return self.prefix[p];
        }
        self.prefix[p] + gauss_legendre(start, x, DEFAULT_ORDER).integrate(|t| self.density(t))
    }

    /// `∫_l^u pdf` (1 for converged ME fits; GC may deviate).
    pub fn mass(&self) -> f64 {
        self.prefix[PANELS]
    }

    /// `∫ x^i pdf / ∫ pdf` over the support.
    pub fn moment(&self, i: u32) -> f64 {
        let rule = self.rule();
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, w) in rule.points() {
            let f = w * self.density(x);
            num += f * x.powi(i as i32);
            den += f;
        }
        num / den
    }

    /// `-∫ pdf ln pdf`; nodes with pdf ≤ 1e-300 contribute nothing.
    pub fn entropy(&self) -> f64 {
        self.rule()
            .points()
            .map(|(x, w)| {
                let f = self.density(x);
                if f > 1e-300 {
                    -w * f * f.ln()
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Tabulated cdf for fast quantiles.
    pub fn cdf_table(&self) -> CdfTable<'_> {
        CdfTable::new(self)
    }
}

/// Expands `Σ ζ_j ((x - s)/c)^j + ln c` into powers of `x`.
fn unstandardize(zeta: &[f64], std: &Standardization) -> Vec<f64> {
    let m = zeta.len();
    let mut xi = vec![0.0; m];
    for (j, z) in zeta.iter().enumerate() {
        let cj = z / std.scale.powi(j as i32);
        let mut binom = 1.0;
        for (k, slot) in xi.iter_mut().enumerate().take(j + 1) {
            if k > 0 {
                binom = binom * (j + 1 - k) as f64 / k as f64;
            }
            *slot += cj * binom * (-std.shift).powi((j - k) as i32);
        }
    }
    xi[0] += std.scale.ln();
    xi
}

/// Cdf on a fine grid, refined locally for quantiles.
#[derive(Clone, Debug)]
pub struct CdfTable<'a> {
    est: &'a DensityEstimate,
    grid: Vec<f64>,
    values: Vec<f64>,
}

const TABLE_POINTS: usize = 4096;
const TABLE_ORDER: usize = 8;

impl<'a> CdfTable<'a> {
    pub fn new(est: &'a DensityEstimate) -> Self {
        let Support { lo, hi } = est.support;
        let h = (hi - lo) / TABLE_POINTS as f64;
        let grid: Vec<f64> = (0..=TABLE_POINTS).map(|i| lo + h * i as f64).collect();
        let mut values = Vec::with_capacity(grid.len());
        let mut acc = 0.0;
        values.push(0.0);
        for w in grid.windows(2) {
            acc += gauss_legendre(w[0], w[1], TABLE_ORDER).integrate(|t| est.density(t));
            values.push(acc);
        }
        CdfTable { est, grid, values }
    }

    pub fn mass(&self) -> f64 {
        *self.values.last().expect("non-empty table")
    }

    /// Smallest `x` with `cdf(x) = p · mass`; `p` is a probability.
    pub fn quantile(&self, p: f64) -> f64 {
        let target = p.clamp(0.0, 1.0) * self.mass();
        let i = self.values.partition_point(|v| *v < target).clamp(1, self.grid.len() - 1);
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let (c0, c1) = (self.values[i - 1], self.values[i]);
        if c1 <= c0 {
            return x0;
        }
        // linear start, then Newton on the local integral
        let mut x = x0 + (target - c0) / (c1 - c0) * (x1 - x0);
        for _ in 0..3 {
            let f = self.est.density(x);
            if f <= 0.0 {
                break;
            }
            let c = c0 + gauss_legendre(x0, x, TABLE_ORDER).integrate(|t| self.est.density(t));
            x = (x - (c - target) / f).clamp(x0, x1);
        }
        x
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    kind: EstimateKind,
    support: Support,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    xi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    standardization: Option<WireStd>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cumulants: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma2: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct WireStd {
    shift: f64,
    scale: f64,
    zeta: Vec<f64>,
}

impl Serialize for DensityEstimate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let wire = match &self.form {
            Form::MaxEntropy { std, zeta } => Wire {
                kind: EstimateKind::MaxEntropy,
                support: self.support,
                xi: self.xi(),
                standardization: Some(WireStd {
                    shift: std.shift,
                    scale: std.scale,
                    zeta: zeta.clone(),
                }),
                cumulants: None,
                order: None,
                mu: None,
                sigma2: None,
            },
            Form::GramCharlier {
                kappa, mu, sigma, ..
            } => Wire {
                kind: EstimateKind::GramCharlier,
                support: self.support,
                xi: None,
                standardization: None,
                cumulants: Some(kappa.clone()),
                order: Some(kappa.len()),
                mu: Some(*mu),
                sigma2: Some(sigma * sigma),
            },
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityEstimate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let w = Wire::deserialize(d)?;
        if !w.support.is_valid() {
            return Err(D::Error::custom("support must satisfy lo < hi"));
        }
        match w.kind {
            EstimateKind::MaxEntropy => match (w.standardization, w.xi) {
                (Some(st), _) if !st.zeta.is_empty() && st.scale > 0.0 => Ok(Self::max_entropy(
                    w.support,
                    Standardization {
                        shift: st.shift,
                        scale: st.scale,
                    },
                    st.zeta,
                )),
                (None, Some(xi)) if !xi.is_empty() => Ok(Self::max_entropy_raw(w.support, xi)),
                _ => Err(D::Error::custom("ME estimate needs \"xi\" or \"standardization\"")),
            },
            EstimateKind::GramCharlier => {
                let kappa = w
                    .cumulants
                    .ok_or_else(|| D::Error::custom("GC estimate needs \"cumulants\""))?;
                if kappa.len() < 2 || !(kappa[1] > 0.0) {
                    return Err(D::Error::custom("GC estimate needs κ2 > 0"));
                }
                if w.order.is_some_and(|m| m != kappa.len()) {
                    return Err(D::Error::custom("\"order\" must equal the number of cumulants"));
                }
                Ok(Self::gram_charlier(w.support, kappa))
            }
        }
    }
}
