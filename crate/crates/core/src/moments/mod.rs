//! Exact raw moments of loop variables at a concrete iteration, and the
//! other ways a moment list can enter the pipeline.

mod closure;
mod external;
mod propagate;
mod validity;

pub use closure::{closure_basis, one_step, pullback, raw_moment, MonomialBasis, DEFAULT_CAP};
pub use external::{eval_closed_form, load_moments};
pub use propagate::{propagate, propagate_with, PropagationMode};
pub use validity::{moment_validity, ValidityReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentError {
    #[error("monomial basis exceeded the cap of {cap}")]
    ClosureExceeded { cap: usize },
    #[error("numeric overflow at iteration {iteration}")]
    NumericOverflow { iteration: u64 },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("moment order must be at least 1")]
    InvalidOrder,
    #[error("moments document: {0}")]
    Schema(String),
    #[error("cannot evaluate `{expr}`: {reason}")]
    Eval { expr: String, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Propagated,
    Empirical,
    External,
}

/// Raw moments `E(x^1) .. E(x^m)` of one variable at iteration `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSet {
    pub var: String,
    pub n: u64,
    pub values: Vec<f64>,
    /// Present when propagation stayed in rational arithmetic.
    pub exact: Option<Vec<Rational>>,
    pub provenance: Provenance,
}

impl MomentSet {
    pub fn new(var: impl Into<String>, n: u64, values: Vec<f64>, provenance: Provenance) -> Self {
        MomentSet {
            var: var.into(),
            n,
            values,
            exact: None,
            provenance,
        }
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// `E(x^i)`, with `E(x^0) = 1`.
    pub fn raw(&self, i: usize) -> f64 {
        if i == 0 {
            1.0
        } else {
            self.values[i - 1]
        }
    }

    /// The first `m` orders.
    pub fn prefix(&self, m: usize) -> MomentSet {
        let m = m.min(self.values.len());
        MomentSet {
            var: self.var.clone(),
            n: self.n,
            values: self.values[..m].to_vec(),
            exact: self.exact.as_ref().map(|e| e[..m].to_vec()),
            provenance: self.provenance,
        }
    }

    pub fn mean(&self) -> f64 {
        self.raw(1)
    }

    pub fn variance(&self) -> f64 {
        self.raw(2) - self.raw(1) * self.raw(1)
    }
}

#[derive(Serialize, Deserialize)]
struct MomentSetRepr {
    var: String,
    n: u64,
    values: Vec<f64>,
    provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    exact: Option<Vec<String>>,
}

impl Serialize for MomentSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MomentSetRepr {
            var: self.var.clone(),
            n: self.n,
            values: self.values.clone(),
            provenance: self.provenance,
            exact: self
                .exact
                .as_ref()
                .map(|e| e.iter().map(crate::poly::format_rational).collect()),
        }
        .serialize(s)
    }
}
