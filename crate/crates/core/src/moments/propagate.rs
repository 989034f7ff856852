use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::closure::{raw_moment, MonomialBasis};
use super::{MomentError, MomentSet, Provenance};
use crate::dsl::{CoreInit, CoreProgram};
use crate::poly::{rational_to_f64, Rational, Symbol};

/// Largest basis propagated in exact arithmetic under [`PropagationMode::Auto`].
pub const EXACT_BASIS_LIMIT: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PropagationMode {
    /// Exact when the basis has at most [`EXACT_BASIS_LIMIT`] monomials.
    #[default]
    Auto,
    Exact,
    Float,
}

/// Moments of the basis target at iteration `n`.
pub fn propagate(
    core: &CoreProgram,
    basis: &MonomialBasis,
    n: u64,
) -> Result<MomentSet, MomentError> {
    propagate_with(core, basis, n, PropagationMode::Auto)
}

pub fn propagate_with(
    core: &CoreProgram,
    basis: &MonomialBasis,
    n: u64,
    mode: PropagationMode,
) -> Result<MomentSet, MomentError> {
    let v0 = initial_expectations(core, basis);
    let exact = match mode {
        PropagationMode::Auto => basis.len() <= EXACT_BASIS_LIMIT,
        PropagationMode::Exact => true,
        PropagationMode::Float => false,
    };
    let var = core.vars[basis.var].clone();
    if exact {
        let all = propagate_exact(basis, &v0, n);
        let picked: Vec<Rational> = basis.targets.iter().map(|&t| all[t].clone()).collect();
        let values: Vec<f64> = picked.iter().map(rational_to_f64).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MomentError::NumericOverflow { iteration: n });
        }
        Ok(MomentSet {
            var,
            n,
            values,
            exact: Some(picked),
            provenance: Provenance::Propagated,
        })
    } else {
        let all = propagate_float(basis, &v0, n)?;
        Ok(MomentSet {
            var,
            n,
            values: basis.targets.iter().map(|&t| all[t]).collect(),
            exact: None,
            provenance: Provenance::Propagated,
        })
    }
}

/// Expectation of each basis monomial under the (independent) init block.
fn initial_expectations(core: &CoreProgram, basis: &MonomialBasis) -> Vec<Rational> {
    basis
        .monomials
        .iter()
        .map(|m| {
            let mut acc = Rational::one();
            for &(s, e) in m.factors() {
                if let Symbol::Var(i) = s {
                    acc *= match &core.inits[i] {
                        CoreInit::Const(c) => num_traits::pow(c.clone(), e as usize),
                        CoreInit::Dist(d) => raw_moment(d, e),
                    };
                }
            }
            acc
        })
        .collect()
}

/// Iterates the integer-scaled map `B = D·A` so no gcd is taken until the end:
/// `E_n = B^n (d0·v0) / (d0·D^n)`.
fn propagate_exact(basis: &MonomialBasis, v0: &[Rational], n: u64) -> Vec<Rational> {
    let mut scale = BigInt::one();
    for row in &basis.rows {
        for (_, c) in row {
            scale = scale.lcm(c.denom());
        }
    }
    let b: Vec<Vec<(usize, BigInt)>> = basis
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|(k, c)| (*k, c.numer() * (&scale / c.denom())))
                .collect()
        })
        .collect();

    let mut d0 = BigInt::one();
    for v in v0 {
        d0 = d0.lcm(v.denom());
    }
    let mut w: Vec<BigInt> = v0.iter().map(|v| v.numer() * (&d0 / v.denom())).collect();

    for _ in 0..n {
        w = b
            .iter()
            .map(|row| {
                let mut acc = BigInt::zero();
                for (k, c) in row {
                    acc += c * &w[*k];
                }
                acc
            })
            .collect();
    }
    let denom = d0 * num_traits::pow(scale, n as usize);
    w.into_iter()
        .map(|x| Rational::new(x, denom.clone()))
        .collect()
}

fn propagate_float(basis: &MonomialBasis, v0: &[Rational], n: u64) -> Result<Vec<f64>, MomentError> {
    let a: Vec<Vec<(usize, f64)>> = basis
        .rows
        .iter()
        .map(|row| row.iter().map(|(k, c)| (*k, rational_to_f64(c))).collect())
        .collect();
    let mut v: Vec<f64> = v0.iter().map(rational_to_f64).collect();
    for t in 0..n {
        v = a
            .iter()
            .map(|row| row.iter().map(|(k, c)| c * v[*k]).sum())
            .collect();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(MomentError::NumericOverflow { iteration: t + 1 });
        }
    }
    Ok(v)
}
