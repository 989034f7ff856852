use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::MomentError;
use crate::dsl::{CoreProgram, Distribution};
use crate::poly::{Monomial, Poly, Rational, Symbol};

/// Default cap on basis size for [`closure_basis`].
pub const DEFAULT_CAP: usize = 512;

/// State monomials whose expectations evolve autonomously, together with the
/// one-iteration expectation map expressed over the basis itself.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialBasis {
    pub var: usize,
    pub order: u32,
    /// `monomials[0]` is the unit monomial.
    pub monomials: Vec<Monomial>,
    /// Index of `var^i` for `i = 1..=order`.
    pub targets: Vec<usize>,
    /// `E[M_j(t+1)] = Σ rows[j][..].1 · E[M_k(t)]`.
    pub rows: Vec<Vec<(usize, Rational)>>,
}

impl MonomialBasis {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Exponent vector of each monomial over the program's state variables.
    pub fn multi_indices(&self, nvars: usize) -> Vec<Vec<u32>> {
        self.monomials
            .iter()
            .map(|m| (0..nvars).map(|v| m.exponent(Symbol::Var(v))).collect())
            .collect()
    }
}

/// `E[X^k]` for a draw distribution, exactly.
pub fn raw_moment(dist: &Distribution, k: u32) -> Rational {
    if k == 0 {
        return Rational::one();
    }
    match dist {
        Distribution::Bernoulli { p } => p.clone(),
        Distribution::Uniform { lo, hi } => {
            let k1 = k + 1;
            (num_traits::pow(hi.clone(), k1 as usize) - num_traits::pow(lo.clone(), k1 as usize))
                / (Rational::from_integer(BigInt::from(k1)) * (hi - lo))
        }
        Distribution::Normal { mean, variance } => {
            // central moments: 0 for odd j, (σ²)^{j/2} (j-1)!! for even j
            let mut total = Rational::zero();
            let mut binom = BigInt::one();
            let mut central = Rational::one();
            for j in 0..=k {
                if j > 0 {
                    binom = binom * BigInt::from(k - j + 1) / BigInt::from(j);
                }
                if j >= 2 && j % 2 == 0 {
                    central = central * variance * Rational::from_integer(BigInt::from(j - 1));
                }
                if j % 2 == 0 {
                    total += Rational::from_integer(binom.clone())
                        * num_traits::pow(mean.clone(), (k - j) as usize)
                        * &central;
                }
            }
            total
        }
    }
}

/// Image of every state variable after one loop iteration, as polynomials in
/// the state at the start of the iteration and that iteration's draws.
pub fn one_step(core: &CoreProgram) -> Vec<Poly> {
    let idem = |s| core.is_idempotent(s);
    let mut image: Vec<Poly> = (0..core.vars.len())
        .map(|i| Poly::symbol(Symbol::Var(i)))
        .collect();
    for u in &core.updates {
        let next = u.poly.substitute(
            &|s| match s {
                Symbol::Var(i) => image[i].clone(),
                Symbol::Draw(_) => Poly::symbol(s),
            },
            &idem,
        );
        image[u.target] = next;
    }
    image
}

/// `E[M(t+1) | state(t)]` as a polynomial over state variables.
pub fn pullback(core: &CoreProgram, image: &[Poly], m: &Monomial) -> Poly {
    let idem = |s| core.is_idempotent(s);
    let expanded = Poly::from_terms([(m.clone(), Rational::one())]).substitute(
        &|s| match s {
            Symbol::Var(i) => image[i].clone(),
            Symbol::Draw(_) => Poly::symbol(s),
        },
        &idem,
    );
    let mut out = Poly::zero();
    for (mono, c) in expanded.terms() {
        let (vars, draws) = mono.split_draws();
        let mut coef = c.clone();
        for &(s, e) in draws.factors() {
            if let Symbol::Draw(k) = s {
                coef *= raw_moment(&core.draws[k].dist, e);
            }
        }
        out.add_term(vars, coef);
    }
    out
}

/// Worklist fixpoint starting from `var^1..var^m`.
pub fn closure_basis(
    core: &CoreProgram,
    var: usize,
    m: u32,
    cap: usize,
) -> Result<MonomialBasis, MomentError> {
    if m == 0 {
        return Err(MomentError::InvalidOrder);
    }
    let idem = |s| core.is_idempotent(s);
    let image = one_step(core);

    let mut index: BTreeMap<Monomial, usize> = BTreeMap::new();
    let mut monomials = vec![Monomial::unit()];
    index.insert(Monomial::unit(), 0);
    let mut targets = Vec::new();
    for k in 1..=m {
        let mono = Monomial::power(Symbol::Var(var), k).reduce_idempotent(&idem);
        let next = monomials.len();
        let at = *index.entry(mono.clone()).or_insert_with(|| {
            monomials.push(mono);
            next
        });
        targets.push(at);
    }

    let mut rows: Vec<Vec<(usize, Rational)>> = Vec::new();
    let mut cursor = 0;
    while cursor < monomials.len() {
        let image_poly = pullback(core, &image, &monomials[cursor]);
        let mut row = Vec::new();
        for (mono, c) in image_poly.terms() {
            if mono.degree() as usize > cap {
                return Err(MomentError::ClosureExceeded { cap });
            }
            let at = match index.get(mono) {
                Some(&i) => i,
                None => {
                    if monomials.len() >= cap {
                        return Err(MomentError::ClosureExceeded { cap });
                    }
                    monomials.push(mono.clone());
                    index.insert(mono.clone(), monomials.len() - 1);
                    monomials.len() - 1
                }
            };
            row.push((at, c.clone()));
        }
        rows.push(row);
        cursor += 1;
    }

    Ok(MonomialBasis {
        var,
        order: m,
        monomials,
        targets,
        rows,
    })
}
