//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Symbols are either program state variables or fresh random draws
//! introduced by desugaring. Terms are kept in a `BTreeMap` so iteration
//! order, and therefore everything built on top of it, is deterministic.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// A polynomial indeterminate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// State variable, indexed into the owning program's variable list.
    Var(usize),
    /// Fresh draw `#d<k>`, one per probabilistic statement.
    Draw(usize),
}

/// Product of symbols raised to positive exponents, sorted by symbol.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Symbol, u32)>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn symbol(s: Symbol) -> Self {
        Monomial(vec![(s, 1)])
    }

    pub fn power(s: Symbol, e: u32) -> Self {
        if e == 0 {
            Monomial::unit()
        } else {
            Monomial(vec![(s, e)])
        }
    }

    /// Build from arbitrary `(symbol, exponent)` pairs; zero exponents are dropped
    /// and repeated symbols merged.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Symbol, u32)>) -> Self {
        let mut map: BTreeMap<Symbol, u32> = BTreeMap::new();
        for (s, e) in pairs {
            if e > 0 {
                *map.entry(s).or_insert(0) += e;
            }
        }
        Monomial(map.into_iter().collect())
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| *e).sum()
    }

    pub fn exponent(&self, s: Symbol) -> u32 {
        self.0
            .iter()
            .find(|(t, _)| *t == s)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, ea) = self.0[i];
            let (b, eb) = other.0[j];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => {
                    out.push((a, ea));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((b, eb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Caps the exponent of every symbol selected by `idempotent` at one.
    pub fn reduce_idempotent(&self, idempotent: &impl Fn(Symbol) -> bool) -> Monomial {
        Monomial(
            self.0
                .iter()
                .map(|&(s, e)| if idempotent(s) { (s, e.min(1)) } else { (s, e) })
                .collect(),
        )
    }

    /// Splits into the part over state variables and the part over draws.
    pub fn split_draws(&self) -> (Monomial, Monomial) {
        let (vars, draws): (Vec<_>, Vec<_>) =
            self.0.iter().partition(|(s, _)| matches!(s, Symbol::Var(_)));
        (Monomial(vars), Monomial(draws))
    }
}

/// Sparse polynomial `Σ c_m · m` with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::unit(), c);
        p
    }

    pub fn symbol(s: Symbol) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::symbol(s), Rational::one());
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Constant value, if the polynomial has no symbols.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self
                .terms
                .get(&Monomial::unit())
                .cloned(),
            _ => None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self
            .terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|(s, _)| *s))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * k))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    /// Product that applies idempotent reduction after every multiplication,
    /// keeping intermediate expansions small when binary symbols are involved.
    pub fn mul_reduced(&self, other: &Poly, idempotent: &impl Fn(Symbol) -> bool) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb).reduce_idempotent(idempotent), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        self.pow_reduced(e, &|_| false)
    }

    pub fn pow_reduced(&self, e: u32, idempotent: &impl Fn(Symbol) -> bool) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul_reduced(self, idempotent);
        }
        acc
    }

    pub fn reduce_idempotent(&self, idempotent: &impl Fn(Symbol) -> bool) -> Poly {
        Poly::from_terms(
            self.terms
                .iter()
                .map(|(m, c)| (m.reduce_idempotent(idempotent), c.clone())),
        )
    }

    /// Replaces every symbol by a polynomial.
    pub fn substitute(
        &self,
        image: &impl Fn(Symbol) -> Poly,
        idempotent: &impl Fn(Symbol) -> bool,
    ) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for &(s, e) in m.factors() {
                term = term.mul_reduced(&image(s).pow_reduced(e, idempotent), idempotent);
            }
            out = out.add(&term);
        }
        out
    }

    /// Evaluates with symbol values supplied by `value`.
    pub fn eval<T: Scalar>(&self, value: &impl Fn(Symbol) -> T) -> T {
        let mut acc = T::zero_value();
        for (m, c) in &self.terms {
            let mut t = T::from_rational(c);
            for &(s, e) in m.factors() {
                t = t.mul(&value(s).powu(e));
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Coefficients converted to binary64, for fast repeated evaluation.
    pub fn to_f64_terms(&self) -> Vec<(Vec<(Symbol, u32)>, f64)> {
        self.terms
            .iter()
            .map(|(m, c)| (m.factors().to_vec(), rational_to_f64(c)))
            .collect()
    }
}

impl Poly {
    /// Formats the polynomial, naming symbols with `name`.
    pub fn render(&self, name: &impl Fn(Symbol) -> String) -> String {
        use std::fmt::Write;
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut f = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if i > 0 {
                let _ = write!(f, " {} ", if neg { '-' } else { '+' });
            } else if neg {
                f.push('-');
            }
            let abs = c.abs();
            if m.is_unit() {
                let _ = write!(f, "{}", abs);
                continue;
            }
            if !abs.is_one() {
                let _ = write!(f, "{}*", abs);
            }
            for (k, (s, e)) in m.factors().iter().enumerate() {
                if k > 0 {
                    f.push('*');
                }
                f.push_str(&name(*s));
                if *e > 1 {
                    let _ = write!(f, "^{}", e);
                }
            }
        }
        f
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|s| match s {
            Symbol::Var(v) => format!("v{}", v),
            Symbol::Draw(d) => format!("#d{}", d),
        }))
    }
}

/// Arithmetic needed to evaluate programs, implemented for binary64 and for
/// exact rationals.
pub trait Scalar: Clone + PartialEq {
    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// Exact conversion of a finite binary64 value.
    fn from_f64(x: f64) -> Self;
    fn as_f64(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_finite(&self) -> bool;

    fn powu(&self, e: u32) -> Self {
        let mut acc = Self::one_value();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl Scalar for f64 {
    fn zero_value() -> Self {
        0.0
    }
    fn one_value() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn powu(&self, e: u32) -> Self {
        self.powi(e as i32)
    }
}

impl Scalar for Rational {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).expect("finite draw value")
    }
    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn is_finite(&self) -> bool {
        true
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn rational_from_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `p/q`, integers and decimals (`0.25`, `1e-3`) exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{}{}", int_part, frac_part);
    let numer: BigInt = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(numer);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

/// Integer if the denominator is one, otherwise `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
