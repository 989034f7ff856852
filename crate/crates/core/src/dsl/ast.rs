use std::fmt;

use num_traits::Signed;

use crate::poly::{format_rational, Rational};

/// A probabilistic loop: pragmas, an init block and one unbounded loop body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    /// Variables declared with `@binary`, in declaration order.
    pub binary: Vec<String>,
    /// Optional `@support var lo hi` hints used as the default estimation support.
    pub supports: Vec<SupportHint>,
    pub inits: Vec<Init>,
    pub body: Vec<Statement>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportHint {
    pub var: String,
    pub lo: Rational,
    pub hi: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Init {
    pub target: String,
    pub value: InitValue,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitValue {
    Number(Rational),
    Dist(Distribution),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Distribution {
    Normal { mean: Rational, variance: Rational },
    Uniform { lo: Rational, hi: Rational },
    Bernoulli { p: Rational },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    /// `x := e`
    Assign { target: String, expr: Expr },
    /// `x := e1 [p] e2`
    Choice {
        target: String,
        then: Expr,
        prob: Rational,
        otherwise: Expr,
    },
    /// `x := Dist(...)`
    Draw { target: String, dist: Distribution },
    /// `if g = v { stmt } else { stmt }` with `g` binary.
    Guard {
        var: String,
        value: u8,
        then: Box<Statement>,
        otherwise: Box<Statement>,
    },
}

impl Statement {
    /// Variables written by this statement, in branch order.
    pub fn targets(&self) -> Vec<&str> {
        match self {
            Statement::Assign { target, .. }
            | Statement::Choice { target, .. }
            | Statement::Draw { target, .. } => vec![target.as_str()],
            Statement::Guard {
                then, otherwise, ..
            } => {
                let mut t = then.targets();
                t.extend(otherwise.targets());
                t
            }
        }
    }

    /// Variables read by this statement.
    pub fn reads(&self) -> Vec<&str> {
        let mut out = Vec::new();
        match self {
            Statement::Assign { expr, .. } => expr.collect_vars(&mut out),
            Statement::Choice {
                then, otherwise, ..
            } => {
                then.collect_vars(&mut out);
                otherwise.collect_vars(&mut out);
            }
            Statement::Draw { .. } => {}
            Statement::Guard {
                var,
                then,
                otherwise,
                ..
            } => {
                out.push(var.as_str());
                out.extend(then.reads());
                out.extend(otherwise.reads());
            }
        }
        out
    }
}

/// Polynomial expression over program variables and rational literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(Rational),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => out.push(v),
            Expr::Neg(e) | Expr::Pow(e, _) => e.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            // `p/q` literals print as a division
            Expr::Num(r) if !r.is_integer() => 2,
            Expr::Num(r) if r.is_negative() => 3,
            Expr::Num(_) | Expr::Var(_) => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({})", self)
        } else {
            write!(f, "{}", self)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(r) => write!(f, "{}", format_rational(r)),
            Expr::Var(v) => write!(f, "{}", v),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_child(f, 4)
            }
            Expr::Add(a, b) => {
                a.fmt_child(f, 1)?;
                write!(f, " + ")?;
                b.fmt_child(f, 2)
            }
            Expr::Sub(a, b) => {
                a.fmt_child(f, 1)?;
                write!(f, " - ")?;
                b.fmt_child(f, 2)
            }
            Expr::Mul(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, " * ")?;
                b.fmt_child(f, 4)
            }
            Expr::Div(a, b) => {
                a.fmt_child(f, 2)?;
                write!(f, " / ")?;
                b.fmt_child(f, 4)
            }
            Expr::Pow(base, e) => {
                base.fmt_child(f, 5)?;
                write!(f, "^{}", e)
            }
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Normal { mean, variance } => write!(
                f,
                "Normal({}, {})",
                format_rational(mean),
                format_rational(variance)
            ),
            Distribution::Uniform { lo, hi } => {
                write!(f, "Uniform({}, {})", format_rational(lo), format_rational(hi))
            }
            Distribution::Bernoulli { p } => write!(f, "Bernoulli({})", format_rational(p)),
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Assign { target, expr } => write!(f, "{} := {}", target, expr),
            Statement::Choice {
                target,
                then,
                prob,
                otherwise,
            } => write!(
                f,
                "{} := {} [{}] {}",
                target,
                then,
                format_rational(prob),
                otherwise
            ),
            Statement::Draw { target, dist } => write!(f, "{} := {}", target, dist),
            Statement::Guard {
                var,
                value,
                then,
                otherwise,
            } => write!(
                f,
                "if {} = {} {{ {} }} else {{ {} }}",
                var, value, then, otherwise
            ),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.binary {
            writeln!(f, "@binary {}", b)?;
        }
        for s in &self.supports {
            writeln!(
                f,
                "@support {} {} {}",
                s.var,
                format_rational(&s.lo),
                format_rational(&s.hi)
            )?;
        }
        for init in &self.inits {
            match &init.value {
                InitValue::Number(r) => writeln!(f, "{} := {}", init.target, format_rational(r))?,
                InitValue::Dist(d) => writeln!(f, "{} := {}", init.target, d)?,
            }
        }
        writeln!(f, "while true {{")?;
        for stmt in &self.body {
            writeln!(f, "    {}", stmt)?;
        }
        writeln!(f, "}}")
    }
}
