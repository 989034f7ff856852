use std::collections::HashMap;

use num_traits::{One, Zero};

use super::ast::{Distribution, Expr, InitValue, Program, Statement};
use super::DslError;
use crate::poly::{format_rational, Poly, Rational, Symbol};

/// Polynomial-update normal form of a [`Program`].
#[derive(Clone, Debug, PartialEq)]
pub struct CoreProgram {
    /// State variables; `Symbol::Var(i)` refers to `vars[i]`.
    pub vars: Vec<String>,
    /// Initial value of each state variable, parallel to `vars`.
    pub inits: Vec<CoreInit>,
    /// Init-only numeric variables, substituted into every update.
    pub constants: Vec<(String, Rational)>,
    /// Fresh draws; `Symbol::Draw(k)` refers to `draws[k]`.
    pub draws: Vec<FreshDraw>,
    pub updates: Vec<Update>,
    /// Parallel to `vars`.
    pub binary: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoreInit {
    Const(Rational),
    Dist(Distribution),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreshDraw {
    pub name: String,
    pub dist: Distribution,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Update {
    pub target: usize,
    pub poly: Poly,
}

impl CoreProgram {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Symbols that satisfy `s^2 = s`: binary state variables and Bernoulli draws.
    pub fn is_idempotent(&self, s: Symbol) -> bool {
        match s {
            Symbol::Var(i) => self.binary[i],
            Symbol::Draw(k) => matches!(self.draws[k].dist, Distribution::Bernoulli { .. }),
        }
    }

    /// Human-readable listing with variable and draw names.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.vars.iter().enumerate() {
            let init = match &self.inits[i] {
                CoreInit::Const(r) => format_rational(r),
                CoreInit::Dist(d) => d.to_string(),
            };
            out.push_str(&format!("{} := {}\n", v, init));
        }
        for d in &self.draws {
            out.push_str(&format!("{} ~ {}\n", d.name, d.dist));
        }
        for u in &self.updates {
            let text = u.poly.render(&|s| match s {
                Symbol::Var(i) => self.vars[i].clone(),
                Symbol::Draw(k) => self.draws[k].name.clone(),
            });
            out.push_str(&format!("{} := {}\n", self.vars[u.target], text));
        }
        out
    }
}

/// Rewrites choices and guards into polynomial updates with fresh draws.
///
/// The program must already have passed validation; malformed shapes that
/// slip through are reported as [`DslError::DesugarUnsupported`].
pub fn desugar(program: &Program) -> Result<CoreProgram, DslError> {
    let assigned: Vec<&str> = program.body.iter().flat_map(|s| s.targets()).collect();

    let mut constants = Vec::new();
    let mut vars: Vec<String> = Vec::new();
    let mut inits = Vec::new();
    for init in &program.inits {
        match &init.value {
            InitValue::Number(r) if !assigned.contains(&init.target.as_str()) => {
                constants.push((init.target.clone(), r.clone()));
            }
            InitValue::Number(r) => {
                vars.push(init.target.clone());
                inits.push(CoreInit::Const(r.clone()));
            }
            InitValue::Dist(d) => {
                vars.push(init.target.clone());
                inits.push(CoreInit::Dist(d.clone()));
            }
        }
    }
    for t in &assigned {
        if !vars.iter().any(|v| v == t) {
            vars.push(t.to_string());
            inits.push(CoreInit::Const(Rational::zero()));
        }
    }
    let binary: Vec<bool> = vars.iter().map(|v| program.binary.contains(v)).collect();

    let mut cx = Context {
        index: vars.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect(),
        constants: constants.iter().cloned().collect(),
        binary: binary.clone(),
        draws: Vec::new(),
    };
    let mut updates = Vec::new();
    for stmt in &program.body {
        let (target, poly) = cx.statement(stmt)?;
        updates.push(Update { target, poly });
    }

    Ok(CoreProgram {
        vars,
        inits,
        constants,
        draws: cx.draws,
        updates,
        binary,
    })
}

struct Context {
    index: HashMap<String, usize>,
    constants: HashMap<String, Rational>,
    binary: Vec<bool>,
    draws: Vec<FreshDraw>,
}

impl Context {
    fn idempotent(&self) -> impl Fn(Symbol) -> bool + '_ {
        move |s| match s {
            Symbol::Var(i) => self.binary[i],
            Symbol::Draw(k) => matches!(self.draws[k].dist, Distribution::Bernoulli { .. }),
        }
    }

    fn fresh(&mut self, dist: Distribution) -> Poly {
        let k = self.draws.len();
        self.draws.push(FreshDraw {
            name: format!("#d{}", k),
            dist,
        });
        Poly::symbol(Symbol::Draw(k))
    }

    fn target(&self, name: &str) -> Result<usize, DslError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| DslError::DesugarUnsupported(format!("`{}` is not a state variable", name)))
    }

    fn statement(&mut self, stmt: &Statement) -> Result<(usize, Poly), DslError> {
        match stmt {
            Statement::Assign { target, expr } => Ok((self.target(target)?, self.expr(expr)?)),
            Statement::Choice {
                target,
                then,
                prob,
                otherwise,
            } => {
                let a = self.expr(then)?;
                let b = self.expr(otherwise)?;
                let c = self.fresh(Distribution::Bernoulli { p: prob.clone() });
                let idem = self.idempotent();
                let poly = c
                    .mul_reduced(&a, &idem)
                    .add(&Poly::one().sub(&c).mul_reduced(&b, &idem));
                Ok((self.target(target)?, poly))
            }
            Statement::Draw { target, dist } => {
                let d = self.fresh(dist.clone());
                Ok((self.target(target)?, d))
            }
            Statement::Guard {
                var,
                value,
                then,
                otherwise,
            } => {
                if matches!(**then, Statement::Guard { .. })
                    || matches!(**otherwise, Statement::Guard { .. })
                {
                    return Err(DslError::DesugarUnsupported(
                        "nested guards are not supported".into(),
                    ));
                }
                let (ta, a) = self.statement(then)?;
                let (tb, b) = self.statement(otherwise)?;
                if ta != tb {
                    return Err(DslError::DesugarUnsupported(format!(
                        "guard on `{}` assigns different variables in its branches",
                        var
                    )));
                }
                let s = self.var_poly(var)?;
                let (when_zero, when_one) = if *value == 0 { (a, b) } else { (b, a) };
                let idem = self.idempotent();
                let poly = Poly::one()
                    .sub(&s)
                    .mul_reduced(&when_zero, &idem)
                    .add(&s.mul_reduced(&when_one, &idem));
                Ok((ta, poly))
            }
        }
    }

    fn var_poly(&self, name: &str) -> Result<Poly, DslError> {
        if let Some(c) = self.constants.get(name) {
            return Ok(Poly::constant(c.clone()));
        }
        Ok(Poly::symbol(Symbol::Var(self.target(name)?)))
    }

    fn expr(&self, e: &Expr) -> Result<Poly, DslError> {
        let idem = self.idempotent();
        Ok(match e {
            Expr::Num(r) => Poly::constant(r.clone()),
            Expr::Var(v) => self.var_poly(v)?,
            Expr::Neg(a) => self.expr(a)?.neg(),
            Expr::Add(a, b) => self.expr(a)?.add(&self.expr(b)?),
            Expr::Sub(a, b) => self.expr(a)?.sub(&self.expr(b)?),
            Expr::Mul(a, b) => self.expr(a)?.mul_reduced(&self.expr(b)?, &idem),
            Expr::Div(a, b) => {
                let d = self.expr(b)?.as_constant().ok_or_else(|| {
                    DslError::DesugarUnsupported(format!("division by non-constant `{}`", b))
                })?;
                if d.is_zero() {
                    return Err(DslError::DesugarUnsupported("division by zero".into()));
                }
                self.expr(a)?.scale(&(Rational::one() / d))
            }
            Expr::Pow(a, k) => self.expr(a)?.pow_reduced(*k, &idem),
        })
    }
}
