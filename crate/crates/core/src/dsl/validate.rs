use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use super::ast::{Distribution, InitValue, Program, Statement};
use super::desugar::{desugar, CoreProgram};
use crate::moments::{closure_basis, DEFAULT_CAP};
use crate::poly::{Rational, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {}", tag, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
    /// Every state variable has a closed moment basis at order 2.
    pub eligible: bool,
}

impl ValidationReport {
    pub fn has_errors(&self) -> bool {
        self.issues.iter().any(|i| i.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }
}

struct Collector(Vec<Issue>);

impl Collector {
    fn error(&mut self, message: String) {
        self.0.push(Issue {
            severity: Severity::Error,
            message,
        });
    }

    fn warning(&mut self, message: String) {
        self.0.push(Issue {
            severity: Severity::Warning,
            message,
        });
    }
}

pub fn validate(program: &Program) -> ValidationReport {
    let mut out = Collector(Vec::new());
    let binary: HashSet<&str> = program.binary.iter().map(String::as_str).collect();

    let mut known: HashSet<&str> = program.inits.iter().map(|i| i.target.as_str()).collect();
    known.extend(program.body.iter().flat_map(|s| s.targets()));
    for b in &program.binary {
        if !known.contains(b.as_str()) {
            out.error(format!("binary variable `{}` is never assigned", b));
        }
    }
    for s in &program.supports {
        if !known.contains(s.var.as_str()) {
            out.error(format!("support hint for unknown variable `{}`", s.var));
        }
        if s.lo >= s.hi {
            out.error(format!("support of `{}`: lo < hi violated", s.var));
        }
    }

    for init in &program.inits {
        match &init.value {
            InitValue::Dist(d) => {
                check_dist(d, &init.target, &mut out);
                if binary.contains(init.target.as_str())
                    && !matches!(d, Distribution::Bernoulli { .. })
                {
                    out.error(format!(
                        "binary variable `{}` initialised with a non-Bernoulli draw",
                        init.target
                    ));
                }
            }
            InitValue::Number(r) => {
                if binary.contains(init.target.as_str()) && !r.is_zero() && !r.is_one() {
                    out.error(format!(
                        "binary variable `{}` initialised outside {{0, 1}}",
                        init.target
                    ));
                }
            }
        }
    }

    for stmt in &program.body {
        check_statement(stmt, &binary, &mut out);
    }

    let read: HashSet<&str> = program
        .body
        .iter()
        .flat_map(|s| s.reads())
        .collect();
    let assigned: HashSet<&str> = program.body.iter().flat_map(|s| s.targets()).collect();
    for init in &program.inits {
        let name = init.target.as_str();
        if !read.contains(name) && !assigned.contains(name) {
            out.warning(format!("variable `{}` is never used", name));
        }
    }

    let mut eligible = false;
    if !out.0.iter().any(|i| i.severity == Severity::Error) {
        match desugar(program) {
            Ok(core) => {
                check_binary_updates(&core, &mut out);
                eligible = (0..core.vars.len())
                    .all(|v| closure_basis(&core, v, 2, DEFAULT_CAP).is_ok());
            }
            Err(e) => out.error(e.to_string()),
        }
    }

    ValidationReport {
        issues: out.0,
        eligible,
    }
}

fn check_dist(d: &Distribution, target: &str, out: &mut Collector) {
    match d {
        Distribution::Normal { variance, .. } => {
            if variance < &Rational::zero() {
                out.error(format!("`{}`: Normal variance must be non-negative", target));
            }
        }
        Distribution::Uniform { lo, hi } => {
            if lo >= hi {
                out.error(format!("`{}`: Uniform lo < hi violated", target));
            }
        }
        Distribution::Bernoulli { p } => {
            if !in_unit_interval(p) {
                out.error(format!("`{}`: Bernoulli p must lie in [0, 1]", target));
            }
        }
    }
}

fn in_unit_interval(p: &Rational) -> bool {
    *p >= Rational::zero() && *p <= Rational::one()
}

fn check_statement(stmt: &Statement, binary: &HashSet<&str>, out: &mut Collector) {
    match stmt {
        Statement::Assign { .. } => {}
        Statement::Choice { target, prob, .. } => {
            if !in_unit_interval(prob) {
                out.error(format!("`{}`: choice probability must lie in [0, 1]", target));
            }
        }
        Statement::Draw { target, dist } => {
            check_dist(dist, target, out);
            if binary.contains(target.as_str()) && !matches!(dist, Distribution::Bernoulli { .. })
            {
                out.error(format!(
                    "binary variable `{}` assigned a non-Bernoulli draw",
                    target
                ));
            }
        }
        Statement::Guard {
            var,
            then,
            otherwise,
            ..
        } => {
            if !binary.contains(var.as_str()) {
                out.error(format!("`{}`: guard variable must be binary", var));
            }
            for branch in [then, otherwise] {
                for t in branch.targets() {
                    if !binary.contains(t) {
                        out.error(format!("guard branch target `{}` must be binary", t));
                    }
                }
                check_statement(branch, binary, out);
            }
        }
    }
}

/// Exhaustively checks that updates of binary variables stay in {0, 1}.
fn check_binary_updates(core: &CoreProgram, out: &mut Collector) {
    for u in &core.updates {
        if !core.binary[u.target] {
            continue;
        }
        let name = &core.vars[u.target];
        let symbols = u.poly.symbols();
        if symbols.iter().any(|&s| !core.is_idempotent(s)) {
            out.error(format!(
                "binary variable `{}` depends on a non-binary quantity",
                name
            ));
            continue;
        }
        if symbols.len() > 16 {
            out.warning(format!("binary update of `{}` too wide to check", name));
            continue;
        }
        let ok = (0u32..1 << symbols.len()).all(|mask| {
            let v: Rational = u.poly.eval(&|s: Symbol| {
                let bit = symbols.iter().position(|&t| t == s).unwrap();
                if mask >> bit & 1 == 1 {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            });
            v.is_zero() || v.is_one()
        });
        if !ok {
            out.error(format!("assignment may move binary variable `{}` outside {{0, 1}}", name));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;

    fn report(src: &str) -> ValidationReport {
        validate(&parse_program(src).unwrap())
    }

    #[test]
    fn affine_program_is_eligible() {
        let r = report(
            "a := 0.5 b := 0.2 sigma := 0.2 w := 0 r := 2\nwhile true { w := Normal(0, 1); r := (1-a)*r + a*b + sigma*w }",
        );
        assert!(!r.has_errors(), "{:?}", r);
        assert!(r.eligible);
    }

    #[test]
    fn guard_requires_binary() {
        let r = report("s := 0 while true { if s = 0 { s := 1 [0.5] 0 } else { s := 0 [0.2] 1 } }");
        assert!(r.errors().any(|i| i.message.contains("guard variable must be binary")));
    }

    #[test]
    fn uniform_bounds() {
        let r = report("x := 0 while true { v := Uniform(2, 1); x := x + v }");
        assert!(r.errors().any(|i| i.message.contains("lo < hi violated")));
    }

    #[test]
    fn unused_init_warns() {
        let r = report("k := 3 x := 0 while true { x := x + 1 }");
        assert!(r.warnings().any(|i| i.message.contains("`k`")));
        assert!(!r.has_errors());
    }

    #[test]
    fn binary_safety() {
        let r = report("@binary s\ns := 0 while true { s := s + 1 }");
        assert!(r.has_errors());
        let r = report("@binary s\ns := 0 while true { s := 1 - s }");
        assert!(!r.has_errors(), "{:?}", r);
    }

    #[test]
    fn nonconstant_division_rejected() {
        let r = report("x := 1 y := 2 while true { x := x / y; y := y + 1 }");
        assert!(r.errors().any(|i| i.message.contains("division")));
    }

    #[test]
    fn squaring_loop_is_not_eligible() {
        let r = report("x := 2 while true { x := x * x }");
        assert!(!r.has_errors());
        assert!(!r.eligible);
    }
}
