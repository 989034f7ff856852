//! Execution of core programs (fast binary64 path) and of source programs
//! (reference path), both reading the same draw slots.

use std::collections::HashMap;

use super::normal::inverse_normal_cdf;
use super::rng::RowStreams;
use super::EngineError;
use crate::dsl::{CoreInit, CoreProgram, Distribution, Expr, InitValue, Program, Statement};
use crate::poly::{rational_to_f64, Scalar, Symbol};

/// Value of a draw given its uniform.
pub fn draw_value(dist: &Distribution, u: f64) -> f64 {
    match dist {
        Distribution::Bernoulli { p } => {
            if u < rational_to_f64(p) {
                1.0
            } else {
                0.0
            }
        }
        Distribution::Uniform { lo, hi } => {
            let (lo, hi) = (rational_to_f64(lo), rational_to_f64(hi));
            lo + (hi - lo) * u
        }
        Distribution::Normal { mean, variance } => {
            rational_to_f64(mean) + rational_to_f64(variance).sqrt() * inverse_normal_cdf(u)
        }
    }
}

/// Distributions of the init block in slot order.
fn init_draws(core: &CoreProgram) -> Vec<(usize, &Distribution)> {
    core.inits
        .iter()
        .enumerate()
        .filter_map(|(i, init)| match init {
            CoreInit::Dist(d) => Some((i, d)),
            CoreInit::Const(_) => None,
        })
        .collect()
}

/// A core program with coefficients converted for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Compiled<'a> {
    core: &'a CoreProgram,
    updates: Vec<(usize, Vec<(Vec<(Symbol, u32)>, f64)>)>,
    inits: Vec<f64>,
}

impl<'a> Compiled<'a> {
    pub fn new(core: &'a CoreProgram) -> Self {
        Compiled {
            core,
            updates: core
                .updates
                .iter()
                .map(|u| (u.target, u.poly.to_f64_terms()))
                .collect(),
            inits: core
                .inits
                .iter()
                .map(|i| match i {
                    CoreInit::Const(c) => rational_to_f64(c),
                    CoreInit::Dist(_) => 0.0,
                })
                .collect(),
        }
    }

    /// Runs `n` iterations from the init block; `visit` sees the state after
    /// the init block and after every iteration.
    pub fn run(
        &self,
        n: u64,
        row_seed: u64,
        mut visit: impl FnMut(u64, &[f64]),
    ) -> Result<Vec<f64>, EngineError> {
        let streams = RowStreams::new(row_seed);
        let mut u = Vec::new();
        let mut state = self.inits.clone();
        let init_draws = init_draws(self.core);
        streams.uniforms(0, init_draws.len(), &mut u);
        for (slot, (var, dist)) in init_draws.iter().enumerate() {
            state[*var] = draw_value(dist, u[slot]);
        }
        visit(0, &state);

        let mut draws = vec![0.0; self.core.draws.len()];
        for t in 1..=n {
            streams.uniforms(t, draws.len(), &mut u);
            for (k, d) in self.core.draws.iter().enumerate() {
                draws[k] = draw_value(&d.dist, u[k]);
            }
            for (target, terms) in &self.updates {
                let mut acc = 0.0;
                for (factors, c) in terms {
                    let mut term = *c;
                    for &(s, e) in factors {
                        let v = match s {
                            Symbol::Var(i) => state[i],
                            Symbol::Draw(k) => draws[k],
                        };
                        term *= if e == 1 { v } else { v.powi(e as i32) };
                    }
                    acc += term;
                }
                state[*target] = acc;
            }
            if let Some(i) = state.iter().position(|v| !v.is_finite()) {
                return Err(EngineError::NumericOverflow {
                    row: None,
                    iteration: t,
                    var: self.core.vars[i].clone(),
                });
            }
            visit(t, &state);
        }
        Ok(state)
    }
}

/// Runs a core program in any scalar type, evaluating the update polynomials
/// directly. Draw values are the binary64 draws, converted exactly.
pub fn run_core<T: Scalar>(core: &CoreProgram, n: u64, row_seed: u64) -> Vec<Vec<T>> {
    let streams = RowStreams::new(row_seed);
    let mut u = Vec::new();
    let mut state: Vec<T> = core
        .inits
        .iter()
        .map(|i| match i {
            CoreInit::Const(c) => T::from_rational(c),
            CoreInit::Dist(_) => T::zero_value(),
        })
        .collect();
    let init_draws = init_draws(core);
    streams.uniforms(0, init_draws.len(), &mut u);
    for (slot, (var, dist)) in init_draws.iter().enumerate() {
        state[*var] = T::from_f64(draw_value(dist, u[slot]));
    }
    let mut out = vec![state.clone()];
    for t in 1..=n {
        streams.uniforms(t, core.draws.len(), &mut u);
        let draws: Vec<T> = core
            .draws
            .iter()
            .enumerate()
            .map(|(k, d)| T::from_f64(draw_value(&d.dist, u[k])))
            .collect();
        for upd in &core.updates {
            let v = upd.poly.eval(&|s| match s {
                Symbol::Var(i) => state[i].clone(),
                Symbol::Draw(k) => draws[k].clone(),
            });
            state[upd.target] = v;
        }
        out.push(state.clone());
    }
    out
}

/// Reference interpreter over the source program. Returns, per step, the
/// values of `core_vars` (the state variables of the desugared program).
pub fn run_program<T: Scalar>(
    program: &Program,
    core_vars: &[String],
    n: u64,
    row_seed: u64,
) -> Vec<Vec<T>> {
    let streams = RowStreams::new(row_seed);
    let mut u = Vec::new();
    let mut env: HashMap<String, T> = HashMap::new();
    let dist_inits = program
        .inits
        .iter()
        .filter(|i| matches!(i.value, InitValue::Dist(_)))
        .count();
    streams.uniforms(0, dist_inits, &mut u);
    let mut slot = 0;
    for init in &program.inits {
        let v = match &init.value {
            InitValue::Number(r) => T::from_rational(r),
            InitValue::Dist(d) => {
                slot += 1;
                T::from_f64(draw_value(d, u[slot - 1]))
            }
        };
        env.insert(init.target.clone(), v);
    }
    let snapshot = |env: &HashMap<String, T>| -> Vec<T> {
        core_vars
            .iter()
            .map(|v| env.get(v).cloned().unwrap_or_else(T::zero_value))
            .collect()
    };
    let slots: usize = program.body.iter().map(draw_count).sum();
    let mut out = vec![snapshot(&env)];
    for t in 1..=n {
        streams.uniforms(t, slots, &mut u);
        let mut base = 0;
        for stmt in &program.body {
            exec(stmt, &mut env, &u, base);
            base += draw_count(stmt);
        }
        out.push(snapshot(&env));
    }
    out
}

/// Number of draw slots a statement reserves (both guard branches count).
pub fn draw_count(stmt: &Statement) -> usize {
    match stmt {
        Statement::Assign { .. } => 0,
        Statement::Choice { .. } | Statement::Draw { .. } => 1,
        Statement::Guard {
            then, otherwise, ..
        } => draw_count(then) + draw_count(otherwise),
    }
}

fn exec<T: Scalar>(stmt: &Statement, env: &mut HashMap<String, T>, u: &[f64], base: usize) {
    match stmt {
        Statement::Assign { target, expr } => {
            let v = eval(expr, env);
            env.insert(target.clone(), v);
        }
        Statement::Choice {
            target,
            then,
            prob,
            otherwise,
        } => {
            let v = if u[base] < rational_to_f64(prob) {
                eval(then, env)
            } else {
                eval(otherwise, env)
            };
            env.insert(target.clone(), v);
        }
        Statement::Draw { target, dist } => {
            env.insert(target.clone(), T::from_f64(draw_value(dist, u[base])));
        }
        Statement::Guard {
            var,
            value,
            then,
            otherwise,
        } => {
            let g = env[var].clone();
            let hit = if *value == 0 { g == T::zero_value() } else { g == T::one_value() };
            if hit {
                exec(then, env, u, base);
            } else {
                exec(otherwise, env, u, base + draw_count(then));
            }
        }
    }
}

fn eval<T: Scalar>(e: &Expr, env: &HashMap<String, T>) -> T {
    match e {
        Expr::Num(r) => T::from_rational(r),
        Expr::Var(v) => env[v].clone(),
        Expr::Neg(a) => eval(a, env).neg(),
        Expr::Add(a, b) => eval(a, env).add(&eval(b, env)),
        Expr::Sub(a, b) => eval(a, env).sub(&eval(b, env)),
        Expr::Mul(a, b) => eval(a, env).mul(&eval(b, env)),
        Expr::Div(a, b) => eval(a, env).div(&eval(b, env)),
        Expr::Pow(a, k) => eval(a, env).powu(*k),
    }
}
