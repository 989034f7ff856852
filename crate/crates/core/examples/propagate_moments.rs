//! Exact raw moments of every shipped benchmark at iteration 100.
//!
//! `cargo run --example propagate_moments`

use momentest::corpus;
use momentest::dsl::compile;
use momentest::moments::{closure_basis, propagate, DEFAULT_CAP};
use momentest::poly::format_rational;

fn main() {
    for b in corpus::ALL {
        let (_, core) = compile(b.source).unwrap();
        let var = core.var_index(b.var).unwrap();
        let basis = closure_basis(&core, var, 2, DEFAULT_CAP).unwrap();
        let ms = propagate(&core, &basis, 100).unwrap();
        let exact: Vec<String> = ms
            .exact
            .iter()
            .flatten()
            .map(format_rational)
            .collect();
        println!(
            "{:13} basis {:3}  E({}) = {:<12.6} E({}^2) = {:<14.6} exact {:?}",
            b.name,
            basis.len(),
            b.var,
            ms.values[0],
            b.var,
            ms.values[1],
            exact
        );
    }
}
