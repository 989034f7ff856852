//! Monte-Carlo sampling: e independent runs of n iterations each.
//!
//! `cargo run --release --example sample_program [seed]`

use momentest::corpus;
use momentest::dsl::compile;
use momentest::engine::{sample, sample_moments};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let b = corpus::VASICEK;
    let (_, core) = compile(b.source).unwrap();
    let data = sample(&core, 100, 1000, seed).unwrap();

    let column = data.column(b.var).unwrap();
    let m = sample_moments(&column, 2);
    println!("{} rows of {:?}, seed {}", data.e, data.vars, seed);
    println!("empirical E({0}) = {1:.5}, E({0}^2) = {2:.5}", b.var, m[0], m[1]);

    let csv = data.to_csv_string();
    for line in csv.lines().take(6) {
        println!("{}", line);
    }
}
