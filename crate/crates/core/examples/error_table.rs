//! Absolute and relative moment errors of the sample and of both estimates.
//!
//! `cargo run --release --example error_table`

use momentest::corpus;
use momentest::dsl::compile;
use momentest::engine::sample;
use momentest::estimate::{fit_gram_charlier_on, fit_max_entropy, MeOptions, Support};
use momentest::gof::error_report;
use momentest::pipeline::propagate_moments;

fn main() {
    let b = corpus::UNIFORM;
    let (_, core) = compile(b.source).unwrap();
    let exact = propagate_moments(&core, b.var, 100, 8).unwrap();
    let ms = exact.prefix(b.moments);
    let support = Support::new(0.0, 1.0);
    let (me, _) = fit_max_entropy(&ms, support, &MeOptions::default()).unwrap();
    let gc = fit_gram_charlier_on(&ms, support).unwrap();
    let data = sample(&core, 100, 1000, 0).unwrap();

    let table = error_report(&exact, &data, &[&me, &gc], 8).unwrap();
    print!("{}", table.to_csv_string());
}
