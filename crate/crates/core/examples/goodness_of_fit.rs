//! Chi-square and Kolmogorov-Smirnov tests of fitted densities against a sample.
//!
//! `cargo run --release --example goodness_of_fit [seed]`

use momentest::corpus;
use momentest::dsl::compile;
use momentest::engine::sample;
use momentest::estimate::{default_support, fit_gram_charlier_on, fit_max_entropy, MeOptions};
use momentest::gof::{chi_square_test, ks_test};
use momentest::pipeline::propagate_moments;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let b = corpus::STUTTERINGP;
    let (_, core) = compile(b.source).unwrap();
    let ms = propagate_moments(&core, b.var, 100, 2).unwrap();
    let column = sample(&core, 100, 1000, seed).unwrap().column(b.var).unwrap();
    let support = default_support(Some(&column), &ms).unwrap();

    let (me, _) = fit_max_entropy(&ms, support, &MeOptions::default()).unwrap();
    let gc = fit_gram_charlier_on(&ms, support).unwrap();
    for (name, est) in [("ME", &me), ("GC", &gc)] {
        let chi = chi_square_test(&column, est, 15, 0.05).unwrap();
        let ks = ks_test(&column, est, 0.05).unwrap();
        println!(
            "{}: chi2 = {:.3} (CV {:.3}) {}, D* = {:.4} (CV {:.4}) {}",
            name,
            chi.statistic,
            chi.critical_value,
            chi.verdict.label(),
            ks.statistic,
            ks.critical_value,
            ks.verdict.label()
        );
    }
}
