//! Maximum-entropy density from the exact Vasicek moments.
//!
//! `cargo run --release --example fit_max_entropy`

use momentest::corpus;
use momentest::dsl::compile;
use momentest::estimate::{fit_max_entropy, MeOptions, Support};
use momentest::pipeline::{propagate_moments, to_json};

fn main() {
    let b = corpus::VASICEK;
    let (_, core) = compile(b.source).unwrap();
    let ms = propagate_moments(&core, b.var, 100, 4).unwrap();
    let support = Support::new(-0.8, 1.2);

    for m in [2, 4] {
        let (est, diag) = fit_max_entropy(&ms.prefix(m), support, &MeOptions::default()).unwrap();
        println!("m = {}: xi = {:?}", m, est.xi().unwrap());
        println!("  pdf(0.2) = {:.6}, cdf(0.2) = {:.6}, entropy = {:.6}", est.pdf(0.2), est.cdf(0.2), est.entropy());
        print!("  diagnostics {}", to_json(&diag));
    }
}
