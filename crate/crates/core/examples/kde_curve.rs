//! Kernel density estimate of a sample next to the fitted densities.
//!
//! `cargo run --release --example kde_curve`

use momentest::corpus;
use momentest::dsl::compile;
use momentest::engine::sample;
use momentest::estimate::{default_support, fit_gram_charlier_on};
use momentest::gof::{kde, silverman_bandwidth};
use momentest::pipeline::propagate_moments;

fn main() {
    let b = corpus::RANDOM_WALK_1D;
    let (_, core) = compile(b.source).unwrap();
    let ms = propagate_moments(&core, b.var, 100, 2).unwrap();
    let column = sample(&core, 100, 1000, 0).unwrap().column(b.var).unwrap();
    let gc = fit_gram_charlier_on(&ms, default_support(Some(&column), &ms).unwrap()).unwrap();

    println!("bandwidth {:.4}", silverman_bandwidth(&column));
    for (x, f) in kde(&column, None).into_iter().step_by(16) {
        println!("{:9.3} kde {:.5} gc {:.5}", x, f, gc.pdf(x));
    }
}
