//! Gram-Charlier series next to maximum entropy on the Uniform benchmark,
//! where the truncated series is visibly wavy.
//!
//! `cargo run --release --example fit_gram_charlier`

use momentest::corpus;
use momentest::dsl::compile;
use momentest::estimate::{fit_gram_charlier_on, fit_max_entropy, MeOptions, Support};
use momentest::pipeline::propagate_moments;

fn main() {
    let b = corpus::UNIFORM;
    let (_, core) = compile(b.source).unwrap();
    let ms = propagate_moments(&core, b.var, 100, b.moments).unwrap();
    let support = Support::new(0.0, 1.0);
    let gc = fit_gram_charlier_on(&ms, support).unwrap();
    let (me, _) = fit_max_entropy(&ms, support, &MeOptions::default()).unwrap();

    println!("cumulants {:?}", gc.cumulants().unwrap());
    println!("{:>6} {:>10} {:>10}", "x", "f_GC", "f_ME");
    for i in 0..=10 {
        let x = i as f64 / 10.0;
        println!("{:6.2} {:10.5} {:10.5}", x, gc.pdf(x), me.pdf(x));
    }
    println!("mass: GC {:.6}, ME {:.6}", gc.mass(), me.mass());
}
