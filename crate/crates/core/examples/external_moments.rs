//! Moments supplied from outside: literal values or closed forms in n.
//!
//! `cargo run --example external_moments`

use momentest::estimate::{fit_gram_charlier, moment_support};
use momentest::moments::{load_moments, moment_validity};

fn main() {
    let literal = r#"{"var": "r", "n": 100, "values": [0.2, 0.0933333333333]}"#;
    let closed = r#"{"var": "x", "closed_form": ["n/2", "n*(n+1)/4"]}"#;

    let ms = load_moments(literal, None).unwrap();
    println!("{} at n={}: {:?}", ms.var, ms.n, ms.values);

    for n in [10, 100, 1000] {
        let ms = load_moments(closed, Some(n)).unwrap();
        let check = moment_validity(&ms);
        let gc = fit_gram_charlier(&ms).unwrap();
        let (mu, s2) = gc.reference_gaussian().unwrap();
        println!(
            "binomial closed form at n={:4}: {:?}, valid={}, variance {}, GC support {:?}, mean {}",
            n,
            ms.values,
            check.ok,
            s2,
            moment_support(&ms).unwrap(),
            mu
        );
    }
}
