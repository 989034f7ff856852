//! Parse a loop, check it, and show the polynomial core it desugars to.
//!
//! `cargo run --example parse_and_desugar [program.pp]`

use momentest::corpus;
use momentest::dsl::{desugar, parse_program, validate};

fn main() {
    let source = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable program"),
        None => corpus::PDP.source.to_string(),
    };
    let program = parse_program(&source).unwrap_or_else(|e| panic!("{}", e));
    println!("-- parsed --\n{}", program);

    let report = validate(&program);
    for issue in report.errors().chain(report.warnings()) {
        println!("{}", issue);
    }
    if report.has_errors() {
        return;
    }
    let core = desugar(&program).unwrap();
    println!("-- core --\n{}", core.render());
}
