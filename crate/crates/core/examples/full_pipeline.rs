//! The whole workflow on one benchmark, artifacts written to a directory.
//!
//! `cargo run --release --example full_pipeline [benchmark] [out-dir]`

use std::path::PathBuf;

use momentest::corpus;
use momentest::pipeline::{run_pipeline_on, PipelineConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "Vasicek".into());
    let b = corpus::by_name(&name).unwrap_or_else(|| panic!("unknown benchmark {}", name));
    let mut cfg = PipelineConfig::new(b.file, b.var, b.moments);
    cfg.out_dir = args.next().map(PathBuf::from);

    let bundle = run_pipeline_on(&cfg, b.source).unwrap_or_else(|e| panic!("{}", e.to_json()));
    if let Some(dir) = &cfg.out_dir {
        bundle.write_to(dir).unwrap();
    }
    let r = &bundle.report;
    println!("support {:?} ({:?})", r.estimates.support, r.estimates.support_source);
    for g in &r.tests.results {
        println!(
            "{}: chi2 {:.3} {}, D* {:.4} {}",
            g.kind.label(),
            g.chi_square.statistic,
            g.chi_square.verdict.label(),
            g.ks.statistic,
            g.ks.verdict.label()
        );
    }
    println!("A_ME = {}, A_GC = {}", r.verdicts.me.label(), r.verdicts.gc.label());
    for (file, _) in &bundle.files {
        println!("  {}", file);
    }
}
