//! Verdict counts for every benchmark over a range of seeds.
//!
//! `cargo run --release --example corpus_table [seeds]`

use momentest::corpus;
use momentest::estimate::EstimateKind;
use momentest::gof::Verdict;
use momentest::pipeline::{run_pipeline_on, PipelineConfig};

fn main() {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    println!("NOT_REJECTED out of {} seeds", seeds);
    println!("{:13} {:>6} {:>6} {:>6} {:>6}", "", "chi_ME", "ks_ME", "chi_GC", "ks_GC");
    for b in corpus::ALL {
        let mut counts = [0; 4];
        for seed in 0..seeds {
            let mut cfg = PipelineConfig::new(b.file, b.var, b.moments);
            cfg.seed = seed;
            cfg.error_orders = b.moments;
            let report = run_pipeline_on(&cfg, b.source).unwrap().report;
            for (i, kind) in [EstimateKind::MaxEntropy, EstimateKind::GramCharlier].into_iter().enumerate() {
                let g = report.tests.get(kind).unwrap();
                counts[2 * i] += usize::from(g.chi_square.verdict == Verdict::NotRejected);
                counts[2 * i + 1] += usize::from(g.ks.verdict == Verdict::NotRejected);
            }
        }
        println!("{:13} {:6} {:6} {:6} {:6}", b.name, counts[0], counts[1], counts[2], counts[3]);
    }
}
