//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use common::*;
use momentest::corpus::{self, Benchmark};
use momentest::dsl::compile;
use momentest::engine::{derive, run_core, run_program, RowStreams};
use momentest::estimate::*;
use momentest::gof::{ks_critical_value, Verdict};
use momentest::moments::{MomentSet, Provenance};
use momentest::pipeline::*;
use momentest::poly::Rational;
use momentest::specfun::*;
use nalgebra::DVector;
use num_bigint::BigInt;

const SEEDS: u64 = 20;

struct Outcome {
    pass: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            notes: Vec::new(),
        }
    }

    /// Records a sub-check; failures are always listed, passes only when `show`.
    fn check(&mut self, ok: bool, show: bool, what: String) {
        if !ok {
            self.pass = false;
            self.notes.push(format!("FAILED {}", what));
        } else if show {
            self.notes.push(what);
        }
    }
}

fn q(p: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(d))
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn exact_moments(b: &Benchmark, m: usize) -> MomentSet {
    let (_, core) = compile(b.source).unwrap();
    propagate_moments(&core, b.var, DEFAULT_N, m).unwrap()
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let t0 = Instant::now();
    let get = |b: &Benchmark, m| exact_moments(b, m);

    let s = get(&corpus::STUTTERINGP, 2);
    let ex = s.exact.clone().unwrap();
    o.check(ex[0] == q(210, 1), true, format!("StutteringP E(s) = {}", ex[0]));
    // n·917/300 + (3np)², derived by hand from the loop body
    o.check(ex[1] == q(133_217, 3), false, format!("StutteringP E(s²) = {} exactly", ex[1]));
    let r = rel(s.values[1], 4.4405e4);
    o.check(r <= 1e-4, true, format!("StutteringP E(s²) = {:.3} (rel {:.1e} to 4.4405e4)", s.values[1], r));

    let w = get(&corpus::RANDOM_WALK_1D, 2);
    o.check(rel(w.values[0], 20.0) <= 1e-9, false, format!("RandomWalk1D E(x) = {}", w.values[0]));
    // 100·(1/3 − 0.2²) + 20²
    let r = rel(w.values[1], 1288.0 / 3.0);
    o.check(r <= 1e-9, true, format!("RandomWalk1D E(x²) = {:.6} (rel {:.1e})", w.values[1], r));

    let bi = get(&corpus::BINOMIAL, 2).exact.unwrap();
    o.check(bi == vec![q(50, 1), q(2525, 1)], true, format!("Binomial = {}, {}", bi[0], bi[1]));

    let sq = get(&corpus::SQUARE, 1).exact.unwrap();
    o.check(sq[0] == q(10100, 1), true, format!("Square E(y) = {}", sq[0]));

    let u = get(&corpus::UNIFORM, 8);
    let worst = (1..=8)
        .map(|i| (u.values[i - 1] - 1.0 / (i + 1) as f64).abs())
        .fold(0.0, f64::max);
    o.check(worst <= 1e-9, true, format!("Uniform orders 1..8 off by {:.1e}", worst));

    let v = get(&corpus::VASICEK, 2);
    let r = rel(v.values[0], 0.2).max(rel(v.values[1], 0.28 / 3.0));
    o.check(r <= 1e-9, true, format!("Vasicek rel {:.1e}", r));

    let p = get(&corpus::PDP, 1);
    let r = rel(p.values[0], 1.1885e3);
    o.check(r <= 1e-3, true, format!("PDP E(x) = {:.4} (rel {:.1e})", p.values[0], r));

    let dt = t0.elapsed();
    o.check(dt < Duration::from_secs(5), true, format!("{:.2?}", dt));
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let a = chi2_inv_cdf(0.95, 14.0);
    let b = chi2_inv_cdf(0.95, 49.0);
    let k = ks_critical_value(1000, 0.05);
    o.check((a - 23.685).abs() <= 5e-3, true, format!("χ²(0.95, 14) = {:.4}", a));
    o.check((b - 66.339).abs() <= 5e-3, true, format!("χ²(0.95, 49) = {:.4}", b));
    o.check((k - 0.0608).abs() <= 5e-4, true, format!("KS CV = {:.5}", k));
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    let ms = exact_moments(&corpus::VASICEK, 2);
    let gc = fit_gram_charlier(&ms).unwrap();
    let (mu, s2) = gc.reference_gaussian().unwrap();
    let coef = 1.0 / (2.0 * std::f64::consts::PI * s2).sqrt();
    let rate = 1.0 / (2.0 * s2);
    o.check(
        rel(coef, 1.7275) <= 1e-3 && rel(rate, 9.375) <= 1e-3 && rel(mu, 0.2) <= 1e-3,
        true,
        format!("GC = {:.4}·exp[−{:.4}(r−{:.4})²]", coef, rate, mu),
    );

    let support = Support::new(-0.8, 1.2);
    let (me, diag) = fit_max_entropy(&ms, support, &MeOptions::default()).unwrap();
    o.check(diag.converged, false, "ME converged".into());
    let linf = (0..=2000)
        .map(|i| -0.8 + 2.0 * i as f64 / 2000.0)
        .map(|x| (me.pdf(x) - 1.7275 * (-9.375 * (x - 0.2) * (x - 0.2)).exp()).abs())
        .fold(0.0, f64::max);
    o.check(linf <= 1e-3, true, format!("ME L∞ = {:.1e}", linf));
    let r = rel(me.moment(1), ms.values[0]).max(rel(me.moment(2), ms.values[1]));
    o.check(r <= 1e-6, true, format!("ME moment rel {:.1e}", r));
    o
}

struct Run {
    chi: [Verdict; 2],
    ks: [Verdict; 2],
    /// RE of sample, ME and GC at orders 1 and 2.
    re: [[f64; 3]; 2],
}

fn corpus_runs() -> (Vec<(Benchmark, Vec<Run>)>, Duration) {
    let t0 = Instant::now();
    let mut out = Vec::new();
    for b in corpus::ALL {
        let mut runs = Vec::new();
        for seed in 0..SEEDS {
            let mut cfg = PipelineConfig::new(b.file, b.var, b.moments);
            cfg.seed = seed;
            cfg.error_orders = b.moments;
            let r = run_pipeline_on(&cfg, b.source).unwrap().report;
            let kinds = [EstimateKind::MaxEntropy, EstimateKind::GramCharlier];
            let g = |i: usize| r.tests.get(kinds[i]).unwrap();
            let re = |order: usize| {
                let row = &r.errors.rows[order - 1];
                let est = |k| row.estimates.iter().find(|e| e.kind == k).unwrap().rel_error.unwrap();
                [row.sample.rel_error.unwrap(), est(kinds[0]), est(kinds[1])]
            };
            runs.push(Run {
                chi: [g(0).chi_square.verdict, g(1).chi_square.verdict],
                ks: [g(0).ks.verdict, g(1).ks.verdict],
                re: [re(1), re(2)],
            });
        }
        out.push((b, runs));
    }
    (out, t0.elapsed())
}

fn count(runs: &[Run], f: impl Fn(&Run) -> bool) -> u64 {
    runs.iter().filter(|r| f(r)).count() as u64
}

fn criterion_4(table: &[(Benchmark, Vec<Run>)], took: Duration) -> Outcome {
    let mut o = Outcome::new();
    let nr = Verdict::NotRejected;
    let at_least = |n: u64, pct: u64| n * 100 >= pct * SEEDS;
    for (b, runs) in table {
        let counts = [
            count(runs, |r| r.chi[0] == nr),
            count(runs, |r| r.ks[0] == nr),
            count(runs, |r| r.chi[1] == nr),
            count(runs, |r| r.ks[1] == nr),
        ];
        let line = format!(
            "{} NOT_REJECTED χ²_ME {}/{n} KS_ME {}/{n} χ²_GC {}/{n} KS_GC {}/{n}",
            b.name,
            counts[0],
            counts[1],
            counts[2],
            counts[3],
            n = SEEDS
        );
        let ok = match b.name {
            "Uniform" => at_least(counts[0], 90) && at_least(SEEDS - counts[2], 90),
            "Square" | "Binomial" => at_least(counts[1], 80) && at_least(counts[3], 80),
            _ => counts.iter().all(|&c| at_least(c, 90)),
        };
        o.check(ok, true, line);
    }
    o.check(took < Duration::from_secs(120), true, format!("{:.2?}", took));
    o
}

fn criterion_5(table: &[(Benchmark, Vec<Run>)]) -> Outcome {
    let mut o = Outcome::new();
    for (b, runs) in table {
        for order in 0..2 {
            let med = |j: usize| median(runs.iter().map(|r| r.re[order][j]).collect());
            let (s, me) = (med(0), med(1));
            o.check(
                me <= s,
                false,
                format!("{} order {}: median RE_ME {:.1e} vs RE_Sample {:.1e}", b.name, order + 1, me, s),
            );
        }
    }
    if o.pass {
        o.notes.push("median RE_ME ≤ RE_Sample for all 7 benchmarks, orders 1–2".into());
    }

    let b = corpus::UNIFORM;
    let exact = exact_moments(&b, 8);
    let ms = exact.prefix(b.moments);
    let support = Support::new(0.0, 1.0);
    let (me, _) = fit_max_entropy(&ms, support, &MeOptions::default()).unwrap();
    let gc = fit_gram_charlier_on(&ms, support).unwrap();
    let want = exact.values[7];
    let (re_me, re_gc) = (rel(me.moment(8), want), rel(gc.moment(8), want));
    o.check(re_gc > 0.1, true, format!("Uniform order 8 RE_GC = {:.1}%", 100.0 * re_gc));
    o.check(re_me < 1e-3, true, format!("RE_ME = {:.2e}%", 100.0 * re_me));
    o
}

/// Deterministic stream of uniforms for the property checks.
struct Draws {
    stream: RowStreams,
    index: u64,
    buf: Vec<f64>,
}

impl Draws {
    fn new(seed: u64) -> Self {
        Draws {
            stream: RowStreams::new(seed),
            index: 0,
            buf: Vec::new(),
        }
    }

    fn take(&mut self, n: usize) -> Vec<f64> {
        self.index += 1;
        self.stream.uniforms(self.index, n, &mut self.buf);
        self.buf.clone()
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.take(1)[0]
    }

    fn mixture(&mut self) -> Vec<(f64, f64, f64)> {
        let k = 1 + (self.take(1)[0] * 3.0) as usize;
        (0..k)
            .map(|_| (self.range(0.1, 1.0), self.range(-2.0, 2.0), self.range(0.2, 1.5)))
            .collect()
    }
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let mut d = Draws::new(6);

    // LM Jacobian vs central differences
    let mut worst = 0.0f64;
    for case in 0..100 {
        let m = 1 + case % 6;
        let moments = d.take(m).iter().map(|u| u - 0.5).collect::<Vec<_>>();
        let sys = MaxEntSystem::new(&moments, Support::new(-2.0, 2.0));
        let mut z = DVector::from_vec(d.take(m + 1).iter().map(|u| 0.1 * u - 0.05).collect());
        z[0] = 0.5;
        if m >= 2 {
            z[2] = d.range(0.3, 1.0);
        }
        let j = sys.jacobian(&z);
        let h = 1e-6;
        for c in 0..=m {
            let (mut up, mut dn) = (z.clone(), z.clone());
            up[c] += h;
            dn[c] -= h;
            let fd = (sys.residual(&up) - sys.residual(&dn)) / (2.0 * h);
            for r in 0..=m {
                let size = j[(r, c)].abs().max(1e-3 * j.amax());
                worst = worst.max((fd[r] - j[(r, c)]).abs() / size);
            }
        }
    }
    o.check(worst <= 1e-5, true, format!("Jacobian rel {:.1e}", worst));

    // Gauss-Legendre degree exactness
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let order = 1 + (d.take(1)[0] * 24.0) as usize;
        let lo = d.range(-2.0, 1.0);
        let hi = lo + d.range(0.1, 3.0);
        let coef: Vec<f64> = d.take(2 * order).iter().map(|u| 2.0 * u - 1.0).collect();
        let got = gauss_legendre(lo, hi, order).integrate(|x| coef.iter().rev().fold(0.0, |a, c| a * x + c));
        let anti = |x: f64| {
            coef.iter()
                .enumerate()
                .map(|(j, c)| c * x.powi(j as i32 + 1) / (j + 1) as f64)
                .sum::<f64>()
        };
        let exact = anti(hi) - anti(lo);
        let size: f64 = coef
            .iter()
            .enumerate()
            .map(|(j, c)| c.abs() * hi.abs().max(lo.abs()).powi(j as i32) * (hi - lo))
            .sum();
        worst = worst.max((got - exact).abs() / exact.abs().max(size));
    }
    o.check(worst <= 1e-12, true, format!("quadrature rel {:.1e}", worst));

    // cumulant round trip and determinant formula
    let (mut round, mut det) = (0.0f64, 0.0f64);
    for case in 0..100 {
        let m = 2 + case % 7;
        let comp = d.mixture();
        let raw = mixture_moments(&comp, m);
        let s = mixture_scale(&comp).max(1.0);
        let kappa = cumulants_from_raw(&raw);
        let back = moments_from_cumulants(&CumulantVector { kappa: kappa.clone() });
        for i in 0..m {
            round = round.max((back[i] - raw[i]).abs() / raw[i].abs().max(s.powi(i as i32 + 1)));
            let want = cumulant_by_determinant(&raw, i + 1);
            det = det.max((kappa[i] - want).abs() / want.abs().max(s.powi(i as i32 + 1)));
        }
    }
    o.check(round <= 1e-10, true, format!("cumulant round trip rel {:.1e}", round));
    o.check(det <= 1e-9, true, format!("determinant rel {:.1e}", det));

    // GC with two moments is the Gaussian
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (mu, sigma) = (d.range(-50.0, 50.0), d.range(0.01, 20.0));
        let m2 = mu * mu + sigma * sigma;
        let gc = fit_gram_charlier(&MomentSet::new("x", 0, vec![mu, m2], Provenance::External)).unwrap();
        for t in d.take(50) {
            let x = mu + (12.0 * t - 6.0) * sigma;
            worst = worst.max((gc.pdf(x) - gaussian_pdf(x, mu, m2 - mu * mu)).abs());
        }
    }
    o.check(worst <= 1e-12, true, format!("GC-2 vs Gaussian {:.1e}", worst));

    // desugar coupling, exact arithmetic
    let mut mismatches = 0;
    for b in corpus::ALL {
        let (program, core) = compile(b.source).unwrap();
        for seed in 0..100 {
            let row = derive(seed, 0);
            let a: Vec<Vec<Rational>> = run_program(&program, &core.vars, 50, row);
            let c: Vec<Vec<Rational>> = run_core(&core, 50, row);
            if a != c {
                mismatches += 1;
            }
        }
    }
    o.check(mismatches == 0, true, format!("coupling mismatches {}/700", mismatches));
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let b = corpus::PDP;
    let mut cfg = PipelineConfig::new(b.file, b.var, b.moments);
    cfg.seed = 17;
    let report = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_pipeline_on(&cfg, b.source).unwrap())
            .file("report.json")
            .unwrap()
            .to_string()
    };
    let first = report(1);
    o.check(first == report(1), true, "two runs identical".into());
    o.check(first == report(4), true, "1 and 4 threads identical".into());
    o
}

fn main() {
    let t0 = Instant::now();
    let (table, took) = corpus_runs();
    let criteria: Vec<(&str, Outcome)> = vec![
        ("exact-moment reproduction", criterion_1()),
        ("critical values", criterion_2()),
        ("Vasicek closed-form estimate", criterion_3()),
        ("verdict reproduction over 20 seeds", criterion_4(&table, took)),
        ("moment-error dominance", criterion_5(&table)),
        ("numerical property suites", criterion_6()),
        ("determinism", criterion_7()),
    ];
    let mut red = 0;
    for (i, (name, o)) in criteria.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        red += usize::from(!o.pass);
        println!("{} {} {}: {}", tag, i + 1, name, o.notes.join("; "));
    }
    println!("{}/{} criteria pass ({:.1?})", criteria.len() - red, criteria.len(), t0.elapsed());
    if red > 0 {
        std::process::exit(1);
    }
}
