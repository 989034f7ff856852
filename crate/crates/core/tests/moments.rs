mod common;

use common::median;
use momentest::corpus;
use momentest::dsl::{compile, CoreProgram};
use momentest::engine::{sample, sample_moments};
use momentest::moments::*;
use momentest::poly::Rational;
use num_bigint::BigInt;

fn q(p: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(d))
}

fn exact(core: &CoreProgram, var: &str, m: u32, n: u64) -> Vec<Rational> {
    let v = core.var_index(var).unwrap();
    let basis = closure_basis(core, v, m, DEFAULT_CAP).unwrap();
    propagate_with(core, &basis, n, PropagationMode::Exact)
        .unwrap()
        .exact
        .unwrap()
}

/// Hand-derived moments of StutteringP with p = 7/10. Per round x gains
/// a = f·U(0,2) and y gains b = f·U(0,4), so E a = 7/10, Var a = 133/300,
/// E b = 7/5, Var b = 133/75, and s = x + y gains a + b with variance 917/300.
#[test]
fn stutteringp_closed_forms() {
    let (_, core) = compile(corpus::STUTTERINGP.source).unwrap();
    let p = q(7, 10);
    for n in [0u64, 1, 2, 5, 10, 100] {
        let nn = q(n as i64, 1);
        let one = q(1, 1);
        let x = exact(&core, "x", 2, n);
        let y = exact(&core, "y", 2, n);
        let ex = &nn * &p - &one;
        let ey = q(2, 1) * &nn * &p + &one;
        assert_eq!(x[0], ex);
        assert_eq!(y[0], ey);
        assert_eq!(x[1], &nn * q(133, 300) + &ex * &ex);
        assert_eq!(y[1], &nn * q(133, 75) + &ey * &ey);
        if n > 0 {
            let s = exact(&core, "s", 2, n);
            let es = q(3, 1) * &nn * &p;
            assert_eq!(s[0], es);
            assert_eq!(s[1], &nn * q(917, 300) + &es * &es);
        }
    }
}

/// Vasicek without the drift term is linear in (r0, σ): scaling both by λ
/// scales E r by λ and E r² by λ².
#[test]
fn affine_program_is_linear_in_its_inits() {
    let src = |num: i64, den: i64| {
        format!(
            "a := 1/2\nsigma := {}/{}\nw := 0\nr := {}/{}\n\
             while true {{\n w := Normal(0, 1)\n r := (1 - a)*r + sigma*w\n}}",
            num,
            5 * den,
            2 * num,
            den
        )
    };
    let (_, base) = compile(&src(1, 1)).unwrap();
    let want = exact(&base, "r", 2, 30);
    for (num, den) in [(3, 1), (-2, 7), (5, 2)] {
        let (_, scaled) = compile(&src(num, den)).unwrap();
        let got = exact(&scaled, "r", 2, 30);
        let l = q(num, den);
        assert_eq!(got[0], &want[0] * &l);
        assert_eq!(got[1], &want[1] * &l * &l);
    }
}

#[test]
fn propagation_is_deterministic() {
    for b in corpus::ALL {
        let (_, core) = compile(b.source).unwrap();
        let v = core.var_index(b.var).unwrap();
        let basis = closure_basis(&core, v, 2, DEFAULT_CAP).unwrap();
        assert_eq!(propagate(&core, &basis, 100).unwrap(), propagate(&core, &basis, 100).unwrap());
    }
}

/// Median over 20 seeds of |propagated − empirical| falls as e grows
/// through 10³, 10⁴, 10⁵. Ten iterations keep the run short; the claim
/// does not depend on n.
#[test]
fn sampling_error_shrinks_with_e() {
    let n = 10;
    let sizes = [1_000usize, 10_000, 100_000];
    for b in corpus::ALL {
        let (_, core) = compile(b.source).unwrap();
        let v = core.var_index(b.var).unwrap();
        let basis = closure_basis(&core, v, 2, DEFAULT_CAP).unwrap();
        let prop = propagate(&core, &basis, n).unwrap();
        let mut medians = vec![[0.0; 2]; sizes.len()];
        for (level, &e) in sizes.iter().enumerate() {
            let mut errs = [Vec::new(), Vec::new()];
            for seed in 0..20u64 {
                let data = sample(&core, n, e, 1000 * level as u64 + seed).unwrap();
                let emp = sample_moments(&data.column(b.var).unwrap(), 2);
                for i in 0..2 {
                    errs[i].push((emp[i] - prop.values[i]).abs());
                }
            }
            for i in 0..2 {
                medians[level][i] = median(errs[i].clone());
            }
        }
        for i in 0..2 {
            assert!(
                medians[0][i] > medians[1][i] && medians[1][i] > medians[2][i],
                "{} order {}: {:?}",
                b.name,
                i + 1,
                medians.iter().map(|m| m[i]).collect::<Vec<_>>()
            );
        }
    }
}
