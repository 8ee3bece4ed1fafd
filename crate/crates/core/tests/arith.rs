use approx::assert_relative_eq;
use proptest::prelude::*;
use shortvar::arith::*;
use shortvar::primes::gcd;
use shortvar::spec::{preset, standard_presets, FunctionSpec};

fn spec(name: &str) -> FunctionSpec {
    preset(name).unwrap().spec
}

#[test]
fn h_examples() {
    assert_eq!(h_value(&spec("squarefree"), 6).re, 1.0);
    assert_eq!(h_value(&spec("phi-over-n"), 4).re, 0.0);
    assert_relative_eq!(h_value(&spec("sigma:-0.75"), 16).re, 0.125, max_relative = 1e-15);
}

#[test]
fn f_examples() {
    let sq = spec("squarefree");
    assert_eq!(f_value(&sq, 12).re, 0.0);
    assert_eq!(f_value(&sq, 10).re, 1.0);
    assert_relative_eq!(f_value(&spec("phi-over-n"), 12).re, 1.0 / 3.0, max_relative = 1e-15);
    for s in standard_presets() {
        assert_eq!(f_value(&s, 1).re, 1.0);
    }
}

#[test]
fn f_value_matches_definition_on_small_n() {
    for s in standard_presets() {
        for n in 1..=3000u64 {
            let naive: f64 = (1..=n)
                .take_while(|d| d.pow(s.k) <= n)
                .filter(|d| n % d.pow(s.k) == 0)
                .map(|d| h_value(&s, d).re)
                .sum();
            assert_relative_eq!(f_value(&s, n).re, naive, epsilon = 1e-13, max_relative = 1e-12);
        }
    }
}

#[test]
fn squarefree_count_to_100() {
    let seg = sieve_f(&spec("squarefree"), 1, 100).unwrap();
    assert_eq!(seg.total(), 61.0);
    assert_eq!(mean_value(&spec("squarefree"), 100).unwrap(), 61.0);
    assert_eq!(mean_value(&spec("kfree:3"), 1).unwrap(), 1.0);
}

#[test]
fn cubefree_count_to_1000() {
    let count = mean_value(&spec("kfree:3"), 1000).unwrap();
    let naive = (1..=1000u64).filter(|&n| shortvar::spec::is_kth_power_free(n, 3)).count();
    assert_eq!(count, naive as f64);
    let zeta3 = shortvar::special::zeta_real(3.0).unwrap();
    assert!((count - 1000.0 / zeta3).abs() < 5.0);
}

#[test]
fn phi_prefix_to_10() {
    let s = spec("phi-over-n");
    let seg = sieve_f(&s, 1, 10).unwrap();
    let naive: f64 = (1..=10).map(|n| f_value(&s, n).re).sum();
    assert_relative_eq!(seg.prefix[9], naive, max_relative = 1e-14);
}

#[test]
fn sieve_matches_pointwise_to_1e5() {
    for s in standard_presets() {
        let seg = sieve_f(&s, 1, 100_000).unwrap();
        let integral = s.alpha == 0.0 && s.beta.im == 0.0 && s.beta.re.fract() == 0.0;
        for (i, &v) in seg.values.iter().enumerate() {
            let n = i as u64 + 1;
            let exact = f_value(&s, n).re;
            if integral {
                assert_eq!(v, exact, "{} at {n}", s.label);
            } else {
                assert_relative_eq!(v, exact, epsilon = 1e-14, max_relative = 1e-12);
            }
        }
    }
}

#[test]
fn engines_agree() {
    let config = SieveConfig::default();
    for s in standard_presets() {
        let (lo, hi) = (1_000_000, 1_050_000);
        let a = sieve_with(&s, lo, hi, Truncation::Full, Engine::Scatter, &config).unwrap();
        let b = sieve_with(&s, lo, hi, Truncation::Full, Engine::Multiplicative, &config).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_relative_eq!(*x, *y, epsilon = 1e-13, max_relative = 1e-12);
        }
    }
}

#[test]
fn singleton_and_block_boundaries() {
    let small = SieveConfig { block_len: 97, max_segment_len: 1 << 20 };
    for s in standard_presets() {
        let one = sieve_f(&s, 5040, 5040).unwrap();
        assert_eq!(one.len(), 1);
        assert_relative_eq!(one.values[0], f_value(&s, 5040).re, epsilon = 1e-14, max_relative = 1e-12);
        let a = sieve_with(&s, 900, 2000, Truncation::Full, Engine::Auto, &small).unwrap();
        let b = sieve_f(&s, 900, 2000).unwrap();
        assert_eq!(a.values, b.values);
    }
}

#[test]
fn truncation_examples() {
    let sq = spec("squarefree");
    let z1 = sieve_f_truncated(&sq, 1, 500, 1.0).unwrap();
    assert!(z1.values.iter().all(|&v| v == 1.0));
    let z4 = sieve_f_truncated(&sq, 1, 100, 4.0).unwrap();
    assert_eq!(z4.value_at(36), 0.0);
    assert_eq!(z4.value_at(9), 1.0);
    for s in standard_presets() {
        let hi = 3000;
        let full = sieve_f(&s, 1, hi).unwrap();
        let same = sieve_f_truncated(&s, 1, hi, hi as f64).unwrap();
        for (a, b) in full.values.iter().zip(&same.values) {
            assert_relative_eq!(*a, *b, epsilon = 1e-14, max_relative = 1e-12);
        }
    }
}

#[test]
fn below_plus_above_is_full() {
    let config = SieveConfig::default();
    for s in standard_presets() {
        for z in [1.0, 7.5, 64.0, 1000.0] {
            let full = sieve_with(&s, 10_000, 20_000, Truncation::Full, Engine::Scatter, &config).unwrap();
            let lo = sieve_with(&s, 10_000, 20_000, Truncation::Below(z), Engine::Auto, &config).unwrap();
            let hi = sieve_with(&s, 10_000, 20_000, Truncation::Above(z), Engine::Auto, &config).unwrap();
            for i in 0..full.len() {
                assert_relative_eq!(lo.values[i] + hi.values[i], full.values[i], epsilon = 1e-13);
            }
        }
    }
}

#[test]
fn capacity_and_domain_errors() {
    let tiny = SieveConfig { block_len: 16, max_segment_len: 100 };
    let sq = spec("squarefree");
    assert!(matches!(
        sieve_with(&sq, 1, 1000, Truncation::Full, Engine::Auto, &tiny),
        Err(shortvar::Error::Capacity { .. })
    ));
    assert!(sieve_f(&sq, 0, 10).is_err());
    assert!(sieve_f(&sq, 10, 9).is_err());
    assert!(sieve_f_truncated(&sq, 1, 10, 0.5).is_err());
    let mut complex = sq.clone();
    complex.beta = shortvar::Complex64::new(0.0, 1.0);
    assert!(sieve_f(&complex, 1, 10).is_err());
}

#[test]
fn prefix_differences_are_values() {
    let seg = sieve_f(&spec("sigma:-0.75"), 1, 10_000).unwrap();
    for i in 1..seg.len() {
        assert_relative_eq!(seg.prefix[i] - seg.prefix[i - 1], seg.values[i], epsilon = 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn f_is_multiplicative(m in 1u64..10_000, n in 1u64..10_000, which in 0usize..9) {
        prop_assume!(gcd(m, n) == 1);
        let s = &standard_presets()[which];
        let lhs = f_value(s, m * n);
        let rhs = f_value(s, m) * f_value(s, n);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1e-300) + 1e-15);
    }

    #[test]
    fn mobius_twisted_h_vanishes_off_squarefree(d in 1u64..100_000, which in 0usize..9) {
        let s = &standard_presets()[which];
        if s.variant == shortvar::spec::Variant::MobiusTwisted && !shortvar::spec::is_kth_power_free(d, 2) {
            prop_assert_eq!(h_value(s, d).norm(), 0.0);
        }
    }

    #[test]
    fn mean_value_is_divisor_count_sum(x in 1u64..20_000, which in 0usize..9) {
        let s = &standard_presets()[which];
        let closed: f64 = (1..)
            .take_while(|d: &u64| d.pow(s.k) <= x)
            .map(|d| h_value(s, d).re * (x / d.pow(s.k)) as f64)
            .sum();
        let sieved = mean_value(s, x).unwrap();
        prop_assert!((sieved - closed).abs() <= 1e-9 * (1.0 + closed.abs()));
    }
}
