use proptest::prelude::*;
use shortvar::fracsum::*;
use shortvar::oracle::direct_series_c;
use shortvar::spec::{preset, FunctionSpec};
use shortvar::Error;

fn spec(name: &str) -> FunctionSpec {
    preset(name).unwrap().spec
}

fn assert_matches_direct(name: &str, q: u64, h: f64, d_max: u64) {
    let s = spec(name);
    let fast = c_coprime_of_H(&s, q, h, 1e-9).unwrap();
    let (direct, tail) = direct_series_c(&s, q, h, d_max).unwrap();
    let err = (fast.value - direct).abs();
    assert!(
        err <= tail + fast.tail_bound + 1e-12,
        "{name} q={q} H={h}: fast {} direct {direct} (tails {tail}, {})",
        fast.value,
        fast.tail_bound
    );
}

#[test]
fn zero_window_has_zero_constant() {
    for s in standard_bounded() {
        assert_eq!(c_hk_of_H(&s, 0.0, DEFAULT_TOL).unwrap().value, 0.0);
    }
}

fn standard_bounded() -> Vec<FunctionSpec> {
    ["phi-over-n", "sigma:-0.75", "schemmel:2", "totient-character:3,1,-1"].iter().map(|n| spec(n)).collect()
}

#[test]
fn trivial_modulus_is_the_plain_constant() {
    for s in standard_bounded() {
        for h in [2.0, 7.5, 60.0] {
            let a = c_hk_of_H(&s, h, DEFAULT_TOL).unwrap();
            let b = c_coprime_of_H(&s, 1, h, DEFAULT_TOL).unwrap();
            assert_eq!(a.value.to_bits(), b.value.to_bits());
        }
    }
}

#[test]
fn phi_over_n_matches_direct_series() {
    for h in [2.0, 10.0, 37.0] {
        assert_matches_direct("phi-over-n", 1, h, 200_000);
    }
}

#[test]
fn schemmel_matches_direct_series() {
    let p = preset("schemmel:2").unwrap();
    assert_eq!(p.q, 2);
    for h in [3.0, 12.0] {
        assert_matches_direct("schemmel:2", p.q, h, 200_000);
    }
}

#[test]
fn character_matches_direct_series() {
    assert_matches_direct("totient-character:3,1,-1", 1, 9.0, 200_000);
    assert_matches_direct("totient-character:3,1,-1", 3, 9.0, 200_000);
}

#[test]
fn sigma_matches_direct_series() {
    assert_matches_direct("sigma:-0.75", 1, 100.0, 200_000);
}

#[test]
fn tightening_the_tolerance_is_consistent() {
    let s = spec("phi-over-n");
    for h in [5.0, 250.0, 1234.5] {
        let loose = c_hk_of_H(&s, h, 1e-6).unwrap();
        let tight = c_hk_of_H(&s, h, 1e-8).unwrap();
        assert!(tight.tail_bound <= 1e-8);
        assert!((loose.value - tight.value).abs() <= loose.tail_bound + tight.tail_bound);
    }
    // Rounding in H² · (moment terms) sets a floor; asking below it is an error.
    assert!(matches!(c_hk_of_H(&s, 250.0, 1e-14), Err(Error::Convergence(_))));
}

#[test]
fn series_reuse_equals_fresh_evaluation() {
    let s = spec("sigma:-0.75");
    let series = FracSeries::new(&s, 1, 500.0).unwrap();
    for h in [2.0, 99.0, 500.0] {
        let a = series.eval(h).unwrap();
        let b = c_hk_of_H(&s, h, DEFAULT_TOL).unwrap();
        assert!((a.value - b.value).abs() <= a.tail_bound + b.tail_bound);
    }
    assert!(series.eval(501.0).is_err());
}

#[test]
fn bernoulli_identity_at_special_points() {
    for x in [0.0, 0.5, 1.0, -0.25] {
        assert!(bernoulli_identity_residual(x, 1_000_000) <= 2e-6, "x={x}");
    }
}

#[test]
fn bernoulli_identity_random_points() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let n = 1_000_000;
    let worst = (0..1000)
        .map(|_| bernoulli_identity_residual(rng.gen::<f64>(), n))
        .fold(0.0f64, f64::max);
    assert!(worst <= 2.0 / n as f64, "worst residual {worst}");
}

#[test]
fn singleton_grid_and_csv() {
    let s = spec("phi-over-n");
    let v = scan_c_of_H(&s, &[10.0]).unwrap();
    assert_eq!(v.len(), 1);
    let csv = to_csv(&v);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("H,c_value,tail_bound"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 3);
    assert_eq!(row[0], "10");
    let value: f64 = row[1].parse().unwrap();
    assert!((value - v[0].value).abs() <= 1e-11 * value.abs());
    assert!(lines.next().is_none());
    assert!(matches!(scan_c_of_H(&s, &[]), Err(Error::Domain(_))));
}

#[test]
fn grids() {
    assert_eq!(int_grid(2, 5), vec![2.0, 3.0, 4.0, 5.0]);
    let g = real_grid(0.0, 1.0, 0.1);
    assert_eq!(g.len(), 11);
    assert!((g[10] - 1.0).abs() < 1e-15);
}

#[test]
fn power_law_specs_are_rejected() {
    assert!(matches!(c_hk_of_H(&spec("squarefree"), 10.0, DEFAULT_TOL), Err(Error::Regime(_))));
    assert!(matches!(c_hk_of_H(&spec("kfree:3"), 10.0, DEFAULT_TOL), Err(Error::Regime(_))));
}

#[test]
fn phi_over_n_integer_scan() {
    let v = scan_c_of_H(&spec("phi-over-n"), &int_grid(2, 2000)).unwrap();
    let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(a, b), c| (a.min(c.value), b.max(c.value)));
    println!("phi-over-n c(H), H in [2, 2000]: min {lo:.6} max {hi:.6}");
    assert!(lo > 0.0 && hi < 1.0);
    let r = layer_analysis(&v);
    assert_eq!(r.class_counts.iter().sum::<usize>(), v.len());
}

#[test]
fn layer_analysis_on_synthetic_data() {
    let level = [0.0, 3.0, 1.0, 2.0, 1.0, 3.0];
    let values: Vec<FracConstant> = (2..200u64)
        .map(|h| FracConstant { value: level[(h % 6) as usize], h: h as f64, terms_used: 0, tail_bound: 0.0 })
        .collect();
    let r = layer_analysis(&values);
    assert!(r.ordering_holds);
    assert_eq!(r.agreement, 1.0);
    assert_eq!(r.layer_means, [0.0, 1.0, 2.0, 3.0]);
}

proptest! {
    #[test]
    fn frac_weight_is_bounded(x in -1e6f64..1e6) {
        let w = frac_weight(x);
        prop_assert!((0.0..=0.25).contains(&w));
        prop_assert!((frac_weight(x + 1.0) - w).abs() < 1e-6);
    }

    #[test]
    fn constant_is_nonnegative_and_bounded(h in 0.0f64..300.0) {
        let c = c_hk_of_H(&spec("phi-over-n"), h, DEFAULT_TOL).unwrap();
        prop_assert!(c.value >= -c.tail_bound);
        prop_assert!(c.value <= 0.25 * h.max(1.0) * h.max(1.0));
    }
}
