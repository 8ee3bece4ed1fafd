use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;
use shortvar::constants::*;
use shortvar::euler::{euler_product_at_cutoff, partial_product};
use shortvar::primes::primes_up_to;
use shortvar::spec::{preset, FunctionSpec, Sign, Variant};
use shortvar::special::{chi, zeta, zeta_real};
use shortvar::Complex64 as C;

fn spec(name: &str) -> FunctionSpec {
    preset(name).unwrap().spec
}

/// Π_{p ≤ P} local(p) multiplied out directly.
fn direct_product(local: impl Fn(f64) -> f64, cutoff: u64) -> f64 {
    primes_up_to(cutoff).iter().map(|&p| local(p as f64).ln()).sum::<f64>().exp()
}

#[test]
fn tilde_c_examples() {
    let inv_zeta2 = 6.0 / (PI * PI);
    assert_relative_eq!(tilde_c(&spec("squarefree")).unwrap(), inv_zeta2, max_relative = 1e-12);
    assert_relative_eq!(tilde_c(&spec("phi-over-n")).unwrap(), inv_zeta2, max_relative = 1e-12);
    let direct = direct_product(|p| 1.0 - 2.0 / p.powi(3), 1_000_000);
    // Tail Σ_{p>P} 2/p³ < 1e-12.
    assert_relative_eq!(tilde_c(&spec("sign-omega-k:3")).unwrap(), direct, max_relative = 2e-12);
    let p = tilde_c_product(&spec("kfree:3")).unwrap();
    assert!(p.tail_bound <= 1e-12);
    assert_relative_eq!(p.value.re, 1.0 / zeta_real(3.0).unwrap(), max_relative = 1e-12);
}

#[test]
fn e_h_examples() {
    let direct = direct_product(|p| 1.0 - 2.0 / (p * p), 1_000_000);
    // Σ_{p>10⁶} 2/p² < 2e-7 relative.
    assert_relative_eq!(e_h(&spec("squarefree")).unwrap(), direct, max_relative = 2e-7);
    let direct = direct_product(|p| 1.0 - 2.0 / (p * p), 1_000_000);
    assert_relative_eq!(e_h(&spec("phi-over-n")).unwrap(), direct, max_relative = 2e-7);
    // A vanishing local factor at p = 2 makes the product exactly zero.
    assert_eq!(e_h(&spec("sign-omega-k:2")).unwrap(), 0.0);
    let sigma = e_h(&spec("sigma:-0.75")).unwrap();
    let direct = direct_product(|p| (p + p.powf(-0.75)) / (p - p.powf(-0.75)), 1_000_000);
    assert_relative_eq!(sigma, direct, max_relative = 2e-5);
}

#[test]
fn b_at_large_s_tends_to_e_h() {
    for name in ["squarefree", "kfree:3", "sign-omega-k:3"] {
        let s = spec(name);
        let b = euler_product_b(&s, C::new(30.0, 0.0), 1e-12).unwrap();
        assert_relative_eq!(b.value.re, e_h(&s).unwrap(), max_relative = 1e-9);
    }
}

#[test]
fn b_squarefree_at_minus_half_matches_direct_product() {
    let b = euler_product_b(&spec("squarefree"), C::new(-0.5, 0.0), 1e-12).unwrap();
    let direct = direct_product(|p| 1.0 - 3.0 / (p * p) + 2.0 / (p * p * p), 1_000_000);
    assert!(b.tail_bound <= 1e-12);
    assert_relative_eq!(b.value.re, direct, max_relative = 5e-7);
    assert!(b.value.im.abs() < 1e-15);
}

#[test]
fn partial_product_at_two_is_the_first_local_factor() {
    let s = spec("squarefree");
    let f = bd_factor(&s, C::new(-0.5, 0.0));
    let at2 = partial_product(&s, &f, 2);
    assert_relative_eq!(at2.re, 1.0 - 3.0 / 4.0 + 2.0 / 8.0, max_relative = 1e-15);
    assert_eq!(at2, f.at_prime(&s, 2));
}

#[test]
fn d_local_factor_by_construction() {
    let s = spec("sigma:-0.75");
    let w = C::new(-0.3, 0.7);
    let f = bd_factor(&s, w);
    for p in [2u64, 3, 5, 101] {
        let pf = p as f64;
        let pc = C::new(pf, 0.0);
        let h = pf.powf(-0.75);
        let k1 = 1.0 + w;
        let expected = (1.0 - h * h / pc.powc(k1)).inv()
            * (1.0 - pc.powc(-(k1 + 1.5)))
            * (1.0 - h * h / (pf * pf))
            * (1.0 - h / pf).powi(-2);
        let got = f.at_prime(&s, p);
        assert!((got - expected).norm() <= 1e-14 * expected.norm(), "p = {p}");
    }
}

#[test]
fn d_sigma_at_pole_point_is_finite_and_positive() {
    let s = spec("sigma:-0.75");
    let at = C::new((1.0 - 1.5 - 1.0) / 1.0, 0.0);
    let d = euler_product_d(&s, at, 1e-10).unwrap();
    assert!(d.value.re > 0.0 && d.value.re.is_finite());
    let direct = direct_product(|p| (1.0 - p.powf(-3.5)) * (1.0 - p.powf(-1.75)).powi(-2), 1_000_000);
    assert_relative_eq!(d.value.re, direct, max_relative = 2e-5);
    // Outside the strip.
    assert!(euler_product_d(&s, C::new(-2.2, 0.0), 1e-10).is_err());
}

#[test]
fn d_tends_to_one_for_fast_decay() {
    let s = FunctionSpec::new(1, 1.9, C::new(1e-6, 0.0), Sign::Plus, Variant::CompletelyMultiplicative, "tiny").unwrap();
    let d = euler_product_d(&s, C::new(5.0, 0.0), 1e-12).unwrap();
    assert!((d.value.re - 1.0).abs() < 1e-5);
}

#[test]
fn q_h_factorization_identity() {
    for name in ["squarefree", "phi-over-n", "sigma:-0.75", "sign-omega-k:3", "totient-character:3,1,-1"] {
        let s = spec(name);
        for re in [1.6, 2.0, 3.5] {
            for im in [0.0, 1.3, -7.0] {
                let z = C::new(re, im);
                let lhs = q_h(&s, z).unwrap();
                let rhs = zeta(z + 2.0 * s.alpha).unwrap().powc(s.beta_sq()) * q_h_regular(&s, z).unwrap();
                assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm(), "{name} at {z}");
            }
        }
    }
}

#[test]
fn q_h_at_k_is_f_h_at_zero() {
    let s = spec("phi-over-n");
    // ν(p)/p = 1/(p(p² − 2)).
    let direct = direct_product(|p| 1.0 + 1.0 / (p * (p * p - 2.0)), 1_000_000);
    assert_relative_eq!(f_h(&s, 0).unwrap(), direct, max_relative = 1e-6);
    assert_eq!(f_h(&s, 0).unwrap(), q_h(&s, C::new(1.0, 0.0)).unwrap().re);
}

#[test]
fn doubling_the_cutoff_stays_within_the_tail_bound() {
    let cases = [
        (spec("squarefree"), C::new(-0.5, 0.0)),
        (spec("kfree:3"), C::new(-0.6, 0.2)),
        (spec("sigma:-0.75"), C::new(-1.4, 0.0)),
        (spec("totient-character:3,1,-1"), C::new(0.0, 1.0)),
    ];
    for (s, at) in cases {
        let f = bd_factor(&s, at);
        for cutoff in [1_000u64, 20_000] {
            let a = euler_product_at_cutoff(&s, &f, cutoff).unwrap();
            let b = euler_product_at_cutoff(&s, &f, 2 * cutoff).unwrap();
            assert!((a.value - b.value).norm() <= a.tail_bound + b.tail_bound, "{} at P = {cutoff}", s.label);
        }
    }
}

#[test]
fn leading_constant_squarefree_closed_form() {
    let c = leading_constant(&spec("squarefree")).unwrap();
    let prod = euler_product_b(&spec("squarefree"), C::new(-0.5, 0.0), 1e-13).unwrap().value.re;
    let closed = zeta_real(1.5).unwrap() * prod / PI;
    assert_relative_eq!(c, closed, max_relative = 1e-10);
    // The same value through χ(3/2) = -4π.
    let via_chi = -chi(C::new(1.5, 0.0)).unwrap().re * zeta_real(1.5).unwrap() * prod / (4.0 * PI * PI);
    assert_relative_eq!(c, via_chi, max_relative = 1e-10);
}

#[test]
fn leading_constant_k3_is_positive() {
    let c = leading_constant(&spec("kfree:3")).unwrap();
    assert!(c > 0.0 && c.is_finite());
    assert!(matches!(leading_constant(&spec("phi-over-n")), Err(shortvar::Error::Regime(_))));
}

#[test]
fn residue_matches_closed_form_for_unit_beta_square() {
    for name in ["squarefree", "kfree:3", "kfree:4"] {
        let s = spec(name);
        let c = leading_constant(&s).unwrap();
        let kernel = ResidueKernel::new(&s).unwrap();
        for h in [1e2, 1e3, 1e4] {
            let p = kernel.predict(h).unwrap();
            let closed = c * h.powf((1.0 - 2.0 * s.alpha) / s.kf());
            assert!((p.main_term / closed - 1.0).abs() <= 1e-6, "{name} H={h}");
            assert_eq!(p.poly_degree, 0);
            assert!(p.imag_residue.abs() <= 1e-8 * p.main_term.abs());
        }
    }
}

#[test]
fn sign_omega_residue_has_cubic_log_polynomial() {
    let s = spec("sign-omega-k:2");
    let p = main_term_residue(&s, 1e3).unwrap();
    assert_eq!(p.poly_degree, 3);
    assert_eq!(p.regime, Regime::PowerLaw);
    assert!((p.poly_coeffs[3] - 1.0).abs() < 1e-9);
    let lh = 1e3f64.ln();
    let poly: f64 = p.poly_coeffs.iter().enumerate().map(|(j, c)| c * lh.powi(j as i32)).sum();
    assert_relative_eq!(p.main_term, p.constant_c * 1e3f64.sqrt() * poly, max_relative = 1e-9);
}

#[test]
fn residue_power_law_scaling() {
    let s = spec("squarefree");
    let kernel = ResidueKernel::new(&s).unwrap();
    let a = kernel.main_term(1e6).re;
    let b = kernel.main_term(4e6).re;
    assert!((b / a / 2.0 - 1.0).abs() < 0.02);
}

#[test]
fn regime_dispatch() {
    assert_eq!(predict(&spec("squarefree"), 100.0).unwrap().regime, Regime::PowerLaw);
    assert_eq!(predict(&spec("phi-over-n"), 100.0).unwrap().regime, Regime::Bounded);
    assert!(matches!(bounded_regime_constant(&spec("squarefree"), 100.0), Err(shortvar::Error::Regime(_))));
    assert!(matches!(main_term_residue(&spec("phi-over-n"), 100.0), Err(shortvar::Error::Regime(_))));
}

#[test]
fn bounded_regime_constant_is_c_of_h() {
    for name in ["phi-over-n", "sigma:-0.75", "totient-character:3,1,-1"] {
        let s = spec(name);
        for h in [2.0, 17.0, 100.0, 333.5] {
            let a = bounded_regime_constant(&s, h).unwrap().constant_c;
            let b = shortvar::fracsum::c_hk_of_H(&s, h, shortvar::fracsum::DEFAULT_TOL).unwrap().value;
            assert_eq!(a, b);
        }
    }
}

#[test]
fn c_of_h_is_twice_e_h_times_line_integral() {
    for name in ["phi-over-n", "sigma:-0.75"] {
        let s = spec(name);
        let e = e_h(&s).unwrap();
        for h in [10.0, 100.0] {
            let c = bounded_regime_constant(&s, h).unwrap().constant_c;
            let i = line_integral_i(&s, h).unwrap();
            assert!((c / (2.0 * e * i) - 1.0).abs() <= 1e-4, "{name} H={h}");
        }
    }
}

#[test]
fn complex_main_term_at_unit_beta_square_is_the_power_law() {
    let s = spec("squarefree");
    let c = leading_constant(&s).unwrap();
    for h in [1e3, 1e5] {
        let m = complex_main_term(&s, h, 3).unwrap();
        assert_relative_eq!(m.value, c * h.sqrt(), max_relative = 1e-9);
    }
}

#[test]
fn complex_main_term_agrees_with_residue_at_integer_beta_square() {
    let s = spec("sign-omega-k:2");
    let h = 1e4;
    let r = main_term_residue(&s, h).unwrap().main_term;
    let m = complex_main_term(&s, h, 4).unwrap();
    assert_relative_eq!(m.value, r, max_relative = 1e-8);
}

#[test]
fn lambda_coefficients() {
    let half = FunctionSpec::new(2, 0.0, C::new(0.5f64.sqrt(), 0.0), Sign::Plus, Variant::MobiusTwisted, "half").unwrap();
    let lam = lambda_coeffs(&half, 3).unwrap();
    let l1 = l_alpha(&half, C::new(1.0, 0.0)).unwrap();
    let g0 = 1.0 / shortvar::special::gamma(C::new(0.5, 0.0)).unwrap();
    assert!((lam[0] - l1 * g0).norm() <= 1e-12 * lam[0].norm());
    let r1 = lambda_coeffs_with_radius(&half, 3, 0.1).unwrap();
    let r2 = lambda_coeffs_with_radius(&half, 3, 0.2).unwrap();
    for (a, b) in r1.iter().zip(&r2) {
        assert!((a - b).norm() <= 1e-9 * b.norm().max(1e-3));
    }
    // β² = 1: 1/Γ(1 − j) vanishes for j ≥ 1.
    let lam = lambda_coeffs(&spec("squarefree"), 3).unwrap();
    for l in &lam[1..] {
        assert_eq!(l.norm(), 0.0);
    }
}

#[test]
fn complex_main_term_half_beta_square_series_settles() {
    let half = FunctionSpec::new(2, 0.0, C::new(0.5f64.sqrt(), 0.0), Sign::Plus, Variant::MobiusTwisted, "half").unwrap();
    let h = 1e4;
    let a = complex_main_term(&half, h, 2).unwrap();
    let b = complex_main_term(&half, h, 3).unwrap();
    assert!(a.value.is_finite() && b.value.is_finite());
    assert!(b.imag.abs() <= 1e-8 * b.value.abs());
    let scale = 2.0 * h.sqrt() * h.ln().powf(-0.5);
    assert!(((a.value - b.value) / scale).abs() <= 1.0 / h.ln().powi(3) * 10.0);
    let complex = FunctionSpec::new(2, 0.0, C::new(0.8, 0.3), Sign::Plus, Variant::MobiusTwisted, "complex").unwrap();
    assert!(complex_main_term(&complex, h, 2).unwrap().value.is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn q_h_factorization_random(re in 1.2f64..4.0, im in -20.0f64..20.0) {
        let s = spec("sign-omega-k:3");
        let z = C::new(re, im);
        let lhs = q_h(&s, z).unwrap();
        let rhs = zeta(z + 2.0 * s.alpha).unwrap().powc(s.beta_sq()) * q_h_regular(&s, z).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm());
    }

    #[test]
    fn residue_polynomial_is_monic(h in 2.0f64..1e6) {
        static KERNEL: std::sync::OnceLock<ResidueKernel> = std::sync::OnceLock::new();
        let kernel = KERNEL.get_or_init(|| ResidueKernel::new(&spec("sign-omega-k:3")).unwrap());
        let p = kernel.predict(h).unwrap();
        prop_assert!((p.poly_coeffs.last().unwrap() - 1.0).abs() < 1e-9);
        prop_assert!(p.main_term.is_finite());
    }
}
