//! The invariant and oracle suite behind `shortvar verify`.
//!
//! Every check prints one line; output depends only on the inputs (seeded
//! RNGs, no timings), so two runs with the same thread count are identical.

use std::fmt::Write as _;

use num_complex::Complex64 as C;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use shortvar::arith::{f_value, h_value, sieve_f, sieve_f_truncated};
use shortvar::constants::*;
use shortvar::empirics::{brute_force_r, compare, continuous_variance_raw, discrete_variance_raw, Mode};
use shortvar::euler::euler_product_at_cutoff;
use shortvar::exponents::{e_exp, g_exp, nu, theta};
use shortvar::fracsum::{bernoulli_identity_residual, c_coprime_of_H, c_hk_of_H, frac_weight, scan_c_of_H, to_csv, DEFAULT_TOL};
use shortvar::oracle::{continuous_variance_quadrature, sinc_moment_quadrature};
use shortvar::spec::{preset, standard_presets, FunctionSpec, Variant};
use shortvar::special::{chi, chi_derivatives, sinc_moment, taylor_gamma_coeffs_with_radius, zeta};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub module: &'static str,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        format!("{} [{}] {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.module, self.name, self.detail)
    }
}

fn spec(name: &str) -> FunctionSpec {
    preset(name).expect("built-in preset").spec
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn push(&mut self, module: &'static str, name: &str, run: impl FnOnce() -> shortvar::Result<(bool, String)>) {
        let (pass, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        self.checks.push(Check { module, name: name.to_string(), pass, detail });
    }
}

/// Run every check; the order is fixed.
pub fn run_suite() -> Vec<Check> {
    let mut s = Suite { checks: Vec::new() };
    arith_checks(&mut s);
    special_checks(&mut s);
    constants_checks(&mut s);
    fracsum_checks(&mut s);
    exponents_checks(&mut s);
    empirics_checks(&mut s);
    cli_checks(&mut s);
    s.checks
}

fn arith_checks(s: &mut Suite) {
    s.push("arith", "sieve equals pointwise f on [1, 1e5]", || {
        let mut worst = 0.0f64;
        let mut exact = true;
        for sp in standard_presets() {
            let seg = sieve_f(&sp, 1, 100_000)?;
            let integral = sp.alpha == 0.0 && sp.beta.im == 0.0 && sp.beta.re.fract() == 0.0;
            for (i, &v) in seg.values.iter().enumerate() {
                let w = f_value(&sp, i as u64 + 1).re;
                if integral {
                    exact &= v == w;
                } else {
                    worst = worst.max((v - w).abs() / w.abs().max(1e-300));
                }
            }
        }
        Ok((exact && worst <= 1e-12, format!("integer-valued exact: {exact}, max rel err {worst:.2e}")))
    });
    s.push("arith", "mobius-twisted h vanishes off squarefree d", || {
        let mut bad = 0;
        for sp in standard_presets().iter().filter(|p| p.variant == Variant::MobiusTwisted) {
            for d in 1..20_000u64 {
                let squarefree = shortvar::primes::factorize(d).iter().all(|&(_, e)| e == 1);
                if !squarefree && h_value(sp, d).norm() != 0.0 {
                    bad += 1;
                }
            }
        }
        Ok((bad == 0, format!("{bad} violations for d < 2e4")))
    });
    s.push("arith", "f multiplicative on random coprime pairs", || {
        let mut rng = StdRng::seed_from_u64(11);
        let mut worst = 0.0f64;
        for sp in standard_presets() {
            let mut n = 0;
            while n < 200 {
                let (a, b) = (rng.gen_range(1..10_000u64), rng.gen_range(1..10_000u64));
                if gcd(a, b) != 1 {
                    continue;
                }
                let lhs = f_value(&sp, a * b);
                let rhs = f_value(&sp, a) * f_value(&sp, b);
                worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1e-300));
                n += 1;
            }
        }
        Ok((worst <= 1e-12, format!("max rel err {worst:.2e}")))
    });
    s.push("arith", "truncation at z = hi is the full sieve", || {
        let mut worst = 0.0f64;
        for sp in standard_presets() {
            let full = sieve_f(&sp, 1, 5000)?;
            let same = sieve_f_truncated(&sp, 1, 5000, 5000.0)?;
            for (a, b) in full.values.iter().zip(&same.values) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok((worst <= 1e-13, format!("max abs diff {worst:.2e}")))
    });
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn special_checks(s: &mut Suite) {
    s.push("special", "functional equation at 100 random points", || {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        let mut worst = 0.0f64;
        let mut n = 0;
        while n < 100 {
            let z = C::new(rng.gen_range(-2.0..3.0), rng.gen_range(-50.0..50.0));
            if z.norm() < 1e-3 || (z - 1.0).norm() < 1e-3 {
                continue;
            }
            let lhs = zeta(z)?;
            let rhs = chi(z)? * zeta(1.0 - z)?;
            worst = worst.max((lhs - rhs).norm() / lhs.norm());
            n += 1;
        }
        Ok((worst <= 1e-10, format!("max rel residual {worst:.2e}")))
    });
    s.push("special", "chi derivative against central differences", || {
        let h = 1e-5;
        let mut worst = 0.0f64;
        for z in [C::new(0.5, 0.0), C::new(-0.3, 2.0), C::new(1.25, 0.0), C::new(2.2, -4.0)] {
            let d = chi_derivatives(z, 1)?[1];
            let fd = (chi(z + h)? - chi(z - h)?) / (2.0 * h);
            worst = worst.max((d - fd).norm() / d.norm().max(1.0));
        }
        Ok((worst <= 1e-6, format!("max rel diff {worst:.2e}")))
    });
    s.push("special", "gamma-series coefficients independent of radius", || {
        let mut worst = 0.0f64;
        for b2 in [C::new(1.0, 0.0), C::new(0.5, 0.0), C::new(2.5, -0.4)] {
            let a = taylor_gamma_coeffs_with_radius(b2, 6, 0.3)?;
            let b = taylor_gamma_coeffs_with_radius(b2, 6, 0.5)?;
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((x - y).norm() / y.norm().max(1.0));
            }
        }
        Ok((worst <= 1e-9, format!("max rel diff {worst:.2e}")))
    });
    s.push("special", "sinc moments against quadrature", || {
        let mut worst = 0.0f64;
        for k in [2, 3, 4] {
            for alpha in [0.0, 0.25] {
                for j in [0, 1] {
                    worst = worst.max((sinc_moment(k, alpha, j)? - sinc_moment_quadrature(k, alpha, j)?).abs());
                }
            }
        }
        Ok((worst <= 1e-4, format!("max abs diff {worst:.2e}")))
    });
}

fn constants_checks(s: &mut Suite) {
    s.push("constants", "residue equals closed form for unit beta^2", || {
        let mut worst = 0.0f64;
        for name in ["squarefree", "kfree:3", "kfree:4"] {
            let sp = spec(name);
            let c = leading_constant(&sp)?;
            let kernel = ResidueKernel::new(&sp)?;
            for h in [1e2f64, 1e3, 1e4] {
                let closed = c * h.powf((1.0 - 2.0 * sp.alpha) / sp.kf());
                worst = worst.max((kernel.main_term(h).re / closed - 1.0).abs());
            }
        }
        Ok((worst <= 1e-6, format!("max rel diff {worst:.2e}")))
    });
    s.push("constants", "Q_h factorisation on a grid", || {
        let mut worst = 0.0f64;
        for name in ["squarefree", "phi-over-n", "sigma:-0.75", "sign-omega-k:3", "totient-character:3,1,-1"] {
            let sp = spec(name);
            for re in [1.6, 2.0, 3.5] {
                for im in [0.0, 1.3, -7.0] {
                    let z = C::new(re, im);
                    let lhs = q_h(&sp, z)?;
                    let rhs = zeta(z + 2.0 * sp.alpha)?.powc(sp.beta_sq()) * q_h_regular(&sp, z)?;
                    worst = worst.max((lhs - rhs).norm() / lhs.norm());
                }
            }
        }
        Ok((worst <= 1e-10, format!("max rel diff {worst:.2e}")))
    });
    s.push("constants", "doubling the prime cutoff stays within the tail bound", || {
        let cases = [
            (spec("squarefree"), C::new(-0.5, 0.0)),
            (spec("kfree:3"), C::new(-0.6, 0.2)),
            (spec("sigma:-0.75"), C::new(-1.4, 0.0)),
            (spec("totient-character:3,1,-1"), C::new(0.0, 1.0)),
        ];
        let mut worst = 0.0f64;
        for (sp, at) in cases {
            let f = bd_factor(&sp, at);
            for cutoff in [1_000u64, 20_000] {
                let a = euler_product_at_cutoff(&sp, &f, cutoff)?;
                let b = euler_product_at_cutoff(&sp, &f, 2 * cutoff)?;
                worst = worst.max((a.value - b.value).norm() / (a.tail_bound + b.tail_bound));
            }
        }
        Ok((worst <= 1.0, format!("max |change| / tail bound {worst:.3}")))
    });
    s.push("constants", "bounded-regime constant is c(H) bit for bit", || {
        let mut same = true;
        for name in ["phi-over-n", "sigma:-0.75", "schemmel:2"] {
            let sp = spec(name);
            for h in [2.0, 17.0, 100.0, 333.5] {
                let a = bounded_regime_constant(&sp, h)?.constant_c;
                let b = c_hk_of_H(&sp, h, DEFAULT_TOL)?.value;
                same &= a.to_bits() == b.to_bits();
            }
        }
        Ok((same, format!("identical: {same}")))
    });
    s.push("constants", "c(H) = 2 e_h I(H)", || {
        let mut worst = 0.0f64;
        for name in ["phi-over-n", "sigma:-0.75"] {
            let sp = spec(name);
            let e = e_h(&sp)?;
            for h in [10.0, 100.0] {
                let c = bounded_regime_constant(&sp, h)?.constant_c;
                worst = worst.max((c / (2.0 * e * line_integral_i(&sp, h)?) - 1.0).abs());
            }
        }
        Ok((worst <= 1e-4, format!("max rel diff {worst:.2e}")))
    });
    s.push("constants", "correlation identity R(H), H <= 50", || {
        let mut worst = 0.0f64;
        for name in ["squarefree", "phi-over-n"] {
            for h in [1, 10, 50] {
                let r = brute_force_r(&spec(name), h, 200, 200)?;
                worst = worst.max((r.lhs - r.rhs).abs() / r.tail_bound);
            }
        }
        Ok((worst <= 1.0, format!("max |lhs - rhs| / tail {worst:.3}")))
    });
}

fn fracsum_checks(s: &mut Suite) {
    s.push("fracsum", "fractional weight in [0, 1/4]", || {
        let mut rng = StdRng::seed_from_u64(3);
        let ok = (0..100_000).all(|_| {
            let w = frac_weight(rng.gen_range(-1e6..1e6));
            (0.0..=0.25).contains(&w)
        });
        Ok((ok, "100000 random arguments".into()))
    });
    s.push("fracsum", "tightening tol stays within the reported tail", || {
        let mut worst = 0.0f64;
        for name in ["phi-over-n", "sigma:-0.75"] {
            let sp = spec(name);
            for h in [5.0, 250.0, 1234.5] {
                let loose = c_hk_of_H(&sp, h, 1e-6)?;
                let tight = c_hk_of_H(&sp, h, 1e-7)?;
                worst = worst.max((loose.value - tight.value).abs() / (loose.tail_bound + tight.tail_bound));
            }
        }
        Ok((worst <= 1.0, format!("max |change| / tails {worst:.3}")))
    });
    s.push("fracsum", "q = 1 is the plain constant", || {
        let mut same = true;
        for name in ["phi-over-n", "sigma:-0.75", "schemmel:2", "totient-character:3,1,-1"] {
            let sp = spec(name);
            for h in [2.0, 7.5, 60.0] {
                same &= c_hk_of_H(&sp, h, DEFAULT_TOL)?.value.to_bits()
                    == c_coprime_of_H(&sp, 1, h, DEFAULT_TOL)?.value.to_bits();
            }
        }
        Ok((same, format!("identical: {same}")))
    });
    s.push("fracsum", "Bernoulli identity at 1000 random x, N = 1e6", || {
        let mut rng = StdRng::seed_from_u64(7);
        let n = 1_000_000;
        let worst = (0..1000).map(|_| bernoulli_identity_residual(rng.gen::<f64>(), n)).fold(0.0f64, f64::max);
        Ok((worst <= 2.0 / n as f64, format!("max residual {worst:.2e} (bound 2e-6)")))
    });
}

fn exponents_checks(s: &mut Suite) {
    s.push("exponents", "e(k, a) < g(k), k in 2..=100", || {
        let mut ok = true;
        for k in 2..=100 {
            for alpha in [0.0, 0.1, 0.25, 0.4, 0.49] {
                ok &= e_exp(k, alpha)? < g_exp(k)?;
            }
        }
        Ok((ok, format!("holds: {ok}")))
    });
    s.push("exponents", "nu(k, 0) in (1.34, 2], k in 3..=1e5", || {
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for k in 3..=100_000 {
            let v = nu(k, 0.0)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok((lo > 1.34 && hi <= 2.0, format!("range [{lo:.6}, {hi:.6}]")))
    });
    s.push("exponents", "e(k, 0) increasing, k in 3..=1000", || {
        let mut ok = true;
        let mut prev = e_exp(3, 0.0)?;
        for k in 4..=1000 {
            let e = e_exp(k, 0.0)?;
            ok &= e > prev;
            prev = e;
        }
        Ok((ok, format!("holds: {ok}")))
    });
    s.push("exponents", "theta <= 1/2 and e > theta", || {
        let mut ok = true;
        for k in 2..=100 {
            for alpha in [0.0, 0.25, 0.49] {
                let t = theta(k, alpha)?;
                ok &= t <= 0.5 && e_exp(k, alpha)? > t;
            }
            for alpha in [0.6, 1.0, 1.5, 1.99] {
                ok &= theta(k, alpha)? <= 0.5;
            }
        }
        Ok((ok, format!("holds: {ok}")))
    });
}

fn empirics_checks(s: &mut Suite) {
    s.push("empirics", "continuous and discrete agree to 5H^2/X at X = 1e5", || {
        let x = 100_000u64;
        let mut worst = 0.0f64;
        for sp in standard_presets() {
            for h in [10u64, 50] {
                let c = continuous_variance_raw(&sp, x, h as f64)?.measured;
                let d = 2.0 * discrete_variance_raw(&sp, 2 * x, h)?.measured - discrete_variance_raw(&sp, x, h)?.measured;
                let hf = h as f64;
                let rel = (c - d).abs() / c.max(d);
                worst = worst.max(rel / (5.0 * hf * hf / x as f64 + 1e-9));
            }
        }
        Ok((worst <= 1.0, format!("max rel diff / bound {worst:.3}")))
    });
    s.push("empirics", "sweep equals quadrature at H = 100.5", || {
        let mut worst = 0.0f64;
        for name in ["squarefree", "phi-over-n", "sigma:-0.75"] {
            let sp = spec(name);
            let a = continuous_variance_raw(&sp, 10_000, 100.5)?.measured;
            let b = continuous_variance_quadrature(&sp, 10_000, 100.5)?;
            worst = worst.max((a - b).abs() / b.max(1.0));
        }
        Ok((worst <= 1e-9, format!("max diff {worst:.2e}")))
    });
    s.push("empirics", "R(H) identity on 10 random presets", || {
        let mut rng = StdRng::seed_from_u64(10);
        let mut worst = 0.0f64;
        let mut names = Vec::new();
        for _ in 0..10 {
            let name = match rng.gen_range(0..6) {
                0 => format!("kfree:{}", rng.gen_range(2..6)),
                1 => format!("sign-omega-k:{}", rng.gen_range(2..5)),
                2 => format!("sigma:{:.3}", rng.gen_range(-1.9..-0.6)),
                3 => format!("schemmel:{}", rng.gen_range(1..4)),
                4 => "totient-character:4,1,0,-1".to_string(),
                _ => "phi-over-n".to_string(),
            };
            let h = rng.gen_range(2..40);
            let r = brute_force_r(&spec(&name), h, 100, 100)?;
            worst = worst.max((r.lhs - r.rhs).abs() / r.tail_bound);
            names.push(name);
        }
        Ok((worst <= 1.0, format!("max |lhs - rhs| / tail {worst:.3} over {}", names.join(" "))))
    });
    s.push("empirics", "measured and predicted positive, X = 1e6, H = 100", || {
        let mut ok = true;
        let mut lo = f64::MAX;
        for sp in standard_presets() {
            let r = compare(&sp, 1_000_000, 100.0, Mode::Continuous, None)?;
            ok &= r.measured > 0.0 && r.predicted > 0.0;
            lo = lo.min(r.measured.min(r.predicted));
        }
        Ok((ok, format!("smallest value {lo:.6e}")))
    });
}

fn cli_checks(s: &mut Suite) {
    s.push("cli", "CSV header and 12 significant digits", || {
        let v = scan_c_of_H(&spec("phi-over-n"), &shortvar::fracsum::real_grid(2.0, 40.0, 0.37))?;
        let csv = to_csv(&v);
        let mut lines = csv.lines();
        let mut ok = lines.next() == Some("H,c_value,tail_bound");
        for line in lines {
            for field in line.split(',') {
                ok &= significant_digits(field) <= 12 && field.parse::<f64>().is_ok() && !field.contains(' ');
            }
        }
        Ok((ok, format!("{} rows", v.len())))
    });
    s.push("cli", "repeated measurement is bitwise identical", || {
        let sp = spec("sigma:-0.75");
        let a = continuous_variance_raw(&sp, 600_000, 33.25)?.measured;
        let b = continuous_variance_raw(&sp, 600_000, 33.25)?.measured;
        Ok((a.to_bits() == b.to_bits(), format!("{a:.15e}")))
    });
}

fn significant_digits(field: &str) -> usize {
    let mantissa = field.split(['e', 'E']).next().unwrap_or("");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    digits.trim_start_matches('0').len()
}

/// The report text and whether every check passed.
pub fn report(checks: &[Check]) -> (String, bool) {
    let mut out = String::new();
    for c in checks {
        let _ = writeln!(out, "{}", c.line());
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let _ = writeln!(out, "{} checks, {} failed", checks.len(), failed);
    (out, failed == 0)
}
