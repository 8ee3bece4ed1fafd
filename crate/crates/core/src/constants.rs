//! Euler-product constants and variance main terms.
//!
//! With x = p^{-(k+α)}, h(p)/p^k is -g(p)x in the Möbius-twisted class and
//! g(p)x in the completely multiplicative class.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::{euler_product, Atom, EulerProductValue, LocalFactor};
use crate::spec::{FunctionSpec, Variant};
use crate::special::{chi, recip_gamma, taylor_coeffs, taylor_gamma_coeffs, zeta, ContourSpec};

type C64 = Complex64;

/// Default absolute tolerance for Euler products.
pub const EULER_TOL: f64 = 1e-12;

fn x_exponent(spec: &FunctionSpec) -> f64 {
    spec.kf() + spec.alpha
}

fn c(z: f64) -> C64 {
    C64::new(z, 0.0)
}

/// Local factor of c̃ = Σ h(d)/d^k.
pub fn tilde_c_factor(spec: &FunctionSpec) -> LocalFactor {
    let a = x_exponent(spec);
    match spec.variant {
        Variant::MobiusTwisted => LocalFactor::new(a, None, vec![Atom::new(1.0, |g, x, _| -g * x)]),
        Variant::CompletelyMultiplicative => LocalFactor::new(a, None, vec![Atom::new(-1.0, |g, x, _| -g * x)]),
    }
}

/// Local factor of e_h.
pub fn e_h_factor(spec: &FunctionSpec) -> LocalFactor {
    let a = x_exponent(spec);
    match spec.variant {
        Variant::MobiusTwisted => LocalFactor::new(a, None, vec![Atom::new(1.0, |g, x, _| -2.0 * g * x)]),
        Variant::CompletelyMultiplicative => LocalFactor::new(
            a,
            None,
            vec![Atom::new(1.0, |g, x, _| g * x), Atom::new(-1.0, |g, x, _| -g * x)],
        ),
    }
}

/// Local factor of Q_h(s), with y = p^{-(s+2α)}; `regular` multiplies by
/// (1 - y)^{β²} to strip the ζ(s+2α)^{β²} singularity.
pub fn q_h_factor(spec: &FunctionSpec, s: C64, regular: bool) -> LocalFactor {
    let a = x_exponent(spec);
    let w = s + 2.0 * spec.alpha;
    let mut atoms = match spec.variant {
        Variant::MobiusTwisted => vec![
            Atom::new(1.0, |g, x, y| -2.0 * g * x + g * g * y),
            Atom::new(-1.0, |g, x, _| -2.0 * g * x),
        ],
        Variant::CompletelyMultiplicative => vec![Atom::new(-1.0, |g, _, y| -g * g * y)],
    };
    if regular {
        atoms.push(Atom::new(spec.beta_sq(), |_, _, y| -y));
    }
    LocalFactor::new(a, Some(w), atoms)
}

/// Local factor of B(s) (Möbius-twisted) or D(s) (completely multiplicative),
/// with y = p^{-(k+ks+2α)}.
pub fn bd_factor(spec: &FunctionSpec, s: C64) -> LocalFactor {
    let a = x_exponent(spec);
    let w = spec.kf() + spec.kf() * s + 2.0 * spec.alpha;
    let b2 = spec.beta_sq();
    let atoms = match spec.variant {
        Variant::MobiusTwisted => vec![
            Atom::new(1.0, |g, x, y| -2.0 * g * x + g * g * y),
            Atom::new(b2, |_, _, y| -y),
        ],
        Variant::CompletelyMultiplicative => vec![
            Atom::new(-1.0, |g, _, y| -g * g * y),
            Atom::new(b2, |_, _, y| -y),
            Atom::new(1.0, |g, x, _| -g * g * x * x),
            Atom::new(-2.0, |g, x, _| -g * x),
        ],
    };
    LocalFactor::new(a, Some(w), atoms)
}

fn check_strip(spec: &FunctionSpec, w: C64, what: &str) -> Result<()> {
    if !(w.re > 0.5) {
        let s_min = (1.0 - 4.0 * spec.alpha - 2.0 * spec.kf()) / (2.0 * spec.kf());
        return Err(Error::Domain(format!(
            "{what} is only defined for Re s > {s_min:.6} (got exponent {w})"
        )));
    }
    Ok(())
}

pub fn tilde_c_product(spec: &FunctionSpec) -> Result<EulerProductValue> {
    euler_product(spec, &tilde_c_factor(spec), EULER_TOL)
}

/// c̃_{h,k} = Σ_d h(d)/d^k, the mean value of f.
pub fn tilde_c(spec: &FunctionSpec) -> Result<f64> {
    Ok(tilde_c_product(spec)?.value.re)
}

pub fn e_h_product(spec: &FunctionSpec) -> Result<EulerProductValue> {
    euler_product(spec, &e_h_factor(spec), EULER_TOL)
}

pub fn e_h(spec: &FunctionSpec) -> Result<f64> {
    Ok(e_h_product(spec)?.value.re)
}

pub fn euler_product_b(spec: &FunctionSpec, s: C64, tol: f64) -> Result<EulerProductValue> {
    if spec.variant != Variant::MobiusTwisted {
        return Err(Error::Domain("B(s) is defined for the Möbius-twisted class; use D(s)".into()));
    }
    let factor = bd_factor(spec, s);
    check_strip(spec, factor.w.unwrap(), "B(s)")?;
    euler_product(spec, &factor, tol)
}

pub fn euler_product_d(spec: &FunctionSpec, s: C64, tol: f64) -> Result<EulerProductValue> {
    if spec.variant != Variant::CompletelyMultiplicative {
        return Err(Error::Domain("D(s) is defined for the completely multiplicative class; use B(s)".into()));
    }
    let factor = bd_factor(spec, s);
    check_strip(spec, factor.w.unwrap(), "D(s)")?;
    euler_product(spec, &factor, tol)
}

/// B(s) or D(s), whichever matches the class of `spec`.
pub fn euler_product_bd(spec: &FunctionSpec, s: C64, tol: f64) -> Result<EulerProductValue> {
    match spec.variant {
        Variant::MobiusTwisted => euler_product_b(spec, s, tol),
        Variant::CompletelyMultiplicative => euler_product_d(spec, s, tol),
    }
}

/// Q_h(s); needs Re(s + 2α) > 1.
pub fn q_h(spec: &FunctionSpec, s: C64) -> Result<C64> {
    let w = s + 2.0 * spec.alpha;
    if !(w.re > 1.0) {
        return Err(Error::Domain(format!(
            "Q_h(s) converges only for Re s > {}; use q_h_regular",
            1.0 - 2.0 * spec.alpha
        )));
    }
    Ok(euler_product(spec, &q_h_factor(spec, s, false), EULER_TOL)?.value)
}

/// Q_h(s) ζ(s+2α)^{-β²}, analytic for Re(s + 2α) > 1/2.
pub fn q_h_regular(spec: &FunctionSpec, s: C64) -> Result<C64> {
    let factor = q_h_factor(spec, s, true);
    check_strip_q(spec, factor.w.unwrap())?;
    Ok(euler_product(spec, &factor, EULER_TOL)?.value)
}

fn check_strip_q(spec: &FunctionSpec, w: C64) -> Result<()> {
    if !(w.re > 0.5) {
        return Err(Error::Domain(format!(
            "q_h_regular needs Re s > {}",
            0.5 - 2.0 * spec.alpha
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    PowerLaw,
    Bounded,
}

/// Predicted variance for one H.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariancePrediction {
    pub spec: FunctionSpec,
    #[serde(rename = "H")]
    pub h: f64,
    pub main_term: f64,
    /// c_{h,k} (power law) or c_{h,k}(H) (bounded).
    pub constant_c: f64,
    pub poly_degree: u32,
    /// Monic P_{β²-1} coefficients, constant term first.
    pub poly_coeffs: Vec<f64>,
    pub regime: Regime,
    /// Imaginary part discarded from the residue.
    pub imag_residue: f64,
}

fn require_power_law(spec: &FunctionSpec) -> Result<()> {
    if !(spec.alpha < 0.5) {
        return Err(Error::Regime(format!(
            "α = {} is in the bounded regime; the power-law main term needs α < 1/2",
            spec.alpha
        )));
    }
    Ok(())
}

fn integer_beta_sq(spec: &FunctionSpec) -> Result<u32> {
    spec.beta_sq_integer()
        .ok_or_else(|| Error::Domain(format!("β² = {} is not a positive integer", spec.beta_sq())))
}

/// s₀ = (1-2α)/k - 1, where Q_h(k+ks) has its pole.
pub fn pole_point(spec: &FunctionSpec) -> f64 {
    (1.0 - 2.0 * spec.alpha) / spec.kf() - 1.0
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// c_{h,k}: leading coefficient of the power-law main term, so that the
/// variance is c_{h,k} H^{(1-2α)/k} P_{β²-1}(log H) with P monic.
///
/// This is -2/(k^{β²} 4π² (β²-1)!) B(s₀) χ(2+s₀) ζ(1-s₀); see the decisions
/// ledger for the normalization.
pub fn leading_constant(spec: &FunctionSpec) -> Result<f64> {
    require_power_law(spec)?;
    let n = integer_beta_sq(spec)?;
    let s0 = c(pole_point(spec));
    let bd = euler_product_bd(spec, s0, EULER_TOL)?.value;
    let val = -2.0 / (spec.kf().powi(n as i32) * 4.0 * PI * PI * factorial(n - 1))
        * bd
        * chi(s0 + 2.0)?
        * zeta(1.0 - s0)?;
    Ok(val.re)
}

/// Taylor data of the residue integrand around s₀, reusable across H.
#[derive(Clone, Debug)]
pub struct ResidueKernel {
    pub spec: FunctionSpec,
    pub order: u32,
    pub contour: ContourSpec,
    /// Coefficients of Ĝ(u) = 2χ(s)ζ(1-s)(kuζ(1+ku))^{β²}B(s)/(s(s+1)), s = s₀+u.
    pub g_hat: Vec<C64>,
}

pub const RESIDUE_NODES: usize = 128;

impl ResidueKernel {
    pub fn new(spec: &FunctionSpec) -> Result<Self> {
        require_power_law(spec)?;
        let n = integer_beta_sq(spec)?;
        let k = spec.kf();
        let s0 = pole_point(spec);
        let radius = (0.2 / k).min(0.5 * (1.0 - 2.0 * spec.alpha) / k).min(0.5 * s0.abs());
        let contour = ContourSpec::new(c(s0), radius, RESIDUE_NODES)?;
        let g = |s: C64| -> Result<C64> {
            let u = s - s0;
            let kz = u * k * zeta(1.0 + u * k)?;
            let bd = euler_product_bd(spec, s, EULER_TOL)?.value;
            Ok(2.0 * chi(s)? * zeta(1.0 - s)? * kz.powu(n) * bd / (s * (s + 1.0)))
        };
        let g_hat = taylor_coeffs(g, &contour, n as usize - 1)?;
        Ok(Self { spec: spec.clone(), order: n, contour, g_hat })
    }

    /// 2 Res_{s=s₀} H^{1+s} χ(s) ζ(1-s) B(s) ζ(k+ks+2α)^{β²}/(s(s+1)).
    pub fn main_term(&self, h: f64) -> C64 {
        let n = self.order as usize;
        let lh = h.ln();
        let s0 = self.contour.center.re;
        let mut acc = C64::new(0.0, 0.0);
        let mut pow = 1.0;
        for j in 0..n {
            acc += self.g_hat[n - 1 - j] * pow;
            pow *= lh / (j + 1) as f64;
        }
        acc * h.powf(1.0 + s0) / self.spec.kf().powi(n as i32)
    }

    /// Monic polynomial P with main_term = c H^{(1-2α)/k} P(log H), and c.
    pub fn polynomial(&self) -> (f64, Vec<f64>) {
        let n = self.order as usize;
        let constant = self.g_hat[0].re / (self.spec.kf().powi(n as i32) * factorial(self.order - 1));
        let coeffs = (0..n)
            .map(|j| self.g_hat[n - 1 - j].re / factorial(j as u32) * factorial(self.order - 1) / self.g_hat[0].re)
            .collect();
        (constant, coeffs)
    }

    pub fn predict(&self, h: f64) -> Result<VariancePrediction> {
        if !(h >= 2.0) {
            return Err(Error::Domain(format!("H = {h} must be at least 2")));
        }
        let v = self.main_term(h);
        let (constant_c, poly_coeffs) = self.polynomial();
        Ok(VariancePrediction {
            spec: self.spec.clone(),
            h,
            main_term: v.re,
            constant_c,
            poly_degree: self.order - 1,
            poly_coeffs,
            regime: Regime::PowerLaw,
            imag_residue: v.im,
        })
    }
}

/// Power-law main term as a numerical residue.
pub fn main_term_residue(spec: &FunctionSpec, h: f64) -> Result<VariancePrediction> {
    ResidueKernel::new(spec)?.predict(h)
}

/// c_{h,k}(H) packaged as a prediction.
pub fn bounded_regime_constant(spec: &FunctionSpec, h: f64) -> Result<VariancePrediction> {
    let c = crate::fracsum::FracSeries::new(spec, 1, h)?.eval_relaxed(h)?;
    let value = c.value;
    Ok(VariancePrediction {
        spec: spec.clone(),
        h,
        main_term: value,
        constant_c: value,
        poly_degree: 0,
        poly_coeffs: vec![1.0],
        regime: Regime::Bounded,
        imag_residue: 0.0,
    })
}

/// Regime-appropriate prediction.
pub fn predict(spec: &FunctionSpec, h: f64) -> Result<VariancePrediction> {
    if spec.alpha < 0.5 {
        main_term_residue(spec, h)
    } else {
        bounded_regime_constant(spec, h)
    }
}

/// L_α(z) = -z ζ(2-(z-2α)/k) B(-1+(z-2α)/k) χ(1+(z-2α)/k) / 4π².
pub fn l_alpha(spec: &FunctionSpec, z: C64) -> Result<C64> {
    let t = (z - 2.0 * spec.alpha) / spec.kf();
    let bd = euler_product_bd(spec, t - 1.0, EULER_TOL)?.value;
    Ok(-z * zeta(2.0 - t)? * bd * chi(1.0 + t)? / (4.0 * PI * PI))
}

fn l_alpha_radius(spec: &FunctionSpec) -> f64 {
    0.5 * (1.0 - 2.0 * spec.alpha).min(0.5)
}

/// λ_0, ..., λ_N.
pub fn lambda_coeffs(spec: &FunctionSpec, n: usize) -> Result<Vec<C64>> {
    lambda_coeffs_with_radius(spec, n, l_alpha_radius(spec))
}

pub fn lambda_coeffs_with_radius(spec: &FunctionSpec, n: usize, radius: f64) -> Result<Vec<C64>> {
    require_power_law(spec)?;
    if radius > l_alpha_radius(spec) * 1.6 {
        return Err(Error::Contour { center: c(1.0), radius, distance: 2.0 * l_alpha_radius(spec) });
    }
    let b2 = spec.beta_sq();
    let contour = ContourSpec::new(c(1.0), radius, 64.max(2 * n + 32))?;
    // Taylor coefficients L^{(h)}(1)/h! and γ_i/i!.
    let l = taylor_coeffs(|z| l_alpha(spec, z), &contour, n)?;
    let gam = taylor_gamma_coeffs(b2, n)?;
    let mut inv_fact = vec![1.0; n + 1];
    for i in 1..=n {
        inv_fact[i] = inv_fact[i - 1] / i as f64;
    }
    (0..=n)
        .map(|j| {
            let conv: C64 = (0..=j).map(|h| l[h] * gam[j - h] * inv_fact[j - h]).sum();
            Ok(recip_gamma(b2 - j as f64)? * conv)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMainTerm {
    pub value: f64,
    pub imag: f64,
    /// Size of the first omitted term.
    pub truncation_estimate: f64,
}

/// 2 H^{(1-2α)/k} (log H)^{β²-1} Σ_{j≤N} k^{j-β²} λ_j / log^j H.
pub fn complex_main_term(spec: &FunctionSpec, h: f64, n: usize) -> Result<ComplexMainTerm> {
    let b2 = spec.beta_sq();
    if !(b2.re > 0.0) {
        return Err(Error::Domain(format!("Re β² = {} must be positive", b2.re)));
    }
    if (n as f64) < b2.re.ceil() {
        return Err(Error::Domain(format!("N = {n} must be at least ⌈Re β²⌉")));
    }
    if !(h > 1.0) {
        return Err(Error::Domain(format!("H = {h} must exceed 1")));
    }
    let lambdas = lambda_coeffs(spec, n + 1)?;
    let k = spec.kf();
    let lh = h.ln();
    let prefactor = 2.0 * h.powf((1.0 - 2.0 * spec.alpha) / k) * (b2 - 1.0).expf(lh);
    let term = |j: usize| prefactor * (c(k).powc(c(j as f64) - b2)) * lambdas[j] / lh.powi(j as i32);
    let total: C64 = (0..=n).map(term).sum();
    Ok(ComplexMainTerm { value: total.re, imag: total.im, truncation_estimate: term(n + 1).norm() })
}

/// f_h(r) for r ≥ 1: Π_{p^k | r} Σ_{j ≤ v_p(r)/k} ν_h(p^j)/p^{jk}; f_h(0) = Q_h(k).
pub fn f_h(spec: &FunctionSpec, r: u64) -> Result<f64> {
    if !spec.is_real() {
        return Err(Error::Domain("f_h is implemented for real h".into()));
    }
    if r == 0 {
        return Ok(q_h(spec, C64::new(spec.kf(), 0.0))?.re);
    }
    let mut v = 1.0;
    for (p, a) in crate::primes::factorize(r) {
        let top = a / spec.k;
        if top == 0 {
            continue;
        }
        let pk = (p as f64).powi(spec.k as i32);
        let t = spec.h_prime_power(p, 1).re;
        v *= match spec.variant {
            Variant::MobiusTwisted => {
                let e = 1.0 + 2.0 * t / pk;
                if e == 0.0 {
                    return Err(Error::Divergence(format!("ν_h is undefined at p = {p}")));
                }
                1.0 + t * t / (pk * e)
            }
            Variant::CompletelyMultiplicative => (0..=top).map(|j| (t * t / pk).powi(j as i32)).sum(),
        };
    }
    Ok(v)
}

/// I(H) = (1/2πi)∫_{(γ)} H^{s+1}χ(s)ζ(1−s)Q_h(k+ks) ds/(s(s+1)), evaluated by
/// shifting the contour right past the poles at s = 0, 1:
/// I(H) = Σ_{m<H} f_h(m)(H−m) − H²Q_h(2k)/2 + H Q_h(k)/2.
pub fn line_integral_i(spec: &FunctionSpec, h: f64) -> Result<f64> {
    if !(h >= 1.0) || !h.is_finite() {
        return Err(Error::Domain(format!("H = {h} must be at least 1")));
    }
    let q1 = q_h(spec, C64::new(spec.kf(), 0.0))?.re;
    let q2 = q_h(spec, C64::new(2.0 * spec.kf(), 0.0))?.re;
    let mut acc = crate::sum::Neumaier::new();
    let top = h.ceil() as u64;
    for m in 1..top {
        acc.add(f_h(spec, m)? * (h - m as f64));
    }
    acc.add(-h * h * q2 / 2.0);
    acc.add(h * q1 / 2.0);
    Ok(acc.value())
}
