//! Riemann zeta, Hurwitz zeta, Gamma, the functional-equation factor chi,
//! Cauchy-contour Taylor extraction and the sinc-moment integrals.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::NeumaierC;

type C64 = Complex64;

const ONE: C64 = C64::new(1.0, 0.0);

/// B_2, B_4, ..., B_24.
const BERNOULLI: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Number of Bernoulli correction terms in Euler-Maclaurin.
const EM_TERMS: usize = 10;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn is_nonpositive_integer(s: C64) -> bool {
    s.im == 0.0 && s.re <= 0.0 && s.re.fract() == 0.0
}

/// Hurwitz zeta ζ(s, a) for a > 0 by Euler-Maclaurin summation.
///
/// The direct-sum length grows with |s| so that the Bernoulli tail stays
/// geometrically small across the supported strip.
pub fn hurwitz_zeta(s: C64, a: f64) -> Result<C64> {
    if s == ONE {
        return Err(Error::Pole { func: "zeta", at: s });
    }
    if !(a > 0.0) {
        return Err(Error::Domain(format!("Hurwitz parameter a = {a} must be positive")));
    }
    let n = 10 + s.norm().ceil() as usize;
    let mut acc = NeumaierC::new();
    for j in 0..n {
        acc.add((-s * (j as f64 + a).ln()).exp());
    }
    let x = n as f64 + a;
    let lx = x.ln();
    let xs = (-s * lx).exp();
    acc.add(xs * x / (s - 1.0));
    acc.add(xs * 0.5);
    let mut rising = s;
    let mut xpow = xs / x;
    for (j, b) in BERNOULLI.iter().take(EM_TERMS).enumerate() {
        let two_j = 2 * (j + 1);
        acc.add(rising * xpow * (b / factorial(two_j)));
        rising *= (s + (two_j - 1) as f64) * (s + two_j as f64);
        xpow /= x * x;
    }
    Ok(acc.value())
}

/// Riemann zeta function. Left of the critical strip the functional equation
/// keeps relative accuracy near the trivial zeros.
pub fn zeta(s: C64) -> Result<C64> {
    if s.re < 0.0 {
        return Ok(chi(s)? * hurwitz_zeta(ONE - s, 1.0)?);
    }
    hurwitz_zeta(s, 1.0)
}

pub fn zeta_real(s: f64) -> Result<f64> {
    Ok(zeta(C64::new(s, 0.0))?.re)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function: Lanczos approximation on Re s >= 1/2, reflection below.
pub fn gamma(s: C64) -> Result<C64> {
    if is_nonpositive_integer(s) {
        return Err(Error::Pole { func: "gamma", at: s });
    }
    if s.re < 0.5 {
        let den = (s * PI).sin() * gamma(ONE - s)?;
        return Ok(C64::new(PI, 0.0) / den);
    }
    if s.im == 0.0 && s.re.fract() == 0.0 && s.re <= 171.0 {
        return Ok(C64::new(factorial(s.re as usize - 1), 0.0));
    }
    let z = s - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * ((z + 0.5) * t.ln() - t).exp() * x)
}

/// 1/Γ(s), exactly zero at the poles of Γ.
pub fn recip_gamma(s: C64) -> Result<C64> {
    if is_nonpositive_integer(s) {
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(ONE / gamma(s)?)
}

/// χ(s) = 2^s π^{s-1} Γ(1-s) sin(πs/2), so that ζ(s) = χ(s) ζ(1-s).
///
/// For Re s > 1/2 the equivalent form (2π)^s / (2 Γ(s) cos(πs/2)) is used,
/// which removes the cancelling Γ-pole / sine-zero pairs at even integers.
pub fn chi(s: C64) -> Result<C64> {
    if s.im == 0.0 && s.re >= 1.0 && s.re.fract() == 0.0 && (s.re as u64) % 2 == 1 {
        return Err(Error::Pole { func: "chi", at: s });
    }
    if s.re <= 0.5 {
        let two_s = (s * 2f64.ln()).exp();
        let pi_s = ((s - 1.0) * PI.ln()).exp();
        Ok(two_s * pi_s * gamma(ONE - s)? * (s * (PI / 2.0)).sin())
    } else {
        let num = (s * (2.0 * PI).ln()).exp();
        Ok(num / (2.0 * gamma(s)? * (s * (PI / 2.0)).cos()))
    }
}

/// Distance from s to the nearest pole of χ (the odd positive integers).
pub fn chi_singularity_distance(s: C64) -> f64 {
    let mut best = f64::INFINITY;
    let center = ((s.re - 1.0) / 2.0).round().max(0.0) as i64;
    for m in (center - 1).max(0)..=center + 1 {
        let pole = C64::new((2 * m + 1) as f64, 0.0);
        best = best.min((s - pole).norm());
    }
    best
}

/// Circle used for Cauchy-integral coefficient extraction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub center: C64,
    pub radius: f64,
    pub nodes: usize,
}

impl ContourSpec {
    pub const DEFAULT_NODES: usize = 64;

    pub fn new(center: C64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("contour radius {radius} must be positive")));
        }
        if nodes < 16 {
            return Err(Error::Domain(format!("contour needs at least 16 nodes, got {nodes}")));
        }
        Ok(Self { center, radius, nodes })
    }

    /// Circle of half the distance to the nearest singularity, capped at `max_radius`.
    pub fn around(center: C64, singularity_distance: f64, max_radius: f64) -> Result<Self> {
        if !(singularity_distance > 0.0) {
            return Err(Error::Contour { center, radius: 0.0, distance: singularity_distance });
        }
        Self::new(center, (0.5 * singularity_distance).min(max_radius), Self::DEFAULT_NODES)
    }

    pub fn check_clear_of(&self, distance: f64) -> Result<()> {
        if self.radius >= distance {
            return Err(Error::Contour { center: self.center, radius: self.radius, distance });
        }
        Ok(())
    }

    /// Points on the circle, starting on the positive real direction.
    pub fn points(&self) -> Vec<C64> {
        (0..self.nodes)
            .map(|m| self.center + C64::from_polar(self.radius, 2.0 * PI * m as f64 / self.nodes as f64))
            .collect()
    }
}

/// Taylor coefficients c_0..=c_m of an analytic function from its values on the
/// contour (trapezoidal rule, exponentially convergent).
pub fn taylor_from_samples(contour: &ContourSpec, samples: &[C64], m: usize) -> Vec<C64> {
    let n = contour.nodes;
    debug_assert_eq!(samples.len(), n);
    (0..=m)
        .map(|j| {
            let mut acc = NeumaierC::new();
            for (idx, v) in samples.iter().enumerate() {
                let angle = -2.0 * PI * ((j * idx) % n) as f64 / n as f64;
                acc.add(*v * C64::from_polar(1.0, angle));
            }
            acc.value() / (n as f64 * contour.radius.powi(j as i32))
        })
        .collect()
}

/// Taylor coefficients c_0..=c_m of `f` about the contour center.
pub fn taylor_coeffs<F>(f: F, contour: &ContourSpec, m: usize) -> Result<Vec<C64>>
where
    F: Fn(C64) -> Result<C64>,
{
    let samples = contour.points().into_iter().map(&f).collect::<Result<Vec<_>>>()?;
    Ok(taylor_from_samples(contour, &samples, m))
}

/// [χ(s), χ'(s), ..., χ^{(m)}(s)] on the default contour.
pub fn chi_derivatives(s: C64, m: usize) -> Result<Vec<C64>> {
    let contour = ContourSpec::around(s, chi_singularity_distance(s), 0.5)?;
    chi_derivatives_on(&contour, m)
}

/// [χ(s), ..., χ^{(m)}(s)] with an explicit contour centred at s.
pub fn chi_derivatives_on(contour: &ContourSpec, m: usize) -> Result<Vec<C64>> {
    contour.check_clear_of(chi_singularity_distance(contour.center))?;
    let coeffs = taylor_coeffs(chi, contour, m)?;
    let mut out: Vec<C64> = coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| c * factorial(j))
        .collect();
    out[0] = chi(contour.center)?;
    Ok(out)
}

/// γ_0(β²), ..., γ_N(β²) defined by (1/z)((z-1)ζ(z))^{β²} = Σ γ_j (z-1)^j / j!.
pub fn taylor_gamma_coeffs(beta_sq: C64, n: usize) -> Result<Vec<C64>> {
    taylor_gamma_coeffs_with_radius(beta_sq, n, 0.5)
}

pub fn taylor_gamma_coeffs_with_radius(beta_sq: C64, n: usize, radius: f64) -> Result<Vec<C64>> {
    let nodes = (2 * n + 48).max(64);
    let contour = ContourSpec::new(ONE, radius, nodes)?;
    let f = |z: C64| -> Result<C64> {
        let w = (z - 1.0) * zeta(z)?;
        Ok((beta_sq * w.ln()).exp() / z)
    };
    let coeffs = taylor_coeffs(f, &contour, n)?;
    Ok(coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| if j == 0 { ONE } else { c * factorial(j) })
        .collect())
}

/// ∫_0^∞ x^{(k+2α-1)/k} S(x)² (log x)^j dx with S(x) = sin(πx)/(πx), via
/// ((-1)^{j+1}/4π²) χ^{(j)}(1 + (1-2α)/k).
pub fn sinc_moment(k: u32, alpha: f64, j: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    let strip = (2.0 * alpha - 1.0) / k as f64;
    if !(strip > -2.0 && strip < 0.0) {
        return Err(Error::Domain(format!(
            "(2α-1)/k = {strip} lies outside (-2, 0) for k = {k}, α = {alpha}"
        )));
    }
    let s = C64::new(1.0 + (1.0 - 2.0 * alpha) / k as f64, 0.0);
    let derivative = if j == 0 { chi(s)? } else { chi_derivatives(s, j)?[j] };
    let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
    Ok(sign * derivative.re / (4.0 * PI * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zeta_classical_values() {
        assert_relative_eq!(zeta_real(2.0).unwrap(), PI * PI / 6.0, max_relative = 1e-14);
        assert_relative_eq!(zeta_real(0.0).unwrap(), -0.5, max_relative = 1e-14);
        assert_relative_eq!(zeta_real(-1.0).unwrap(), -1.0 / 12.0, max_relative = 1e-13);
        assert!(zeta(ONE).is_err());
    }

    #[test]
    fn gamma_values() {
        assert_relative_eq!(gamma(C64::new(0.5, 0.0)).unwrap().re, PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(C64::new(-0.5, 0.0)).unwrap().re, -2.0 * PI.sqrt(), max_relative = 1e-14);
        assert!(gamma(C64::new(-3.0, 0.0)).is_err());
    }

    #[test]
    fn chi_anchor_values() {
        assert_relative_eq!(chi(C64::new(0.5, 0.0)).unwrap().re, 1.0, max_relative = 1e-14);
        assert_relative_eq!(chi(C64::new(1.5, 0.0)).unwrap().re, -4.0 * PI, max_relative = 1e-14);
        assert_eq!(chi(C64::new(0.0, 0.0)).unwrap().norm(), 0.0);
        assert!(chi(ONE).is_err());
    }
}
