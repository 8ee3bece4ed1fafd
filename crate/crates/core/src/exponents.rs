//! Admissible short-interval exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spec::FunctionSpec;

pub const DEFAULT_MARGIN: f64 = 0.01;

fn check_alpha_low(alpha: f64) -> Result<()> {
    if (0.0..0.5).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Domain(format!("α = {alpha} must lie in [0, 1/2)")))
    }
}

fn check_alpha_high(alpha: f64) -> Result<()> {
    if alpha > 0.5 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("α = {alpha} must lie in (1/2, 2)")))
    }
}

/// ν(k, α) for k ≥ 3, α ∈ [0,1/2) ∪ (1/2,1).
pub fn nu(k: u32, alpha: f64) -> Result<f64> {
    if k < 3 {
        return Err(Error::Domain(format!("ν needs k ≥ 3, got k = {k}")));
    }
    let kf = k as f64;
    let v = if (0.0..0.5).contains(&alpha) {
        let b = 2.0 * kf - 2.5 + 5.0 * alpha;
        let c = kf + 2.0 * alpha - 1.0;
        (-b + (b * b + 4.0 * kf * (kf - 2.0) * c * b).sqrt()) / (2.0 * (kf - 2.0) * c)
    } else if alpha > 0.5 && alpha < 1.0 {
        (-2.0 * alpha + 2.0 * (alpha * alpha + alpha * kf * (kf - 2.0)).sqrt()) / (kf - 2.0)
    } else {
        return Err(Error::Domain(format!("ν needs α ∈ [0,1/2) ∪ (1/2,1), got α = {alpha}")));
    };
    debug_assert!(v > 1.0 && v <= 2.0, "ν({k}, {alpha}) = {v}");
    Ok(v)
}

/// e(k, α) for α ∈ [0, 1/2).
pub fn e_exp(k: u32, alpha: f64) -> Result<f64> {
    check_alpha_low(alpha)?;
    match k {
        0 | 1 => Err(Error::Domain(format!("e(k, α) needs k ≥ 2, got k = {k}"))),
        2 => Ok(2.0 * (3.0 + 8.0 * alpha) / (11.0 * (1.0 + 2.0 * alpha))),
        _ => Ok(f3(k, alpha, nu(k, alpha)?)),
    }
}

/// g(k), the exponent under Lindelöf.
pub fn g_exp(k: u32) -> Result<f64> {
    match k {
        0 | 1 => Err(Error::Domain(format!("g(k) needs k ≥ 2, got k = {k}"))),
        2 => Ok(2.0 / 3.0),
        _ => {
            let kf = k as f64;
            let r = (2.0 * kf * kf - 4.0 * kf + 1.0).sqrt();
            Ok((r - 1.0) / (2.0 * r - kf))
        }
    }
}

/// ê(k, α) for α ∈ (1/2, 2).
pub fn e_hat(k: u32, alpha: f64) -> Result<f64> {
    check_alpha_high(alpha)?;
    if k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    if alpha >= 1.0 {
        return Ok(if k == 2 { (2.0 + alpha) / 4.0 } else { 1.0 });
    }
    Ok(match k {
        1 => 29.0 / (113.0 - 84.0 * alpha),
        2 => ((2.0 + alpha) / 4.0).min(29.0 / (71.0 - 42.0 * alpha)),
        _ => {
            let v = nu(k, alpha)?;
            v * (k as f64 + alpha - 1.25) / (2.0 * k as f64 * (v - alpha))
        }
    })
}

/// ĝ(k, α) for α ∈ (1/2, 2).
pub fn g_hat(k: u32, alpha: f64) -> Result<f64> {
    check_alpha_high(alpha)?;
    if k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    if alpha >= 1.0 {
        return Ok(if k == 2 { (2.0 + alpha) / 4.0 } else { 1.0 });
    }
    Ok(match k {
        1 => 1.0 / (3.0 - 2.0 * alpha),
        2 => (2.0 + alpha) / 4.0,
        _ => {
            let v = nu(k, alpha)?;
            v / (2.0 * (v - alpha))
        }
    })
}

/// θ(k, α), the discrete-variance exponent, capped at 1/2.
pub fn theta(k: u32, alpha: f64) -> Result<f64> {
    let kf = k as f64;
    let t = if (0.0..0.5).contains(&alpha) {
        if k < 2 {
            return Err(Error::Domain(format!("θ(k, α) for α < 1/2 needs k ≥ 2, got k = {k}")));
        }
        kf * (kf + alpha - 1.0) / ((kf - alpha + 1.0) * (2.0 * kf + 2.0 * alpha - 1.0))
    } else {
        check_alpha_high(alpha)?;
        if k == 0 {
            return Err(Error::Domain("k must be positive".into()));
        }
        (kf + alpha - 1.0) / (2.0 * (kf - alpha + 1.0))
    };
    // The printed second branch exceeds 1/2 once α > 1.
    Ok(t.min(0.5))
}

/// f₂(ν) from the balancing argument behind e(k, α).
pub fn f2(k: u32, alpha: f64, nu: f64) -> f64 {
    let kf = k as f64;
    let a = kf + 2.0 * alpha - 1.25;
    let b = kf + 2.0 * alpha - 1.0;
    nu * a / (2.0 * (nu - alpha) * b - (1.0 - 2.0 * alpha) * a)
}

/// f₃(ν); equal to e(k, α) at the balancing point.
pub fn f3(k: u32, alpha: f64, nu: f64) -> f64 {
    let kf = k as f64;
    2.0 * (kf - nu) * (kf + 2.0 * alpha - 1.25) / ((4.0 * kf - (kf + 2.0) * nu) * (kf + 2.0 * alpha - 1.0))
}

/// |f₂(ν) − f₃(ν)| at ν = ν(k, α), α ∈ [0, 1/2).
pub fn balance_residual(k: u32, alpha: f64) -> Result<f64> {
    check_alpha_low(alpha)?;
    let v = nu(k, alpha)?;
    Ok((f2(k, alpha, v) - f3(k, alpha, v)).abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentProfile {
    pub k: u32,
    pub alpha: f64,
    pub nu: Option<f64>,
    pub e: Option<f64>,
    pub g: Option<f64>,
    pub e_hat: Option<f64>,
    pub g_hat: Option<f64>,
    pub theta: f64,
}

pub fn profile(k: u32, alpha: f64) -> Result<ExponentProfile> {
    let theta = theta(k, alpha)?;
    let low = alpha < 0.5;
    Ok(ExponentProfile {
        k,
        alpha,
        nu: nu(k, alpha).ok(),
        e: if low { Some(e_exp(k, alpha)?) } else { None },
        g: if low { Some(g_exp(k)?) } else { None },
        e_hat: if low { None } else { Some(e_hat(k, alpha)?) },
        g_hat: if low { None } else { Some(g_hat(k, alpha)?) },
        theta,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RangeMode {
    Unconditional,
    Lindelof,
    Discrete,
}

impl std::str::FromStr for RangeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unconditional" => Ok(Self::Unconditional),
            "lindelof" => Ok(Self::Lindelof),
            "discrete" => Ok(Self::Discrete),
            _ => Err(Error::Domain(format!("unknown range mode `{s}`"))),
        }
    }
}

/// The exponent bounding H in the given mode.
pub fn range_exponent(k: u32, alpha: f64, mode: RangeMode) -> Result<f64> {
    match (mode, alpha < 0.5) {
        (RangeMode::Discrete, _) => theta(k, alpha),
        (RangeMode::Unconditional, true) => e_exp(k, alpha),
        (RangeMode::Lindelof, true) => g_exp(k),
        (RangeMode::Unconditional, false) => e_hat(k, alpha),
        (RangeMode::Lindelof, false) => g_hat(k, alpha),
    }
}

/// (2, X^{E − margin}).
pub fn admissible_range(spec: &FunctionSpec, x: f64, mode: RangeMode) -> Result<(f64, f64)> {
    admissible_range_with_margin(spec, x, mode, DEFAULT_MARGIN)
}

pub fn admissible_range_with_margin(spec: &FunctionSpec, x: f64, mode: RangeMode, margin: f64) -> Result<(f64, f64)> {
    if !(x >= 4.0) {
        return Err(Error::Domain(format!("X = {x} must be at least 4")));
    }
    let e = range_exponent(spec.k, spec.alpha, mode)?;
    Ok((2.0, x.powf(e - margin)))
}
