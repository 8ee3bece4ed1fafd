//! Exact variance measurements from sieved values, and the brute-force
//! oracle for the diagonal/off-diagonal correlation identity.
//!
//! On x ∈ [m, m+1) with H = h + φ (0 ≤ φ < 1) the window (x, x+H] holds
//! n = m+1..m+h for x < m+1−φ and one more term afterwards, so the
//! continuous variance is a weighted mean over integer m of two squared
//! window deviations. Windows are taken from block-local prefix sums; each
//! block returns exact partial sums merged in block order.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{h_value, Engine, Sieve, SieveConfig, Truncation};
use crate::constants::{predict, tilde_c};
use crate::error::{Error, Result};
use crate::exponents::{admissible_range, RangeMode};
use crate::primes::{factorize, gcd, primes_up_to};
use crate::spec::{FunctionSpec, Variant};
use crate::sum::{ExactSum, Neumaier};

const BLOCK: u64 = 1 << 18;
/// Largest sieved range end and window length accepted.
const MAX_RANGE: u64 = 1 << 40;
const MAX_WINDOW: u64 = 1 << 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Continuous,
    Discrete,
    TruncatedJ,
    TruncatedK,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(Self::Continuous),
            "discrete" => Ok(Self::Discrete),
            "truncated-j" => Ok(Self::TruncatedJ),
            "truncated-k" => Ok(Self::TruncatedK),
            _ => Err(Error::Domain(format!("unknown variance mode `{s}`"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Continuous => "continuous",
            Self::Discrete => "discrete",
            Self::TruncatedJ => "truncated-j",
            Self::TruncatedK => "truncated-k",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub spec: FunctionSpec,
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "H")]
    pub h: f64,
    pub measured: f64,
    pub predicted: f64,
    pub ratio: f64,
    pub mode: Mode,
    pub z: Option<f64>,
    pub samples: u64,
    pub elapsed_seconds: f64,
    pub warning: Option<String>,
}

impl VarianceReport {
    fn new(spec: &FunctionSpec, x: u64, h: f64, mode: Mode, z: Option<f64>, measured: f64, samples: u64, start: Instant) -> Self {
        Self {
            spec: spec.clone(),
            x,
            h,
            measured,
            predicted: f64::NAN,
            ratio: f64::NAN,
            mode,
            z,
            samples,
            elapsed_seconds: start.elapsed().as_secs_f64(),
            warning: None,
        }
    }

    fn with_prediction(mut self, predicted: f64) -> Self {
        self.predicted = predicted;
        self.ratio = if predicted != 0.0 { self.measured / predicted } else { f64::NAN };
        self
    }
}

/// Σ over m ∈ [m_lo, m_hi) of (1−φ)(W₀(m) − μ)² + φ(W₁(m) − μ)², with
/// W₀(m) = Σ_{n=m+1}^{m+h} f(n) and W₁(m) = W₀(m) + f(m+h+1).
fn window_sum_of_squares(sieve: &Sieve, m_lo: u64, m_hi: u64, h: u64, phi: f64, mu: f64) -> f64 {
    let extra = u64::from(phi > 0.0);
    let blocks: Vec<(u64, u64)> = (m_lo..m_hi)
        .step_by(BLOCK as usize)
        .map(|a| (a, (a + BLOCK).min(m_hi)))
        .collect();
    let partials: Vec<ExactSum> = blocks
        .par_iter()
        .map(|&(a, b)| {
            // f on [a+1, b-1+h+extra]; prefix[i] = Σ_{n=a+1}^{a+i} f(n) as (hi, lo).
            let len = (b - a - 1 + h + extra) as usize;
            let mut f = vec![0.0; len];
            sieve.fill(a + 1, &mut f);
            let mut hi = Vec::with_capacity(len + 1);
            let mut lo = Vec::with_capacity(len + 1);
            hi.push(0.0);
            lo.push(0.0);
            let (mut s, mut c) = (0.0f64, 0.0f64);
            for &v in &f {
                let t = s + v;
                c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
                s = t;
                hi.push(s);
                lo.push(c);
            }
            let window = |i: usize, j: usize| (hi[j] - hi[i]) + (lo[j] - lo[i]);
            let mut acc = ExactSum::new();
            for m in a..b {
                let i = (m - a) as usize;
                let w0 = window(i, i + h as usize) - mu;
                if extra == 1 {
                    let w1 = window(i, i + h as usize + 1) - mu;
                    acc.add((1.0 - phi) * w0 * w0);
                    acc.add(phi * w1 * w1);
                } else {
                    acc.add(w0 * w0);
                }
            }
            acc
        })
        .collect();
    let mut total = ExactSum::new();
    for p in &partials {
        total.merge(p);
    }
    total.value()
}

fn split_h(h: f64) -> Result<(u64, f64)> {
    if !(h >= 1.0) || !h.is_finite() {
        return Err(Error::Domain(format!("H = {h} must be a finite real ≥ 1")));
    }
    if h > MAX_WINDOW as f64 {
        return Err(Error::Capacity { requested: h as u64, limit: MAX_WINDOW });
    }
    let hi = h.floor();
    Ok((hi as u64, h - hi))
}

fn sieve_for(spec: &FunctionSpec, hi: u64, trunc: Truncation) -> Result<Sieve> {
    if hi > MAX_RANGE {
        return Err(Error::Capacity { requested: hi, limit: MAX_RANGE });
    }
    Sieve::new(spec, hi, trunc, Engine::Auto, &SieveConfig::default())
}

fn require_x(x: u64) -> Result<()> {
    if x < 1 {
        return Err(Error::Domain("X must be positive".into()));
    }
    Ok(())
}

/// (1/X) Σ_{n≤X} (Σ_{j≤H} f(n+j) − c̃H)², no prediction attached.
pub fn discrete_variance_raw(spec: &FunctionSpec, x: u64, h: u64) -> Result<VarianceReport> {
    require_x(x)?;
    if h < 1 {
        return Err(Error::Domain("H must be at least 1".into()));
    }
    if h > MAX_WINDOW {
        return Err(Error::Capacity { requested: h, limit: MAX_WINDOW });
    }
    let start = Instant::now();
    let mu = tilde_c(spec)? * h as f64;
    let sieve = sieve_for(spec, x.saturating_add(h), Truncation::Full)?;
    let s = window_sum_of_squares(&sieve, 1, x + 1, h, 0.0, mu);
    Ok(VarianceReport::new(spec, x, h as f64, Mode::Discrete, None, s / x as f64, x, start))
}

/// (1/X) ∫_X^{2X} (Σ_{x<n≤x+H} f(n) − c̃H)² dx, no prediction attached.
pub fn continuous_variance_raw(spec: &FunctionSpec, x: u64, h: f64) -> Result<VarianceReport> {
    let mean = tilde_c(spec)?;
    continuous_with(spec, x, h, Truncation::Full, mean, Mode::Continuous, None)
}

fn continuous_with(
    spec: &FunctionSpec,
    x: u64,
    h: f64,
    trunc: Truncation,
    mean: f64,
    mode: Mode,
    z: Option<f64>,
) -> Result<VarianceReport> {
    require_x(x)?;
    let (hi, phi) = split_h(h)?;
    let start = Instant::now();
    let sieve = sieve_for(spec, x.saturating_mul(2).saturating_add(hi + 1), trunc)?;
    let s = window_sum_of_squares(&sieve, x, 2 * x, hi, phi, mean * h);
    Ok(VarianceReport::new(spec, x, h, mode, z, s / x as f64, x, start))
}

/// Σ_{d^k ≤ z} h(d)/d^k.
pub fn truncated_mean(spec: &FunctionSpec, z: f64) -> f64 {
    let d_max = crate::arith::kth_floor(z, spec.k);
    let mut acc = Neumaier::new();
    for d in 1..=d_max {
        let hd = h_value(spec, d).re;
        if hd != 0.0 {
            acc.add(hd / (d as f64).powi(spec.k as i32));
        }
    }
    acc.value()
}

/// (J, K): the variances of the parts of f with d^k ≤ z and d^k > z, each
/// centred on its own mean.
pub fn truncated_variances(spec: &FunctionSpec, x: u64, h: f64, z: f64) -> Result<(VarianceReport, VarianceReport)> {
    if !(z >= 1.0 && z <= 2.0 * x as f64) {
        return Err(Error::Domain(format!("z = {z} must lie in [1, 2X]")));
    }
    let mean_j = truncated_mean(spec, z);
    let mean_k = tilde_c(spec)? - mean_j;
    let j = continuous_with(spec, x, h, Truncation::Below(z), mean_j, Mode::TruncatedJ, Some(z))?;
    let k = continuous_with(spec, x, h, Truncation::Above(z), mean_k, Mode::TruncatedK, Some(z))?;
    Ok((j, k))
}

/// |√J − √K| ≤ √Var ≤ √J + √K; returns the size of any violation (0 when consistent).
pub fn triangle_violation(var: f64, j: f64, k: f64) -> f64 {
    let (s, a, b) = (var.sqrt(), j.sqrt(), k.sqrt());
    (s - (a + b)).max((a - b).abs() - s).max(0.0)
}

fn range_warning(spec: &FunctionSpec, x: u64, h: f64, mode: RangeMode) -> Option<String> {
    match admissible_range(spec, x as f64, mode) {
        Ok((lo, hi)) if h < lo || h > hi => Some(format!(
            "H = {h} lies outside the admissible range [{lo}, {hi:.6e}] for X = {x}"
        )),
        Ok(_) => None,
        Err(e) => Some(format!("no admissible range: {e}")),
    }
}

pub fn discrete_variance(spec: &FunctionSpec, x: u64, h: u64) -> Result<VarianceReport> {
    compare(spec, x, h as f64, Mode::Discrete, None)
}

pub fn continuous_variance(spec: &FunctionSpec, x: u64, h: f64) -> Result<VarianceReport> {
    compare(spec, x, h, Mode::Continuous, None)
}

/// Measurement plus the regime-appropriate prediction. `z` is required for
/// the truncated modes.
pub fn compare(spec: &FunctionSpec, x: u64, h: f64, mode: Mode, z: Option<f64>) -> Result<VarianceReport> {
    let range_mode = if mode == Mode::Discrete { RangeMode::Discrete } else { RangeMode::Unconditional };
    let warning = range_warning(spec, x, h, range_mode);
    let report = match mode {
        Mode::Discrete => {
            if h.fract() != 0.0 {
                return Err(Error::Domain(format!("discrete variance needs integer H, got {h}")));
            }
            discrete_variance_raw(spec, x, h as u64)?
        }
        Mode::Continuous => continuous_variance_raw(spec, x, h)?,
        Mode::TruncatedJ | Mode::TruncatedK => {
            let z = z.ok_or_else(|| Error::Domain("truncated modes need z".into()))?;
            let (j, k) = truncated_variances(spec, x, h, z)?;
            if mode == Mode::TruncatedJ {
                j
            } else {
                k
            }
        }
    };
    let predicted = if mode == Mode::TruncatedK { 0.0 } else { predict(spec, h)?.main_term };
    let mut report = report.with_prediction(predicted);
    report.warning = warning;
    Ok(report)
}

/// Both sides of the correlation identity under a common truncation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RIdentity {
    pub lhs: f64,
    pub rhs: f64,
    /// Bound on |lhs − rhs| from the d-cutoff and rounding.
    pub tail_bound: f64,
}

/// Local data at one prime for the truncated identity.
struct LocalR {
    p: u64,
    pk: f64,
    /// h(p^a)/p^{ka} terms are generated from these.
    h: Vec<f64>,
    /// Σ_{a,b} |h(p^a) h(p^b)| / p^{k max(a,b)}.
    abs_total: f64,
}

fn local_r(spec: &FunctionSpec, p: u64) -> LocalR {
    let pk = (p as f64).powi(spec.k as i32);
    let mut h = vec![1.0];
    if spec.variant == Variant::MobiusTwisted {
        h.push(spec.h_prime_power(p, 1).re);
    } else {
        let t = spec.h_prime_power(p, 1).re;
        // Terms decay like (|t|/p^k)^a; stop far below rounding.
        let mut a = 1;
        loop {
            let v = spec.h_prime_power(p, a).re;
            h.push(v);
            if (v.abs() / pk.powi(a as i32)) < 1e-20 || a > 400 || t == 0.0 {
                break;
            }
            a += 1;
        }
    }
    let mut abs_total = Neumaier::new();
    for (a, ha) in h.iter().enumerate() {
        for (b, hb) in h.iter().enumerate() {
            abs_total.add((ha * hb).abs() / pk.powi(a.max(b) as i32));
        }
    }
    LocalR { p, pk, h, abs_total: abs_total.value() }
}

/// e_p·f_p(r) at one prime: Σ over a, b with p^{k min(a,b)} | r of
/// h(p^a)h(p^b)/p^{k max(a,b)}, in closed form.
fn e_f_local(spec: &FunctionSpec, loc: &LocalR, r: u64) -> f64 {
    let t = loc.h.get(1).copied().unwrap_or(0.0);
    let v = if r == 0 {
        u32::MAX
    } else {
        let mut v = 0;
        let mut rr = r;
        while rr % loc.p == 0 {
            rr /= loc.p;
            v += 1;
        }
        v / spec.k
    };
    match spec.variant {
        Variant::MobiusTwisted => {
            let e = 1.0 + 2.0 * t / loc.pk;
            if v >= 1 {
                e + t * t / loc.pk
            } else {
                e
            }
        }
        Variant::CompletelyMultiplicative => {
            let u = t / loc.pk;
            let e = (1.0 + u) / (1.0 - u);
            let q = t * t / loc.pk;
            let f = if v == u32::MAX { 1.0 / (1.0 - q) } else { (0..=v).map(|j| q.powi(j as i32)).sum() };
            e * f
        }
    }
}

/// lhs = Σ_{j₁,j₂ ≤ H} A(j₁, j₂) with A enumerated over d₁, d₂ ≤ d_cutoff
/// supported on primes ≤ prime_cutoff; rhs = e f(0) H + 2 e Σ_{n<H} Σ_{l≤n} f(l)
/// with e and f the exact products over the same primes.
pub fn brute_force_r(spec: &FunctionSpec, h: u64, prime_cutoff: u64, d_cutoff: u64) -> Result<RIdentity> {
    if !spec.is_real() {
        return Err(Error::Domain("the R(H) oracle needs real h".into()));
    }
    if h == 0 || h > 200 {
        return Err(Error::Domain(format!("H = {h} must lie in [1, 200]")));
    }
    let primes: Vec<u64> = primes_up_to(prime_cutoff).to_vec();
    let locals: Vec<LocalR> = primes.iter().map(|&p| local_r(spec, p)).collect();
    let k = spec.k;

    // d ≤ D, smooth over the prime set, with h(d) ≠ 0.
    let ds: Vec<(u64, f64)> = (1..=d_cutoff)
        .filter_map(|d| {
            let fac = factorize(d);
            if fac.iter().any(|&(p, _)| p > prime_cutoff) {
                return None;
            }
            let hd = h_value(spec, d).re;
            (hd != 0.0).then_some((d, hd))
        })
        .collect();
    // bucket[g^k] collects pairs with gcd g; A(r) = Σ_{s | r} bucket[s], A(0) = Σ all.
    let max_shift = h.saturating_sub(1);
    let mut bucket = vec![Neumaier::new(); max_shift as usize + 1];
    let mut all = Neumaier::new();
    let mut enumerated_abs = Neumaier::new();
    for &(d1, h1) in &ds {
        for &(d2, h2) in &ds {
            let g = gcd(d1, d2);
            let l = (d1 / g) as f64 * d2 as f64;
            let term = h1 * h2 / l.powi(k as i32);
            all.add(term);
            enumerated_abs.add(term.abs());
            if let Some(gk) = g.checked_pow(k) {
                if gk <= max_shift {
                    bucket[gk as usize].add(term);
                }
            }
        }
    }
    let a_of = |r: u64| -> f64 {
        if r == 0 {
            return all.value();
        }
        (1..=r).filter(|s| r % s == 0).map(|s| bucket[s as usize].value()).sum()
    };
    let a_table: Vec<f64> = (0..h).map(a_of).collect();
    let mut lhs = Neumaier::new();
    for j1 in 1..=h {
        for j2 in 1..=h {
            lhs.add(a_table[j1.abs_diff(j2) as usize]);
        }
    }

    let g_of = |r: u64| -> f64 { locals.iter().map(|loc| e_f_local(spec, loc, r)).product() };
    let mut inner = Neumaier::new();
    let mut outer = Neumaier::new();
    for n in 1..h {
        inner.add(g_of(n));
        outer.add(inner.value());
    }
    let rhs = g_of(0) * h as f64 + 2.0 * outer.value();

    let full_abs: f64 = locals.iter().map(|l| l.abs_total).product();
    let hf = h as f64;
    let tail = hf * hf * (full_abs - enumerated_abs.value()).max(0.0);
    let rounding = 1e-12 * hf * hf * full_abs;
    Ok(RIdentity { lhs: lhs.value(), rhs, tail_bound: tail + rounding })
}
