//! The H-dependent constant c_{h,k}(H) of the bounded regime and the
//! Bernoulli-Fourier identity.
//!
//! With F(x) = {x} - {x}², the series is Σ_d w(d) F(H/d^k). For d^k > H the
//! argument is below 1 and F(x) = x - x², so that part is summed in closed
//! form from two Euler products:
//!
//!   Σ_{d>m} w(d) F(H/d^k) = H (E₁ - Σ_{d≤m} w(d)/d^k) - H² (E₂ - Σ_{d≤m} w(d)/d^{2k}).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::h_value;
use crate::constants::e_h_factor;
use crate::error::{Error, Result};
use crate::euler::{euler_product, Atom, LocalFactor};
use crate::fmt::sig12;
use crate::primes::{factorize, gcd, iroot, primes_up_to, radical};
use crate::spec::{FunctionSpec, Variant};
use crate::sum::Neumaier;

pub const DEFAULT_TOL: f64 = 1e-6;
const SNAP: f64 = 1e-12;
const PRODUCT_TOL: f64 = 1e-13;
const MAX_PRIME_FACTORS_Q: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FracConstant {
    pub value: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub terms_used: u64,
    pub tail_bound: f64,
}

/// {x} - {x}², snapping arguments within 1e-12 of an integer to 0.
pub fn frac_weight(x: f64) -> f64 {
    let mut f = x - x.floor();
    if f < SNAP || f > 1.0 - SNAP {
        f = 0.0;
    }
    let v = f - f * f;
    debug_assert!((0.0..=0.25).contains(&v));
    v
}

/// {n/m} - {n/m}² for integers, exactly rounded once.
fn frac_weight_int(n: u64, m: u64) -> f64 {
    let r = (n % m) as f64;
    let m = m as f64;
    r * (m - r) / (m * m)
}

/// c_{h,k}(H) for one spec and coprimality modulus, for all H ≤ `h_max`.
pub struct FracSeries {
    k: u32,
    /// (t, Π_{p|q, p∤t}(1 - 2/p)) over squarefree t | q.
    shifts: Vec<(u64, f64)>,
    /// w(d) for d ≤ d_max (index 0 unused).
    w: Vec<f64>,
    /// Σ_{d≤m} w(d)/d^k and Σ_{d≤m} w(d)/d^{2k}.
    p1: Vec<f64>,
    p2: Vec<f64>,
    e1: f64,
    e2: f64,
    e_err: (f64, f64),
    w_max: f64,
    h_max: f64,
}

fn require_bounded(spec: &FunctionSpec) -> Result<()> {
    if !(spec.alpha > 0.5) {
        return Err(Error::Regime(format!(
            "c_{{h,k}}(H) needs α in (1/2, 2); got α = {}",
            spec.alpha
        )));
    }
    if !spec.is_real() {
        return Err(Error::Domain("c_{h,k}(H) is implemented for real h".into()));
    }
    Ok(())
}

/// Σ_d w(d)/d^{jk} as an Euler product over p ∤ q.
fn moment_factor(spec: &FunctionSpec, j: u32, q: u64) -> LocalFactor {
    let a = spec.kf() + spec.alpha;
    // h(p)²/p^{jk} = g² p^{-(2α + jk)}.
    let w = num_complex::Complex64::new(2.0 * spec.alpha + j as f64 * spec.kf(), 0.0);
    let atoms = match spec.variant {
        Variant::MobiusTwisted => vec![Atom::new(1.0, |g, x, y| -2.0 * g * x + g * g * y)],
        Variant::CompletelyMultiplicative => vec![
            Atom::new(1.0, |g, x, _| g * x),
            Atom::new(-1.0, |g, x, _| -g * x),
            Atom::new(-1.0, |g, _, y| -g * g * y),
        ],
    };
    LocalFactor::new(a, Some(w), atoms).coprime_to(q)
}

impl FracSeries {
    pub fn new(spec: &FunctionSpec, q: u64, h_max: f64) -> Result<Self> {
        require_bounded(spec)?;
        if q == 0 {
            return Err(Error::Domain("q must be a positive integer".into()));
        }
        if !(h_max >= 0.0) || !h_max.is_finite() {
            return Err(Error::Domain(format!("H = {h_max} must be finite and non-negative")));
        }
        let q = radical(q);
        let qp: Vec<u64> = factorize(q).into_iter().map(|(p, _)| p).collect();
        if qp.len() > MAX_PRIME_FACTORS_Q {
            return Err(Error::Overflow(format!(
                "q has {} prime factors; at most {MAX_PRIME_FACTORS_Q} are supported",
                qp.len()
            )));
        }
        let shifts = (0u32..1 << qp.len())
            .map(|mask| {
                let mut t = 1u64;
                let mut ct = 1.0;
                for (i, &p) in qp.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        t *= p;
                    } else {
                        ct *= 1.0 - 2.0 / p as f64;
                    }
                }
                (t, ct)
            })
            .collect();

        let k = spec.k;
        let kf = spec.kf();
        // Local factors 1 + 2h(p)/p^k (Möbius-twisted) may vanish at small primes.
        let local = |p: u64| 1.0 + 2.0 * spec.h_prime_power(p, 1).re / (p as f64).powf(kf);
        let gmax = spec.generic_g().iter().fold(0.0f64, |m, g| m.max(g.norm()));
        let emax = spec.exceptional.values().fold(gmax, |m, g| m.max(g.norm()));
        let scan = ((2.0 * emax).powf(1.0 / (kf + spec.alpha)).ceil() as u64 + 2).max(spec.special_prime_bound());
        let zero_primes: Vec<u64> = match spec.variant {
            Variant::MobiusTwisted => primes_up_to(scan)
                .iter()
                .copied()
                .filter(|&p| q % p != 0 && local(p) == 0.0)
                .collect(),
            Variant::CompletelyMultiplicative => Vec::new(),
        };
        let zprod: u64 = zero_primes.iter().product();
        let e_q = euler_product(spec, &e_h_factor(spec).coprime_to(q * zprod), PRODUCT_TOL)?;

        let d_max = iroot(h_max.floor() as u64, k) as usize;
        let mut w = vec![0.0; d_max + 1];
        for (d, slot) in w.iter_mut().enumerate().skip(1) {
            let du = d as u64;
            if gcd(du, q) != 1 || zero_primes.iter().any(|&p| du % p != 0) {
                continue;
            }
            let h = h_value(spec, du).re;
            if h == 0.0 {
                continue;
            }
            let mut v = h * h * e_q.value.re;
            if spec.variant == Variant::MobiusTwisted {
                for (p, _) in factorize(du) {
                    let l = local(p);
                    if l != 0.0 {
                        v /= l;
                    }
                }
            }
            *slot = v;
        }
        let mut p1 = vec![0.0; d_max + 1];
        let mut p2 = vec![0.0; d_max + 1];
        let (mut a1, mut a2) = (Neumaier::new(), Neumaier::new());
        for d in 1..=d_max {
            let dk = (d as f64).powi(k as i32);
            a1.add(w[d] / dk);
            a2.add(w[d] / (dk * dk));
            p1[d] = a1.value();
            p2[d] = a2.value();
        }
        let e1 = euler_product(spec, &moment_factor(spec, 1, q), PRODUCT_TOL)?;
        let e2 = euler_product(spec, &moment_factor(spec, 2, q), PRODUCT_TOL)?;
        let w_max = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self {
            k,
            shifts,
            w,
            p1,
            p2,
            e1: e1.value.re,
            e2: e2.value.re,
            e_err: (e1.tail_bound, e2.tail_bound),
            w_max,
            h_max,
        })
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    /// E₁ = Σ w(d)/d^k and E₂ = Σ w(d)/d^{2k}.
    pub fn moments(&self) -> (f64, f64) {
        (self.e1, self.e2)
    }

    pub fn eval(&self, h: f64) -> Result<FracConstant> {
        if !(h >= 0.0) || h > self.h_max * (1.0 + 1e-15) {
            return Err(Error::Domain(format!("H = {h} outside the precomputed range [0, {}]", self.h_max)));
        }
        let int_h = (h.fract() == 0.0 && h < 9e15).then_some(h as u64);
        let eps = f64::EPSILON;
        let mut total = Neumaier::new();
        let mut bound = 0.0;
        let mut terms = 0u64;
        for &(t, ct) in &self.shifts {
            if ct == 0.0 {
                continue;
            }
            let ht = h / t as f64;
            let m = iroot(ht.floor() as u64, self.k) as usize;
            let mut direct = Neumaier::new();
            for d in 1..=m {
                let wd = self.w[d];
                if wd == 0.0 {
                    continue;
                }
                let dk = (d as u64).pow(self.k);
                let fw = match int_h {
                    Some(n) => frac_weight_int(n, t * dk),
                    None => frac_weight(ht / dk as f64),
                };
                direct.add(wd * fw);
            }
            terms += m as u64;
            let tail1 = self.e1 - self.p1[m];
            let tail2 = self.e2 - self.p2[m];
            let part = direct.value() + ht * tail1 - ht * ht * tail2;
            total.add(ct * part);
            bound += ct.abs()
                * (ht * (self.e_err.0 + 4.0 * eps * self.e1.abs())
                    + ht * ht * (self.e_err.1 + 4.0 * eps * self.e2.abs())
                    + 4.0 * eps * (m as f64 + 1.0) * self.w_max);
        }
        Ok(FracConstant { value: total.value(), h, terms_used: terms, tail_bound: bound })
    }

    /// Evaluate, accepting a floor up to max(DEFAULT_TOL, 1e-4·|c(H)|); the
    /// floor grows like H², so fixed absolute tolerances fail for large H.
    pub fn eval_relaxed(&self, h: f64) -> Result<FracConstant> {
        let v = self.eval(h)?;
        let tol = relaxed_tol(v.value);
        if v.tail_bound > tol {
            return Err(Error::Convergence(format!(
                "c(H) at H = {h}: attainable accuracy {:e} exceeds {tol:e}",
                v.tail_bound
            )));
        }
        Ok(v)
    }

    /// Evaluate and insist the floating-point floor is within `tol`.
    pub fn eval_tol(&self, h: f64, tol: f64) -> Result<FracConstant> {
        let v = self.eval(h)?;
        if v.tail_bound > tol {
            return Err(Error::Convergence(format!(
                "c(H) at H = {h}: attainable accuracy {:e} exceeds tolerance {tol:e}",
                v.tail_bound
            )));
        }
        Ok(v)
    }
}

/// c_{h,k}(H) = Σ_d h²(d) Π_{p∤d}(1 + 2h(p)/p^k) ({H/d^k} - {H/d^k}²) (Möbius-twisted)
/// or (Π_p (p^k+h(p))/(p^k-h(p))) Σ_d h²(d)({H/d^k} - {H/d^k}²).
#[allow(non_snake_case)]
pub fn c_hk_of_H(spec: &FunctionSpec, h: f64, tol: f64) -> Result<FracConstant> {
    c_coprime_of_H(spec, 1, h, tol)
}

/// The deformation of c_{h,k}(H) for n restricted to (n, q) = 1.
#[allow(non_snake_case)]
pub fn c_coprime_of_H(spec: &FunctionSpec, q: u64, h: f64, tol: f64) -> Result<FracConstant> {
    FracSeries::new(spec, q, h)?.eval_tol(h, tol)
}

pub fn relaxed_tol(value: f64) -> f64 {
    DEFAULT_TOL.max(1e-4 * value.abs())
}

/// c(H) along a grid (parallel over grid points), with the relaxed tolerance.
#[allow(non_snake_case)]
pub fn scan_c_of_H(spec: &FunctionSpec, grid: &[f64]) -> Result<Vec<FracConstant>> {
    scan_c_coprime_of_H(spec, 1, grid)
}

#[allow(non_snake_case)]
pub fn scan_c_coprime_of_H(spec: &FunctionSpec, q: u64, grid: &[f64]) -> Result<Vec<FracConstant>> {
    if grid.is_empty() {
        return Err(Error::Domain("the H grid is empty".into()));
    }
    let h_max = grid.iter().cloned().fold(0.0, f64::max);
    let series = FracSeries::new(spec, q, h_max)?;
    grid.par_iter().map(|&h| series.eval_relaxed(h)).collect()
}

/// CSV with header `H,c_value,tail_bound`.
pub fn to_csv(values: &[FracConstant]) -> String {
    let mut out = String::from("H,c_value,tail_bound\n");
    for v in values {
        out.push_str(&format!("{},{},{}\n", sig12(v.h), sig12(v.value), sig12(v.tail_bound)));
    }
    out
}

/// |Σ_{n≤N} cos(2πnx)/n² - π²({x}² - {x}) - ζ(2)|. The omitted tail is at most 1/N.
pub fn bernoulli_identity_residual(x: f64, n: u64) -> f64 {
    let f = x - x.floor();
    let theta = 2.0 * PI * f;
    let step = num_complex::Complex64::from_polar(1.0, theta);
    let mut z = step;
    let mut acc = Neumaier::new();
    for j in 1..=n {
        if j % 256 == 0 {
            // Re-anchor the rotation to stop drift.
            let phase = (j as f64 * f).fract();
            z = num_complex::Complex64::from_polar(1.0, 2.0 * PI * phase);
        }
        let jf = j as f64;
        acc.add(z.re / (jf * jf));
        z *= step;
    }
    (acc.value() - PI * PI * (f * f - f) - PI * PI / 6.0).abs()
}

/// Mean of c(H) per residue class of H mod 6 and the layer ordering check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub class_means: [f64; 6],
    pub class_counts: [usize; 6],
    /// Layers bottom to top: {0}, {2,4}, {3}, {1,5} mod 6.
    pub layer_means: [f64; 4],
    pub ordering_holds: bool,
    /// Fraction of points whose nearest layer mean is their class's layer.
    pub agreement: f64,
}

pub const LAYER_OF_CLASS: [usize; 6] = [0, 3, 1, 2, 1, 3];

pub fn layer_analysis(values: &[FracConstant]) -> LayerReport {
    let mut sums = [0.0; 6];
    let mut counts = [0usize; 6];
    let ints: Vec<&FracConstant> = values.iter().filter(|v| v.h.fract() == 0.0).collect();
    for v in &ints {
        let r = (v.h as u64 % 6) as usize;
        sums[r] += v.value;
        counts[r] += 1;
    }
    let mut class_means = [f64::NAN; 6];
    for r in 0..6 {
        if counts[r] > 0 {
            class_means[r] = sums[r] / counts[r] as f64;
        }
    }
    let mut layer_sum = [0.0; 4];
    let mut layer_n = [0usize; 4];
    for r in 0..6 {
        layer_sum[LAYER_OF_CLASS[r]] += sums[r];
        layer_n[LAYER_OF_CLASS[r]] += counts[r];
    }
    let layer_means: [f64; 4] = std::array::from_fn(|l| if layer_n[l] > 0 { layer_sum[l] / layer_n[l] as f64 } else { f64::NAN });
    let ordering_holds = layer_means.windows(2).all(|w| w[0] < w[1]);
    let hits = ints
        .iter()
        .filter(|v| {
            let r = (v.h as u64 % 6) as usize;
            let nearest = (0..4)
                .min_by(|&a, &b| {
                    (v.value - layer_means[a]).abs().total_cmp(&(v.value - layer_means[b]).abs())
                })
                .unwrap();
            nearest == LAYER_OF_CLASS[r]
        })
        .count();
    let agreement = if ints.is_empty() { 0.0 } else { hits as f64 / ints.len() as f64 };
    LayerReport { class_means, class_counts: counts, layer_means, ordering_holds, agreement }
}

/// Integer grid a..=b.
pub fn int_grid(a: u64, b: u64) -> Vec<f64> {
    (a..=b).map(|h| h as f64).collect()
}

/// Real grid a, a+step, ..., ≤ b (computed as a + i·step).
pub fn real_grid(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| a + i as f64 * step).collect()
}
