//! Independent brute-force and quadrature oracles used to cross-check the
//! fast paths.

use std::f64::consts::PI;

use crate::arith::{f_value, h_value};
use crate::constants::tilde_c;
use crate::error::{Error, Result};
use crate::primes::primes_up_to;
use crate::quad::gl20;
use crate::spec::{FunctionSpec, Variant};
use crate::sum::{ExactSum, Neumaier};

/// ∫_0^∞ x^p S(x)² (log x)^j dx with p = (k+2α-1)/k, S(x) = sin(πx)/(πx), by
/// direct quadrature: graded dyadic panels on (0,1], unit panels up to T and
/// an asymptotic tail.
pub fn sinc_moment_quadrature(k: u32, alpha: f64, j: usize) -> Result<f64> {
    let p = (k as f64 + 2.0 * alpha - 1.0) / k as f64;
    let a = 1.0 - p;
    if !(a > 0.0 && a < 2.0) {
        return Err(Error::Domain(format!("sinc moment diverges for exponent {p}")));
    }
    const T: u32 = 1000;
    let ji = j as i32;
    let f = |x: f64| {
        let s = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
        x.powf(p) * s * s * x.ln().powi(ji)
    };
    let mut acc = Neumaier::new();
    for m in 0..80 {
        let hi = 0.5f64.powi(m);
        acc.add(gl20(f, hi / 2.0, hi));
    }
    for n in 1..T {
        acc.add(gl20(f, n as f64, n as f64 + 1.0));
    }
    // sin² = (1 - cos 2πx)/2; the cosine part is -φ'(T)/(4π²) to leading order.
    let t = T as f64;
    let lt = t.ln();
    let mut smooth = 0.0;
    let mut fall = 1.0;
    for i in 0..=j {
        smooth += fall * lt.powi((j - i) as i32) / a.powi(i as i32 + 1);
        fall *= (j - i) as f64;
    }
    smooth *= t.powf(-a);
    // φ(x) = x^{-a-1} (log x)^j.
    let dlog = if j > 0 { j as f64 * lt.powi(ji - 1) } else { 0.0 };
    let phi_prime = t.powf(-a - 2.0) * (-(a + 1.0) * lt.powi(ji) + dlog);
    acc.add((smooth + phi_prime / (4.0 * PI * PI)) / (2.0 * PI * PI));
    Ok(acc.value())
}

/// (1/X) Σ_{n≤X} (Σ_{j≤H} f(n+j) − c̃H)² by the literal double loop with
/// pointwise f.
pub fn naive_discrete_variance(spec: &FunctionSpec, x: u64, h: u64) -> Result<f64> {
    let mu = tilde_c(spec)? * h as f64;
    let mut acc = ExactSum::new();
    for n in 1..=x {
        let mut w = 0.0;
        for j in 1..=h {
            w += f_value(spec, n + j).re;
        }
        acc.add((w - mu) * (w - mu));
    }
    Ok(acc.value() / x as f64)
}

/// (1/X) ∫_X^{2X} (Σ_{x<n≤x+H} f(n) − c̃H)² dx: breakpoints {integers} ∪
/// {n − H} sorted explicitly, the window summed directly at each piece's
/// midpoint.
pub fn continuous_variance_quadrature(spec: &FunctionSpec, x: u64, h: f64) -> Result<f64> {
    if !(h >= 1.0) {
        return Err(Error::Domain(format!("H = {h} must be at least 1")));
    }
    let (a, b) = (x as f64, 2.0 * x as f64);
    let mu = tilde_c(spec)? * h;
    let top = (b + h).ceil() as u64 + 1;
    let f: Vec<f64> = (0..=top).map(|n| if n == 0 { 0.0 } else { f_value(spec, n).re }).collect();
    let mut cuts: Vec<f64> = (x..=2 * x).map(|n| n as f64).collect();
    for n in x..=top {
        let c = n as f64 - h;
        if c > a && c < b {
            cuts.push(c);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut acc = ExactSum::new();
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let lo = mid.floor() as u64 + 1;
        let hi = (mid + h).floor() as u64;
        let s: f64 = f[lo as usize..=hi as usize].iter().sum();
        acc.add((w[1] - w[0]) * (s - mu) * (s - mu));
    }
    Ok(acc.value() / x as f64)
}

/// Σ_d w(d)({H/d^k} − {H/d^k}²) summed directly over d ≤ `d_max` coprime to
/// q, for each t | q, with the per-d prefactor Π_{p∤dq, p≤10⁶}(1 + 2h(p)/p^k)
/// (Möbius-twisted) or Π_{p∤q, p≤10⁶}(p^k+h(p))/(p^k−h(p)) (completely
/// multiplicative). Returns (value, tail estimate).
pub fn direct_series_c(spec: &FunctionSpec, q: u64, h: f64, d_max: u64) -> Result<(f64, f64)> {
    const P: u64 = 1_000_000;
    let kf = spec.kf();
    let qp: Vec<u64> = crate::primes::factorize(q).into_iter().map(|(p, _)| p).collect();
    let local = |p: u64| {
        let t = spec.h_prime_power(p, 1).re;
        let pk = (p as f64).powf(kf);
        match spec.variant {
            Variant::MobiusTwisted => 1.0 + 2.0 * t / pk,
            Variant::CompletelyMultiplicative => (pk + t) / (pk - t),
        }
    };
    let mut log_e = Neumaier::new();
    let mut zero = Vec::new();
    for &p in primes_up_to(P).iter() {
        if q % p == 0 {
            continue;
        }
        let l = local(p);
        if l == 0.0 {
            zero.push(p);
        } else {
            log_e.add(l.ln());
        }
    }
    let e = log_e.value().exp();
    let mut total = Neumaier::new();
    let mut weight_scale = 0.0f64;
    for mask in 0u32..1 << qp.len() {
        let mut t = 1u64;
        let mut ct = 1.0;
        for (i, &p) in qp.iter().enumerate() {
            if mask >> i & 1 == 1 {
                t *= p;
            } else {
                ct *= 1.0 - 2.0 / p as f64;
            }
        }
        if ct == 0.0 {
            continue;
        }
        let ht = h / t as f64;
        let mut part = Neumaier::new();
        for d in 1..=d_max {
            if crate::primes::gcd(d, q) != 1 {
                continue;
            }
            let hd = h_value(spec, d).re;
            if hd == 0.0 {
                continue;
            }
            let fac = crate::primes::factorize(d);
            let mut w = hd * hd * e;
            if spec.variant == Variant::MobiusTwisted {
                if zero.iter().any(|z| d % z != 0) {
                    continue;
                }
                for &(p, _) in &fac {
                    let l = local(p);
                    if l != 0.0 {
                        w /= l;
                    }
                }
            }
            weight_scale = weight_scale.max(w.abs() * (d as f64).powf(2.0 * spec.alpha));
            let x = ht / (d as f64).powf(kf);
            let mut fr = x - x.floor();
            if fr < 1e-12 || fr > 1.0 - 1e-12 {
                fr = 0.0;
            }
            part.add(w * (fr - fr * fr));
        }
        total.add(ct * part.value());
    }
    // Σ_{d>D} |w(d)| H/d^k with |w(d)| ≲ scale·d^{−2α}.
    let s = 2.0 * spec.alpha + kf;
    let series_tail = weight_scale * h * (d_max as f64).powf(1.0 - s) / (s - 1.0);
    // Prefactor primes beyond P: |log L_p| ≤ 2.2|g| p^{−(α+k)} once |g| p^{−(α+k)} is small.
    let gmax = spec.generic_g().iter().fold(0.0f64, |m, g| m.max(g.norm()));
    let a = spec.alpha + kf;
    let rel = 2.2 * gmax * (P as f64).powf(1.0 - a) / (a - 1.0);
    let value = total.value();
    Ok((value, series_tail + value.abs() * rel.exp_m1()))
}
