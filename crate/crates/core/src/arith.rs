//! Point values h(d), f(n) and interval sieves for f and its truncations.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::{checked_pow, factorize, iroot, primes_up_to};
use crate::spec::FunctionSpec;
use crate::sum::Neumaier;

type C64 = Complex64;

/// h(d) from the factorization of d.
pub fn h_value(spec: &FunctionSpec, d: u64) -> C64 {
    assert!(d >= 1, "h is defined on positive integers");
    factorize(d)
        .into_iter()
        .map(|(p, a)| spec.h_prime_power(p, a))
        .product()
}

/// f(n) = Σ_{d^k | n} h(d), by enumerating the d directly.
///
/// Primes up to n^{1/(k+1)} are removed by trial division; the cofactor can
/// then contain a k-th prime power only if it is one.
pub fn f_value(spec: &FunctionSpec, n: u64) -> C64 {
    assert!(n >= 1, "f is defined on positive integers");
    let k = spec.k;
    let bound = iroot(n, k + 1);
    let mut rest = n;
    let mut parts: Vec<(u64, u32)> = Vec::new();
    let mut p = 2u64;
    while p <= bound && rest > 1 {
        if rest % p == 0 {
            let mut a = 0;
            while rest % p == 0 {
                rest /= p;
                a += 1;
            }
            parts.push((p, a));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 && k >= 1 {
        let r = iroot(rest, k);
        if checked_pow(r, k) == Some(rest) {
            if k == 1 {
                for (q, a) in factorize(rest) {
                    parts.push((q, a));
                }
            } else {
                parts.push((r, k));
            }
        }
    }
    // d ranges over Π p^{j_p} with j_p ≤ a_p / k.
    let mut ds: Vec<u64> = vec![1];
    for &(q, a) in &parts {
        let top = a / k;
        let current = ds.clone();
        let mut pj = 1u64;
        for _ in 0..top {
            pj *= q;
            ds.extend(current.iter().map(|d| d * pj));
        }
    }
    ds.into_iter().map(|d| h_value(spec, d)).sum()
}

/// Which divisors d contribute: all, those with d^k ≤ z, or those with d^k > z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    Full,
    Below(f64),
    Above(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Auto,
    /// Add h(d) to every multiple of d^k.
    Scatter,
    /// Segmented factorization, f(n) = Π f(p^a). Full truncation only.
    Multiplicative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveConfig {
    pub block_len: usize,
    pub max_segment_len: usize,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self { block_len: 1 << 22, max_segment_len: 1 << 26 }
    }
}

/// f-values on [start, start + len) with running sums.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveSegment {
    pub start: u64,
    pub values: Vec<f64>,
    /// prefix[i] = values[0] + ... + values[i], compensated.
    pub prefix: Vec<f64>,
}

impl SieveSegment {
    fn from_values(start: u64, values: Vec<f64>) -> Self {
        let mut acc = Neumaier::new();
        let prefix = values
            .iter()
            .map(|&v| {
                acc.add(v);
                acc.value()
            })
            .collect();
        Self { start, values, prefix }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> u64 {
        self.start + self.values.len() as u64 - 1
    }

    pub fn value_at(&self, n: u64) -> f64 {
        self.values[(n - self.start) as usize]
    }

    pub fn total(&self) -> f64 {
        self.prefix.last().copied().unwrap_or(0.0)
    }
}

/// Precomputed state for sieving f (or a truncation) anywhere below `hi`.
pub struct Sieve {
    k: u32,
    hi: u64,
    trunc: Truncation,
    kind: Kind,
}

enum Kind {
    Scatter { h: Vec<f64>, d_lo: u64 },
    Multiplicative { primes: Vec<(u64, Vec<f64>)>, big: Box<dyn Fn(u64) -> f64 + Send + Sync> },
}

/// Real h(d) for every d ≤ n, via a smallest-prime-factor table.
pub fn h_table(spec: &FunctionSpec, n: usize) -> Vec<f64> {
    let mut spf = vec![0u32; n + 1];
    let mut h = vec![0.0f64; n + 1];
    if n >= 1 {
        h[1] = 1.0;
    }
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
        let p = spf[i] as usize;
        let mut m = i / p;
        let mut a = 1;
        while m % p == 0 {
            m /= p;
            a += 1;
        }
        h[i] = h[m] * spec.h_prime_power(p as u64, a).re;
    }
    h
}

fn require_real(spec: &FunctionSpec) -> Result<()> {
    if !spec.is_real() {
        return Err(Error::Domain(format!("sieving needs real h; `{}` has complex values", spec.label)));
    }
    Ok(())
}

impl Sieve {
    pub fn new(spec: &FunctionSpec, hi: u64, trunc: Truncation, engine: Engine, config: &SieveConfig) -> Result<Self> {
        require_real(spec)?;
        let k = spec.k;
        let engine = match engine {
            Engine::Auto if trunc == Truncation::Full && k == 1 => Engine::Multiplicative,
            Engine::Auto => Engine::Scatter,
            e => e,
        };
        let kind = match engine {
            Engine::Multiplicative => {
                if trunc != Truncation::Full {
                    return Err(Error::Domain("the multiplicative engine sieves full f only".into()));
                }
                let root = iroot(hi, 2);
                let primes = primes_up_to(root)
                    .iter()
                    .map(|&p| {
                        let mut top = 0;
                        let mut pa = 1u64;
                        while let Some(next) = pa.checked_mul(p).filter(|&v| v <= hi) {
                            pa = next;
                            top += 1;
                        }
                        (p, (0..=top).map(|a| spec.f_prime_power(p, a).re).collect())
                    })
                    .collect();
                let s = spec.clone();
                let big: Box<dyn Fn(u64) -> f64 + Send + Sync> = Box::new(move |p| s.f_prime_power(p, 1).re);
                Kind::Multiplicative { primes, big }
            }
            _ => {
                let full = iroot(hi, k);
                let (d_lo, d_hi) = match trunc {
                    Truncation::Full => (1, full),
                    Truncation::Below(z) => (1, full.min(kth_floor(z, k))),
                    Truncation::Above(z) => (kth_floor(z, k) + 1, full),
                };
                if d_hi as usize > config.max_segment_len {
                    return Err(Error::Capacity { requested: d_hi, limit: config.max_segment_len as u64 });
                }
                let mut h = h_table(spec, d_hi as usize);
                for v in h.iter_mut().take(d_lo.min(d_hi + 1) as usize) {
                    *v = 0.0;
                }
                Kind::Scatter { h, d_lo }
            }
        };
        Ok(Self { k, hi, trunc, kind })
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    /// Values for n = lo, ..., lo + out.len() - 1 (all ≤ hi).
    pub fn fill(&self, lo: u64, out: &mut [f64]) {
        assert!(lo >= 1 && lo + out.len() as u64 - 1 <= self.hi, "block outside sieve range");
        let hi = lo + out.len() as u64 - 1;
        match &self.kind {
            Kind::Scatter { h, d_lo } => {
                out.fill(0.0);
                for d in (*d_lo as usize).max(1)..h.len() {
                    let hd = h[d];
                    if hd == 0.0 {
                        continue;
                    }
                    let dk = match checked_pow(d as u64, self.k) {
                        Some(v) if v <= hi => v,
                        _ => break,
                    };
                    let mut m = lo.div_ceil(dk) * dk;
                    while m <= hi {
                        out[(m - lo) as usize] += hd;
                        m += dk;
                    }
                }
            }
            Kind::Multiplicative { primes, big } => {
                out.fill(1.0);
                let mut rest: Vec<u64> = (lo..=hi).collect();
                for (p, fp) in primes {
                    let p = *p;
                    let mut m = lo.div_ceil(p) * p;
                    while m <= hi {
                        let i = (m - lo) as usize;
                        let mut a = 0;
                        while rest[i] % p == 0 {
                            rest[i] /= p;
                            a += 1;
                        }
                        out[i] *= fp[a];
                        m += p;
                    }
                }
                for (v, &r) in out.iter_mut().zip(&rest) {
                    if r > 1 {
                        *v *= big(r);
                    }
                }
            }
        }
    }

    /// Values on [lo, hi], sieved block by block in parallel.
    pub fn values(&self, lo: u64, hi: u64, block_len: usize) -> Vec<f64> {
        let mut out = vec![0.0; (hi - lo + 1) as usize];
        out.par_chunks_mut(block_len.max(1)).enumerate().for_each(|(b, chunk)| {
            self.fill(lo + (b * block_len) as u64, chunk);
        });
        out
    }
}

/// ⌊z^{1/k}⌋ for real z ≥ 0, exact at perfect powers.
pub fn kth_floor(z: f64, k: u32) -> u64 {
    if !(z >= 1.0) {
        return 0;
    }
    if z >= u64::MAX as f64 {
        return iroot(u64::MAX, k);
    }
    let zi = z.floor() as u64;
    iroot(zi, k)
}

fn check_range(lo: u64, hi: u64, config: &SieveConfig) -> Result<()> {
    if lo < 1 || lo > hi {
        return Err(Error::Domain(format!("sieve range [{lo}, {hi}] needs 1 <= lo <= hi")));
    }
    let len = hi - lo + 1;
    if len > config.max_segment_len as u64 {
        return Err(Error::Capacity { requested: len, limit: config.max_segment_len as u64 });
    }
    Ok(())
}

/// Sieve with explicit truncation, engine and configuration.
pub fn sieve_with(
    spec: &FunctionSpec,
    lo: u64,
    hi: u64,
    trunc: Truncation,
    engine: Engine,
    config: &SieveConfig,
) -> Result<SieveSegment> {
    check_range(lo, hi, config)?;
    if let Truncation::Below(z) | Truncation::Above(z) = trunc {
        if !(z >= 1.0) {
            return Err(Error::Domain(format!("truncation point z = {z} must be >= 1")));
        }
    }
    let sieve = Sieve::new(spec, hi, trunc, engine, config)?;
    Ok(SieveSegment::from_values(lo, sieve.values(lo, hi, config.block_len)))
}

/// f(n) for n in [lo, hi].
pub fn sieve_f(spec: &FunctionSpec, lo: u64, hi: u64) -> Result<SieveSegment> {
    sieve_with(spec, lo, hi, Truncation::Full, Engine::Auto, &SieveConfig::default())
}

/// f_z(n) = Σ_{d^k | n, d^k ≤ z} h(d) for n in [lo, hi].
pub fn sieve_f_truncated(spec: &FunctionSpec, lo: u64, hi: u64, z: f64) -> Result<SieveSegment> {
    sieve_with(spec, lo, hi, Truncation::Below(z), Engine::Auto, &SieveConfig::default())
}

/// Σ_{n ≤ x} f(n), sieved in blocks.
pub fn mean_value(spec: &FunctionSpec, x: u64) -> Result<f64> {
    if x < 1 {
        return Err(Error::Domain("mean_value needs x >= 1".into()));
    }
    let config = SieveConfig::default();
    let sieve = Sieve::new(spec, x, Truncation::Full, Engine::Auto, &config)?;
    let bl = config.block_len as u64;
    let nblocks = x.div_ceil(bl);
    let partial: Vec<Neumaier> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let lo = 1 + b * bl;
            let hi = (lo + bl - 1).min(x);
            let mut buf = vec![0.0; (hi - lo + 1) as usize];
            sieve.fill(lo, &mut buf);
            buf.into_iter().collect()
        })
        .collect();
    let mut acc = Neumaier::new();
    for p in partial {
        acc.add(p.value());
    }
    Ok(acc.value())
}
