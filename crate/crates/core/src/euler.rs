//! Euler products Π_p L(g(p), p^{-a}, p^{-w}) with rigorous tail bounds.
//!
//! Primes up to a cutoff P are multiplied explicitly (as a sum of logs). Beyond
//! P, g(p) takes one of finitely many generic values, so log L is expanded as
//! Σ c_ij x^i y^j with Cauchy coefficients and each Σ_{p>P} p^{-(ia+jw)} is
//! evaluated through ζ (or a Dirichlet L-function) by Möbius inversion.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::{factorize, primes_up_to};
use crate::spec::{FunctionSpec, RealCharacter};
use crate::special::{hurwitz_zeta, zeta};
use crate::sum::NeumaierC;

type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub const START_CUTOFF: u64 = 10_000;
pub const MAX_CUTOFF: u64 = 1 << 24;
const NODES: usize = 64;
const MAX_DEGREE: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerProductValue {
    pub value: C64,
    pub prime_cutoff: u64,
    pub tail_bound: f64,
}

type AtomFn = Box<dyn Fn(C64, C64, C64) -> C64 + Send + Sync>;

/// One factor (1 + u(g, x, y))^power of a local factor.
pub struct Atom {
    pub power: C64,
    u: AtomFn,
}

impl Atom {
    pub fn new(power: impl Into<C64>, u: impl Fn(C64, C64, C64) -> C64 + Send + Sync + 'static) -> Self {
        Self { power: power.into(), u: Box::new(u) }
    }
}

/// L_p = Π (1 + u_i(g(p), p^{-a}, p^{-w}))^{e_i}; `w = None` when y is unused.
pub struct LocalFactor {
    pub a: f64,
    pub w: Option<C64>,
    pub atoms: Vec<Atom>,
    /// Primes dividing this modulus are left out of the product.
    pub coprime_to: u64,
}

impl LocalFactor {
    pub fn new(a: f64, w: Option<C64>, atoms: Vec<Atom>) -> Self {
        Self { a, w, atoms, coprime_to: 1 }
    }

    pub fn coprime_to(mut self, q: u64) -> Self {
        self.coprime_to = q;
        self
    }

    fn xy(&self, p: u64) -> (C64, C64) {
        let lp = (p as f64).ln();
        let x = C64::new((-self.a * lp).exp(), 0.0);
        let y = self.w.map_or(ZERO, |w| (-w * lp).exp());
        (x, y)
    }

    pub fn log_at(&self, g: C64, x: C64, y: C64) -> C64 {
        self.atoms.iter().map(|at| at.power * (ONE + (at.u)(g, x, y)).ln()).sum()
    }

    /// The local factor at a single prime.
    pub fn at_prime(&self, spec: &FunctionSpec, p: u64) -> C64 {
        let (x, y) = self.xy(p);
        self.atoms
            .iter()
            .map(|at| {
                let base = ONE + (at.u)(spec.g(p), x, y);
                if at.power.im == 0.0 && at.power.re.fract() == 0.0 {
                    base.powi(at.power.re as i32)
                } else {
                    (at.power * base.ln()).exp()
                }
            })
            .product()
    }
}

/// Π_{p ≤ cutoff} L_p, multiplied directly.
pub fn partial_product(spec: &FunctionSpec, factor: &LocalFactor, cutoff: u64) -> C64 {
    primes_up_to(cutoff)
        .iter()
        .filter(|&&p| factor.coprime_to % p != 0)
        .map(|&p| factor.at_prime(spec, p))
        .product()
}

fn mobius(n: u64) -> i32 {
    let f = factorize(n);
    if f.iter().any(|&(_, a)| a > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

fn reduce_branch(z: C64) -> C64 {
    let turns = (z.im / (2.0 * PI)).round();
    C64::new(z.re, z.im - 2.0 * PI * turns)
}

fn l_function(s: C64, chi: &RealCharacter) -> Result<C64> {
    let q = chi.modulus as f64;
    let mut acc = NeumaierC::new();
    for a in 1..chi.modulus {
        let v = chi.at(a);
        if v != 0 {
            acc.add(hurwitz_zeta(s, a as f64 / q)? * v as f64);
        }
    }
    Ok((-s * q.ln()).exp() * acc.value())
}

/// Σ_{p > P} ψ(p) p^{-σ} (ψ ≡ 1 when `chi` is None), Re σ ≥ 1.05.
pub fn prime_tail(sigma: C64, cutoff: u64, chi: Option<&RealCharacter>) -> Result<C64> {
    if sigma.re < 1.05 {
        return Err(Error::Divergence(format!("prime sum at σ = {sigma} is too close to the pole")));
    }
    let lp = (cutoff as f64).ln();
    if (1.0 - sigma.re) * lp - (sigma.re - 1.0).ln() < -70.0 {
        return Ok(ZERO);
    }
    let primes = primes_up_to(cutoff);
    let n_max = ((1.0 + 40.0 / lp) / sigma.re).ceil() as u64 + 1;
    let mut total = NeumaierC::new();
    for n in 1..=n_max {
        let mu = mobius(n);
        if mu == 0 {
            continue;
        }
        let s = sigma * n as f64;
        let odd_char = chi.filter(|_| n % 2 == 1);
        let mut acc = NeumaierC::new();
        match odd_char {
            Some(c) => {
                acc.add(l_function(s, c)?.ln());
                for &p in primes.iter() {
                    let v = c.at(p);
                    if v != 0 {
                        acc.add((ONE - (-s * (p as f64).ln()).exp() * v as f64).ln());
                    }
                }
            }
            None => {
                acc.add(zeta(s)?.ln());
                for &p in primes.iter() {
                    acc.add((ONE - (-s * (p as f64).ln()).exp()).ln());
                }
            }
        }
        total.add(reduce_branch(acc.value()) * (mu as f64 / n as f64));
    }
    Ok(total.value())
}

/// Taylor coefficients of log L in (x, y) on a torus, for one generic g.
struct Expansion {
    coeffs: Vec<Vec<C64>>,
    r1: f64,
    r2: f64,
    bound: f64,
}

fn torus_samples(factor: &LocalFactor, g: C64, r1: f64, r2: f64, m2: usize) -> Option<Vec<Vec<C64>>> {
    let mut out = vec![vec![ZERO; m2]; NODES];
    for (ia, row) in out.iter_mut().enumerate() {
        let x = C64::from_polar(r1, 2.0 * PI * ia as f64 / NODES as f64);
        for (ib, cell) in row.iter_mut().enumerate() {
            let y = C64::from_polar(r2, 2.0 * PI * ib as f64 / m2 as f64);
            let mut acc = ZERO;
            for at in &factor.atoms {
                let u = (at.u)(g, x, y);
                if u.norm() > 0.5 {
                    return None;
                }
                acc += at.power * (ONE + u).ln();
            }
            *cell = acc;
        }
    }
    Some(out)
}

fn expand(samples: &[Vec<C64>], r1: f64, r2: f64) -> Expansion {
    let m2 = samples[0].len();
    let jmax = if m2 == 1 { 0 } else { MAX_DEGREE };
    let bound = samples.iter().flatten().fold(0.0f64, |m, v| m.max(v.norm()));
    // Transform along y for each x-node, then along x.
    let half: Vec<Vec<C64>> = samples
        .iter()
        .map(|row| {
            (0..=jmax)
                .map(|j| {
                    row.iter()
                        .enumerate()
                        .map(|(b, v)| v * C64::from_polar(1.0, -2.0 * PI * ((j * b) % m2) as f64 / m2 as f64))
                        .sum::<C64>()
                        / m2 as f64
                })
                .collect()
        })
        .collect();
    let coeffs = (0..=MAX_DEGREE)
        .map(|i| {
            (0..=jmax)
                .map(|j| {
                    let s: C64 = half
                        .iter()
                        .enumerate()
                        .map(|(a, row)| row[j] * C64::from_polar(1.0, -2.0 * PI * ((i * a) % NODES) as f64 / NODES as f64))
                        .sum();
                    s / (NODES as f64 * r1.powi(i as i32) * r2.powi(j as i32))
                })
                .collect()
        })
        .collect();
    Expansion { coeffs, r1, r2, bound }
}

fn expansion_for(factor: &LocalFactor, gs: &[C64], weights: &[f64]) -> Result<Expansion> {
    let gmax = gs.iter().fold(1.0f64, |m, g| m.max(g.norm()));
    let m2 = if factor.w.is_some() { NODES } else { 1 };
    let (mut r1, mut r2) = (0.1 / gmax, 0.2 / (gmax * gmax));
    for _ in 0..20 {
        let mut combined: Option<Vec<Vec<C64>>> = Some(vec![vec![ZERO; m2]; NODES]);
        for (g, wt) in gs.iter().zip(weights) {
            match (torus_samples(factor, *g, r1, r2, m2), combined.as_mut()) {
                (Some(s), Some(c)) => {
                    for (crow, srow) in c.iter_mut().zip(s) {
                        for (cv, sv) in crow.iter_mut().zip(srow) {
                            *cv += sv * *wt;
                        }
                    }
                }
                _ => combined = None,
            }
        }
        if let Some(samples) = combined {
            return Ok(expand(&samples, r1, if m2 == 1 { 1.0 } else { r2 }));
        }
        r1 /= 2.0;
        r2 /= 2.0;
    }
    Err(Error::Convergence("local factor is not analytic near x = y = 0".into()))
}

/// Σ_{(i,j)} c_ij Σ_{p>P} ψ(p)^? p^{-(ia+jw)} plus the bound on what was left out.
fn tail_sum(
    ex: &Expansion,
    factor: &LocalFactor,
    cutoff: u64,
    chi: Option<&RealCharacter>,
    skip: f64,
) -> Result<(C64, f64)> {
    let pf = cutoff as f64;
    let wre = factor.w.map_or(f64::INFINITY, |w| w.re);
    if factor.w.is_some() && !(wre > 0.0) {
        return Err(Error::Divergence(format!("Re w = {wre} must be positive")));
    }
    let rho1 = pf.powf(-factor.a) / ex.r1;
    let rho2 = if factor.w.is_some() { pf.powf(-wre) / ex.r2 } else { 0.0 };
    if !(rho1 < 0.5 && rho2 < 0.5) {
        return Ok((ZERO, f64::INFINITY));
    }
    let jdim = ex.coeffs[0].len();
    let mut total = NeumaierC::new();
    let mut bound = 0.0;
    let tail_of = |sigma: f64| if sigma > 1.0 { pf / (sigma - 1.0) } else { f64::INFINITY };
    for i in 0..=MAX_DEGREE {
        for j in 0..jdim {
            if i == 0 && j == 0 {
                continue;
            }
            let sigma_re = i as f64 * factor.a + if j > 0 { j as f64 * wre } else { 0.0 };
            let scale = rho1.powi(i as i32) * rho2.powi(j as i32);
            let term_bound = ex.bound * scale * tail_of(sigma_re);
            if term_bound < skip {
                bound += term_bound;
                continue;
            }
            let c = ex.coeffs[i][j];
            let normalized = c.norm() * ex.r1.powi(i as i32) * ex.r2.powi(j as i32);
            // Structural cancellations leave only DFT rounding noise here.
            if normalized <= 1e-12 * ex.bound.max(1e-300) {
                continue;
            }
            if sigma_re < 1.05 {
                return Err(Error::Divergence(format!(
                    "coefficient of x^{i} y^{j} is nonzero at Re σ = {sigma_re:.4}; the product diverges"
                )));
            }
            let sigma = C64::new(i as f64 * factor.a, 0.0) + factor.w.map_or(ZERO, |w| w * j as f64);
            total.add(c * prime_tail(sigma, cutoff, chi)?);
        }
    }
    // Everything past the retained degrees, by the Cauchy estimate.
    let geo = |r: f64, from: usize| r.powi(from as i32) / (1.0 - r);
    let s1 = (MAX_DEGREE + 1) as f64 * factor.a;
    bound += ex.bound * geo(rho1, MAX_DEGREE + 1) / (1.0 - rho2) * tail_of(s1);
    if factor.w.is_some() {
        let s2 = jdim as f64 * wre;
        bound += ex.bound * geo(rho2, jdim) / (1.0 - rho1) * tail_of(s2);
    }
    Ok((total.value(), bound))
}

struct Prepared {
    even: Expansion,
    odd: Option<Expansion>,
}

fn prepare(spec: &FunctionSpec, factor: &LocalFactor) -> Result<Prepared> {
    let generic = spec.generic_g();
    Ok(match (&spec.character, generic.as_slice()) {
        (Some(_), [plus, minus]) => Prepared {
            even: expansion_for(factor, &[*plus, *minus], &[0.5, 0.5])?,
            odd: Some(expansion_for(factor, &[*plus, *minus], &[0.5, -0.5])?),
        },
        _ => Prepared { even: expansion_for(factor, &generic[..1], &[1.0])?, odd: None },
    })
}

fn evaluate(spec: &FunctionSpec, factor: &LocalFactor, prep: &Prepared, cutoff: u64, skip: f64) -> Result<EulerProductValue> {
    let mut explicit = NeumaierC::new();
    let mut abs_logs = 0.0;
    let mut vanishes = false;
    for &p in primes_up_to(cutoff).iter() {
        if factor.coprime_to % p == 0 {
            continue;
        }
        let (x, y) = factor.xy(p);
        let lv = factor.log_at(spec.g(p), x, y);
        if lv.re == f64::NEG_INFINITY {
            vanishes = true;
            continue;
        }
        if !lv.re.is_finite() {
            return Err(Error::Divergence(format!("local factor vanishes at p = {p}")));
        }
        abs_logs += lv.norm();
        explicit.add(lv);
    }
    let (t_even, mut bound) = tail_sum(&prep.even, factor, cutoff, None, skip)?;
    let mut log_total = explicit.value() + t_even;
    if let Some(odd) = &prep.odd {
        let (t_odd, b_odd) = tail_sum(odd, factor, cutoff, spec.character.as_ref(), skip)?;
        log_total += t_odd;
        bound += b_odd;
    }
    if vanishes {
        // An exactly vanishing local factor; the rest converges.
        return Ok(EulerProductValue { value: ZERO, prime_cutoff: cutoff, tail_bound: 0.0 });
    }
    let value = log_total.exp();
    let rounding = 8.0 * f64::EPSILON * (1.0 + abs_logs + log_total.norm()) * value.norm();
    let tail_bound = value.norm() * bound.exp_m1() + rounding;
    Ok(EulerProductValue { value, prime_cutoff: cutoff, tail_bound })
}

/// Π_p L_p with the explicit part fixed at p ≤ `cutoff`.
pub fn euler_product_at_cutoff(spec: &FunctionSpec, factor: &LocalFactor, cutoff: u64) -> Result<EulerProductValue> {
    let prep = prepare(spec, factor)?;
    let cutoff = cutoff.max(spec.special_prime_bound()).max(factor.coprime_to).max(2);
    evaluate(spec, factor, &prep, cutoff, 0.0)
}

/// Π_p L_p to absolute accuracy `tol`, doubling the explicit cutoff as needed.
pub fn euler_product(spec: &FunctionSpec, factor: &LocalFactor, tol: f64) -> Result<EulerProductValue> {
    let prep = prepare(spec, factor)?;
    let special = spec.special_prime_bound().max(factor.coprime_to);
    let mut cutoff = START_CUTOFF.max(special);
    loop {
        let v = evaluate(spec, factor, &prep, cutoff, 1e-3 * tol)?;
        if v.tail_bound <= tol {
            return Ok(v);
        }
        if cutoff >= MAX_CUTOFF {
            return Err(Error::Convergence(format!(
                "Euler product tail bound {:e} exceeds {tol:e} at cutoff {cutoff}",
                v.tail_bound
            )));
        }
        cutoff *= 2;
    }
}
