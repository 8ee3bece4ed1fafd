//! Members of the class F_{α,β,k}: f(n) = Σ_{d^k | n} h(d).

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::{factorize, gcd, is_prime};

type C64 = Complex64;

/// The ± in property (A): g(p) = ±β off the exceptional primes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// h ∈ M_α^μ (h(d) = μ(d) g(d)/d^α) or h ∈ G_α (completely multiplicative).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    MobiusTwisted,
    CompletelyMultiplicative,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::MobiusTwisted => "mobius-twisted",
            Variant::CompletelyMultiplicative => "completely-multiplicative",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mobius-twisted" | "mobius" | "M" => Ok(Variant::MobiusTwisted),
            "completely-multiplicative" | "completely" | "G" => Ok(Variant::CompletelyMultiplicative),
            _ => Err(Error::InvalidSpec(format!("unknown variant `{s}`"))),
        }
    }
}

/// A real Dirichlet character, stored as its values on 0..q.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealCharacter {
    pub modulus: u64,
    pub values: Vec<i8>,
}

impl RealCharacter {
    /// Build from ψ(1), ..., ψ(q-1); ψ(0) = 0 is implied.
    pub fn from_residues(modulus: u64, residues: &[i8]) -> Result<Self> {
        if modulus < 2 || residues.len() as u64 != modulus - 1 {
            return Err(Error::InvalidSpec(format!(
                "character mod {modulus} needs {} values, got {}",
                modulus.saturating_sub(1),
                residues.len()
            )));
        }
        let mut values = Vec::with_capacity(modulus as usize);
        values.push(0);
        values.extend_from_slice(residues);
        let chi = Self { modulus, values };
        chi.validate()?;
        Ok(chi)
    }

    fn validate(&self) -> Result<()> {
        let q = self.modulus;
        for a in 0..q {
            let v = self.values[a as usize];
            if !matches!(v, -1..=1) {
                return Err(Error::InvalidSpec(format!("character value ψ({a}) = {v} not in {{-1,0,1}}")));
            }
            if (v == 0) != (gcd(a, q) != 1) {
                return Err(Error::InvalidSpec(format!(
                    "character must vanish exactly on residues sharing a factor with {q} (ψ({a}) = {v})"
                )));
            }
            for b in 0..q {
                let lhs = self.values[((a * b) % q) as usize];
                if lhs != v * self.values[b as usize] {
                    return Err(Error::InvalidSpec(format!(
                        "character is not multiplicative: ψ({a}·{b}) ≠ ψ({a})ψ({b})"
                    )));
                }
            }
        }
        if self.values[1] != 1 {
            return Err(Error::InvalidSpec("character needs ψ(1) = 1".into()));
        }
        Ok(())
    }

    pub fn at(&self, n: u64) -> i8 {
        self.values[(n % self.modulus) as usize]
    }
}

/// One member of F_{α,β,k}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub k: u32,
    pub alpha: f64,
    pub beta: C64,
    pub sign: Sign,
    pub variant: Variant,
    /// Exceptional primes p ∈ P^fin with g(p) = η.
    pub exceptional: BTreeMap<u64, C64>,
    /// Optional real character twisting g off P^fin.
    pub character: Option<RealCharacter>,
    pub label: String,
}

impl FunctionSpec {
    pub fn new(k: u32, alpha: f64, beta: C64, sign: Sign, variant: Variant, label: impl Into<String>) -> Result<Self> {
        let spec = Self {
            k,
            alpha,
            beta,
            sign,
            variant,
            exceptional: BTreeMap::new(),
            character: None,
            label: label.into(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_exceptional(mut self, p: u64, eta: C64) -> Result<Self> {
        self.exceptional.insert(p, eta);
        self.validate()?;
        Ok(self)
    }

    pub fn with_character(mut self, chi: RealCharacter) -> Result<Self> {
        self.character = Some(chi);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidSpec("k must be a positive integer".into()));
        }
        if !(0.0..2.0).contains(&self.alpha) {
            return Err(Error::InvalidSpec(format!("alpha = {} must lie in [0, 2)", self.alpha)));
        }
        if self.alpha == 0.5 {
            return Err(Error::InvalidSpec("alpha = 1/2 is excluded".into()));
        }
        if !(self.alpha + self.k as f64 > 1.5) {
            return Err(Error::InvalidSpec(format!(
                "alpha + k = {} must exceed 3/2",
                self.alpha + self.k as f64
            )));
        }
        if self.beta.norm() == 0.0 || !self.beta.re.is_finite() || !self.beta.im.is_finite() {
            return Err(Error::InvalidSpec("beta must be a finite nonzero complex number".into()));
        }
        for (&p, eta) in &self.exceptional {
            if !is_prime(p) {
                return Err(Error::InvalidSpec(format!("exceptional key {p} is not prime")));
            }
            if !eta.re.is_finite() || !eta.im.is_finite() {
                return Err(Error::InvalidSpec(format!("exceptional value at {p} is not finite")));
            }
        }
        if let Some(chi) = &self.character {
            chi.validate()?;
        }
        Ok(())
    }

    pub fn kf(&self) -> f64 {
        self.k as f64
    }

    pub fn beta_sq(&self) -> C64 {
        self.beta * self.beta
    }

    /// β² as a positive integer when it is one (to 1e-9).
    pub fn beta_sq_integer(&self) -> Option<u32> {
        let b2 = self.beta_sq();
        let r = b2.re.round();
        ((b2 - r).norm() <= 1e-9 && r >= 1.0 && r < 1e6).then_some(r as u32)
    }

    /// True when every h(d) is real.
    pub fn is_real(&self) -> bool {
        self.beta.im == 0.0 && self.exceptional.values().all(|e| e.im == 0.0)
    }

    /// Largest prime that needs individual treatment (exceptional or dividing the character modulus).
    pub fn special_prime_bound(&self) -> u64 {
        let e = self.exceptional.keys().copied().max().unwrap_or(1);
        let q = self.character.as_ref().map_or(1, |c| c.modulus);
        e.max(q)
    }

    /// g(p): η on P^fin, sign·β·ψ(p) elsewhere.
    pub fn g(&self, p: u64) -> C64 {
        if let Some(eta) = self.exceptional.get(&p) {
            return *eta;
        }
        let psi = self.character.as_ref().map_or(1.0, |c| c.at(p) as f64);
        self.beta * (self.sign.value() * psi)
    }

    /// The values g takes on primes beyond `special_prime_bound`.
    pub fn generic_g(&self) -> Vec<C64> {
        let base = self.beta * self.sign.value();
        match &self.character {
            Some(_) => vec![base, -base],
            None => vec![base],
        }
    }

    /// h(p^a).
    pub fn h_prime_power(&self, p: u64, a: u32) -> C64 {
        if a == 0 {
            return C64::new(1.0, 0.0);
        }
        let g = self.g(p);
        let pa = (p as f64).powf(-self.alpha * a as f64);
        match self.variant {
            Variant::MobiusTwisted if a == 1 => -g * pa,
            Variant::MobiusTwisted => C64::new(0.0, 0.0),
            Variant::CompletelyMultiplicative => g.powu(a) * pa,
        }
    }

    /// Σ_{j ≤ a/k} h(p^j): the local factor of f at p^a.
    pub fn f_prime_power(&self, p: u64, a: u32) -> C64 {
        (0..=a / self.k).map(|j| self.h_prime_power(p, j)).sum()
    }
}

/// A preset together with the coprimality modulus its corollary uses.
#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub spec: FunctionSpec,
    pub q: u64,
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 7] = [
    "squarefree",
    "kfree:k",
    "phi-over-n",
    "sigma:a",
    "sign-omega-k:k",
    "schemmel:m",
    "totient-character:q,v1,...,v(q-1)",
];

fn parse_num<T: std::str::FromStr>(name: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("preset `{name}`: cannot parse `{s}`")))
}

/// Resolve a preset name such as `kfree:3` or `totient-character:3,1,-1`.
pub fn preset(name: &str) -> Result<Preset> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h.trim(), Some(a.trim())),
        None => (name.trim(), None),
    };
    let one = C64::new(1.0, 0.0);
    let need = |what: &str| Error::InvalidSpec(format!("preset `{head}` needs an argument ({what})"));
    let spec = match head {
        "squarefree" => FunctionSpec::new(2, 0.0, one, Sign::Plus, Variant::MobiusTwisted, "squarefree")?,
        "kfree" => {
            let k: u32 = parse_num(head, arg.ok_or_else(|| need("k"))?)?;
            if k < 2 {
                return Err(Error::InvalidSpec("kfree needs k >= 2".into()));
            }
            FunctionSpec::new(k, 0.0, one, Sign::Plus, Variant::MobiusTwisted, format!("kfree:{k}"))?
        }
        "phi-over-n" => FunctionSpec::new(1, 1.0, one, Sign::Plus, Variant::MobiusTwisted, "phi-over-n")?,
        "sigma" => {
            let a: f64 = parse_num(head, arg.ok_or_else(|| need("exponent a in (-2,-1/2)"))?)?;
            if !(a > -2.0 && a < -0.5) {
                return Err(Error::InvalidSpec(format!("sigma:a needs a in (-2, -1/2), got {a}")));
            }
            FunctionSpec::new(1, -a, one, Sign::Plus, Variant::CompletelyMultiplicative, format!("sigma:{a}"))?
        }
        "sign-omega-k" => {
            let k: u32 = parse_num(head, arg.ok_or_else(|| need("k"))?)?;
            if k < 2 {
                return Err(Error::InvalidSpec("sign-omega-k needs k >= 2".into()));
            }
            let two = C64::new(2.0, 0.0);
            FunctionSpec::new(k, 0.0, two, Sign::Plus, Variant::MobiusTwisted, format!("sign-omega-k:{k}"))?
        }
        "schemmel" => {
            let m: u32 = parse_num(head, arg.ok_or_else(|| need("m"))?)?;
            if m < 1 {
                return Err(Error::InvalidSpec("schemmel needs m >= 1".into()));
            }
            let beta = C64::new(m as f64, 0.0);
            let spec = FunctionSpec::new(1, 1.0, beta, Sign::Plus, Variant::MobiusTwisted, format!("schemmel:{m}"))?;
            let q = crate::primes::sieve_primes(m as u64).iter().product();
            return Ok(Preset { spec, q });
        }
        "totient-character" => {
            let arg = arg.ok_or_else(|| need("q,values"))?;
            let mut parts = arg.split(',');
            let q: u64 = parse_num(head, parts.next().unwrap_or(""))?;
            let vals = parts.map(|v| parse_num::<i8>(head, v)).collect::<Result<Vec<_>>>()?;
            let chi = RealCharacter::from_residues(q, &vals)?;
            FunctionSpec::new(1, 1.0, one, Sign::Plus, Variant::MobiusTwisted, format!("totient-character:{arg}"))?
                .with_character(chi)?
        }
        _ => {
            return Err(Error::InvalidSpec(format!(
                "unknown preset `{name}`; known: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(Preset { spec, q: 1 })
}

/// The presets exercised by the invariant suites.
pub fn standard_presets() -> Vec<FunctionSpec> {
    [
        "squarefree",
        "kfree:3",
        "kfree:4",
        "phi-over-n",
        "sigma:-0.75",
        "sign-omega-k:2",
        "sign-omega-k:3",
        "schemmel:2",
        "totient-character:3,1,-1",
    ]
    .iter()
    .map(|n| preset(n).expect("built-in preset").spec)
    .collect()
}

/// Squarefree part test and μ-support helper for tests and oracles.
pub fn is_kth_power_free(n: u64, k: u32) -> bool {
    factorize(n).iter().all(|&(_, a)| a < k)
}
