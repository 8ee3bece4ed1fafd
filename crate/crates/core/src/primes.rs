//! Prime tables, trial-division factorization and integer roots.

use std::sync::OnceLock;

/// Primes below this bound are memoized once and shared read-only.
const SHARED_LIMIT: u64 = 1 << 22;

static SHARED: OnceLock<Vec<u64>> = OnceLock::new();

/// Sieve of Eratosthenes over [2, n].
pub fn sieve_primes(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::with_capacity(n / 10 + 16);
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// All primes `p <= n`, served from the shared table when possible.
pub fn primes_up_to(n: u64) -> std::borrow::Cow<'static, [u64]> {
    if n <= SHARED_LIMIT {
        let table = SHARED.get_or_init(|| sieve_primes(SHARED_LIMIT));
        let end = table.partition_point(|&p| p <= n);
        std::borrow::Cow::Borrowed(&table[..end])
    } else {
        std::borrow::Cow::Owned(sieve_primes(n))
    }
}

/// Prime factorization by trial division, ascending primes.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n <= 1 {
        return out;
    }
    let mut push = |p: u64, n: &mut u64| {
        let mut a = 0;
        while *n % p == 0 {
            *n /= p;
            a += 1;
        }
        if a > 0 {
            out.push((p, a));
        }
    };
    push(2, &mut n);
    push(3, &mut n);
    let mut p = 5u64;
    while p.saturating_mul(p) <= n {
        push(p, &mut n);
        push(p + 2, &mut n);
        p += 6;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).first() == Some(&(n, 1))
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `base^exp`, or `None` on overflow.
pub fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Largest r with r^k <= n.
pub fn iroot(n: u64, k: u32) -> u64 {
    if k == 1 || n < 2 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    while r > 0 && checked_pow(r, k).map_or(true, |v| v > n) {
        r -= 1;
    }
    while checked_pow(r + 1, k).map_or(false, |v| v <= n) {
        r += 1;
    }
    r
}

/// Product of the distinct primes dividing n.
pub fn radical(n: u64) -> u64 {
    factorize(n).iter().map(|&(p, _)| p).product()
}
