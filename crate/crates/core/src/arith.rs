//! Integer helpers shared by the semi-local backend and the linear algebra.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The part of `n` built from primes in `primes`, as a nonnegative integer.
/// `s_part(0) = 0`.
pub fn s_part(n: &BigInt, primes: &[u64]) -> BigInt {
    if n.is_zero() {
        return BigInt::zero();
    }
    let mut out = BigInt::one();
    let mut rest = n.abs();
    for &p in primes {
        let p = BigInt::from(p);
        while (&rest % &p).is_zero() {
            rest /= &p;
            out *= &p;
        }
    }
    out
}

/// True when `n` is divisible by none of `primes` (and nonzero).
pub fn coprime_to(n: &BigInt, primes: &[u64]) -> bool {
    !n.is_zero() && primes.iter().all(|&p| !(n % BigInt::from(p)).is_zero())
}

pub fn valuation(n: &BigInt, p: u64) -> u32 {
    assert!(!n.is_zero(), "valuation of zero");
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    v
}

/// Inverse of `a` modulo `m` (m ≥ 1), when it exists. Result lies in `[0, m)`.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

pub fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::zero();
    }
    a.lcm(b)
}

/// Prime factors (distinct, ascending) of a small positive integer.
pub fn prime_factors(n: &BigInt, primes: &[u64]) -> Vec<u64> {
    primes
        .iter()
        .copied()
        .filter(|&p| !n.is_zero() && (n % BigInt::from(p)).is_zero())
        .collect()
}
