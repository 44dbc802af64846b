//! Base-p digits, binomials modulo p, and the alternating double sum
//! `S(k, r) = sum_{i,j} (-1)^(i+j) C(k,i) C(k,j) (i-j)^r`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Base-p digits of `n`, least significant first. Empty for `n = 0`.
pub fn base_p_digits(mut n: u64, p: u64) -> Vec<u64> {
    let mut digits = Vec::new();
    while n > 0 {
        digits.push(n % p);
        n /= p;
    }
    digits
}

/// An exponent together with its base-p digit profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentProfile {
    pub n: u64,
    pub p: u64,
    /// Least significant first; digit `i` pairs with the Frobenius power `i`.
    pub digits: Vec<u64>,
    pub digit_sum: u64,
}

impl ExponentProfile {
    pub fn new(n: u64, p: u64) -> Self {
        let digits = base_p_digits(n, p);
        let digit_sum = digits.iter().sum();
        ExponentProfile {
            n,
            p,
            digits,
            digit_sum,
        }
    }

    /// Digits padded with zeros to `width` entries.
    pub fn padded(&self, width: usize) -> Vec<u64> {
        let mut d = self.digits.clone();
        d.resize(width.max(d.len()), 0);
        d
    }
}

/// Small binomial coefficient, exact.
pub fn binomial_u64(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// C(alpha, beta) mod p via Lucas' theorem, with C(n, k) = 0 for n < k.
pub fn lucas_binomial(mut alpha: u64, mut beta: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while beta > 0 || alpha > 0 {
        let (a, b) = (alpha % p, beta % p);
        if b > a {
            return 0;
        }
        acc = acc * (binomial_u64(a, b) % p) % p;
        alpha /= p;
        beta /= p;
    }
    acc % p
}

pub fn binomial_big(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial_big(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// The double sum evaluated term by term over the integers.
pub fn s_direct(k: u64, r: u32) -> BigInt {
    let mut total = BigInt::zero();
    for i in 0..=k {
        for j in 0..=k {
            let term =
                binomial_big(k, i) * binomial_big(k, j) * BigInt::from(i as i64 - j as i64).pow(r);
            if (i + j) % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
        }
    }
    total
}

/// Closed forms: zero for odd `r` or `r < 2k`, `(-1)^k (2k)!` at `r = 2k`,
/// and `(-1)^k (2k)! k(k+1)(2k+1)/6` at `r = 2k + 2`. `None` elsewhere.
pub fn s_closed(k: u64, r: u32) -> Option<BigInt> {
    let r = r as u64;
    if r % 2 == 1 || r < 2 * k {
        return Some(BigInt::zero());
    }
    let sign = if k.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    };
    let base = sign * factorial_big(2 * k);
    if r == 2 * k {
        Some(base)
    } else if r == 2 * k + 2 {
        Some(base * BigInt::from(k * (k + 1) * (2 * k + 1) / 6))
    } else {
        None
    }
}

/// Reduces an exact integer into `[0, p)`.
pub fn big_mod(x: &BigInt, p: u64) -> u64 {
    let m = BigInt::from(p);
    let r = x % &m;
    let r = if r.is_negative() { r + m } else { r };
    r.try_into().expect("residue fits in u64")
}
