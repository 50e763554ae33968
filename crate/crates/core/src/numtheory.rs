//! Binomial, factorial and p-adic helpers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a power of two")]
    NotPowerOfTwo(u64),
    #[error("need 0 <= i <= n, got i={i}, n={n}")]
    BadIndex { n: u64, i: u64 },
    #[error("2^(2m-1) does not divide (2m)! for m={0}")]
    NotIntegral(u64),
    #[error("argument out of range: {0}")]
    Range(String),
}

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn is_power_of(n: u64, p: u64) -> Option<u32> {
    if n == 0 || p < 2 {
        return None;
    }
    let (mut n, mut e) = (n, 0);
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    (n == 1).then_some(e)
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `Some((p, e))` when `n = p^e` with `p` prime and `e >= 1`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    match prime_factors(n).as_slice() {
        [p] => Some((*p, is_power_of(n, *p).unwrap())),
        _ => None,
    }
}

fn digits(mut n: u64, p: u64) -> Vec<u64> {
    let mut d = Vec::new();
    while n > 0 {
        d.push(n % p);
        n /= p;
    }
    d
}

/// `binom(n, i) ≢ 0 (mod p)`, decided digit by digit in base `p`.
pub fn binom_nonzero_mod_p(n: u64, i: u64, p: u64) -> Result<bool, NumError> {
    if !is_prime(p) {
        return Err(NumError::NotPrime(p));
    }
    if i > n {
        return Err(NumError::BadIndex { n, i });
    }
    let dn = digits(n, p);
    let di = digits(i, p);
    Ok(di
        .iter()
        .enumerate()
        .all(|(k, &a)| a <= dn.get(k).copied().unwrap_or(0)))
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// Exponent of `p` in `m!`, from the base-`p` digits of `m`.
pub fn factorial_valuation(m: u64, p: u64) -> Result<u64, NumError> {
    if !is_prime(p) {
        return Err(NumError::NotPrime(p));
    }
    let mut total = 0;
    let mut pk = 1u64; // p^i
    for a in digits(m, p) {
        total += a * ((pk - 1) / (p - 1));
        pk = pk.saturating_mul(p);
    }
    Ok(total)
}

/// `(2m)!/2^(2m-1) mod modulus` for `m` and `modulus` powers of two.
pub fn factorial_odd_part_mod(m: u64, modulus: u64) -> Result<BigInt, NumError> {
    if is_power_of(m, 2).is_none() {
        return Err(NumError::NotPowerOfTwo(m));
    }
    if is_power_of(modulus, 2).is_none() {
        return Err(NumError::NotPowerOfTwo(modulus));
    }
    let f = factorial(2 * m);
    let d = BigInt::one() << (2 * m - 1);
    let (q, r) = f.div_rem(&d);
    if !r.is_zero() {
        return Err(NumError::NotIntegral(m));
    }
    Ok(q.mod_floor(&BigInt::from(modulus)))
}

/// `binom(2m, m) mod modulus`.
pub fn central_binomial_mod(m: u64, modulus: u64) -> Result<BigInt, NumError> {
    if m == 0 || modulus == 0 {
        return Err(NumError::Range("m and modulus must be positive".into()));
    }
    Ok(binomial(2 * m, m).mod_floor(&BigInt::from(modulus)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lucas_examples() {
        assert!(!binom_nonzero_mod_p(4, 2, 2).unwrap());
        assert!(!binom_nonzero_mod_p(12, 6, 3).unwrap());
        assert!(binom_nonzero_mod_p(17, 0, 5).unwrap());
        assert!(binom_nonzero_mod_p(4, 2, 4).is_err());
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(factorial_valuation(0, 2).unwrap(), 0);
        assert_eq!(factorial_valuation(4, 2).unwrap(), 3);
        assert_eq!(factorial_valuation(9, 3).unwrap(), 4);
    }

    #[test]
    fn odd_part_examples() {
        assert_eq!(factorial_odd_part_mod(2, 64).unwrap(), BigInt::from(3));
        assert_eq!(factorial_odd_part_mod(16, 64).unwrap(), BigInt::from(11));
        assert_eq!(factorial_odd_part_mod(32, 64).unwrap(), BigInt::from(11));
        assert!(factorial_odd_part_mod(3, 64).is_err());
    }

    #[test]
    fn central_binomial_examples() {
        assert_eq!(central_binomial_mod(16, 8).unwrap(), BigInt::from(6));
        assert_eq!(central_binomial_mod(1, 8).unwrap(), BigInt::from(2));
        assert_eq!(central_binomial_mod(18, 3).unwrap(), BigInt::zero());
    }

    #[test]
    fn prime_power_detection() {
        assert_eq!(prime_power(27), Some((3, 3)));
        assert_eq!(prime_power(2), Some((2, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }
}
