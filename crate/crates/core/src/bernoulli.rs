//! Bernoulli numbers in the positive convention `B_n = |B_{2n}|`.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::{ser, Rat};
use crate::numtheory::{binomial, is_prime};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BernoulliError {
    #[error("Bernoulli index starts at 1")]
    ZeroIndex,
    #[error("residue lemma needs 2^k > 8, got k={0}")]
    OutOfRange(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BernoulliEntry {
    pub index: u64,
    #[serde(serialize_with = "ser::rat")]
    pub value: Rat,
    /// `N_n`
    #[serde(serialize_with = "ser::int")]
    pub numerator: BigInt,
    /// `D_n`, so that `value = N_n / (2 D_n)`
    #[serde(serialize_with = "ser::int")]
    pub odd_denominator: BigInt,
}

/// Signed Bernoulli numbers `b_0, b_1, ...` with `b_1 = -1/2`.
fn signed_table() -> &'static RwLock<Vec<Rat>> {
    static T: OnceLock<RwLock<Vec<Rat>>> = OnceLock::new();
    T.get_or_init(|| RwLock::new(vec![Rat::one(), Rat::new((-1).into(), 2.into())]))
}

/// Standard signed `b_j` for `j <= upto`, extending the shared table as needed.
fn signed(upto: usize) -> Vec<Rat> {
    {
        let t = signed_table().read().unwrap();
        if t.len() > upto {
            return t[..=upto].to_vec();
        }
    }
    let mut t = signed_table().write().unwrap();
    while t.len() <= upto {
        let m = t.len();
        let b = if m % 2 == 1 {
            Rat::zero()
        } else {
            // sum_{j<m} binom(m+1, j) b_j + (m+1) b_m = 0; odd j > 1 vanish
            let mut s = Rat::zero();
            for (j, bj) in t.iter().enumerate() {
                if j > 1 && j % 2 == 1 {
                    continue;
                }
                s += bj * Rat::from_integer(binomial(m as u64 + 1, j as u64));
            }
            -s / Rat::from_integer(BigInt::from(m + 1))
        };
        t.push(b);
    }
    t[..=upto].to_vec()
}

/// `B_n = |B_{2n}|`, computed by the classical recurrence.
pub fn bernoulli(n: u64) -> Result<Rat, BernoulliError> {
    if n == 0 {
        return Err(BernoulliError::ZeroIndex);
    }
    let t = signed(2 * n as usize);
    Ok(t[2 * n as usize].abs())
}

/// Worpitzky's double sum; shares no code with [`bernoulli`].
pub fn worpitzky(n: u64) -> Result<Rat, BernoulliError> {
    if n == 0 {
        return Err(BernoulliError::ZeroIndex);
    }
    let e = 2 * n;
    let mut total = Rat::zero();
    for r in 0..=e {
        let mut inner = BigInt::zero();
        let mut binom = BigInt::one(); // binom(r, s)
        for s in 0..=r {
            let term = &binom * BigInt::from(s).pow(e as u32);
            if s % 2 == 0 {
                inner += term;
            } else {
                inner -= term;
            }
            binom = binom * (r - s) / (s + 1);
        }
        total += Rat::new(inner, BigInt::from(r + 1));
    }
    if n.is_multiple_of(2) {
        total = -total;
    }
    Ok(total)
}

/// `D_n`: product of the odd primes `p` with `(p - 1) | 2n`.
pub fn cs_denominator(n: u64) -> BigInt {
    let mut d = BigInt::one();
    for p in 3..=2 * n + 1 {
        if (2 * n).is_multiple_of(p - 1) && is_prime(p) {
            d *= p;
        }
    }
    d
}

pub fn entry(n: u64) -> Result<BernoulliEntry, BernoulliError> {
    let value = bernoulli(n)?;
    let numerator = value.numer().clone();
    let (odd_denominator, r) = value.denom().div_rem(&BigInt::from(2));
    debug_assert!(r.is_zero());
    Ok(BernoulliEntry {
        index: n,
        value,
        numerator,
        odd_denominator,
    })
}

/// `(N_n mod 64, D_n mod 64)` for `n = 2^k`, `k >= 4`.
pub fn residue_lemma_check(k: u32) -> Result<(u32, u32), BernoulliError> {
    if k < 4 {
        return Err(BernoulliError::OutOfRange(k));
    }
    let e = entry(1u64 << k)?;
    let m = BigInt::from(64);
    let r = |x: &BigInt| -> u32 { x.mod_floor(&m).try_into().unwrap() };
    Ok((r(&e.numerator), r(&e.odd_denominator)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    #[test]
    fn small_values() {
        assert_eq!(bernoulli(1).unwrap(), rat(1, 6));
        assert_eq!(bernoulli(2).unwrap(), rat(1, 30));
        assert_eq!(bernoulli(8).unwrap(), rat(3617, 510));
        assert_eq!(bernoulli(9).unwrap(), rat(43867, 798));
        assert!(bernoulli(0).is_err());
    }

    #[test]
    fn worpitzky_values() {
        assert_eq!(worpitzky(1).unwrap(), rat(1, 6));
        assert_eq!(worpitzky(2).unwrap(), rat(1, 30));
        assert_eq!(worpitzky(8).unwrap(), rat(3617, 510));
    }

    #[test]
    fn denominators() {
        assert_eq!(cs_denominator(1), BigInt::from(3));
        assert_eq!(cs_denominator(4), BigInt::from(15));
        assert_eq!(cs_denominator(18), BigInt::from(959595));
    }

    #[test]
    fn residue_lemma_range() {
        assert!(residue_lemma_check(3).is_err());
        assert_eq!(residue_lemma_check(4).unwrap(), (1, 63));
    }
}
