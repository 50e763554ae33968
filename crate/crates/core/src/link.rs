//! Chern classes of the standard contact structure on `S^{2n-1}/G` and the
//! cohomology of `BG` used to annotate reports.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::{ExactError, TruncPoly};
use crate::groups::ActionSpec;
use crate::numtheory::is_prime;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinkError {
    #[error("{p} is not a prime dividing |G| = {order}")]
    BadPrime { p: u64, order: u64 },
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Total Chern class of `ξ_std` in `H^*(S^{2n-1}/G)`, generator `u` (degree 2) for
/// cyclic groups and `v` (degree 4) for the binary polyhedral ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkChernClass {
    #[serde(serialize_with = "ser_poly")]
    pub poly: TruncPoly,
    pub generator_degree: u32,
}

fn ser_poly<S: serde::Serializer>(p: &TruncPoly, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

/// Three-valued answer for Chern queries the ring data cannot always settle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChernQuery {
    Nonzero,
    Zero,
    Unknown,
}

impl ChernQuery {
    pub fn is_nonzero(self) -> bool {
        self == ChernQuery::Nonzero
    }
}

pub fn total_chern(spec: &ActionSpec) -> Result<LinkChernClass, LinkError> {
    let poly = match spec {
        ActionSpec::Cyclic { m: 1, weights } => TruncPoly::one(weights.len(), None, 2)?,
        ActionSpec::Cyclic { m, weights } => {
            let n = weights.len();
            let modulus = Some(BigInt::from(*m));
            let mut acc = TruncPoly::one(n, modulus.clone(), 2)?;
            for &a in weights {
                acc = acc.mul(&TruncPoly::linear(BigInt::from(a), n, modulus.clone(), 2)?)?;
            }
            acc
        }
        _ => {
            let copies = spec.copies().unwrap() as usize;
            let modulus = Some(BigInt::from(spec.group_order()));
            TruncPoly::linear(-BigInt::one(), copies, modulus, 4)?.pow(copies as u64)
        }
    };
    let generator_degree = poly.gen_degree();
    Ok(LinkChernClass {
        poly,
        generator_degree,
    })
}

/// Whether `c_k(ξ_std)` (cohomological degree `2k`) is nonzero mod `p`.
pub fn chern_nonzero_mod_p(spec: &ActionSpec, k: u64, p: u64) -> Result<ChernQuery, LinkError> {
    let order = spec.group_order();
    if !is_prime(p) || !order.is_multiple_of(p) {
        return Err(LinkError::BadPrime { p, order });
    }
    if k == 0 {
        return Ok(ChernQuery::Nonzero);
    }
    let c = total_chern(spec)?;
    let idx = if c.generator_degree == 4 {
        if k % 2 == 1 {
            return Ok(ChernQuery::Unknown);
        }
        k / 2
    } else {
        k
    };
    let coeff = c.poly.coeff(idx as usize);
    Ok(if coeff.is_multiple_of(&BigInt::from(p)) {
        ChernQuery::Zero
    } else {
        ChernQuery::Nonzero
    })
}

/// An abelian group descriptor for `H^d(BG; Z)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "order")]
pub enum GroupOrder {
    Integers,
    Zero,
    Cyclic(u64),
    Unknown,
}

impl std::fmt::Display for GroupOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupOrder::Integers => write!(f, "Z"),
            GroupOrder::Zero => write!(f, "0"),
            GroupOrder::Cyclic(m) => write!(f, "Z/{m}"),
            GroupOrder::Unknown => write!(f, "unknown"),
        }
    }
}

pub fn bg_cohomology_order(spec: &ActionSpec, d: u64) -> GroupOrder {
    if d == 0 {
        return GroupOrder::Integers;
    }
    match spec {
        ActionSpec::Cyclic { m: 1, .. } => GroupOrder::Zero,
        ActionSpec::Cyclic { m, .. } => {
            if d % 2 == 1 {
                GroupOrder::Zero
            } else {
                GroupOrder::Cyclic(*m as u64)
            }
        }
        _ => match d % 4 {
            0 => GroupOrder::Cyclic(spec.group_order()),
            2 => GroupOrder::Unknown,
            _ => GroupOrder::Zero,
        },
    }
}

/// `c_1` as a residue mod `m` for cyclic specs.
pub fn first_chern_cyclic(spec: &ActionSpec) -> Option<u64> {
    match spec {
        ActionSpec::Cyclic { m, weights } => {
            Some(weights.iter().map(|&a| a as u64).sum::<u64>() % *m as u64)
        }
        _ => None,
    }
}

pub fn is_trivial_class(c: &LinkChernClass) -> bool {
    c.poly.coeffs().iter().skip(1).all(Zero::is_zero)
}
