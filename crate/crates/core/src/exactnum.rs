//! Exact arithmetic: big rationals, truncated polynomial rings and cyclotomic numbers.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use num_rational::BigRational as Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("ring parameters differ: {0}")]
    RingMismatch(String),
    #[error("modulus must be positive")]
    BadModulus,
    #[error("pole: zeta^{k} = 1 in conductor {n}")]
    Pole { n: u32, k: i64 },
    #[error("conductor must be positive")]
    BadConductor,
    #[error("element is not invertible")]
    NotInvertible,
    #[error("conductor mismatch: {0} vs {1}")]
    ConductorMismatch(u32, u32),
}

/// `n/d` as a reduced big rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int<T: Into<BigInt>>(n: T) -> Rat {
    Rat::from_integer(n.into())
}

/// `true` iff `x` has denominator 1.
pub fn is_integral(x: &Rat) -> bool {
    x.denom().is_one()
}

/// Exponent of the prime `p` in `|x|` (zero maps to `u64::MAX`).
pub fn valuation(x: &BigInt, p: u64) -> u64 {
    if x.is_zero() {
        return u64::MAX;
    }
    let p = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

/// Non-negative residue of `x` modulo `m`.
pub fn mod_floor(x: &BigInt, m: &BigInt) -> BigInt {
    x.mod_floor(m)
}

pub fn fmt_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Serde adapters that write big numbers as decimal strings.
pub mod ser {
    use super::Rat;
    use num_bigint::BigInt;
    use serde::ser::{SerializeMap, SerializeSeq};
    use serde::Serializer;

    struct R<'a>(&'a Rat);

    impl serde::Serialize for R<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            let mut m = s.serialize_map(Some(2))?;
            m.serialize_entry("num", &self.0.numer().to_string())?;
            m.serialize_entry("den", &self.0.denom().to_string())?;
            m.end()
        }
    }

    pub fn rat<S: Serializer>(x: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_some(&R(x))
    }

    pub fn opt_rat<S: Serializer>(x: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_some(&R(x)),
            None => s.serialize_none(),
        }
    }

    pub fn rat_vec<S: Serializer>(xs: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&R(x))?;
        }
        seq.end()
    }

    pub fn int<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn opt_int<S: Serializer>(x: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_str(&x.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn int_vec<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }
}

// ---------------------------------------------------------------------------
// Truncated polynomials

/// Polynomial in one generator, truncated at a fixed order, optionally reduced
/// modulo a positive integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncPoly {
    coeffs: Vec<BigInt>,
    modulus: Option<BigInt>,
    gen_degree: u32,
}

impl TruncPoly {
    /// Builds a polynomial from its low coefficients; missing ones are zero and
    /// anything at or beyond `order` is dropped.
    pub fn new(
        coeffs: Vec<BigInt>,
        order: usize,
        modulus: Option<BigInt>,
        gen_degree: u32,
    ) -> Result<Self, ExactError> {
        if let Some(m) = &modulus {
            if !m.is_positive() {
                return Err(ExactError::BadModulus);
            }
        }
        let mut c = coeffs;
        c.resize(order, BigInt::zero());
        let mut p = TruncPoly {
            coeffs: c,
            modulus,
            gen_degree,
        };
        p.reduce();
        Ok(p)
    }

    pub fn from_i64(
        coeffs: &[i64],
        order: usize,
        modulus: Option<i64>,
        gen_degree: u32,
    ) -> Result<Self, ExactError> {
        Self::new(
            coeffs.iter().map(|&c| BigInt::from(c)).collect(),
            order,
            modulus.map(BigInt::from),
            gen_degree,
        )
    }

    pub fn one(order: usize, modulus: Option<BigInt>, gen_degree: u32) -> Result<Self, ExactError> {
        Self::new(vec![BigInt::one()], order, modulus, gen_degree)
    }

    /// `1 + a·x`.
    pub fn linear(
        a: BigInt,
        order: usize,
        modulus: Option<BigInt>,
        gen_degree: u32,
    ) -> Result<Self, ExactError> {
        Self::new(vec![BigInt::one(), a], order, modulus, gen_degree)
    }

    fn reduce(&mut self) {
        if let Some(m) = &self.modulus {
            for c in &mut self.coeffs {
                *c = c.mod_floor(m);
            }
        }
    }

    pub fn trunc_order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn modulus(&self) -> Option<&BigInt> {
        self.modulus.as_ref()
    }

    pub fn gen_degree(&self) -> u32 {
        self.gen_degree
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of `x^i`; zero past the truncation order.
    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    fn check_same_ring(&self, other: &Self) -> Result<(), ExactError> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(ExactError::RingMismatch(format!(
                "trunc order {} vs {}",
                self.coeffs.len(),
                other.coeffs.len()
            )));
        }
        if self.modulus != other.modulus {
            return Err(ExactError::RingMismatch("modulus".into()));
        }
        if self.gen_degree != other.gen_degree {
            return Err(ExactError::RingMismatch("generator degree".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, ExactError> {
        self.check_same_ring(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        out.reduce();
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ExactError> {
        self.check_same_ring(other)?;
        let n = self.coeffs.len();
        let mut c = vec![BigInt::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n - i).enumerate() {
                c[i + j] += a * b;
            }
        }
        let mut out = TruncPoly {
            coeffs: c,
            modulus: self.modulus.clone(),
            gen_degree: self.gen_degree,
        };
        out.reduce();
        Ok(out)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = TruncPoly {
            coeffs: {
                let mut v = vec![BigInt::zero(); self.coeffs.len()];
                if let Some(c) = v.first_mut() {
                    *c = BigInt::one();
                }
                v
            },
            modulus: self.modulus.clone(),
            gen_degree: self.gen_degree,
        };
        acc.reduce();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same ring");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same ring");
            }
        }
        acc
    }

    /// Same coefficients reduced into a new modulus (which must divide the old one
    /// when one is present).
    pub fn reduce_mod(&self, m: &BigInt) -> Result<Self, ExactError> {
        if !m.is_positive() {
            return Err(ExactError::BadModulus);
        }
        if let Some(old) = &self.modulus {
            if !old.is_multiple_of(m) {
                return Err(ExactError::RingMismatch(format!(
                    "{m} does not divide modulus {old}"
                )));
            }
        }
        Self::new(
            self.coeffs.clone(),
            self.coeffs.len(),
            Some(m.clone()),
            self.gen_degree,
        )
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.iter().enumerate().all(|(i, c)| {
            if i == 0 {
                match &self.modulus {
                    Some(m) if m.is_one() => true,
                    _ => c.is_one(),
                }
            } else {
                c.is_zero()
            }
        })
    }

    fn gen_name(&self) -> &'static str {
        if self.gen_degree == 4 {
            "v"
        } else {
            "u"
        }
    }
}

impl fmt::Display for TruncPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.gen_name();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (neg, mag) = (c.is_negative(), c.abs());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}")?;
                    }
                    if i == 1 {
                        write!(f, "{x}")?;
                    } else {
                        write!(f, "{x}^{i}")?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        if let Some(m) = &self.modulus {
            write!(f, " mod ({m}, {x}^{})", self.coeffs.len())?;
        } else {
            write!(f, " mod {x}^{}", self.coeffs.len())?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Dense polynomials over Q (helpers for the cyclotomic field)

fn trim(p: &mut Vec<Rat>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut c = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    trim(&mut c);
    c
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len().max(b.len());
    let mut c: Vec<Rat> = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(Rat::zero);
            let y = b.get(i).cloned().unwrap_or_else(Rat::zero);
            x - y
        })
        .collect();
    trim(&mut c);
    c
}

/// Quotient and remainder; `b` must be nonzero and trimmed.
fn poly_divrem(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![Rat::zero(); r.len() - db];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = r.last().unwrap() / &lead;
        for (i, y) in b.iter().enumerate() {
            r[shift + i] -= &c * y;
        }
        q[shift] = c;
        r.pop();
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

/// The `n`-th cyclotomic polynomial with integer coefficients, low degree first.
pub fn cyclotomic_polynomial(n: u32) -> Vec<BigInt> {
    assert!(n > 0);
    // x^n - 1 divided by Phi_d for every proper divisor d.
    let mut num: Vec<Rat> = vec![Rat::zero(); n as usize + 1];
    num[0] = -Rat::one();
    num[n as usize] = Rat::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            let phi: Vec<Rat> = cyclotomic_polynomial(d)
                .into_iter()
                .map(Rat::from_integer)
                .collect();
            let (q, r) = poly_divrem(&num, &phi);
            debug_assert!(r.is_empty());
            num = q;
        }
    }
    num.into_iter().map(|c| c.to_integer()).collect()
}

pub fn euler_phi(n: u32) -> u32 {
    (1..=n).filter(|k| k.gcd(&n) == 1).count() as u32
}

/// Element of the `N`-th cyclotomic field in the power basis `1, z, .., z^{φ(N)-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycloNum {
    conductor: u32,
    coeffs: Vec<Rat>,
}

impl CycloNum {
    fn modulus_poly(n: u32) -> Vec<Rat> {
        cyclotomic_polynomial(n)
            .into_iter()
            .map(Rat::from_integer)
            .collect()
    }

    fn from_poly(n: u32, p: Vec<Rat>) -> Self {
        let phi = Self::modulus_poly(n);
        let (_, mut r) = poly_divrem(&p, &phi);
        r.resize(euler_phi(n) as usize, Rat::zero());
        CycloNum {
            conductor: n,
            coeffs: r,
        }
    }

    pub fn from_rat(n: u32, x: Rat) -> Result<Self, ExactError> {
        if n == 0 {
            return Err(ExactError::BadConductor);
        }
        Ok(Self::from_poly(n, vec![x]))
    }

    pub fn zero(n: u32) -> Result<Self, ExactError> {
        Self::from_rat(n, Rat::zero())
    }

    pub fn one(n: u32) -> Result<Self, ExactError> {
        Self::from_rat(n, Rat::one())
    }

    /// `ζ_N^k` for any integer `k`.
    pub fn zeta_pow(n: u32, k: i64) -> Result<Self, ExactError> {
        if n == 0 {
            return Err(ExactError::BadConductor);
        }
        let e = k.rem_euclid(n as i64) as usize;
        let mut p = vec![Rat::zero(); e + 1];
        p[e] = Rat::one();
        Ok(Self::from_poly(n, p))
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    fn check(&self, o: &Self) -> Result<(), ExactError> {
        if self.conductor != o.conductor {
            return Err(ExactError::ConductorMismatch(self.conductor, o.conductor));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, ExactError> {
        self.check(o)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&o.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CycloNum {
            conductor: self.conductor,
            coeffs,
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self, ExactError> {
        self.check(o)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&o.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CycloNum {
            conductor: self.conductor,
            coeffs,
        })
    }

    pub fn mul(&self, o: &Self) -> Result<Self, ExactError> {
        self.check(o)?;
        Ok(Self::from_poly(
            self.conductor,
            poly_mul(&self.coeffs, &o.coeffs),
        ))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        CycloNum {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm modulo `Φ_N`.
    pub fn inv(&self) -> Result<Self, ExactError> {
        let mut a = self.coeffs.clone();
        trim(&mut a);
        if a.is_empty() {
            return Err(ExactError::NotInvertible);
        }
        let (mut r0, mut r1) = (Self::modulus_poly(self.conductor), a);
        let (mut s0, mut s1): (Vec<Rat>, Vec<Rat>) = (Vec::new(), vec![Rat::one()]);
        while !r1.is_empty() {
            let (q, r) = poly_divrem(&r0, &r1);
            let s = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
        }
        if r0.len() != 1 {
            return Err(ExactError::NotInvertible);
        }
        let c = r0[0].recip();
        let s: Vec<Rat> = s0.into_iter().map(|x| x * &c).collect();
        Ok(Self::from_poly(self.conductor, s))
    }

    /// The rational value when every non-constant coefficient vanishes.
    pub fn as_rational(&self) -> Option<Rat> {
        if self.coeffs.iter().skip(1).all(Zero::is_zero) {
            Some(self.coeffs.first().cloned().unwrap_or_else(Rat::zero))
        } else {
            None
        }
    }
}

/// `(ζ^k + 1)/(ζ^k − 1)` for `ζ = e^{2πi/N}`; exact zero when `ζ^k = −1`.
pub fn cyclo_eval_ratio(n: u32, k: i64) -> Result<CycloNum, ExactError> {
    if n == 0 {
        return Err(ExactError::BadConductor);
    }
    let e = k.rem_euclid(n as i64);
    if e == 0 {
        return Err(ExactError::Pole { n, k });
    }
    if 2 * e == n as i64 {
        return CycloNum::zero(n);
    }
    let z = CycloNum::zeta_pow(n, e)?;
    let one = CycloNum::one(n)?;
    z.add(&one)?.mul(&z.sub(&one)?.inv()?)
}

/// Least common multiple of a list of positive integers.
pub fn lcm_all(xs: impl IntoIterator<Item = u32>) -> u32 {
    xs.into_iter().fold(1u32, |a, b| a.lcm(&b))
}

/// Converts a small non-negative big integer.
pub fn to_u64(x: &BigInt) -> Option<u64> {
    x.to_u64()
}
