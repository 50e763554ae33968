//! Multiplicative sequences: L-genus, Â-genus and the integral Wu class.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::bernoulli::bernoulli;
use crate::exactnum::{fmt_rat, rat_int, ExactError, Rat, TruncPoly};
use crate::numtheory::{binomial, factorial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenusError {
    #[error("index must be even and positive, got {0}")]
    NotEven(u64),
    #[error("index must be positive")]
    Zero,
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("Wu coefficient is not integral: {0}")]
    NotIntegral(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GenusKind {
    L,
    AHat,
}

/// Weakly decreasing list of positive parts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    fn join(&self, other: &Partition) -> Partition {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Partition::new(v)
    }
}

/// All partitions of `w`, largest part first.
pub fn partitions(w: u32) -> Vec<Partition> {
    fn go(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            go(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(w, w, &mut Vec::new(), &mut out);
    out
}

/// Polynomial in graded generators `x_1, x_2, ...` (`x_i` of weight `i`), stored
/// as a sparse map from monomial partitions to rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymPoly {
    terms: BTreeMap<Partition, Rat>,
}

/// Polynomial in Pontryagin classes `p_i`.
pub type PontryaginPolynomial = SymPoly;
/// Polynomial in Chern classes `c_i`.
pub type ChernPolynomial = SymPoly;

impl SymPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Self::zero();
        p.add_term(Partition::empty(), c);
        p
    }

    pub fn generator(i: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(Partition::new(vec![i]), Rat::one());
        p
    }

    pub fn add_term(&mut self, m: Partition, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Partition, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Partition) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut out = Self::zero();
        for (m, x) in &self.terms {
            out.add_term(m.clone(), x * c);
        }
        out
    }

    /// Product, dropping monomials of weight above `max_weight`.
    pub fn mul_trunc(&self, o: &Self, max_weight: u32) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            let w1 = m1.weight();
            for (m2, c2) in &o.terms {
                if w1 + m2.weight() <= max_weight {
                    out.add_term(m1.join(m2), c1 * c2);
                }
            }
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.mul_trunc(o, u32::MAX)
    }

    /// Homogeneous part of weight `w`.
    pub fn part(&self, w: u32) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.weight() == w {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Replaces generator `x_i` by `images(i)`.
    pub fn substitute(&self, images: impl Fn(u32) -> SymPoly) -> SymPoly {
        let mut cache: BTreeMap<u32, SymPoly> = BTreeMap::new();
        let mut out = SymPoly::zero();
        for (m, c) in &self.terms {
            let mut acc = SymPoly::constant(c.clone());
            for &i in m.parts() {
                let img = cache.entry(i).or_insert_with(|| images(i)).clone();
                acc = acc.mul(&img);
            }
            out = out.add(&acc);
        }
        out
    }

    /// Evaluates with `value(m)` for every monomial.
    pub fn evaluate(&self, value: impl Fn(&Partition) -> Rat) -> Rat {
        self.terms
            .iter()
            .fold(Rat::zero(), |acc, (m, c)| acc + c * value(m))
    }

    /// Renders with generator letter `x` (e.g. `p` or `c`).
    pub fn render(&self, x: &str) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        // heavier first parts first, matching the usual display order
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mag = c.abs();
            let mono = render_monomial(m, x);
            if mono.is_empty() {
                s.push_str(&fmt_rat(&mag));
            } else if mag.is_one() {
                s.push_str(&mono);
            } else {
                s.push_str(&format!("({}){}", fmt_rat(&mag), mono));
            }
        }
        s
    }
}

fn render_monomial(m: &Partition, x: &str) -> String {
    let mut out = String::new();
    let parts = m.parts();
    let mut i = 0;
    while i < parts.len() {
        let p = parts[i];
        let mut e = 0;
        while i < parts.len() && parts[i] == p {
            e += 1;
            i += 1;
        }
        if e == 1 {
            out.push_str(&format!("{x}{p}"));
        } else {
            out.push_str(&format!("{x}{p}^{e}"));
        }
    }
    out
}

impl fmt::Display for SymPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("x"))
    }
}

// ---------------------------------------------------------------------------
// Power series helpers (coefficient vectors, low degree first)

fn series_div(num: &[Rat], den: &[Rat], len: usize) -> Vec<Rat> {
    assert!(!den[0].is_zero());
    let mut q = vec![Rat::zero(); len];
    for k in 0..len {
        let mut s = num.get(k).cloned().unwrap_or_else(Rat::zero);
        for j in 1..=k {
            if let Some(d) = den.get(j) {
                s -= d * &q[k - j];
            }
        }
        q[k] = s / &den[0];
    }
    q
}

/// `log f` for `f(0) = 1`, via `k g_k = k f_k - sum_{j<k} j g_j f_{k-j}`.
fn series_log(f: &[Rat], len: usize) -> Vec<Rat> {
    let mut g = vec![Rat::zero(); len];
    for k in 1..len {
        let kf = Rat::from_integer(BigInt::from(k));
        let mut s = &kf * f.get(k).cloned().unwrap_or_else(Rat::zero);
        for j in 1..k {
            s -= Rat::from_integer(BigInt::from(j))
                * &g[j]
                * f.get(k - j).cloned().unwrap_or_else(Rat::zero);
        }
        g[k] = s / kf;
    }
    g
}

/// Characteristic series of the genus in the variable `z = x²`, up to `z^m`.
pub fn characteristic_series(kind: GenusKind, m: u32) -> Vec<Rat> {
    let len = m as usize + 1;
    let inv_fact = |k: u64| Rat::new(BigInt::one(), factorial(k));
    match kind {
        GenusKind::L => {
            // sqrt(z)/tanh(sqrt(z)) = cosh / (sinh / sqrt(z))
            let cosh: Vec<Rat> = (0..len as u64).map(|k| inv_fact(2 * k)).collect();
            let sinh: Vec<Rat> = (0..len as u64).map(|k| inv_fact(2 * k + 1)).collect();
            series_div(&cosh, &sinh, len)
        }
        GenusKind::AHat => {
            // (sqrt(z)/2)/sinh(sqrt(z)/2)
            let sinh: Vec<Rat> = (0..len as u64)
                .map(|k| inv_fact(2 * k + 1) / Rat::from_integer(BigInt::from(4).pow(k as u32)))
                .collect();
            let one: Vec<Rat> = vec![Rat::one()];
            series_div(&one, &sinh, len)
        }
    }
}

/// Integral Wu series `1 + x + x^3 + x^7 + ...` up to `x^m`.
pub fn wu_series(m: u32) -> Vec<Rat> {
    (0..=m as u64)
        .map(|k| {
            if k == 0 || (k + 1).is_power_of_two() {
                Rat::one()
            } else {
                Rat::zero()
            }
        })
        .collect()
}

/// Power sums `s_1..s_w` of formal roots written in elementary symmetric
/// polynomials `e_i`, via Newton's identities.
fn power_sums(w: u32) -> Vec<SymPoly> {
    let mut s: Vec<SymPoly> = vec![SymPoly::zero()];
    for k in 1..=w {
        let mut sk = SymPoly::generator(k).scale(&Rat::from_integer(BigInt::from(k)));
        if k % 2 == 0 {
            sk = sk.scale(&-Rat::one());
        }
        for i in 1..k {
            let mut t = SymPoly::generator(i).mul(&s[(k - i) as usize]);
            if i % 2 == 0 {
                t = t.scale(&-Rat::one());
            }
            sk = sk.add(&t);
        }
        s.push(sk);
    }
    s
}

/// Weight-`m` term of the multiplicative sequence with characteristic series `f`
/// (`f[0] = 1`), in the elementary symmetric functions of the formal roots.
pub fn multiplicative_sequence(f: &[Rat], m: u32) -> SymPoly {
    assert!(f.first().is_some_and(|c| c.is_one()));
    if m == 0 {
        return SymPoly::constant(Rat::one());
    }
    let log = series_log(f, m as usize + 1);
    let s = power_sums(m);
    let mut x = SymPoly::zero();
    for k in 1..=m as usize {
        x = x.add(&s[k].scale(&log[k]));
    }
    // exp(x) truncated at weight m
    let mut result = SymPoly::constant(Rat::one());
    let mut pow = SymPoly::constant(Rat::one());
    for j in 1..=m {
        pow = pow
            .mul_trunc(&x, m)
            .scale(&Rat::new(BigInt::one(), BigInt::from(j)));
        result = result.add(&pow);
    }
    result.part(m)
}

pub fn genus_in_pontryagin(kind: GenusKind, m: u32) -> Result<PontryaginPolynomial, GenusError> {
    if m == 0 {
        return Err(GenusError::Zero);
    }
    Ok(multiplicative_sequence(&characteristic_series(kind, m), m))
}

/// `p_k` from `sum (-1)^i p_i = (sum c_i)(sum (-1)^i c_i)`.
pub fn pontryagin_in_chern(k: u32) -> ChernPolynomial {
    let mut out = SymPoly::zero();
    for i in 0..=2 * k {
        let j = 2 * k - i;
        let sign = if (k + i).is_multiple_of(2) { 1 } else { -1 };
        out.add_term(Partition::new(vec![i, j]), Rat::from_integer(sign.into()));
    }
    out
}

/// Rewrites a Pontryagin polynomial in Chern classes.
pub fn pontryagin_to_chern(p: &PontryaginPolynomial) -> ChernPolynomial {
    p.substitute(pontryagin_in_chern)
}

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

/// Closed forms for the coefficients of `p_m` and `p_{m/2}^2` in `L_m`.
pub fn alpha_beta(m: u64) -> Result<(Rat, Rat), GenusError> {
    if m == 0 || m % 2 == 1 {
        return Err(GenusError::NotEven(m));
    }
    let bm = bernoulli(m).expect("m >= 1");
    let bh = bernoulli(m / 2).expect("m >= 2");
    let f2m = Rat::from_integer(factorial(2 * m));
    let fm2 = Rat::from_integer(factorial(m) * factorial(m));
    let t = rat_int(pow2(2 * m - 1) - 1);
    let alpha = rat_int(pow2(2 * m)) * &t / &f2m * &bm;
    let s = rat_int(pow2(m - 1) - 1);
    let beta = -(rat_int(pow2(2 * m - 1)) * &t / &f2m * &bm)
        + rat_int(pow2(2 * m - 1)) * &s * &s / fm2 * &bh * &bh;
    Ok((alpha, beta))
}

/// Coefficients of `c_{2m}` and `c_m^2` in `L_m` written in Chern classes.
pub fn a_b_chern(m: u64) -> Result<(Rat, Rat), GenusError> {
    let (a, b) = alpha_beta(m)?;
    Ok((
        Rat::from_integer(2.into()) * &a,
        &a + Rat::from_integer(4.into()) * b,
    ))
}

/// The integral Wu class `v_n` (weight `n/2` in the Chern classes).
pub fn wu_class(n: u32) -> Result<ChernPolynomial, GenusError> {
    if n == 0 || n % 2 == 1 {
        return Err(GenusError::NotEven(n as u64));
    }
    Ok(multiplicative_sequence(&wu_series(n / 2), n / 2))
}

/// Coefficient of the Chern monomial `target` in `v_n`.
pub fn wu_series_coefficient(n: u32, target: &Partition) -> Result<BigInt, GenusError> {
    if n == 0 || n % 2 == 1 {
        return Err(GenusError::NotEven(n as u64));
    }
    if target.weight() == 0 {
        return Ok(BigInt::one());
    }
    if target.weight() != n / 2 {
        return Ok(BigInt::zero());
    }
    let c = wu_class(n)?.coeff(target);
    if !c.denom().is_one() {
        return Err(GenusError::NotIntegral(fmt_rat(&c)));
    }
    Ok(c.to_integer())
}

/// `f(u)^{2^k} f(2u)` for the Wu series `f`, reduced mod `(4, u^{2^{k-1}+1})`.
pub fn wu_cap_restriction(k: u32) -> Result<TruncPoly, GenusError> {
    if !(2..=16).contains(&k) {
        return Err(GenusError::Range(format!(
            "cap restriction needs 2 <= k <= 16, got {k}"
        )));
    }
    let order = (1usize << (k - 1)) + 1;
    let four = Some(BigInt::from(4));
    let f: Vec<BigInt> = wu_series(order as u32)
        .iter()
        .map(|c| c.to_integer())
        .collect();
    let f2: Vec<BigInt> = f
        .iter()
        .enumerate()
        .map(|(i, c)| c * BigInt::from(2).pow(i as u32))
        .collect();
    let fu = TruncPoly::new(f, order, four.clone(), 2)?;
    let f2u = TruncPoly::new(f2, order, four, 2)?;
    Ok(fu.pow(1u64 << k).mul(&f2u)?)
}

/// `binom(2m, m)` as a rational; convenience for closed forms.
pub fn central_binomial(m: u64) -> Rat {
    Rat::from_integer(binomial(2 * m, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.to_vec())
    }

    #[test]
    fn l_genus_low_degrees() {
        let l1 = genus_in_pontryagin(GenusKind::L, 1).unwrap();
        assert_eq!(l1.coeff(&p(&[1])), rat(1, 3));
        assert_eq!(l1.len(), 1);
        let l2 = genus_in_pontryagin(GenusKind::L, 2).unwrap();
        assert_eq!(l2.coeff(&p(&[2])), rat(7, 45));
        assert_eq!(l2.coeff(&p(&[1, 1])), rat(-1, 45));
        assert_eq!(l2.len(), 2);
    }

    #[test]
    fn ahat_two() {
        let a2 = genus_in_pontryagin(GenusKind::AHat, 2).unwrap();
        assert_eq!(a2.coeff(&p(&[2])), rat(-4, 5760));
        assert_eq!(a2.coeff(&p(&[1, 1])), rat(7, 5760));
        let a1 = genus_in_pontryagin(GenusKind::AHat, 1).unwrap();
        assert_eq!(a1.coeff(&p(&[1])), rat(-1, 24));
    }

    #[test]
    fn pontryagin_chern_examples() {
        let p1 = pontryagin_in_chern(1);
        assert_eq!(p1.coeff(&p(&[1, 1])), rat(1, 1));
        assert_eq!(p1.coeff(&p(&[2])), rat(-2, 1));
        assert_eq!(p1.len(), 2);
        let p2 = pontryagin_in_chern(2);
        assert_eq!(p2.coeff(&p(&[2, 2])), rat(1, 1));
        assert_eq!(p2.coeff(&p(&[3, 1])), rat(-2, 1));
        assert_eq!(p2.coeff(&p(&[4])), rat(2, 1));
        assert_eq!(p2.len(), 3);
    }

    #[test]
    fn alpha_beta_examples() {
        assert_eq!(alpha_beta(2).unwrap(), (rat(7, 45), rat(-1, 45)));
        assert_eq!(alpha_beta(4).unwrap(), (rat(381, 14175), rat(-19, 14175)));
        assert!(alpha_beta(3).is_err());
        assert_eq!(a_b_chern(2).unwrap(), (rat(14, 45), rat(1, 15)));
        assert_eq!(a_b_chern(4).unwrap(), (rat(762, 14175), rat(305, 14175)));
    }

    #[test]
    fn wu_examples() {
        // frozen from the explicit-roots oracle in tests/genus_oracles.rs
        let expect = [1, 1, 4, 5, 6, 10, 22, 29];
        for (n, e) in (2..=16).step_by(2).zip(expect) {
            assert_eq!(
                wu_series_coefficient(n, &p(&[n / 2])).unwrap(),
                BigInt::from(e),
                "n={n}"
            );
        }
        assert_eq!(
            wu_series_coefficient(8, &Partition::empty()).unwrap(),
            BigInt::one()
        );
        for k in 2..=5 {
            let half = 1usize << (k - 1);
            let mut expect = vec![1i64, 2];
            expect.resize(half + 1, 0);
            expect[half] += 2;
            let e = TruncPoly::from_i64(&expect, half + 1, Some(4), 2).unwrap();
            assert_eq!(wu_cap_restriction(k).unwrap(), e, "k={k}");
        }
    }

    #[test]
    fn render_l2() {
        let l2 = genus_in_pontryagin(GenusKind::L, 2).unwrap();
        assert_eq!(l2.render("p"), "(7/45)p2 - (1/45)p1^2");
    }
}
