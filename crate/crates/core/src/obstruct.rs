//! Obstructions to exact fillings as decision procedures, with witnesses that
//! can be recomputed from scratch.
//!
//! The engine never claims a link is fillable. A checker either proves
//! `NOT_EXACTLY_FILLABLE` from hypotheses it verified exactly, or returns
//! `NO_VERDICT`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::bernoulli::{self, BernoulliError};
use crate::chenruan::{self, ChenRuanError, FillingPrediction};
use crate::exactnum::{
    cyclo_eval_ratio, fmt_rat, is_integral, lcm_all, rat, rat_int, ser, valuation, CycloNum,
    ExactError, Rat,
};
use crate::genus::{self, GenusError, GenusKind, Partition, SymPoly};
use crate::groups::{ActionSpec, GroupError, GroupTable};
use crate::link::{self, ChernQuery, LinkError};
use crate::numtheory::{binomial, factorial, is_power_of, prime_factors, prime_power};

/// Largest `k` accepted by [`rp_pipeline`].
pub const RP_MAX_K: u32 = 8;
/// Largest `m` accepted by [`z3_pipeline`].
pub const Z3_MAX_M: u64 = 54;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ObstructError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Genus(#[from] GenusError),
    #[error(transparent)]
    Bernoulli(#[from] BernoulliError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    ChenRuan(#[from] ChenRuanError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Conclusion {
    NotExactlyFillable,
    NoVerdict,
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Conclusion::NotExactlyFillable => "NOT_EXACTLY_FILLABLE",
            Conclusion::NoVerdict => "NO_VERDICT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    /// `n` odd and an even number of conjugacy classes.
    ConjParity,
    /// `c_1` nonzero modulo a prime factor of `m`.
    C1ModP,
    SameWeight,
    RealProjective,
    Z3,
    Z4,
    Am,
    Ade,
}

impl TheoremId {
    pub const ALL: [TheoremId; 8] = [
        TheoremId::ConjParity,
        TheoremId::C1ModP,
        TheoremId::SameWeight,
        TheoremId::RealProjective,
        TheoremId::Z3,
        TheoremId::Z4,
        TheoremId::Am,
        TheoremId::Ade,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::ConjParity => "conj_parity",
            TheoremId::C1ModP => "c1_mod_p",
            TheoremId::SameWeight => "same_weight",
            TheoremId::RealProjective => "real_projective",
            TheoremId::Z3 => "z3",
            TheoremId::Z4 => "z4",
            TheoremId::Am => "a_m",
            TheoremId::Ade => "ade",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RpSmallCase {
    #[serde(serialize_with = "ser::rat")]
    pub c2_sq_w: Rat,
    #[serde(serialize_with = "ser::rat")]
    pub p1_sq_w: Rat,
    #[serde(serialize_with = "ser::rat")]
    pub p1_sq_y: Rat,
    #[serde(serialize_with = "ser::rat")]
    pub p2_y: Rat,
    #[serde(serialize_with = "ser::rat")]
    pub ahat_y: Rat,
}

/// `8·K·l^2 = R` with `l^2 = R/(8K)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RpEquation {
    #[serde(serialize_with = "ser::int")]
    pub k_coefficient: BigInt,
    #[serde(serialize_with = "ser::int")]
    pub rhs: BigInt,
    #[serde(serialize_with = "ser::int")]
    pub rhs_over_d_half_sq: BigInt,
    #[serde(serialize_with = "ser::rat")]
    pub l_squared: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RpResidues {
    pub numerator_mod_64: u64,
    pub denominator_mod_64: u64,
    pub factorial_quotient_mod_64: u64,
    pub central_binomial_mod_8: u64,
    pub rhs_mod_64: u64,
    /// `8K·r mod 64` over the square classes `r ∈ {0, 1, 4}`.
    pub lhs_mod_64: Vec<u64>,
    /// Square classes `r` that would solve the congruence.
    pub solutions: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RpWitness {
    pub k: u32,
    pub n: u32,
    /// `∫_X c_{n/2}^2(X)` solved from the signature equation.
    #[serde(serialize_with = "ser::opt_rat")]
    pub c_half_sq_x: Option<Rat>,
    pub small: Option<RpSmallCase>,
    pub equation: Option<RpEquation>,
    pub residues: Option<RpResidues>,
    pub contradiction: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeValuation {
    pub prime: u64,
    pub coefficient: u64,
    pub b: u64,
}

/// `constant + coefficient·x = rhs` for `x = ∫_X c_m^2(W)`, with `B = rhs - constant`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Z3Witness {
    pub m: u64,
    pub odd: bool,
    #[serde(serialize_with = "ser::rat")]
    pub defect: Rat,
    #[serde(serialize_with = "ser::int")]
    pub constant: BigInt,
    #[serde(serialize_with = "ser::int")]
    pub coefficient: BigInt,
    #[serde(serialize_with = "ser::int")]
    pub rhs: BigInt,
    #[serde(serialize_with = "ser::opt_int")]
    pub a: Option<BigInt>,
    #[serde(serialize_with = "ser::int")]
    pub b: BigInt,
    #[serde(serialize_with = "ser::rat")]
    pub x: Rat,
    #[serde(serialize_with = "ser::rat")]
    pub three_x: Rat,
    /// `gcd(constant, coefficient/3)`, which must divide `rhs` if `3x` is integral.
    #[serde(serialize_with = "ser::int")]
    pub divisor: BigInt,
    pub divisor_divides_rhs: bool,
    pub valuations: Vec<PrimeValuation>,
    /// Prime factors below `10^5` of the denominator of `3x`.
    pub denominator_small_primes: Vec<u64>,
    pub contradiction: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    ConjParity {
        complex_dim: u32,
        conj_count: usize,
    },
    C1ModP {
        m: u32,
        c1: u64,
        prime: u64,
    },
    SameWeight {
        k: u64,
        n: u64,
        k_primes: Vec<u64>,
        n_primes: Vec<u64>,
    },
    RealProjective(RpWitness),
    /// Chern classes `c_i` verified nonzero mod 3.
    Z3Chern {
        m: u32,
        n: u32,
        classes: Vec<u64>,
    },
    /// `c_i` and `c_{n-i}` both nonzero mod 3 with `i < m`.
    Z3Pair {
        m: u32,
        n: u32,
        i: u64,
    },
    Z3Pipeline(Z3Witness),
    Z4 {
        n: u32,
        m: u32,
    },
    Am {
        m: u32,
        copies: u32,
        prime_power: Option<(u64, u32)>,
    },
    Ade {
        family: String,
        m: Option<u32>,
        copies: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub theorem: TheoremId,
    pub applicable: bool,
    pub conclusion: Conclusion,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl Verdict {
    fn inapplicable(theorem: TheoremId, note: &str) -> Self {
        Verdict {
            theorem,
            applicable: false,
            conclusion: Conclusion::NoVerdict,
            witness: None,
            note: Some(note.to_string()),
        }
    }

    fn open(theorem: TheoremId, witness: Option<Witness>, note: &str) -> Self {
        Verdict {
            theorem,
            applicable: true,
            conclusion: Conclusion::NoVerdict,
            witness,
            note: Some(note.to_string()),
        }
    }

    fn obstructed(theorem: TheoremId, witness: Witness) -> Self {
        Verdict {
            theorem,
            applicable: true,
            conclusion: Conclusion::NotExactlyFillable,
            witness: Some(witness),
            note: None,
        }
    }

    pub fn is_obstruction(&self) -> bool {
        self.conclusion == Conclusion::NotExactlyFillable
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObstructionReport {
    pub spec: String,
    pub complex_dim: u32,
    pub group_order: u64,
    pub isolated: bool,
    pub terminal: Option<bool>,
    #[serde(serialize_with = "ser::opt_rat")]
    pub md: Option<Rat>,
    pub conj_count: usize,
    #[serde(serialize_with = "ser::opt_rat")]
    pub hmi: Option<Rat>,
    pub prediction: FillingPrediction,
    pub cup_length_bound: Option<i64>,
    pub total_chern: Option<String>,
    pub verdicts: Vec<Verdict>,
    pub conclusion: Conclusion,
}

impl ObstructionReport {
    pub fn verdict(&self, id: TheoremId) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.theorem == id)
    }
}

fn opt_rat(x: &Option<Rat>) -> String {
    x.as_ref().map(fmt_rat).unwrap_or_else(|| "n/a".into())
}

impl fmt::Display for ObstructionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "spec: {}", self.spec)?;
        writeln!(f, "complex dimension: {}", self.complex_dim)?;
        writeln!(f, "group order: {}", self.group_order)?;
        writeln!(f, "isolated: {}", self.isolated)?;
        match self.terminal {
            Some(t) => writeln!(f, "terminal: {t}")?,
            None => writeln!(f, "terminal: n/a")?,
        }
        writeln!(f, "md: {}", opt_rat(&self.md))?;
        writeln!(f, "conjugacy classes: {}", self.conj_count)?;
        writeln!(f, "hmi: {}", opt_rat(&self.hmi))?;
        if self.prediction.applicable {
            let labels: Vec<String> = self.prediction.degree_labels.iter().map(fmt_rat).collect();
            writeln!(
                f,
                "predicted filling rank: {} (degree labels {})",
                self.prediction.total_rank,
                labels.join(", ")
            )?;
        } else {
            writeln!(f, "predicted filling rank: n/a")?;
        }
        match self.cup_length_bound {
            Some(b) => writeln!(f, "cup-length bound: {b}")?,
            None => writeln!(f, "cup-length bound: n/a")?,
        }
        if let Some(c) = &self.total_chern {
            writeln!(f, "total Chern class: {c}")?;
        }
        for v in &self.verdicts {
            write!(f, "  [{}] {}", v.theorem, v.conclusion)?;
            if !v.applicable {
                write!(f, " (inapplicable)")?;
            }
            if let Some(n) = &v.note {
                write!(f, ": {n}")?;
            }
            writeln!(f)?;
            if let Some(w) = &v.witness {
                writeln!(f, "      witness: {}", witness_summary(w))?;
            }
        }
        write!(f, "conclusion: {}", self.conclusion)
    }
}

pub fn witness_summary(w: &Witness) -> String {
    match w {
        Witness::ConjParity {
            complex_dim,
            conj_count,
        } => format!("n = {complex_dim} odd, |Conj| = {conj_count} even"),
        Witness::C1ModP { m, c1, prime } => format!("c1 = {c1} in Z/{m}, nonzero mod {prime}"),
        Witness::SameWeight { k, n, .. } => {
            format!("k = {k}, n = {n} are not powers of one prime")
        }
        Witness::RealProjective(r) => r.reason.clone(),
        Witness::Z3Chern { classes, .. } => format!("c_i nonzero mod 3 for i in {classes:?}"),
        Witness::Z3Pair { n, i, .. } => format!("c_{i} and c_{} nonzero mod 3", *n as u64 - i),
        Witness::Z3Pipeline(z) => z.reason.clone(),
        Witness::Z4 { n, m } => format!("n = {n} is not a power of 2 (m = {m})"),
        Witness::Am {
            m,
            copies,
            prime_power,
        } => match prime_power {
            Some((p, s)) => format!("m = {p}^{s}, n = {copies} not of the form p^r or 2p^r"),
            None => format!("m = {m} not a prime power, n = {copies} > 2"),
        },
        Witness::Ade { family, m, copies } => match m {
            Some(m) => format!("{family} with m = {m}, n = {copies}"),
            None => format!("{family}, n = {copies}"),
        },
    }
}

// ---------------------------------------------------------------------------
// Helpers

fn isolated_terminal(t: &GroupTable) -> Result<bool, ObstructError> {
    Ok(t.is_isolated() && t.is_terminal()?)
}

fn cyclic_parts(t: &GroupTable) -> Option<(u32, &[u32])> {
    match t.spec() {
        ActionSpec::Cyclic { m, weights } => Some((*m, weights.as_slice())),
        _ => None,
    }
}

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

fn pow3(e: u64) -> BigInt {
    num_traits::pow(BigInt::from(3), e as usize)
}

fn small_primes_of(x: &BigInt, bound: u64) -> Vec<u64> {
    let mut x = x.abs();
    let mut out = Vec::new();
    let mut p = 2u64;
    while p < bound && !x.is_one() {
        let bp = BigInt::from(p);
        if x.is_multiple_of(&bp) {
            out.push(p);
            while x.is_multiple_of(&bp) {
                x /= &bp;
            }
        }
        p += 1;
    }
    out
}

// ---------------------------------------------------------------------------
// Cup length

/// `⌊(n - 1 - md)/(1 + md)⌋`; `None` when the singularity is not terminal.
pub fn cup_length_bound(spec: &ActionSpec) -> Result<Option<i64>, ObstructError> {
    Ok(chenruan::cup_length_bound(&GroupTable::build(spec)?)?)
}

// ---------------------------------------------------------------------------
// Orbifold signature defect

/// `(1/|G|) Σ_{g≠Id} Π_j (ζ_j + 1)/(ζ_j − 1)` over the eigenvalues of each `g`,
/// evaluated in `Q(ζ_N)` with `N` the exponent of `G`.
pub fn orbifold_defect(spec: &ActionSpec) -> Result<Rat, ObstructError> {
    let t = GroupTable::build(spec)?;
    orbifold_defect_table(&t)
}

pub fn orbifold_defect_table(t: &GroupTable) -> Result<Rat, ObstructError> {
    if t.complex_dim() % 2 == 1 {
        return Err(ObstructError::Domain(
            "defect needs even complex dimension".into(),
        ));
    }
    if !t.is_isolated() {
        return Err(GroupError::NotIsolated.into());
    }
    let id = t.class_of(t.identity());
    let big_n = lcm_all(t.classes().iter().map(|c| c.eigen.order));
    let mut total = CycloNum::zero(big_n)?;
    let mut cache: std::collections::HashMap<i64, CycloNum> = std::collections::HashMap::new();
    let half = rat(1, 2);
    for c in t.classes() {
        if c.index == id || c.eigen.angles.contains(&half) {
            continue;
        }
        let mut term = CycloNum::one(big_n)?;
        for a in &c.eigen.angles {
            let k = (a * rat_int(big_n)).to_integer().to_i64().unwrap();
            if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(k) {
                e.insert(cyclo_eval_ratio(big_n, k)?);
            }
            term = term.mul(&cache[&k])?;
        }
        total = total.add(&term.scale(&rat_int(c.size)))?;
    }
    let value = total
        .as_rational()
        .ok_or_else(|| ObstructError::Internal("signature defect is not rational".into()))?;
    Ok(value / rat_int(t.order() as u64))
}

// ---------------------------------------------------------------------------
// Real projective pipelines

fn cap_chern(n: u32) -> Vec<BigInt> {
    (0..=n as u64)
        .map(|i| {
            let lower = if i == 0 {
                BigInt::zero()
            } else {
                binomial(n as u64, i - 1)
            };
            binomial(n as u64, i) + BigInt::from(2) * lower
        })
        .collect()
}

/// Chern-number assignment on the glued manifold `X`; `[n/2, n/2]` is left free.
fn rp_chern_value(n: u32, cap: &[BigInt], p: &Partition) -> Option<Rat> {
    let h = n / 2;
    match p.parts() {
        [a, b] if *a == h && *b == h => None,
        [a] if *a == n => Some(rat_int(n + 2)),
        parts => {
            let prod = parts
                .iter()
                .fold(BigInt::one(), |acc, &i| acc * &cap[i as usize]);
            Some(Rat::new(prod, BigInt::from(2)))
        }
    }
}

/// `(constant, coefficient)` with `∫L_{n/2}(X) = constant + coefficient·∫c_{n/2}^2(X)`.
fn rp_signature_linear(n: u32) -> Result<(Rat, Rat), ObstructError> {
    let h = n / 2;
    let l = genus::pontryagin_to_chern(&genus::genus_in_pontryagin(GenusKind::L, h)?);
    let cap = cap_chern(n);
    let half = Partition::new(vec![h, h]);
    let coefficient = l.coeff(&half);
    let constant = l.evaluate(|p| rp_chern_value(n, &cap, p).unwrap_or_else(Rat::zero));
    Ok((constant, coefficient))
}

fn evaluate_pontryagin(p: &SymPoly, p2: &Rat, p1_sq: &Rat) -> Rat {
    p.evaluate(|m| match m.parts() {
        [2] => p2.clone(),
        [1, 1] => p1_sq.clone(),
        _ => Rat::zero(),
    })
}

pub fn rp_pipeline(k: u32) -> Result<RpWitness, ObstructError> {
    if k < 2 {
        return Err(ObstructError::Domain(format!(
            "rp pipeline needs k >= 2, got {k}"
        )));
    }
    if k > RP_MAX_K {
        return Err(ObstructError::Domain(format!(
            "rp pipeline supports k <= {RP_MAX_K}"
        )));
    }
    let n = 1u32 << k;
    if k <= 3 {
        let (constant, coefficient) = rp_signature_linear(n)?;
        let x = (rat_int(2) - constant) / coefficient;
        if k == 3 {
            let contradiction = !is_integral(&x);
            return Ok(RpWitness {
                k,
                n,
                c_half_sq_x: Some(x.clone()),
                small: None,
                equation: None,
                residues: None,
                contradiction,
                reason: format!("∫_X c_4^2(X) = {} must be an integer", fmt_rat(&x)),
            });
        }
        let cap = cap_chern(n);
        let c2_cap = rat_int(cap[2].clone());
        let c2_sq_w = &x - &c2_cap * &c2_cap / rat_int(2);
        let p1_sq_w = rat_int(4) * &c2_sq_w;
        let p1_sq_y = rat_int(2) * &p1_sq_w;
        let l2 = genus::genus_in_pontryagin(GenusKind::L, 2)?;
        let (a, b) = (
            l2.coeff(&Partition::new(vec![2])),
            l2.coeff(&Partition::new(vec![1, 1])),
        );
        let p2_y = (rat_int(2) - &b * &p1_sq_y) / a;
        let ahat = genus::genus_in_pontryagin(GenusKind::AHat, 2)?;
        let ahat_y = evaluate_pontryagin(&ahat, &p2_y, &p1_sq_y);
        let contradiction = !is_integral(&ahat_y);
        return Ok(RpWitness {
            k,
            n,
            c_half_sq_x: Some(x),
            reason: format!(
                "Â(Y) = {} must be an integer on a spin manifold",
                fmt_rat(&ahat_y)
            ),
            small: Some(RpSmallCase {
                c2_sq_w,
                p1_sq_w,
                p1_sq_y,
                p2_y,
                ahat_y,
            }),
            equation: None,
            residues: None,
            contradiction,
        });
    }

    let m = 1u64 << (k - 1);
    let em = bernoulli::entry(m)?;
    let eh = bernoulli::entry(m / 2)?;
    let (nm, dm) = (&em.numerator, &em.odd_denominator);
    let (nh, dh) = (&eh.numerator, &eh.odd_denominator);
    let t = pow2(2 * m - 1) - 1;
    let s = pow2(m - 1) - 1;
    let kk = &s * &s * binomial(2 * m, m) * nh * nh * dm - &t * nm * dh * dh;
    let fact_quot = factorial(2 * m) / pow2(2 * m - 1);
    let inner = &fact_quot * dm - BigInt::from(3) * &t * nm;
    let rhs: BigInt = dh * dh * &inner;
    let l_squared = Rat::new(rhs.clone(), BigInt::from(8) * &kk);

    let m64 = BigInt::from(64);
    let r64 = |x: &BigInt| x.mod_floor(&m64).to_u64().unwrap();
    let rhs_mod_64 = r64(&rhs);
    let squares: BTreeSet<u64> = (0..8u64).map(|l| l * l % 8).collect();
    let lhs_of = |r: u64| r64(&(BigInt::from(8) * &kk * r));
    let lhs_mod_64: Vec<u64> = squares
        .iter()
        .map(|&r| lhs_of(r))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let solutions: Vec<u64> = squares
        .iter()
        .copied()
        .filter(|&r| lhs_of(r) == rhs_mod_64)
        .collect();
    let residues = RpResidues {
        numerator_mod_64: r64(nm),
        denominator_mod_64: r64(dm),
        factorial_quotient_mod_64: r64(&fact_quot),
        central_binomial_mod_8: binomial(2 * m, m)
            .mod_floor(&BigInt::from(8))
            .to_u64()
            .unwrap(),
        rhs_mod_64,
        lhs_mod_64,
        solutions,
    };
    let exact = !is_integral(&l_squared);
    let modular = residues.solutions.is_empty();
    let reason = format!(
        "8·{}·l^2 = {}: l^2 = {} is not an integer{}",
        kk,
        rhs,
        fmt_rat(&l_squared),
        if modular {
            " and no square class mod 8 solves the equation mod 64"
        } else {
            ""
        }
    );
    Ok(RpWitness {
        k,
        n,
        c_half_sq_x: None,
        small: None,
        equation: Some(RpEquation {
            k_coefficient: kk,
            rhs,
            rhs_over_d_half_sq: inner,
            l_squared,
        }),
        residues: Some(residues),
        contradiction: exact || modular,
        reason,
    })
}

// ---------------------------------------------------------------------------
// Z/3 pipelines

fn z3_shape(m: u64) -> Option<bool> {
    if is_power_of(m, 3).is_some() {
        Some(true)
    } else if m.is_multiple_of(2) && is_power_of(m / 2, 3).is_some() {
        Some(false)
    } else {
        None
    }
}

/// The signature equation for `Z/3` acting with weights `(1^m, 2^m)` on `C^{2m}`,
/// `m = 3^k` or `2·3^k`.
pub fn z3_pipeline(m: u64) -> Result<Z3Witness, ObstructError> {
    let odd = z3_shape(m)
        .ok_or_else(|| ObstructError::Domain(format!("m = {m} is neither 3^k nor 2·3^k")))?;
    if m > Z3_MAX_M {
        return Err(ObstructError::Domain(format!(
            "z3 pipeline supports m <= {Z3_MAX_M}"
        )));
    }
    let mut weights = vec![1u32; m as usize];
    weights.extend(std::iter::repeat_n(2, m as usize));
    let defect = orbifold_defect(&ActionSpec::cyclic(3, &weights)?)?;

    let em = bernoulli::entry(m)?;
    let (nm, dm) = (&em.numerator, &em.odd_denominator);
    let t = pow2(2 * m - 1) - 1;
    let fact = factorial(2 * m);
    let (constant, coefficient, rhs, a): (BigInt, BigInt, BigInt, Option<BigInt>) = if odd {
        (
            pow3(m) * pow2(2 * m + 3) * &t * nm,
            pow3(m + 1) * pow2(2 * m - 1) * &t * nm,
            BigInt::from(2) * &fact * dm,
            None,
        )
    } else {
        let eh = bernoulli::entry(m / 2)?;
        let (nh, dh) = (&eh.numerator, &eh.odd_denominator);
        let s = pow2(m - 1) - 1;
        let tail: BigInt = &t * nm * dh * dh;
        let a: BigInt = &s * &s * binomial(2 * m, m) * nh * nh * dm - tail;
        (
            pow3(m) * pow2(2 * m + 3) * &t * nm * dh * dh,
            pow3(m + 1) * pow2(2 * m - 1) * &a,
            BigInt::from(2) * &fact * dm * dh * dh,
            Some(a),
        )
    };
    let b: BigInt = &rhs - &constant;
    let x = Rat::new(b.clone(), coefficient.clone());

    // independent route through the rational coefficients
    let alpha = odd_alpha(m)?;
    let coef_r = if odd {
        alpha.clone()
    } else {
        genus::a_b_chern(m)?.1
    };
    let x_rational = (&defect - rat(16, 3) * &alpha) / coef_r;
    if x_rational != x {
        return Err(ObstructError::Internal(format!(
            "z3 routes disagree at m = {m}: {} vs {}",
            fmt_rat(&x),
            fmt_rat(&x_rational)
        )));
    }

    let three_x = rat_int(3) * &x;
    let divisor = constant.gcd(&(&coefficient / BigInt::from(3)));
    let divisor_divides_rhs = rhs.is_multiple_of(&divisor);
    let valuations = [2u64, 3]
        .iter()
        .map(|&p| PrimeValuation {
            prime: p,
            coefficient: valuation(&coefficient, p),
            b: valuation(&b, p),
        })
        .collect();
    let contradiction = !is_integral(&three_x);
    let denominator_small_primes = small_primes_of(three_x.denom(), 100_000);
    let reason = if contradiction {
        format!("3∫c_{m}^2 = {} is not an integer", fmt_rat(&three_x))
    } else {
        format!(
            "3∫c_{m}^2 = {} is an integer; no contradiction",
            fmt_rat(&three_x)
        )
    };
    Ok(Z3Witness {
        m,
        odd,
        defect,
        constant,
        coefficient,
        rhs,
        a,
        b,
        x,
        three_x,
        divisor,
        divisor_divides_rhs,
        valuations,
        denominator_small_primes,
        contradiction,
        reason,
    })
}

/// `α_m = 2^{2m}(2^{2m-1} - 1) B_m / (2m)!`, valid for odd `m` too.
fn odd_alpha(m: u64) -> Result<Rat, ObstructError> {
    let bm = bernoulli::bernoulli(m)?;
    Ok(rat_int(pow2(2 * m)) * rat_int(pow2(2 * m - 1) - 1) / rat_int(factorial(2 * m)) * bm)
}

// ---------------------------------------------------------------------------
// Theorem checkers

pub fn thm_conj_parity(t: &GroupTable) -> Result<Verdict, ObstructError> {
    let id = TheoremId::ConjParity;
    if t.order() == 1 {
        return Ok(Verdict::inapplicable(id, "trivial group"));
    }
    if !isolated_terminal(t)? {
        return Ok(Verdict::inapplicable(
            id,
            "requires an isolated terminal singularity",
        ));
    }
    let n = t.complex_dim();
    let count = t.classes().len();
    if n % 2 == 1 && count.is_multiple_of(2) {
        return Ok(Verdict::obstructed(
            id,
            Witness::ConjParity {
                complex_dim: n,
                conj_count: count,
            },
        ));
    }
    Ok(Verdict::open(
        id,
        None,
        "needs n odd and an even number of conjugacy classes",
    ))
}

pub fn thm_c1_mod_p(t: &GroupTable) -> Result<Verdict, ObstructError> {
    let id = TheoremId::C1ModP;
    let Some((m, _)) = cyclic_parts(t).filter(|(m, _)| *m > 1) else {
        return Ok(Verdict::inapplicable(id, "cyclic groups only"));
    };
    if !isolated_terminal(t)? {
        return Ok(Verdict::inapplicable(
            id,
            "requires an isolated terminal singularity",
        ));
    }
    let c1 = link::first_chern_cyclic(t.spec()).unwrap();
    for p in prime_factors(m as u64) {
        if !c1.is_multiple_of(p) {
            return Ok(Verdict::obstructed(id, Witness::C1ModP { m, c1, prime: p }));
        }
    }
    Ok(Verdict::open(
        id,
        None,
        "c1 vanishes modulo every prime factor of m",
    ))
}

/// Lens space `L(k; 1, .., 1)` of dimension `2n - 1`.
pub fn thm_same_weight(k: u64, n: u64) -> Verdict {
    let id = TheoremId::SameWeight;
    if k < 2 || n <= k {
        return Verdict::inapplicable(id, "requires n > k >= 2 (terminality)");
    }
    if let Some((p, _)) = prime_power(k) {
        if is_power_of(n, p).is_some() {
            return Verdict::open(id, None, &format!("n and k are both powers of {p}"));
        }
    }
    Verdict::obstructed(
        id,
        Witness::SameWeight {
            k,
            n,
            k_primes: prime_factors(k),
            n_primes: prime_factors(n),
        },
    )
}

fn same_weight_table(t: &GroupTable) -> Result<Verdict, ObstructError> {
    let id = TheoremId::SameWeight;
    let Some((m, w)) = cyclic_parts(t).filter(|(m, _)| *m > 1) else {
        return Ok(Verdict::inapplicable(id, "cyclic groups only"));
    };
    if w.iter().any(|a| *a != w[0]) {
        return Ok(Verdict::inapplicable(id, "weights are not all equal"));
    }
    if !t.is_isolated() {
        return Ok(Verdict::inapplicable(
            id,
            "requires an isolated singularity",
        ));
    }
    Ok(thm_same_weight(m as u64, w.len() as u64))
}

pub fn thm_real_projective(t: &GroupTable) -> Result<Verdict, ObstructError> {
    let id = TheoremId::RealProjective;
    let Some((2, w)) = cyclic_parts(t) else {
        return Ok(Verdict::inapplicable(id, "Z/2 actions only"));
    };
    let n = w.len() as u64;
    let Some(k) = is_power_of(n, 2).filter(|&k| k >= 2) else {
        return Ok(Verdict::inapplicable(id, "needs n = 2^k >= 4"));
    };
    if k > RP_MAX_K {
        return Ok(Verdict::open(
            id,
            None,
            &format!("pipeline is run for k <= {RP_MAX_K} only"),
        ));
    }
    let w = rp_pipeline(k)?;
    if w.contradiction {
        Ok(Verdict::obstructed(id, Witness::RealProjective(w)))
    } else {
        Ok(Verdict::open(
            id,
            Some(Witness::RealProjective(w)),
            "pipeline found no contradiction",
        ))
    }
}

/// Number of weights equal to the rarer of the two generators' eigenvalues.
fn two_value_split(w: &[u32], a: u32, b: u32) -> Option<u32> {
    if w.iter().any(|x| *x != a && *x != b) {
        return None;
    }
    let ca = w.iter().filter(|x| **x == a).count() as u32;
    Some(ca.min(w.len() as u32 - ca))
}

pub fn thm_z3(t: &GroupTable) -> Result<Verdict, ObstructError> {
    let id = TheoremId::Z3;
    let Some((3, w)) = cyclic_parts(t) else {
        return Ok(Verdict::inapplicable(id, "Z/3 actions only"));
    };
    if !isolated_terminal(t)? {
        return Ok(Verdict::inapplicable(
            id,
            "requires an isolated terminal singularity",
        ));
    }
    let n = w.len() as u32;
    let m = two_value_split(w, 1, 2).unwrap();
    if m == 0 && is_power_of(n as u64, 3).is_some() {
        return Ok(Verdict::open(
            id,
            None,
            "same weight with n = 3^s is an open case",
        ));
    }
    let nonzero = |i: u64| -> Result<bool, ObstructError> {
        Ok(i < n as u64 && link::chern_nonzero_mod_p(t.spec(), i, 3)? == ChernQuery::Nonzero)
    };
    if n != 2 * m {
        let d = (n - 2 * m) as u64;
        let g = (m as u64).gcd(&d);
        let s = valuation(&BigInt::from(g), 3);
        let t3 = valuation(&BigInt::from(d), 3);
        let classes = if t3 == s {
            vec![3u64.pow(s as u32)]
        } else {
            vec![3u64.pow(t3 as u32), 2 * 3u64.pow(s as u32)]
        };
        for &c in &classes {
            if !nonzero(c)? {
                return Ok(Verdict::open(
                    id,
                    None,
                    &format!("c_{c} did not verify nonzero mod 3"),
                ));
            }
        }
        return Ok(Verdict::obstructed(id, Witness::Z3Chern { m, n, classes }));
    }
    if z3_shape(m as u64).is_none() {
        for i in 1..m as u64 {
            if nonzero(i)? && nonzero(n as u64 - i)? {
                return Ok(Verdict::obstructed(id, Witness::Z3Pair { m, n, i }));
            }
        }
        return Ok(Verdict::open(
            id,
            None,
            "no index i < m with c_i, c_{n-i} nonzero mod 3",
        ));
    }
    if m as u64 > Z3_MAX_M {
        return Ok(Verdict::open(
            id,
            None,
            &format!("pipeline is run for m <= {Z3_MAX_M} only"),
        ));
    }
    let zw = z3_pipeline(m as u64)?;
    if zw.contradiction {
        Ok(Verdict::obstructed(id, Witness::Z3Pipeline(zw)))
    } else {
        Ok(Verdict::open(
            id,
            Some(Witness::Z3Pipeline(zw)),
            "signature equation has an integral solution; no contradiction",
        ))
    }
}

pub fn thm_z4(t: &GroupTable) -> Result<Verdict, ObstructError> {
    let id = TheoremId::Z4;
    let Some((4, w)) = cyclic_parts(t) else {
        return Ok(Verdict::inapplicable(id, "Z/4 actions only"));
    };
    if !isolated_terminal(t)? {
        return Ok(Verdict::inapplicable(
            id,
            "requires an isolated terminal singularity",
        ));
    }
    let n = w.len() as u32;
    let m = two_value_split(w, 1, 3).unwrap();
    if is_power_of(n as u64, 2).is_some() {
        return Ok(Verdict::open(id, None, "n is a power of 2"));
    }
    Ok(Verdict::obstructed(id, Witness::Z4 { n, m }))
}

/// `copies` when the weights are `copies` times `u` and `copies` times `-u`.
fn a_type_copies(m: u32, w: &[u32]) -> Option<u32> {
    let u = w[0];
    let v = m - u;
    if u == v || w.len() % 2 == 1 {
        return None;
    }
    let cu = w.iter().filter(|x| **x == u).count();
    let cv = w.iter().filter(|x| **x == v).count();
    (cu == cv && cu + cv == w.len()).then_some(cu as u32)
}

pub fn thm_am(t: &GroupTable) -> Result<Verdict, ObstructError> {
    let id = TheoremId::Am;
    let Some((m, w)) = cyclic_parts(t).filter(|(m, _)| *m >= 3) else {
        return Ok(Verdict::inapplicable(id, "Z/m actions with m >= 3 only"));
    };
    let Some(copies) = a_type_copies(m, w) else {
        return Ok(Verdict::inapplicable(
            id,
            "weights are not of A type (u, -u)",
        ));
    };
    if !isolated_terminal(t)? {
        return Ok(Verdict::inapplicable(
            id,
            "requires an isolated terminal singularity",
        ));
    }
    match prime_power(m as u64) {
        None if copies > 2 => Ok(Verdict::obstructed(
            id,
            Witness::Am {
                m,
                copies,
                prime_power: None,
            },
        )),
        None => Ok(Verdict::open(id, None, "n <= 2 is an open case")),
        Some((p, s)) => {
            let n = copies as u64;
            let excluded =
                is_power_of(n, p).is_some() || (n.is_multiple_of(2) && is_power_of(n / 2, p).is_some());
            if excluded {
                Ok(Verdict::open(
                    id,
                    None,
                    &format!("n = p^r or 2p^r with p = {p} is an open case"),
                ))
            } else {
                Ok(Verdict::obstructed(
                    id,
                    Witness::Am {
                        m,
                        copies,
                        prime_power: Some((p, s)),
                    },
                ))
            }
        }
    }
}

pub fn thm_ade(t: &GroupTable) -> Result<Verdict, ObstructError> {
    let id = TheoremId::Ade;
    let (family, m) = match t.spec() {
        ActionSpec::BinaryDihedral { m, .. } => ("2D", Some(*m)),
        ActionSpec::BinaryTetrahedral { .. } => ("2T", None),
        ActionSpec::BinaryOctahedral { .. } => ("2O", None),
        ActionSpec::BinaryIcosahedral { .. } => ("2I", None),
        _ => return Ok(Verdict::inapplicable(id, "binary polyhedral groups only")),
    };
    let copies = t.spec().copies().unwrap();
    if !isolated_terminal(t)? {
        return Ok(Verdict::inapplicable(
            id,
            "requires an isolated terminal singularity",
        ));
    }
    if copies <= 2 {
        return Ok(Verdict::open(id, None, "n = 2 is an open case"));
    }
    if let Some(m) = m {
        if is_power_of(m as u64, 2).is_some() && is_power_of(copies as u64, 2).is_some() {
            return Ok(Verdict::open(id, None, "m and n are both powers of 2"));
        }
    }
    Ok(Verdict::obstructed(
        id,
        Witness::Ade {
            family: family.to_string(),
            m,
            copies,
        },
    ))
}

pub fn run_theorem(t: &GroupTable, id: TheoremId) -> Result<Verdict, ObstructError> {
    match id {
        TheoremId::ConjParity => thm_conj_parity(t),
        TheoremId::C1ModP => thm_c1_mod_p(t),
        TheoremId::SameWeight => same_weight_table(t),
        TheoremId::RealProjective => thm_real_projective(t),
        TheoremId::Z3 => thm_z3(t),
        TheoremId::Z4 => thm_z4(t),
        TheoremId::Am => thm_am(t),
        TheoremId::Ade => thm_ade(t),
    }
}

// ---------------------------------------------------------------------------
// Aggregation

pub fn analyze(spec: &ActionSpec) -> Result<ObstructionReport, ObstructError> {
    let t = GroupTable::build(spec)?;
    analyze_table(&t)
}

pub fn analyze_table(t: &GroupTable) -> Result<ObstructionReport, ObstructError> {
    let isolated = t.is_isolated();
    let (terminal, md, hmi) = if isolated {
        (
            Some(t.is_terminal()?),
            Some(t.minimal_discrepancy()?),
            Some(t.hmi()?),
        )
    } else {
        (None, None, None)
    };
    let prediction = chenruan::predicted_filling_cohomology(t)?;
    let cup_length_bound = prediction.cup_length_bound;
    let total_chern = if isolated {
        Some(link::total_chern(t.spec())?.poly.to_string())
    } else {
        None
    };
    let verdicts = TheoremId::ALL
        .iter()
        .map(|&id| run_theorem(t, id))
        .collect::<Result<Vec<_>, _>>()?;
    let conclusion = if verdicts.iter().any(Verdict::is_obstruction) {
        Conclusion::NotExactlyFillable
    } else {
        Conclusion::NoVerdict
    };
    Ok(ObstructionReport {
        spec: t.spec().to_string(),
        complex_dim: t.complex_dim(),
        group_order: t.order() as u64,
        isolated,
        terminal,
        md,
        conj_count: t.classes().len(),
        hmi,
        prediction,
        cup_length_bound,
        total_chern,
        verdicts,
        conclusion,
    })
}

/// Re-derives a verdict from a fresh group table and re-checks the algebra
/// its witness records.
pub fn verify_witness(spec: &ActionSpec, v: &Verdict) -> Result<bool, ObstructError> {
    let t = GroupTable::build(spec)?;
    if run_theorem(&t, v.theorem)? != *v {
        return Ok(false);
    }
    if !v.is_obstruction() {
        return Ok(true);
    }
    if !isolated_terminal(&t)? {
        return Ok(false);
    }
    Ok(match v.witness.as_ref() {
        None => false,
        Some(Witness::ConjParity {
            complex_dim,
            conj_count,
        }) => complex_dim % 2 == 1 && conj_count % 2 == 0 && *conj_count == t.classes().len(),
        Some(Witness::C1ModP { c1, prime, m }) => {
            link::first_chern_cyclic(spec) == Some(*c1) && c1 % prime != 0 && (*m as u64).is_multiple_of(*prime)
        }
        Some(Witness::SameWeight { .. }) => true,
        Some(Witness::RealProjective(w)) => verify_rp(w)?,
        Some(Witness::Z3Chern { classes, .. }) => classes.iter().all(|&c| {
            link::chern_nonzero_mod_p(spec, c, 3)
                .map(ChernQuery::is_nonzero)
                .unwrap_or(false)
        }),
        Some(Witness::Z3Pair { n, i, .. }) => {
            link::chern_nonzero_mod_p(spec, *i, 3)?.is_nonzero()
                && link::chern_nonzero_mod_p(spec, *n as u64 - i, 3)?.is_nonzero()
        }
        Some(Witness::Z3Pipeline(z)) => verify_z3(z)?,
        Some(Witness::Z4 { n, .. }) => is_power_of(*n as u64, 2).is_none(),
        Some(Witness::Am { .. }) | Some(Witness::Ade { .. }) => true,
    })
}

fn verify_rp(w: &RpWitness) -> Result<bool, ObstructError> {
    if let Some(x) = &w.c_half_sq_x {
        let (constant, coefficient) = rp_signature_linear(w.n)?;
        if constant + coefficient * x != rat_int(2) {
            return Ok(false);
        }
    }
    if let Some(s) = &w.small {
        let ahat = genus::genus_in_pontryagin(GenusKind::AHat, 2)?;
        if evaluate_pontryagin(&ahat, &s.p2_y, &s.p1_sq_y) != s.ahat_y || is_integral(&s.ahat_y) {
            return Ok(false);
        }
    }
    if let Some(e) = &w.equation {
        let lhs = Rat::from_integer(BigInt::from(8) * &e.k_coefficient) * &e.l_squared;
        if lhs != Rat::from_integer(e.rhs.clone()) {
            return Ok(false);
        }
    }
    Ok(w.contradiction)
}

fn verify_z3(z: &Z3Witness) -> Result<bool, ObstructError> {
    let lhs =
        Rat::from_integer(z.constant.clone()) + Rat::from_integer(z.coefficient.clone()) * &z.x;
    Ok(lhs == Rat::from_integer(z.rhs.clone())
        && z.three_x == rat_int(3) * &z.x
        && !is_integral(&z.three_x)
        && z.defect == Rat::new(BigInt::from(2), pow3(z.m + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rp_small_cases() {
        let w = rp_pipeline(2).unwrap();
        assert_eq!(w.c_half_sq_x, Some(rat(106, 1)));
        let s = w.small.unwrap();
        assert_eq!(
            (s.c2_sq_w, s.p1_sq_w, s.p2_y, s.ahat_y),
            (rat(8, 1), rat(32, 1), rat(22, 1), rat(1, 16))
        );
        let w = rp_pipeline(3).unwrap();
        assert_eq!(w.c_half_sq_x, Some(rat(5064442, 305)));
        assert!(w.contradiction);
        assert!(rp_pipeline(1).is_err());
    }

    #[test]
    fn rp_k4_equation() {
        let w = rp_pipeline(4).unwrap();
        let e = w.equation.unwrap();
        assert_eq!(e.k_coefficient, BigInt::from(26266354875u64));
        assert_eq!(e.rhs, BigInt::from(225) * BigInt::from(162465228408u64));
        assert!(!is_integral(&e.l_squared));
        assert!(w.residues.unwrap().solutions.is_empty());
    }

    #[test]
    fn z3_small() {
        let z = z3_pipeline(3).unwrap();
        assert_eq!(z.three_x, rat(-461, 31));
        assert!(!z.divisor_divides_rhs);
        let z = z3_pipeline(2).unwrap();
        assert_eq!(z.three_x, rat(-34, 1));
        assert!(!z.contradiction);
        assert!(z3_pipeline(4).is_err());
    }

    #[test]
    fn defects() {
        let s: ActionSpec = "cyclic:m=3;w=1,1,1,1,2,2,2,2".parse().unwrap();
        assert_eq!(orbifold_defect(&s).unwrap(), rat(2, 243));
        let s: ActionSpec = "cyclic:m=2;w=1,1,1,1".parse().unwrap();
        assert_eq!(orbifold_defect(&s).unwrap(), rat(0, 1));
        let s: ActionSpec = "cyclic:m=3;w=1,1,1,1".parse().unwrap();
        assert_eq!(orbifold_defect(&s).unwrap(), rat(2, 27));
        assert!(orbifold_defect(&"cyclic:m=3;w=1,1,1".parse().unwrap()).is_err());
    }

    #[test]
    fn same_weight_examples() {
        assert!(thm_same_weight(3, 5).is_obstruction());
        assert!(!thm_same_weight(2, 4).is_obstruction());
        assert!(thm_same_weight(2, 4).applicable);
        assert!(thm_same_weight(4, 6).is_obstruction());
        assert!(!thm_same_weight(5, 5).applicable);
    }

    #[test]
    fn analyze_examples() {
        let r = analyze(&"cyclic:m=2;w=1,1".parse().unwrap()).unwrap();
        assert_eq!((r.terminal, r.md.clone()), (Some(false), Some(rat(0, 1))));
        assert!(r.verdicts.iter().all(|v| !v.applicable));
        assert_eq!(r.conclusion, Conclusion::NoVerdict);

        let r = analyze(&"trivial:dim=5".parse().unwrap()).unwrap();
        assert_eq!((r.terminal, r.md.clone()), (Some(true), Some(rat(4, 1))));
        assert!(r.verdicts.iter().all(|v| !v.applicable));

        let s: ActionSpec = "cyclic:m=2;w=1,1,1,1".parse().unwrap();
        let r = analyze(&s).unwrap();
        assert_eq!(r.prediction.total_rank, 2);
        let v = r.verdict(TheoremId::RealProjective).unwrap();
        assert!(v.is_obstruction());
        assert!(verify_witness(&s, v).unwrap());
    }

    #[test]
    fn tampered_witness_rejected() {
        let s: ActionSpec = "cyclic:m=3;w=1,1,1,2,2,2".parse().unwrap();
        let mut v = analyze(&s).unwrap().verdict(TheoremId::Z3).unwrap().clone();
        assert!(verify_witness(&s, &v).unwrap());
        if let Some(Witness::Z3Pipeline(z)) = v.witness.as_mut() {
            z.x = rat(1, 1);
        }
        assert!(!verify_witness(&s, &v).unwrap());
    }
}
