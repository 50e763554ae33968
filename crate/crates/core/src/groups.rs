//! Finite unitary actions with isolated fixed points: elements, conjugacy,
//! eigen-angles, ages, terminality and Reeb-family index data.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::{fmt_rat, rat, rat_int, ser, Rat};

/// Largest group order accepted for table construction.
pub const MAX_ORDER: u64 = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("invalid action: {0}")]
    Invalid(String),
    #[error("action is not isolated: a nontrivial element has eigenvalue 1")]
    NotIsolated,
    #[error("group table failed to close under multiplication")]
    Closure,
    #[error("no eigen-angle matches an element of order {0}")]
    EigenAngle(u32),
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse action spec `{input}`: {reason}")]
pub struct SpecParseError {
    pub input: String,
    pub reason: String,
}

/// A linear action of a finite group on `C^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ActionSpec {
    /// Generator acts by `diag(ζ^{a_1}, .., ζ^{a_n})`, `ζ = e^{2πi/m}`. `m = 1` is the
    /// trivial group, with all weights zero.
    Cyclic {
        m: u32,
        weights: Vec<u32>,
    },
    /// Binary dihedral group of order `4m`, diagonally on `copies` copies of `C^2`.
    BinaryDihedral {
        m: u32,
        copies: u32,
    },
    BinaryTetrahedral {
        copies: u32,
    },
    BinaryOctahedral {
        copies: u32,
    },
    BinaryIcosahedral {
        copies: u32,
    },
}

impl ActionSpec {
    pub fn cyclic(m: u32, weights: &[u32]) -> Result<Self, GroupError> {
        if m == 0 {
            return Err(GroupError::Invalid("cyclic order must be positive".into()));
        }
        if weights.is_empty() {
            return Err(GroupError::Invalid("need at least one weight".into()));
        }
        if m as u64 > MAX_ORDER {
            return Err(GroupError::Invalid(format!(
                "group order above {MAX_ORDER}"
            )));
        }
        let w: Vec<u32> = weights.iter().map(|a| a % m).collect();
        if m > 1 && w.contains(&0) {
            return Err(GroupError::Invalid("weights must be nonzero mod m".into()));
        }
        Ok(ActionSpec::Cyclic { m, weights: w })
    }

    pub fn trivial(dim: u32) -> Result<Self, GroupError> {
        Self::cyclic(1, &vec![0; dim as usize])
    }

    pub fn binary_dihedral(m: u32, copies: u32) -> Result<Self, GroupError> {
        if m < 2 {
            return Err(GroupError::Invalid("binary dihedral needs m >= 2".into()));
        }
        if 4 * m as u64 > MAX_ORDER {
            return Err(GroupError::Invalid(format!(
                "group order above {MAX_ORDER}"
            )));
        }
        if copies == 0 {
            return Err(GroupError::Invalid("copies must be positive".into()));
        }
        Ok(ActionSpec::BinaryDihedral { m, copies })
    }

    fn check_copies(copies: u32) -> Result<(), GroupError> {
        if copies == 0 {
            return Err(GroupError::Invalid("copies must be positive".into()));
        }
        Ok(())
    }

    pub fn binary_tetrahedral(copies: u32) -> Result<Self, GroupError> {
        Self::check_copies(copies)?;
        Ok(ActionSpec::BinaryTetrahedral { copies })
    }

    pub fn binary_octahedral(copies: u32) -> Result<Self, GroupError> {
        Self::check_copies(copies)?;
        Ok(ActionSpec::BinaryOctahedral { copies })
    }

    pub fn binary_icosahedral(copies: u32) -> Result<Self, GroupError> {
        Self::check_copies(copies)?;
        Ok(ActionSpec::BinaryIcosahedral { copies })
    }

    pub fn complex_dim(&self) -> u32 {
        match self {
            ActionSpec::Cyclic { weights, .. } => weights.len() as u32,
            ActionSpec::BinaryDihedral { copies, .. }
            | ActionSpec::BinaryTetrahedral { copies }
            | ActionSpec::BinaryOctahedral { copies }
            | ActionSpec::BinaryIcosahedral { copies } => 2 * copies,
        }
    }

    pub fn group_order(&self) -> u64 {
        match self {
            ActionSpec::Cyclic { m, .. } => *m as u64,
            ActionSpec::BinaryDihedral { m, .. } => 4 * *m as u64,
            ActionSpec::BinaryTetrahedral { .. } => 24,
            ActionSpec::BinaryOctahedral { .. } => 48,
            ActionSpec::BinaryIcosahedral { .. } => 120,
        }
    }

    pub fn is_trivial_group(&self) -> bool {
        matches!(self, ActionSpec::Cyclic { m: 1, .. })
    }

    pub fn is_quaternionic(&self) -> bool {
        !matches!(self, ActionSpec::Cyclic { .. })
    }

    /// Number of `C^2` copies for quaternionic actions.
    pub fn copies(&self) -> Option<u32> {
        match self {
            ActionSpec::Cyclic { .. } => None,
            ActionSpec::BinaryDihedral { copies, .. }
            | ActionSpec::BinaryTetrahedral { copies }
            | ActionSpec::BinaryOctahedral { copies }
            | ActionSpec::BinaryIcosahedral { copies } => Some(*copies),
        }
    }
}

impl fmt::Display for ActionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionSpec::Cyclic { m: 1, weights } => write!(f, "trivial:dim={}", weights.len()),
            ActionSpec::Cyclic { m, weights } => {
                let w: Vec<String> = weights.iter().map(u32::to_string).collect();
                write!(f, "cyclic:m={m};w={}", w.join(","))
            }
            ActionSpec::BinaryDihedral { m, copies } => write!(f, "bd:m={m};copies={copies}"),
            ActionSpec::BinaryTetrahedral { copies } => write!(f, "2t:copies={copies}"),
            ActionSpec::BinaryOctahedral { copies } => write!(f, "2o:copies={copies}"),
            ActionSpec::BinaryIcosahedral { copies } => write!(f, "2i:copies={copies}"),
        }
    }
}

impl FromStr for ActionSpec {
    type Err = SpecParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| SpecParseError {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let t = s.trim();
        let (kind, rest) = t.split_once(':').ok_or_else(|| err("missing `:`"))?;
        let mut fields: HashMap<&str, &str> = HashMap::new();
        for part in rest.split(';') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| err("expected key=value"))?;
            if fields.insert(k.trim(), v.trim()).is_some() {
                return Err(err("duplicate key"));
            }
        }
        let num = |key: &str| -> Result<u32, SpecParseError> {
            fields
                .get(key)
                .ok_or_else(|| err(&format!("missing `{key}`")))?
                .parse::<u32>()
                .map_err(|_| err(&format!("`{key}` is not a non-negative integer")))
        };
        let expect_keys = |keys: &[&str]| -> Result<(), SpecParseError> {
            if fields.len() != keys.len() || !keys.iter().all(|k| fields.contains_key(k)) {
                return Err(err(&format!("expected keys {keys:?}")));
            }
            Ok(())
        };
        let spec = match kind.trim() {
            "cyclic" => {
                expect_keys(&["m", "w"])?;
                let m = num("m")?;
                let w = fields["w"];
                let weights: Vec<u32> = if w.is_empty() {
                    Vec::new()
                } else {
                    w.split(',')
                        .map(|a| a.trim().parse::<u32>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| err("weights must be non-negative integers"))?
                };
                ActionSpec::cyclic(m, &weights)
            }
            "trivial" => {
                expect_keys(&["dim"])?;
                ActionSpec::trivial(num("dim")?)
            }
            "bd" => {
                expect_keys(&["m", "copies"])?;
                ActionSpec::binary_dihedral(num("m")?, num("copies")?)
            }
            "2t" => {
                expect_keys(&["copies"])?;
                ActionSpec::binary_tetrahedral(num("copies")?)
            }
            "2o" => {
                expect_keys(&["copies"])?;
                ActionSpec::binary_octahedral(num("copies")?)
            }
            "2i" => {
                expect_keys(&["copies"])?;
                ActionSpec::binary_icosahedral(num("copies")?)
            }
            _ => return Err(err("unknown family")),
        };
        spec.map_err(|e| err(&e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Q(√2, √5) and quaternions over it

/// Element `a + b√2 + c√5 + d√10` of `Q(√2, √5)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Qf(pub [Rational64; 4]);

impl Qf {
    pub fn zero() -> Self {
        Qf([Rational64::zero(); 4])
    }

    pub fn from_ratio(a: i64, b: i64) -> Self {
        let mut q = Self::zero();
        q.0[0] = Rational64::new(a, b);
        q
    }

    fn new(v: [(i64, i64); 4]) -> Self {
        Qf(v.map(|(a, b)| Rational64::new(a, b)))
    }

    pub fn add(self, o: Self) -> Self {
        let mut r = self;
        for i in 0..4 {
            r.0[i] += o.0[i];
        }
        r
    }

    pub fn neg(self) -> Self {
        Qf(self.0.map(|x| -x))
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn mul(self, o: Self) -> Self {
        let [a0, a1, a2, a3] = self.0;
        let [b0, b1, b2, b3] = o.0;
        let two = Rational64::from_integer(2);
        let five = Rational64::from_integer(5);
        let ten = Rational64::from_integer(10);
        Qf([
            a0 * b0 + two * a1 * b1 + five * a2 * b2 + ten * a3 * b3,
            a0 * b1 + a1 * b0 + five * (a2 * b3 + a3 * b2),
            a0 * b2 + a2 * b0 + two * (a1 * b3 + a3 * b1),
            a0 * b3 + a3 * b0 + a1 * b2 + a2 * b1,
        ])
    }

    pub fn scale(self, c: Rational64) -> Self {
        Qf(self.0.map(|x| x * c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

impl fmt::Display for Qf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "√2", "√5", "√10"];
        let mut first = true;
        for (c, name) in self.0.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { "-" } else { "+" })?;
            }
            first = false;
            if name.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "{mag}{name}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Quaternion `w + xi + yj + zk` with coordinates in `Q(√2, √5)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Quat(pub [Qf; 4]);

impl Quat {
    pub fn mul(&self, o: &Quat) -> Quat {
        let [w1, x1, y1, z1] = self.0;
        let [w2, x2, y2, z2] = o.0;
        Quat([
            w1.mul(w2).sub(x1.mul(x2)).sub(y1.mul(y2)).sub(z1.mul(z2)),
            w1.mul(x2).add(x1.mul(w2)).add(y1.mul(z2)).sub(z1.mul(y2)),
            w1.mul(y2).sub(x1.mul(z2)).add(y1.mul(w2)).add(z1.mul(x2)),
            w1.mul(z2).add(x1.mul(y2)).sub(y1.mul(x2)).add(z1.mul(w2)),
        ])
    }

    pub fn norm(&self) -> Qf {
        self.0.iter().fold(Qf::zero(), |acc, c| acc.add(c.mul(*c)))
    }

    pub fn one() -> Quat {
        Quat([Qf::from_ratio(1, 1), Qf::zero(), Qf::zero(), Qf::zero()])
    }
}

impl fmt::Display for Quat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.0[0], self.0[1], self.0[2], self.0[3]
        )
    }
}

fn sign_patterns(coords: [Qf; 4]) -> Vec<Quat> {
    let nonzero: Vec<usize> = (0..4).filter(|&i| !coords[i].is_zero()).collect();
    let mut out = Vec::new();
    for mask in 0..(1u32 << nonzero.len()) {
        let mut c = coords;
        for (bit, &i) in nonzero.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                c[i] = c[i].neg();
            }
        }
        out.push(Quat(c));
    }
    out
}

fn binary_tetrahedral_elements() -> Vec<Quat> {
    let one = Qf::from_ratio(1, 1);
    let half = Qf::from_ratio(1, 2);
    let mut v = Vec::new();
    for i in 0..4 {
        let mut c = [Qf::zero(); 4];
        c[i] = one;
        v.extend(sign_patterns(c));
    }
    v.extend(sign_patterns([half; 4]));
    v
}

fn binary_octahedral_elements() -> Vec<Quat> {
    let r = Qf::new([(0, 1), (1, 2), (0, 1), (0, 1)]); // √2/2
    let mut v = binary_tetrahedral_elements();
    for i in 0..4 {
        for j in i + 1..4 {
            let mut c = [Qf::zero(); 4];
            c[i] = r;
            c[j] = r;
            v.extend(sign_patterns(c));
        }
    }
    v
}

fn binary_icosahedral_elements() -> Vec<Quat> {
    let half = Qf::from_ratio(1, 2);
    let phi_half = Qf::new([(1, 4), (0, 1), (1, 4), (0, 1)]); // (1+√5)/4
    let inv_phi_half = Qf::new([(-1, 4), (0, 1), (1, 4), (0, 1)]); // (√5-1)/4
    let vals = [Qf::zero(), half, inv_phi_half, phi_half];
    let mut v = binary_tetrahedral_elements();
    for perm in even_permutations() {
        let mut c = [Qf::zero(); 4];
        for (slot, &src) in perm.iter().enumerate() {
            c[slot] = vals[src];
        }
        v.extend(sign_patterns(c));
    }
    v
}

fn even_permutations() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    if p.iter().any(|&x| std::mem::replace(&mut seen[x], true)) {
                        continue;
                    }
                    let inversions = (0..4)
                        .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
                        .filter(|&(i, j)| p[i] > p[j])
                        .count();
                    if inversions % 2 == 0 {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// `2cos(2πa/d)` in `Q(√2, √5)` for the element orders occurring in 2T, 2O, 2I.
fn two_cos_table(d: u32) -> Vec<(u32, Qf)> {
    let q = |a: i64, b: i64| Qf::from_ratio(a, b);
    match d {
        1 => vec![(0, q(2, 1))],
        2 => vec![(1, q(-2, 1))],
        3 => vec![(1, q(-1, 1))],
        4 => vec![(1, Qf::zero())],
        5 => vec![
            (1, Qf::new([(-1, 2), (0, 1), (1, 2), (0, 1)])),
            (2, Qf::new([(-1, 2), (0, 1), (-1, 2), (0, 1)])),
        ],
        6 => vec![(1, q(1, 1))],
        8 => vec![
            (1, Qf::new([(0, 1), (1, 1), (0, 1), (0, 1)])),
            (3, Qf::new([(0, 1), (-1, 1), (0, 1), (0, 1)])),
        ],
        10 => vec![
            (1, Qf::new([(1, 2), (0, 1), (1, 2), (0, 1)])),
            (3, Qf::new([(1, 2), (0, 1), (-1, 2), (0, 1)])),
        ],
        _ => Vec::new(),
    }
}

/// Recovers `a` with `2cos(2πa/d) = two_re`, `0 <= a <= d/2`.
pub fn eigen_angle_numerator(d: u32, two_re: &Qf) -> Option<u32> {
    two_cos_table(d)
        .into_iter()
        .find(|(_, v)| v == two_re)
        .map(|(a, _)| a)
}

// ---------------------------------------------------------------------------
// Abstract group tables

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupElement {
    /// `g^k` for the cyclic generator.
    Cyclic {
        k: u32,
    },
    /// `a^i` (`x = false`) or `a^i x` (`x = true`) in the binary dihedral group.
    Dicyclic {
        i: u32,
        x: bool,
    },
    Quaternion(Quat),
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Cyclic { k } => write!(f, "g^{k}"),
            GroupElement::Dicyclic { i, x: false } => write!(f, "a^{i}"),
            GroupElement::Dicyclic { i, x: true } => write!(f, "a^{i}x"),
            GroupElement::Quaternion(q) => write!(f, "{q}"),
        }
    }
}

impl Serialize for GroupElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

struct BaseGroup {
    elements: Vec<Quat>,
    mul: Vec<u32>,
    /// `(order, 2·Re)` per element
    traces: Vec<(u32, Qf)>,
}

fn build_quaternion_group(elements: Vec<Quat>) -> Result<BaseGroup, GroupError> {
    let n = elements.len();
    let one = Qf::from_ratio(1, 1);
    let index: HashMap<Quat, u32> = elements
        .iter()
        .enumerate()
        .map(|(i, q)| (*q, i as u32))
        .collect();
    if index.len() != n || elements.iter().any(|q| q.norm() != one) {
        return Err(GroupError::Closure);
    }
    let mut mul = vec![0u32; n * n];
    for (i, a) in elements.iter().enumerate() {
        for (j, b) in elements.iter().enumerate() {
            mul[i * n + j] = *index.get(&a.mul(b)).ok_or(GroupError::Closure)?;
        }
    }
    let id = index[&Quat::one()] as usize;
    let traces = (0..n)
        .map(|i| {
            let mut order = 1;
            let mut cur = i;
            while cur != id {
                cur = mul[cur * n + i] as usize;
                order += 1;
            }
            (order, elements[i].0[0].scale(Rational64::from_integer(2)))
        })
        .collect();
    Ok(BaseGroup {
        elements,
        mul,
        traces,
    })
}

fn base_group(spec: &ActionSpec) -> Result<&'static BaseGroup, GroupError> {
    static T: OnceLock<Result<BaseGroup, GroupError>> = OnceLock::new();
    static O: OnceLock<Result<BaseGroup, GroupError>> = OnceLock::new();
    static I: OnceLock<Result<BaseGroup, GroupError>> = OnceLock::new();
    let cell = match spec {
        ActionSpec::BinaryTetrahedral { .. } => {
            T.get_or_init(|| build_quaternion_group(binary_tetrahedral_elements()))
        }
        ActionSpec::BinaryOctahedral { .. } => {
            O.get_or_init(|| build_quaternion_group(binary_octahedral_elements()))
        }
        ActionSpec::BinaryIcosahedral { .. } => {
            I.get_or_init(|| build_quaternion_group(binary_icosahedral_elements()))
        }
        _ => return Err(GroupError::Domain("not a polyhedral spec".into())),
    };
    cell.as_ref().map_err(Clone::clone)
}

/// Eigenvalues `e^{2πi·θ}` recorded as angles `θ ∈ (0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EigenData {
    pub order: u32,
    #[serde(serialize_with = "ser::rat_vec")]
    pub angles: Vec<Rat>,
}

impl EigenData {
    fn from_numerators(order: u32, nums: impl IntoIterator<Item = u32>) -> Self {
        let angles = nums
            .into_iter()
            .map(|a| {
                let a = a % order;
                if a == 0 {
                    Rat::one()
                } else {
                    rat(a as i64, order as i64)
                }
            })
            .collect();
        EigenData { order, angles }
    }

    /// `Σ θ_j` over angles below 1 (eigenvalue 1 contributes 0).
    pub fn age(&self) -> Rat {
        self.angles
            .iter()
            .filter(|a| !a.is_one())
            .fold(Rat::zero(), |s, a| s + a)
    }

    pub fn has_eigenvalue_one(&self) -> bool {
        self.angles.iter().any(|a| a.is_one())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjClass {
    pub index: usize,
    pub representative: GroupElement,
    #[serde(skip)]
    pub rep_index: usize,
    pub size: u64,
    pub centralizer_order: u64,
    #[serde(serialize_with = "ser::rat")]
    pub age: Rat,
    pub eigen: EigenData,
    #[serde(skip)]
    pub members: Vec<usize>,
    /// Index of the class of the inverses.
    pub inverse_class: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReebFamily {
    pub class: usize,
    /// Period `l` as a multiple of `2π`.
    #[serde(serialize_with = "ser::rat")]
    pub period: Rat,
    pub dim_v: u32,
    #[serde(serialize_with = "ser::rat")]
    pub mu_cz: Rat,
    #[serde(serialize_with = "ser::rat")]
    pub lsft: Rat,
    #[serde(serialize_with = "ser::rat")]
    pub min_generator_cz: Rat,
    #[serde(serialize_with = "ser::rat")]
    pub boundary_degree: Rat,
}

/// Frozen multiplication table together with eigen, age and conjugacy data.
#[derive(Debug, Clone)]
pub struct GroupTable {
    spec: ActionSpec,
    elements: Vec<GroupElement>,
    mul: Vec<u32>,
    inv: Vec<u32>,
    eigen: Vec<EigenData>,
    ages: Vec<Rat>,
    classes: Vec<ConjClass>,
    class_of: Vec<usize>,
}

impl GroupTable {
    pub fn build(spec: &ActionSpec) -> Result<GroupTable, GroupError> {
        let (elements, mul, eigen) = match spec {
            ActionSpec::Cyclic { m, weights } => {
                let m = *m;
                let elements = (0..m).map(|k| GroupElement::Cyclic { k }).collect();
                let mut mul = vec![0u32; (m * m) as usize];
                for i in 0..m {
                    for j in 0..m {
                        mul[(i * m + j) as usize] = (i + j) % m;
                    }
                }
                let eigen = (0..m)
                    .map(|k| {
                        let order = m / k.gcd(&m);
                        let nums = weights.iter().map(|&a| {
                            // angle k·a/m written over the element order
                            ((k as u64 * a as u64 % m as u64) / (m / order) as u64) as u32
                        });
                        EigenData::from_numerators(order, nums)
                    })
                    .collect();
                (elements, mul, eigen)
            }
            ActionSpec::BinaryDihedral { m, copies } => {
                let m = *m;
                let tm = 2 * m;
                let n = 2 * tm;
                let idx = |i: u32, x: bool| (i % tm + if x { tm } else { 0 }) as usize;
                let mut elements = Vec::with_capacity(n as usize);
                for x in [false, true] {
                    for i in 0..tm {
                        elements.push(GroupElement::Dicyclic { i, x });
                    }
                }
                let mut mul = vec![0u32; (n * n) as usize];
                for x1 in [false, true] {
                    for i in 0..tm {
                        for x2 in [false, true] {
                            for j in 0..tm {
                                let prod = match (x1, x2) {
                                    (false, false) => idx(i + j, false),
                                    (false, true) => idx(i + j, true),
                                    (true, false) => idx(i + tm - j, true),
                                    (true, true) => idx(i + tm - j + m, false),
                                };
                                mul[idx(i, x1) * n as usize + idx(j, x2)] = prod as u32;
                            }
                        }
                    }
                }
                let eigen = elements
                    .iter()
                    .map(|e| match e {
                        GroupElement::Dicyclic { i, x: false } => {
                            let order = tm / i.gcd(&tm);
                            let a = i / (tm / order);
                            let pair = [a, order - a % order];
                            EigenData::from_numerators(order, (0..*copies).flat_map(|_| pair))
                        }
                        _ => EigenData::from_numerators(4, (0..*copies).flat_map(|_| [1, 3])),
                    })
                    .collect();
                (elements, mul, eigen)
            }
            _ => {
                let base = base_group(spec)?;
                let copies = spec.copies().unwrap();
                let elements = base
                    .elements
                    .iter()
                    .map(|q| GroupElement::Quaternion(*q))
                    .collect();
                let eigen = base
                    .traces
                    .iter()
                    .map(|(d, two_re)| {
                        let a =
                            eigen_angle_numerator(*d, two_re).ok_or(GroupError::EigenAngle(*d))?;
                        let pair = [a, d - a % d];
                        Ok(EigenData::from_numerators(
                            *d,
                            (0..copies).flat_map(|_| pair),
                        ))
                    })
                    .collect::<Result<Vec<_>, GroupError>>()?;
                (elements, base.mul.clone(), eigen)
            }
        };
        Self::finish(spec.clone(), elements, mul, eigen)
    }

    fn finish(
        spec: ActionSpec,
        elements: Vec<GroupElement>,
        mul: Vec<u32>,
        eigen: Vec<EigenData>,
    ) -> Result<GroupTable, GroupError> {
        let n = elements.len();
        if mul.len() != n * n || n as u64 != spec.group_order() {
            return Err(GroupError::Closure);
        }
        // element 0 must be the identity
        if (0..n).any(|i| mul[i] as usize != i || mul[i * n] as usize != i) {
            return Err(GroupError::Closure);
        }
        let mut inv = vec![0u32; n];
        for i in 0..n {
            let j = (0..n)
                .find(|&j| mul[i * n + j] == 0)
                .ok_or(GroupError::Closure)?;
            inv[i] = j as u32;
        }
        let ages: Vec<Rat> = eigen.iter().map(EigenData::age).collect();
        let mut table = GroupTable {
            spec,
            elements,
            mul,
            inv,
            eigen,
            ages,
            classes: Vec::new(),
            class_of: vec![usize::MAX; n],
        };
        table.compute_classes();
        Ok(table)
    }

    fn compute_classes(&mut self) {
        let n = self.order();
        let mut classes: Vec<ConjClass> = Vec::new();
        for g in 0..n {
            if self.class_of[g] != usize::MAX {
                continue;
            }
            let idx = classes.len();
            let mut members: Vec<usize> = (0..n).map(|h| self.conj(h, g)).collect();
            members.sort_unstable();
            members.dedup();
            for &x in &members {
                self.class_of[x] = idx;
            }
            let size = members.len() as u64;
            classes.push(ConjClass {
                index: idx,
                representative: self.elements[g].clone(),
                rep_index: g,
                size,
                centralizer_order: n as u64 / size,
                age: self.ages[g].clone(),
                eigen: self.eigen[g].clone(),
                members,
                inverse_class: 0,
            });
        }
        for c in &mut classes {
            c.inverse_class = self.class_of[self.inv[c.rep_index] as usize];
        }
        self.classes = classes;
    }

    pub fn spec(&self) -> &ActionSpec {
        &self.spec
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn complex_dim(&self) -> u32 {
        self.spec.complex_dim()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order() + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    /// `h g h^{-1}`.
    pub fn conj(&self, h: usize, g: usize) -> usize {
        self.mul(self.mul(h, g), self.inv(h))
    }

    pub fn eigen(&self, g: usize) -> &EigenData {
        &self.eigen[g]
    }

    pub fn element_age(&self, g: usize) -> &Rat {
        &self.ages[g]
    }

    pub fn classes(&self) -> &[ConjClass] {
        &self.classes
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.class_of[g]
    }

    pub fn commutes(&self, a: usize, b: usize) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }

    /// Order of the centralizer of every element of `set`.
    pub fn joint_centralizer_order(&self, set: &[usize]) -> u64 {
        (0..self.order())
            .filter(|&h| set.iter().all(|&g| self.commutes(h, g)))
            .count() as u64
    }

    /// No nontrivial element has eigenvalue 1.
    pub fn is_isolated(&self) -> bool {
        (1..self.order()).all(|g| !self.eigen[g].has_eigenvalue_one())
    }

    /// Minimum of `age - 1` over nontrivial classes; `n - 1` for the trivial group.
    pub fn minimal_discrepancy(&self) -> Result<Rat, GroupError> {
        if !self.is_isolated() {
            return Err(GroupError::NotIsolated);
        }
        if self.order() == 1 {
            return Ok(rat_int(self.complex_dim() as i64 - 1));
        }
        let min = self
            .classes
            .iter()
            .skip(1)
            .map(|c| c.age.clone())
            .min()
            .unwrap();
        Ok(min - Rat::one())
    }

    pub fn is_terminal(&self) -> Result<bool, GroupError> {
        Ok(self.minimal_discrepancy()?.is_positive())
    }

    pub fn is_canonical(&self) -> Result<bool, GroupError> {
        Ok(!self.minimal_discrepancy()?.is_negative())
    }

    /// `min_g (2n - 2 age(g) - 2)`, identity included.
    pub fn hmi(&self) -> Result<Rat, GroupError> {
        if !self.is_isolated() {
            return Err(GroupError::NotIsolated);
        }
        let n = rat_int(self.complex_dim() as i64);
        let two = rat_int(2);
        Ok(self
            .classes
            .iter()
            .map(|c| &two * &n - &two * &c.age - &two)
            .min()
            .unwrap())
    }

    /// One family per class and period `t·2π` with `0 < t <= cutoff`.
    pub fn reeb_families(&self, cutoff: &Rat) -> Result<Vec<ReebFamily>, GroupError> {
        if !cutoff.is_positive() {
            return Err(GroupError::Domain("period cutoff must be positive".into()));
        }
        if !self.is_isolated() {
            return Err(GroupError::NotIsolated);
        }
        let n = rat_int(self.complex_dim() as i64);
        let two = rat_int(2);
        let mut out = Vec::new();
        for c in &self.classes {
            let angles = &c.eigen.angles;
            let mut periods: Vec<Rat> = Vec::new();
            for a in angles {
                let mut t = a.clone();
                while &t <= cutoff {
                    periods.push(t.clone());
                    t += Rat::one();
                }
            }
            periods.sort();
            periods.dedup();
            for t in periods {
                let dim_v = angles.iter().filter(|a| (&t - *a).is_integer()).count() as u32;
                // (i, j) with angle_i + j < t
                let below: i64 = angles
                    .iter()
                    .map(|a| {
                        let d = &t - a;
                        if d.is_positive() {
                            d.ceil().to_integer().to_i64().unwrap()
                        } else {
                            0
                        }
                    })
                    .sum();
                let dv = rat_int(dim_v as i64);
                let mu = &n - &two * &c.age + &two * rat_int(below) + &dv;
                let lsft = &mu + &n - rat_int(3) - (&dv - Rat::one());
                let min_gen = &mu - &dv + Rat::one();
                let boundary = &n - &min_gen;
                out.push(ReebFamily {
                    class: c.index,
                    period: t,
                    dim_v,
                    mu_cz: mu,
                    lsft,
                    min_generator_cz: min_gen,
                    boundary_degree: boundary,
                });
            }
        }
        Ok(out)
    }
}

pub fn enumerate_elements(spec: &ActionSpec) -> Result<Vec<GroupElement>, GroupError> {
    Ok(GroupTable::build(spec)?.elements)
}

pub fn conj_classes(spec: &ActionSpec) -> Result<Vec<ConjClass>, GroupError> {
    Ok(GroupTable::build(spec)?.classes)
}

pub fn age(class: &ConjClass) -> Rat {
    class.age.clone()
}

pub fn is_isolated(spec: &ActionSpec) -> Result<bool, GroupError> {
    Ok(GroupTable::build(spec)?.is_isolated())
}

pub fn minimal_discrepancy(spec: &ActionSpec) -> Result<Rat, GroupError> {
    GroupTable::build(spec)?.minimal_discrepancy()
}

pub fn is_terminal(spec: &ActionSpec) -> Result<bool, GroupError> {
    GroupTable::build(spec)?.is_terminal()
}

pub fn hmi(spec: &ActionSpec) -> Result<Rat, GroupError> {
    GroupTable::build(spec)?.hmi()
}

pub fn reeb_families(spec: &ActionSpec, cutoff: &Rat) -> Result<Vec<ReebFamily>, GroupError> {
    GroupTable::build(spec)?.reeb_families(cutoff)
}

/// Renders an age or degree label.
pub fn label(x: &Rat) -> String {
    fmt_rat(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> ActionSpec {
        s.parse().unwrap()
    }

    #[test]
    fn element_counts() {
        assert_eq!(
            enumerate_elements(&spec("cyclic:m=7;w=1,2,3"))
                .unwrap()
                .len(),
            7
        );
        assert_eq!(
            enumerate_elements(&spec("bd:m=3;copies=1")).unwrap().len(),
            12
        );
        assert_eq!(enumerate_elements(&spec("2t:copies=1")).unwrap().len(), 24);
        assert_eq!(enumerate_elements(&spec("2o:copies=1")).unwrap().len(), 48);
        assert_eq!(enumerate_elements(&spec("2i:copies=1")).unwrap().len(), 120);
    }

    #[test]
    fn class_counts() {
        assert_eq!(conj_classes(&spec("cyclic:m=5;w=1,2")).unwrap().len(), 5);
        assert_eq!(conj_classes(&spec("2t:copies=1")).unwrap().len(), 7);
        assert_eq!(conj_classes(&spec("2o:copies=1")).unwrap().len(), 8);
        assert_eq!(conj_classes(&spec("2i:copies=1")).unwrap().len(), 9);
        for m in 2..=5 {
            let s = ActionSpec::binary_dihedral(m, 1).unwrap();
            assert_eq!(conj_classes(&s).unwrap().len(), m as usize + 3);
        }
    }

    #[test]
    fn ages() {
        let t = GroupTable::build(&spec("cyclic:m=2;w=1,1,1,1,1")).unwrap();
        assert_eq!(t.classes()[1].age, rat(5, 2));
        let t = GroupTable::build(&spec("cyclic:m=3;w=1,1,2")).unwrap();
        assert_eq!(t.classes()[1].age, rat(4, 3));
        let t = GroupTable::build(&spec("2i:copies=3")).unwrap();
        assert!(t.classes().iter().skip(1).all(|c| c.age == rat(3, 1)));
    }

    #[test]
    fn isolation() {
        assert!(!is_isolated(&spec("cyclic:m=4;w=1,2")).unwrap());
        assert!(is_isolated(&spec("cyclic:m=9;w=1,2,4,5")).unwrap());
        assert!(is_isolated(&spec("bd:m=5;copies=2")).unwrap());
        assert!(is_isolated(&spec("2o:copies=1")).unwrap());
    }

    #[test]
    fn terminality() {
        for n in 1..=6u32 {
            let s = ActionSpec::cyclic(2, &vec![1; n as usize]).unwrap();
            assert_eq!(is_terminal(&s).unwrap(), n >= 3, "n={n}");
        }
        for m in [5u32, 7, 12] {
            let a = if m == 12 { 5 } else { 2 };
            let s = ActionSpec::cyclic(m, &[1, m - 1, a]).unwrap();
            assert!(is_terminal(&s).unwrap());
        }
        assert_eq!(
            minimal_discrepancy(&spec("2t:copies=3")).unwrap(),
            rat(2, 1)
        );
        assert!(!is_terminal(&spec("2t:copies=1")).unwrap());
        assert_eq!(
            minimal_discrepancy(&spec("trivial:dim=4")).unwrap(),
            rat(3, 1)
        );
        assert!(minimal_discrepancy(&spec("cyclic:m=4;w=1,2")).is_err());
    }

    #[test]
    fn hmi_examples() {
        assert_eq!(hmi(&spec("trivial:dim=5")).unwrap(), rat(8, 1));
        assert_eq!(hmi(&spec("cyclic:m=2;w=1,1,1,1")).unwrap(), rat(2, 1));
        assert_eq!(hmi(&spec("2o:copies=2")).unwrap(), rat(2, 1));
    }

    #[test]
    fn reeb_examples() {
        let f = reeb_families(&spec("trivial:dim=4"), &rat(1, 1)).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!((f[0].dim_v, f[0].mu_cz.clone()), (4, rat(8, 1)));
        assert_eq!(f[0].min_generator_cz, rat(5, 1));

        let f = reeb_families(&spec("cyclic:m=2;w=1,1,1,1,1"), &rat(1, 2)).unwrap();
        let minus = f.iter().find(|r| r.class == 1).unwrap();
        assert_eq!(minus.period, rat(1, 2));
        assert_eq!(minus.mu_cz, rat(5, 1));
        assert_eq!(minus.min_generator_cz, rat(1, 1));
        assert_eq!(minus.boundary_degree, rat(4, 1));
        assert!(reeb_families(&spec("trivial:dim=2"), &rat(0, 1)).is_err());
    }

    #[test]
    fn spec_round_trip() {
        for s in [
            "cyclic:m=5;w=1,2,3",
            "trivial:dim=4",
            "bd:m=3;copies=2",
            "2t:copies=1",
            "2o:copies=3",
            "2i:copies=2",
        ] {
            assert_eq!(spec(s).to_string(), s);
        }
        assert_eq!(spec("cyclic:m=3;w=4,5").to_string(), "cyclic:m=3;w=1,2");
        for bad in [
            "",
            "cyclic",
            "cyclic:m=3",
            "cyclic:m=3;w=1,3",
            "bd:m=1;copies=1",
            "2t:copies=0",
            "foo:m=1",
            "2t:copies=1;copies=2",
        ] {
            assert!(bad.parse::<ActionSpec>().is_err(), "{bad}");
        }
    }
}
