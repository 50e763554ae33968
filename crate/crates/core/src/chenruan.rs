//! Chen–Ruan cohomology of `C^n/G` for isolated actions: one generator per
//! conjugacy class in degree `2·age`, with the product and coproduct given by
//! centralizer-order structure constants.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::{rat_int, ser, Rat};
use crate::groups::{ActionSpec, GroupError, GroupTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChenRuanError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("class index {0} out of range")]
    BadClass(usize),
}

/// Sparse combination of class generators `[(g)]`, keyed by class index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CRClass(BTreeMap<usize, Rat>);

impl CRClass {
    pub fn zero() -> Self {
        CRClass(BTreeMap::new())
    }

    pub fn basis(class: usize) -> Self {
        let mut m = BTreeMap::new();
        m.insert(class, Rat::from_integer(1.into()));
        CRClass(m)
    }

    pub fn add_term(&mut self, class: usize, c: &Rat) {
        let e = self.0.entry(class).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&class);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Rat)> {
        self.0.iter().map(|(k, v)| (*k, v))
    }

    pub fn coeff(&self, class: usize) -> Rat {
        self.0.get(&class).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in o.terms() {
            out.add_term(k, v);
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut out = CRClass::zero();
        for (k, v) in self.terms() {
            out.add_term(k, &(v * c));
        }
        out
    }
}

impl Serialize for CRClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        #[derive(Serialize)]
        struct Term<'a> {
            class: usize,
            #[serde(serialize_with = "ser::rat")]
            coeff: &'a Rat,
        }
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for (class, coeff) in self.terms() {
            seq.serialize_element(&Term { class, coeff })?;
        }
        seq.end()
    }
}

/// Formal sum of `[(h1)] ⊗ [(h2)]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CRTensor(BTreeMap<(usize, usize), Rat>);

impl CRTensor {
    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize), &Rat)> {
        self.0.iter().map(|(k, v)| (*k, v))
    }

    pub fn coeff(&self, a: usize, b: usize) -> Rat {
        self.0.get(&(a, b)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add_term(&mut self, key: (usize, usize), c: &Rat) {
        let e = self.0.entry(key).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&key);
        }
    }
}

impl Serialize for CRTensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        #[derive(Serialize)]
        struct Term<'a> {
            left: usize,
            right: usize,
            #[serde(serialize_with = "ser::rat")]
            coeff: &'a Rat,
        }
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for ((left, right), coeff) in self.terms() {
            seq.serialize_element(&Term { left, right, coeff })?;
        }
        seq.end()
    }
}

fn require_isolated(t: &GroupTable) -> Result<(), ChenRuanError> {
    if !t.is_isolated() {
        return Err(GroupError::NotIsolated.into());
    }
    Ok(())
}

fn check_class(t: &GroupTable, c: usize) -> Result<(), ChenRuanError> {
    if c >= t.classes().len() {
        return Err(ChenRuanError::BadClass(c));
    }
    Ok(())
}

/// Representative of the orbit of `(a, b)` under simultaneous conjugation.
fn canonical_pair(t: &GroupTable, a: usize, b: usize) -> (usize, usize) {
    (0..t.order())
        .map(|k| (t.conj(k, a), t.conj(k, b)))
        .min()
        .unwrap()
}

/// `2·age(g)` for every class, in class order.
pub fn cr_degrees(t: &GroupTable) -> Result<Vec<Rat>, ChenRuanError> {
    require_isolated(t)?;
    Ok(t.classes().iter().map(|c| rat_int(2) * &c.age).collect())
}

/// `[(g1)] ∪ [(g2)]` on generators.
pub fn cr_product_basis(t: &GroupTable, g1: usize, g2: usize) -> Result<CRClass, ChenRuanError> {
    require_isolated(t)?;
    check_class(t, g1)?;
    check_class(t, g2)?;
    let id = t.class_of(t.identity());
    if g1 == id {
        return Ok(CRClass::basis(g2));
    }
    if g2 == id {
        return Ok(CRClass::basis(g1));
    }
    let mut seen = BTreeSet::new();
    let mut out = CRClass::zero();
    for &h1 in &t.classes()[g1].members {
        for &h2 in &t.classes()[g2].members {
            let h = t.mul(h1, h2);
            if t.element_age(h1) + t.element_age(h2) != *t.element_age(h) {
                continue;
            }
            if !seen.insert(canonical_pair(t, h1, h2)) {
                continue;
            }
            let c_h = t.classes()[t.class_of(h)].centralizer_order;
            let joint = t.joint_centralizer_order(&[h1, h2]);
            out.add_term(t.class_of(h), &Rat::new(c_h.into(), joint.into()));
        }
    }
    Ok(out)
}

pub fn cr_product(t: &GroupTable, x: &CRClass, y: &CRClass) -> Result<CRClass, ChenRuanError> {
    let mut out = CRClass::zero();
    for (a, ca) in x.terms() {
        for (b, cb) in y.terms() {
            let p = cr_product_basis(t, a, b)?;
            out = out.add(&p.scale(&(ca * cb)));
        }
    }
    Ok(out)
}

/// `Δ[(g)]` on a generator.
pub fn cr_coproduct_basis(t: &GroupTable, g: usize) -> Result<CRTensor, ChenRuanError> {
    require_isolated(t)?;
    check_class(t, g)?;
    let n = rat_int(t.complex_dim());
    let mut seen = BTreeSet::new();
    let mut out = CRTensor::default();
    for &h in &t.classes()[g].members {
        for h1 in 0..t.order() {
            let h2 = t.mul(t.inv(h1), h);
            if t.element_age(h1) + t.element_age(h2) != t.element_age(h) + &n {
                continue;
            }
            if !seen.insert(canonical_pair(t, h1, h2)) {
                continue;
            }
            let c1 = t.classes()[t.class_of(h1)].centralizer_order;
            let c2 = t.classes()[t.class_of(h2)].centralizer_order;
            let joint = t.joint_centralizer_order(&[h1, h2]);
            out.add_term(
                (t.class_of(h1), t.class_of(h2)),
                &Rat::new((c1 * c2).into(), joint.into()),
            );
        }
    }
    Ok(out)
}

pub fn cr_coproduct(t: &GroupTable, x: &CRClass) -> Result<CRTensor, ChenRuanError> {
    let mut out = CRTensor::default();
    for (a, ca) in x.terms() {
        for (k, v) in cr_coproduct_basis(t, a)?.terms() {
            out.add_term(k, &(v * ca));
        }
    }
    Ok(out)
}

/// The matrix read off `Δ[(Id)]` pairs each nontrivial class with exactly its
/// inverse class, with positive weight.
pub fn pairing_nondegenerate(t: &GroupTable) -> Result<bool, ChenRuanError> {
    let delta = cr_coproduct_basis(t, t.class_of(t.identity()))?;
    let k = t.classes().len();
    let mut rows = vec![Vec::new(); k];
    for ((a, b), c) in delta.terms() {
        if !c.is_positive() {
            return Ok(false);
        }
        rows[a].push(b);
    }
    let id = t.class_of(t.identity());
    let mut hit = vec![false; k];
    for (a, row) in rows.iter().enumerate() {
        if a == id {
            if !row.is_empty() {
                return Ok(false);
            }
            continue;
        }
        if row.len() != 1 || row[0] != t.classes()[a].inverse_class || hit[row[0]] {
            return Ok(false);
        }
        hit[row[0]] = true;
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FillingPrediction {
    pub applicable: bool,
    pub total_rank: usize,
    /// Rational degree label `2·age(g)` of each generator `y_(g)`.
    #[serde(serialize_with = "ser::rat_vec")]
    pub degree_labels: Vec<Rat>,
    pub even_degrees_only: bool,
    pub cup_length_bound: Option<i64>,
}

/// `⌊(n - 1 - md)/(1 + md)⌋` for terminal actions.
pub fn cup_length_bound(t: &GroupTable) -> Result<Option<i64>, ChenRuanError> {
    if !t.is_isolated() || !t.is_terminal()? {
        return Ok(None);
    }
    let md = t.minimal_discrepancy()?;
    let n = rat_int(t.complex_dim());
    let one = Rat::from_integer(1.into());
    let q = (&n - &one - &md) / (&one + &md);
    Ok(q.floor().to_integer().to_i64())
}

/// What the Floer-theoretic constraints predict for a hypothetical exact filling.
pub fn predicted_filling_cohomology(t: &GroupTable) -> Result<FillingPrediction, ChenRuanError> {
    let applicable = t.is_isolated() && t.is_terminal()?;
    if !applicable {
        return Ok(FillingPrediction {
            applicable,
            total_rank: 0,
            degree_labels: Vec::new(),
            even_degrees_only: false,
            cup_length_bound: None,
        });
    }
    Ok(FillingPrediction {
        applicable,
        total_rank: t.classes().len(),
        degree_labels: cr_degrees(t)?,
        even_degrees_only: true,
        cup_length_bound: cup_length_bound(t)?,
    })
}

/// Spec-level convenience wrapper.
pub fn cr_degrees_of(spec: &ActionSpec) -> Result<Vec<Rat>, ChenRuanError> {
    cr_degrees(&GroupTable::build(spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn table(s: &str) -> GroupTable {
        GroupTable::build(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn degrees() {
        assert_eq!(
            cr_degrees(&table("cyclic:m=2;w=1,1,1,1,1")).unwrap(),
            vec![rat(0, 1), rat(5, 1)]
        );
        assert_eq!(
            cr_degrees(&table("cyclic:m=3;w=1,1,1")).unwrap(),
            vec![rat(0, 1), rat(2, 1), rat(4, 1)]
        );
        let d = cr_degrees(&table("2o:copies=2")).unwrap();
        assert_eq!(d.len(), 8);
        assert!(d[1..].iter().all(|x| *x == rat(4, 1)));
    }

    #[test]
    fn products() {
        let t = table("cyclic:m=2;w=1,1,1,1");
        assert!(cr_product_basis(&t, 1, 1).unwrap().is_zero());
        assert_eq!(cr_product_basis(&t, 0, 1).unwrap(), CRClass::basis(1));
        let t = table("cyclic:m=3;w=1,1,1");
        assert_eq!(cr_product_basis(&t, 1, 1).unwrap(), CRClass::basis(2));
    }

    #[test]
    fn coproducts() {
        let t = table("cyclic:m=2;w=1,1,1");
        let d = cr_coproduct_basis(&t, 0).unwrap();
        assert_eq!(d.terms().count(), 1);
        assert_eq!(d.coeff(1, 1), rat(2, 1));
        assert!(cr_coproduct_basis(&t, 1).unwrap().is_zero());
    }

    #[test]
    fn pairing() {
        for s in [
            "cyclic:m=5;w=1,2,3",
            "2t:copies=2",
            "trivial:dim=3",
            "bd:m=3;copies=1",
        ] {
            assert!(pairing_nondegenerate(&table(s)).unwrap(), "{s}");
        }
    }

    #[test]
    fn predictions() {
        let p = predicted_filling_cohomology(&table("cyclic:m=2;w=1,1,1,1")).unwrap();
        assert_eq!(
            (p.total_rank, p.degree_labels.clone()),
            (2, vec![rat(0, 1), rat(4, 1)])
        );
        assert_eq!(p.cup_length_bound, Some(1));
        let p = predicted_filling_cohomology(&table("cyclic:m=2;w=1,1")).unwrap();
        assert!(!p.applicable);
        let p = predicted_filling_cohomology(&table("cyclic:m=3;w=1,1,1,1,1")).unwrap();
        assert_eq!(p.total_rank, 3);
    }
}
