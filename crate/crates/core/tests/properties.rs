use fillcheck_core::bernoulli::{bernoulli, entry, worpitzky};
use fillcheck_core::chenruan::{
    cr_coproduct_basis, cr_degrees, cr_product, cr_product_basis, CRClass,
};
use fillcheck_core::exactnum::{rat_int, Rat};
use fillcheck_core::groups::{ActionSpec, GroupTable};
use fillcheck_core::link::{chern_nonzero_mod_p, first_chern_cyclic, total_chern};
use fillcheck_core::numtheory::{binom_nonzero_mod_p, binomial};
use fillcheck_core::obstruct::{analyze, orbifold_defect, verify_witness};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use proptest::prelude::*;

fn units(m: u32) -> Vec<u32> {
    (1..m).filter(|a| a.gcd(&m) == 1).collect()
}

/// Cyclic actions with every weight a unit, hence isolated.
fn isolated_cyclic(max_m: u32, max_n: usize) -> impl Strategy<Value = ActionSpec> {
    (2..=max_m).prop_flat_map(move |m| {
        let u = units(m);
        prop::collection::vec(prop::sample::select(u), 1..=max_n)
            .prop_map(move |w| ActionSpec::cyclic(m, &w).unwrap())
    })
}

fn builtin(max_copies: u32) -> impl Strategy<Value = ActionSpec> {
    prop_oneof![
        (2..=6u32, 1..=max_copies).prop_map(|(m, c)| ActionSpec::binary_dihedral(m, c).unwrap()),
        (1..=max_copies).prop_map(|c| ActionSpec::binary_tetrahedral(c).unwrap()),
        (1..=max_copies).prop_map(|c| ActionSpec::binary_octahedral(c).unwrap()),
        (1..=max_copies).prop_map(|c| ActionSpec::binary_icosahedral(c).unwrap()),
        (1..=6u32).prop_map(|d| ActionSpec::trivial(d).unwrap()),
    ]
}

fn any_isolated() -> impl Strategy<Value = ActionSpec> {
    prop_oneof![isolated_cyclic(12, 6), builtin(3)]
}

fn deg(t: &GroupTable) -> Vec<Rat> {
    cr_degrees(t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spec_round_trip(spec in any_isolated()) {
        let text = spec.to_string();
        let back: ActionSpec = text.parse().unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn class_sizes_and_centralizers(spec in any_isolated()) {
        let t = GroupTable::build(&spec).unwrap();
        let total: u64 = t.classes().iter().map(|c| c.size).sum();
        prop_assert_eq!(total, t.order() as u64);
        for c in t.classes() {
            prop_assert_eq!(c.size * c.centralizer_order, t.order() as u64);
        }
    }

    #[test]
    fn age_plus_inverse_age(spec in any_isolated()) {
        let t = GroupTable::build(&spec).unwrap();
        let n = rat_int(t.complex_dim());
        for g in 0..t.order() {
            if g != t.identity() {
                prop_assert_eq!(t.element_age(g) + t.element_age(t.inv(g)), n.clone());
            }
        }
    }

    #[test]
    fn product_respects_grading(spec in any_isolated()) {
        let t = GroupTable::build(&spec).unwrap();
        prop_assume!(t.order() <= 24);
        let d = deg(&t);
        let k = t.classes().len();
        for a in 0..k {
            for b in 0..k {
                for (c, _) in cr_product_basis(&t, a, b).unwrap().terms() {
                    prop_assert_eq!(&d[c], &(&d[a] + &d[b]));
                }
            }
        }
    }

    #[test]
    fn product_associative(spec in any_isolated()) {
        let t = GroupTable::build(&spec).unwrap();
        prop_assume!(t.order() <= 12);
        let k = t.classes().len();
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    let (x, y, z) = (CRClass::basis(a), CRClass::basis(b), CRClass::basis(c));
                    let left = cr_product(&t, &cr_product(&t, &x, &y).unwrap(), &z).unwrap();
                    let right = cr_product(&t, &x, &cr_product(&t, &y, &z).unwrap()).unwrap();
                    prop_assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn coproduct_degree_law(spec in any_isolated()) {
        let t = GroupTable::build(&spec).unwrap();
        prop_assume!(t.order() <= 24);
        let d = deg(&t);
        let two_n = rat_int(2 * t.complex_dim());
        for g in 0..t.classes().len() {
            for ((a, b), _) in cr_coproduct_basis(&t, g).unwrap().terms() {
                prop_assert_eq!(&d[a] + &d[b], &d[g] + &two_n);
            }
        }
    }

    #[test]
    fn chern_permutation_invariant(spec in isolated_cyclic(30, 7), rot in 0usize..7) {
        let ActionSpec::Cyclic { m, weights } = &spec else { unreachable!() };
        let mut w = weights.clone();
        let len = w.len();
        w.rotate_left(rot % len);
        w.reverse();
        let other = ActionSpec::cyclic(*m, &w).unwrap();
        prop_assert_eq!(total_chern(&spec).unwrap(), total_chern(&other).unwrap());
    }

    #[test]
    fn first_chern_is_weight_sum(spec in isolated_cyclic(30, 7)) {
        let ActionSpec::Cyclic { m, weights } = &spec else { unreachable!() };
        let c = total_chern(&spec).unwrap();
        let sum: u64 = weights.iter().map(|&a| a as u64).sum();
        if weights.len() > 1 {
            prop_assert_eq!(c.poly.coeff(1), BigInt::from(sum % *m as u64));
        }
        prop_assert_eq!(first_chern_cyclic(&spec), Some(sum % *m as u64));
    }

    #[test]
    fn lucas_agrees_with_binomials(n in 0u64..80, i in 0u64..80, p in prop::sample::select(vec![2u64, 3, 5, 7, 11])) {
        prop_assume!(i <= n);
        let direct = !(binomial(n, i) % BigInt::from(p)).is_zero();
        prop_assert_eq!(binom_nonzero_mod_p(n, i, p).unwrap(), direct);
    }

    #[test]
    fn same_weight_chern_is_lucas(m in prop::sample::select(vec![2u32, 3, 4, 5, 6, 9]), n in 2usize..12) {
        let spec = ActionSpec::cyclic(m, &vec![1; n]).unwrap();
        for p in [2u64, 3, 5] {
            if !(m as u64).is_multiple_of(p) {
                continue;
            }
            for k in 1..n as u64 {
                let q = chern_nonzero_mod_p(&spec, k, p).unwrap();
                prop_assert_eq!(q.is_nonzero(), binom_nonzero_mod_p(n as u64, k, p).unwrap());
            }
        }
    }

    #[test]
    fn defect_invariant_under_reordering_and_generator(spec in isolated_cyclic(9, 4), rot in 0usize..4) {
        let ActionSpec::Cyclic { m, weights } = &spec else { unreachable!() };
        let mut w = weights.clone();
        if w.len() % 2 == 1 {
            w.push(w[0]);
        }
        let base = ActionSpec::cyclic(*m, &w).unwrap();
        let d = orbifold_defect(&base).unwrap();
        let len = w.len();
        w.rotate_left(rot % len);
        prop_assert_eq!(&orbifold_defect(&ActionSpec::cyclic(*m, &w).unwrap()).unwrap(), &d);
        for u in units(*m) {
            let scaled: Vec<u32> = w.iter().map(|a| a * u % m).collect();
            prop_assert_eq!(&orbifold_defect(&ActionSpec::cyclic(*m, &scaled).unwrap()).unwrap(), &d);
        }
    }

    #[test]
    fn obstructions_reverify(spec in prop_oneof![isolated_cyclic(8, 7), builtin(4)]) {
        let report = analyze(&spec).unwrap();
        for v in &report.verdicts {
            prop_assert!(verify_witness(&spec, v).unwrap(), "{} failed to re-verify on {}", v.theorem, spec);
            if v.is_obstruction() {
                prop_assert!(v.applicable && v.witness.is_some());
            }
        }
    }

    #[test]
    fn bernoulli_routes_agree(n in 1u64..16) {
        prop_assert_eq!(bernoulli(n).unwrap(), worpitzky(n).unwrap());
        let e = entry(n).unwrap();
        prop_assert_eq!(e.value * rat_int(BigInt::from(2) * &e.odd_denominator), rat_int(e.numerator));
    }
}
