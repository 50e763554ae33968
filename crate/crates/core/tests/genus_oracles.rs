//! Independent oracle for multiplicative sequences: plug explicit integer roots
//! into `Π f(t·r_i)`, read off the `t^m` coefficient, and recover the
//! polynomial in elementary symmetric functions by exact linear solving.

use fillcheck_core::exactnum::Rat;
use fillcheck_core::genus::{
    characteristic_series, genus_in_pontryagin, partitions, wu_class, wu_series, GenusKind,
    Partition, SymPoly,
};
use num_bigint::BigInt;
use num_traits::{One, Zero};

fn ri(x: i64) -> Rat {
    Rat::from_integer(BigInt::from(x))
}

/// `t^m` coefficient of `Π_i f(t·r_i)`.
fn product_coefficient(f: &[Rat], roots: &[i64], m: usize) -> Rat {
    let mut acc = vec![Rat::zero(); m + 1];
    acc[0] = Rat::one();
    for &r in roots {
        let mut g = vec![Rat::zero(); m + 1];
        let mut pow = Rat::one();
        for (k, gk) in g.iter_mut().enumerate() {
            *gk = f.get(k).cloned().unwrap_or_else(Rat::zero) * &pow;
            pow *= ri(r);
        }
        let mut next = vec![Rat::zero(); m + 1];
        for i in 0..=m {
            for j in 0..=m - i {
                next[i + j] += &acc[i] * &g[j];
            }
        }
        acc = next;
    }
    acc[m].clone()
}

fn elementary(roots: &[i64], j: usize) -> Rat {
    let mut e = vec![Rat::zero(); roots.len() + 1];
    e[0] = Rat::one();
    for &r in roots {
        for k in (1..=roots.len()).rev() {
            let prev = e[k - 1].clone();
            e[k] += prev * ri(r);
        }
    }
    e.get(j).cloned().unwrap_or_else(Rat::zero)
}

fn root_tuple(m: usize, seed: u64) -> Vec<i64> {
    let mut x = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    (0..m)
        .map(|_| {
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((x >> 33) % 13) as i64 - 6
        })
        .collect()
}

/// Solves for the weight-`m` polynomial with the given characteristic series.
fn oracle(f: &[Rat], m: u32) -> SymPoly {
    let basis = partitions(m);
    let k = basis.len();
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut seed = 1;
    while rows.len() < 2 * k {
        let roots = root_tuple(m as usize, seed);
        seed += 1;
        let e: Vec<Rat> = (0..=m as usize).map(|j| elementary(&roots, j)).collect();
        let mut row: Vec<Rat> = basis
            .iter()
            .map(|p| {
                p.parts()
                    .iter()
                    .fold(Rat::one(), |a, &i| a * &e[i as usize])
            })
            .collect();
        row.push(product_coefficient(f, &roots, m as usize));
        rows.push(row);
    }
    // Gauss-Jordan on the overdetermined system, then check consistency
    let mut r = 0;
    for c in 0..k {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            panic!("sample tuples did not reach full rank");
        };
        rows.swap(r, piv);
        let inv = Rat::one() / &rows[r][c];
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let factor = rows[i][c].clone();
                for j in 0..=k {
                    let d = &factor * &rows[r][j];
                    rows[i][j] -= d;
                }
            }
        }
        r += 1;
    }
    for row in &rows[k..] {
        assert!(row[k].is_zero(), "inconsistent oracle system");
    }
    let mut out = SymPoly::zero();
    for (i, p) in basis.into_iter().enumerate() {
        out.add_term(p, rows[i][k].clone());
    }
    out
}

#[test]
fn l_genus_matches_oracle() {
    for m in 1..=5 {
        let f = characteristic_series(GenusKind::L, m);
        assert_eq!(
            genus_in_pontryagin(GenusKind::L, m).unwrap(),
            oracle(&f, m),
            "L_{m}"
        );
    }
}

#[test]
fn ahat_genus_matches_oracle() {
    for m in 1..=5 {
        let f = characteristic_series(GenusKind::AHat, m);
        assert_eq!(
            genus_in_pontryagin(GenusKind::AHat, m).unwrap(),
            oracle(&f, m),
            "Â_{m}"
        );
    }
}

#[test]
fn wu_class_matches_oracle() {
    for n in (2..=16).step_by(2) {
        let f = wu_series(n / 2);
        let w = wu_class(n).unwrap();
        assert_eq!(w, oracle(&f, n / 2), "v_{n}");
        if n.is_power_of_two() {
            let top = w.coeff(&Partition::new(vec![n / 2]));
            assert!(
                top.is_integer() && top.to_integer() % 2 != BigInt::zero(),
                "v_{n} top coefficient odd"
            );
        }
    }
}

#[test]
fn characteristic_series_known_terms() {
    // x/tanh x = 1 + x^2/3 - x^4/45 + 2x^6/945
    let l = characteristic_series(GenusKind::L, 3);
    assert_eq!(
        l,
        vec![
            ri(1),
            Rat::new(1.into(), 3.into()),
            Rat::new((-1).into(), 45.into()),
            Rat::new(2.into(), 945.into())
        ]
    );
    // (x/2)/sinh(x/2) = 1 - x^2/24 + 7x^4/5760
    let a = characteristic_series(GenusKind::AHat, 2);
    assert_eq!(
        a,
        vec![
            ri(1),
            Rat::new((-1).into(), 24.into()),
            Rat::new(7.into(), 5760.into())
        ]
    );
}
