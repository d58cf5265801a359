mod common;

use common::{finite_modules, module, semilocal_modules, z, zs};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use specpos_core::module::{
    annihilator, hom_enumerate, module_isomorphic, smith_normal_form, verify_iso, Count, ModulePresentation,
};
use specpos_core::ring::{is_ideal, Elem, Ideal};

fn det(m: &[Vec<i64>]) -> BigInt {
    match m.len() {
        0 => BigInt::from(1),
        1 => BigInt::from(m[0][0]),
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
                    .collect();
                let term = BigInt::from(m[0][j]) * det(&minor);
                if j % 2 == 0 {
                    term
                } else {
                    -term
                }
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum(),
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Invariant factors over ℤ from determinantal divisors, then S-parts;
/// units dropped and free coordinates reported as `0`.
fn oracle_factors(rows: &[Vec<i64>], cols: usize, primes: &[u64]) -> Vec<BigInt> {
    let mut divisors = vec![BigInt::from(1)];
    for k in 1..=rows.len().min(cols) {
        let mut g = BigInt::zero();
        for rs in subsets(rows.len(), k) {
            for cs in subsets(cols, k) {
                let minor: Vec<Vec<i64>> = rs.iter().map(|&r| cs.iter().map(|&c| rows[r][c]).collect()).collect();
                g = g.gcd(&det(&minor));
            }
        }
        if g.is_zero() {
            break;
        }
        divisors.push(g);
    }
    let rank = divisors.len() - 1;
    let mut out = Vec::new();
    for k in 1..=rank {
        let d = &divisors[k] / &divisors[k - 1];
        let mut s = BigInt::from(1);
        let mut rest = d.abs();
        for &p in primes {
            while (&rest % p).is_zero() {
                rest /= p;
                s *= p;
            }
        }
        if s != BigInt::from(1) {
            out.push(s);
        }
    }
    out.extend(std::iter::repeat(BigInt::zero()).take(cols - rank));
    out
}

#[test]
fn diag_4_6_over_z23() {
    let r = zs(&[2, 3]);
    let m = module(&r, 2, &[&["4", "0"], &["0", "6"]]);
    let got = smith_normal_form(&m).unwrap().nontrivial();
    assert_eq!(got, vec![BigInt::from(2), BigInt::from(12)]);
    assert_eq!(got, oracle_factors(&[vec![4, 0], vec![0, 6]], 2, &[2, 3]));
    assert_eq!(m.element_count(), Count::Finite(24.into()));
}

#[test]
fn element_counts() {
    let want = [12, 4, 3, 6, 24, 1, 4, 2, 8, 4, 16, 4, 2, 6, 3];
    for ((name, m), w) in finite_modules().iter().zip(want) {
        assert_eq!(m.element_count(), Count::Finite(w.into()), "{name}");
        assert_eq!(m.elements().unwrap().len(), w, "{name}");
    }
    let r = zs(&[2]);
    assert_eq!(module(&r, 2, &[&["4", "0"]]).element_count(), Count::Infinite);
    assert_eq!(module(&r, 1, &[&["3"]]).element_count(), Count::Finite(1.into()));
}

#[test]
fn canonical_forms() {
    for (name, m) in finite_modules() {
        let elems = m.elements().unwrap();
        for a in &elems {
            assert_eq!(m.canon(&m.canon(a)), m.canon(a), "{name}");
            for b in &elems {
                let s = m.add(a, b);
                assert_eq!(m.canon(&s), s);
                assert!(elems.contains(&s), "{name}");
            }
        }
        for row in m.relations() {
            assert!(m.is_zero(row));
            assert_eq!(m.canon(row), m.zero());
        }
    }
}

#[test]
fn annihilators() {
    for (name, m) in finite_modules() {
        let r = m.ring().clone();
        for a in m.elements().unwrap() {
            let ann = annihilator(&m, &a);
            assert!(is_ideal(&r, &ann), "{name}");
            let Ideal::Set(members) = &ann else { unreachable!() };
            for x in r.elements().unwrap() {
                let kills = m.is_zero(&m.scale(&x, &a));
                assert_eq!(kills, members.contains(&x.idx()), "{name}");
            }
        }
    }
    let r = z(12);
    let m = ModulePresentation::free(&r, 1).unwrap();
    assert_eq!(annihilator(&m, &[Elem::Idx(4)]), Ideal::Set(vec![0, 3, 6, 9]));
}

#[test]
fn homs_kill_relations() {
    let mods = finite_modules();
    for (a, m) in &mods {
        for (b, n) in mods.iter().filter(|(_, n)| n.ring() == m.ring()) {
            let homs = hom_enumerate(m, n).unwrap();
            for h in &homs {
                for row in m.relations() {
                    assert!(n.is_zero(&h.apply(n, row)), "{a} -> {b}");
                }
            }
            let distinct: std::collections::BTreeSet<_> = homs.iter().map(|h| h.canonical(n)).collect();
            assert_eq!(distinct.len(), homs.len());
        }
    }
    // |Hom(Z/a, Z/b)| = gcd(a, b) over Z/12
    let r = z(12);
    for a in [1u64, 2, 3, 4, 6, 12] {
        for b in [1u64, 2, 3, 4, 6, 12] {
            let cyc = |d: u64| ModulePresentation::cyclic(&r, r.from_int((d % 12) as i64)).unwrap();
            assert_eq!(hom_enumerate(&cyc(a), &cyc(b)).unwrap().len() as u64, a.gcd(&b));
        }
    }
}

#[test]
fn snf_presentations_are_isomorphic() {
    for (name, m) in semilocal_modules() {
        let s = smith_normal_form(&m).unwrap();
        let r = m.ring();
        let diag: Vec<Elem> = s.factors.iter().map(|d| Elem::Frac(d.clone().into())).collect();
        let d = ModulePresentation::diagonal(r, &diag).unwrap();
        let w = module_isomorphic(&m, &d).unwrap().unwrap_or_else(|| panic!("{name}"));
        assert!(verify_iso(&m, &d, &w));
        // to_smith and from_smith are mutually inverse on generators
        for j in 0..m.gens() {
            let back = s.from_smith(&s.to_smith(&m.gen(j)));
            assert!(m.eq_elements(&back, &m.gen(j)), "{name}");
        }
        for w in s.factors.windows(2) {
            assert!(w[1].is_zero() || (!w[0].is_zero() && (&w[1] % &w[0]).is_zero()), "{name}");
        }
    }
}

#[test]
fn isomorphism_decisions() {
    let r = z(12);
    let a = module(&r, 2, &[&["4", "0"], &["0", "6"]]);
    let b = module(&r, 2, &[&["2", "0"], &["0", "0"]]);
    assert!(module_isomorphic(&a, &b).unwrap().is_some());
    let c = module(&r, 1, &[&["6"]]);
    assert!(module_isomorphic(&a, &c).unwrap().is_none());
    let s = zs(&[2, 3]);
    let x = module(&s, 2, &[&["4", "0"], &["0", "6"]]);
    let y = module(&s, 2, &[&["2", "0"], &["0", "12"]]);
    let w = module(&s, 2, &[&["4", "0"], &["0", "3"]]);
    assert!(module_isomorphic(&x, &y).unwrap().is_some());
    assert!(module_isomorphic(&x, &w).unwrap().is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn snf_matches_determinantal_divisors(
        rows in prop::collection::vec(prop::collection::vec(-9i64..10, 3), 0..4),
        primes in prop::sample::select(vec![vec![2u64], vec![3], vec![2, 3], vec![2, 5], vec![3, 7]]),
    ) {
        let r = zs(&primes);
        let rels: Vec<Vec<Elem>> = rows.iter().map(|row| row.iter().map(|&v| Elem::int(v)).collect()).collect();
        let m = ModulePresentation::new(&r, 3, rels).unwrap();
        let got = smith_normal_form(&m).unwrap().nontrivial();
        prop_assert_eq!(got, oracle_factors(&rows, 3, &primes));
    }

    #[test]
    fn semilocal_canon_is_idempotent(
        rows in prop::collection::vec(prop::collection::vec(-9i64..10, 2), 1..3),
        x in prop::collection::vec(-50i64..50, 2),
    ) {
        let r = zs(&[2, 3]);
        let rels: Vec<Vec<Elem>> = rows.iter().map(|row| row.iter().map(|&v| Elem::int(v)).collect()).collect();
        let m = ModulePresentation::new(&r, 2, rels).unwrap();
        let v: Vec<Elem> = x.iter().map(|&a| Elem::int(a)).collect();
        let c = m.canon(&v);
        prop_assert_eq!(m.canon(&c), c.clone());
        prop_assert!(m.eq_elements(&c, &v));
        for row in m.relations() {
            prop_assert_eq!(m.canon(&m.add(&v, row)), c.clone());
        }
    }
}
