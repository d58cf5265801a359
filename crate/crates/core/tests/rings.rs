mod common;

use std::collections::BTreeSet;

use common::{finite_rings, geometry, parse, z, zs};
use proptest::prelude::*;
use specpos_core::localization::localize_ring;
use specpos_core::presheaf::{limit_ring, structure_presheaf};
use specpos_core::ring::{ideal_generated, is_ideal, is_prime_ideal, Elem, Ideal, Ring};
use specpos_core::spectrum::enumerate_ideals;

fn axioms(r: &Ring) {
    let e = r.elements().unwrap();
    let (zero, one) = (r.zero(), r.one());
    for a in &e {
        assert_eq!(r.add(a, &zero), *a);
        assert_eq!(r.mul(a, &one), *a);
        assert_eq!(r.add(a, &r.neg(a)), zero);
        for b in &e {
            assert_eq!(r.add(a, b), r.add(b, a));
            assert_eq!(r.mul(a, b), r.mul(b, a));
            for c in &e {
                assert_eq!(r.add(&r.add(a, b), c), r.add(a, &r.add(b, c)), "{}", r.name());
                assert_eq!(r.mul(&r.mul(a, b), c), r.mul(a, &r.mul(b, c)), "{}", r.name());
                assert_eq!(r.mul(a, &r.add(b, c)), r.add(&r.mul(a, b), &r.mul(a, c)), "{}", r.name());
            }
        }
    }
}

#[test]
fn ring_axioms_for_every_constructor() {
    let mut rings = finite_rings();
    rings.push(Ring::product(&[z(2), Ring::poly_quotient(2, &[1, 1, 1]).unwrap()]).unwrap());
    // quotient rings arise as local rings
    let (spec, _) = geometry(&z(12));
    rings.push(localize_ring(&spec, 0).unwrap().ring().clone());
    rings.push(localize_ring(&spec, 1).unwrap().ring().clone());
    // family rings arise as limits of structure presheaves
    for r in [z(12), Ring::product(&[z(2), z(3)]).unwrap()] {
        let (spec, locals) = geometry(&r);
        let o = structure_presheaf(spec.clone(), &locals).unwrap();
        rings.push(limit_ring(&o, &spec.whole()).unwrap().ring().clone());
    }
    for r in &rings {
        axioms(r);
    }
}

#[test]
fn coprime_product_is_crt() {
    let p = Ring::product(&[z(4), z(3)]).unwrap();
    let r = z(12);
    let phi = |a: u64| parse(&p, &format!("({},{})", a % 4, a % 3));
    let image: BTreeSet<Elem> = (0..12).map(phi).collect();
    assert_eq!(image.len(), 12);
    for a in 0..12u64 {
        for b in 0..12u64 {
            let (ea, eb) = (parse(&r, &a.to_string()), parse(&r, &b.to_string()));
            assert_eq!(phi((a + b) % 12), p.add(&phi(a), &phi(b)));
            assert_eq!(phi((a * b) % 12), p.mul(&phi(a), &phi(b)));
            assert_eq!(r.format(&r.mul(&ea, &eb)), ((a * b) % 12).to_string());
        }
    }
}

#[test]
fn construction_errors() {
    assert!(Ring::zmod(1).is_err());
    assert!(Ring::zmod(0).is_err());
    assert!(Ring::poly_quotient(4, &[1, 0, 1]).is_err());
    assert!(Ring::poly_quotient(2, &[1, 1, 0]).is_err());
    assert!(Ring::semilocal_int(&[4]).is_err());
    assert!(Ring::product(&[z(16), z(16), z(2)]).is_err());
    assert!(zs(&[2]).parse("1/2").is_err());
    assert_eq!(zs(&[2]).format(&parse(&zs(&[2]), "6/9")), "2/3");
}

fn closed(r: &Ring, s: &BTreeSet<usize>) -> bool {
    let n = r.size().unwrap();
    s.contains(&r.zero().idx())
        && s.iter().all(|&a| {
            s.iter().all(|&b| s.contains(&r.add(&Elem::Idx(a), &Elem::Idx(b)).idx()))
                && (0..n).all(|x| s.contains(&r.mul(&Elem::Idx(x), &Elem::Idx(a)).idx()))
        })
}

// every subset, closed under + and R·
fn brute_ideals(r: &Ring) -> BTreeSet<Vec<usize>> {
    let n = r.size().unwrap();
    (0u32..1 << n)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect::<BTreeSet<_>>())
        .filter(|s| closed(r, s))
        .map(|s| s.into_iter().collect())
        .collect()
}

#[test]
fn ideal_enumeration_matches_subset_search() {
    for r in finite_rings() {
        let ours: BTreeSet<Vec<usize>> = enumerate_ideals(&r)
            .unwrap()
            .into_iter()
            .map(|i| match i {
                Ideal::Set(s) => s,
                Ideal::Principal(_) => unreachable!(),
            })
            .collect();
        assert_eq!(ours, brute_ideals(&r), "{}", r.name());
    }
}

#[test]
fn ideal_generated_is_minimal() {
    for r in finite_rings() {
        let all = brute_ideals(&r);
        let elems = r.elements().unwrap();
        for a in &elems {
            for b in &elems {
                let gens = [a.clone(), b.clone()];
                let Ideal::Set(i) = ideal_generated(&r, &gens).unwrap() else { unreachable!() };
                let iset: BTreeSet<usize> = i.iter().copied().collect();
                assert!(closed(&r, &iset));
                assert!(iset.contains(&a.idx()) && iset.contains(&b.idx()));
                for j in all.iter().filter(|j| j.contains(&a.idx()) && j.contains(&b.idx())) {
                    assert!(iset.iter().all(|x| j.contains(x)));
                }
                for &x in iset.iter().filter(|&&x| x != a.idx() && x != b.idx()) {
                    let mut smaller = iset.clone();
                    smaller.remove(&x);
                    assert!(!closed(&r, &smaller));
                }
            }
        }
    }
}

#[test]
fn prime_ideals() {
    let r = z(12);
    let set = |v: &[usize]| Ideal::Set(v.to_vec());
    assert!(!is_prime_ideal(&r, &set(&[0, 4, 8])).unwrap());
    assert!(is_prime_ideal(&r, &set(&[0, 2, 4, 6, 8, 10])).unwrap());
    assert!(is_prime_ideal(&r, &set(&[0, 3, 6, 9])).unwrap());
    assert!(is_prime_ideal(&r, &set(&[0, 1])).is_err());
    let s = zs(&[2, 3]);
    assert!(is_prime_ideal(&s, &Ideal::Principal(0.into())).unwrap());
    assert!(is_prime_ideal(&s, &Ideal::Principal(3.into())).unwrap());
    assert!(!is_prime_ideal(&s, &Ideal::Principal(6.into())).unwrap());
    assert!(!is_ideal(&s, &Ideal::Principal(5.into())));
}

proptest! {
    #[test]
    fn semilocal_canonical_form_is_stable(n in -500i64..500, d in 1i64..200) {
        let r = zs(&[2, 3]);
        let reduced = d / num_integer::gcd(n, d);
        let member = reduced % 2 != 0 && reduced % 3 != 0;
        match r.parse(&format!("{n}/{d}")) {
            Ok(a) => {
                prop_assert!(member);
                let again = r.parse(&r.format(&a)).unwrap();
                prop_assert_eq!(&again, &a);
                prop_assert_eq!(r.format(&again), r.format(&a));
                prop_assert!(r.contains(&a));
            }
            Err(_) => prop_assert!(!member),
        }
    }

    #[test]
    fn semilocal_units(n in 1i64..2000) {
        let r = zs(&[2, 5]);
        let a = r.from_int(n);
        prop_assert_eq!(r.is_unit(&a), n % 2 != 0 && n % 5 != 0);
        if let Some(inv) = r.inverse(&a) {
            prop_assert_eq!(r.mul(&a, &inv), r.one());
        }
    }

    #[test]
    fn ideal_generated_semilocal(a in -300i64..300, b in -300i64..300) {
        let r = zs(&[2, 3]);
        let i = ideal_generated(&r, &[r.from_int(a), r.from_int(b)]).unwrap();
        let g = num_integer::gcd(a, b);
        let mut want = 1i64;
        if g == 0 {
            want = 0;
        } else {
            let mut g = g.abs();
            for p in [2, 3] {
                while g % p == 0 {
                    g /= p;
                    want *= p;
                }
            }
        }
        prop_assert_eq!(i, Ideal::Principal(want.into()));
    }
}
