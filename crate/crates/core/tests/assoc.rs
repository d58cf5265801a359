mod common;

use std::collections::BTreeSet;

use common::{finite_modules, module, semilocal_modules, z, zs};
use specpos_core::assoc::{ass_after_localization, associated_primes, associated_primes_by_support, nu_map, support};
use specpos_core::localization::localize_module;
use specpos_core::module::{annihilator, ModulePresentation};
use specpos_core::ring::Ideal;
use specpos_core::spectrum::{spectrum, SpecPoset, SubPoset};

fn minimal_by_inclusion(spec: &SpecPoset, s: &SubPoset) -> BTreeSet<usize> {
    s.iter()
        .filter(|&x| {
            !s.iter()
                .any(|y| y != x && spec.point(y).prime.is_subset(&spec.point(x).prime))
        })
        .collect()
}

// primes that occur as annihilators of single elements, by direct scan
fn brute_ass(m: &ModulePresentation, spec: &SpecPoset) -> SubPoset {
    let anns: BTreeSet<Ideal> = m.elements().unwrap().iter().map(|a| annihilator(m, a)).collect();
    SubPoset::new((0..spec.len()).filter(|&x| anns.contains(&spec.point(x).prime)))
}

fn all_modules() -> Vec<(String, ModulePresentation)> {
    let mut v = finite_modules();
    v.extend(semilocal_modules());
    v
}

#[test]
fn ass_inside_support_with_same_minimal_points() {
    for (name, m) in all_modules() {
        let spec = spectrum(m.ring()).unwrap();
        let ass = associated_primes(&m, &spec).unwrap();
        let supp = support(&m, &spec).unwrap();
        assert!(ass.points.iter().all(|&x| supp.contains(x)), "{name}");
        assert_eq!(
            minimal_by_inclusion(&spec, &ass.as_set()),
            minimal_by_inclusion(&spec, &supp),
            "{name}"
        );
        // support directly from stalks
        for x in 0..spec.len() {
            assert_eq!(localize_module(&m, &spec, x).unwrap().is_zero(), !supp.contains(x), "{name}");
        }
        assert!(ass.points.len() <= spec.len(), "{name}");
        if let Some(s) = m.ring().as_semilocal() {
            assert!(ass.points.len() <= s.primes().len() + 1);
        }
    }
}

#[test]
fn witnesses_have_prime_annihilators() {
    for (name, m) in all_modules() {
        let spec = spectrum(m.ring()).unwrap();
        let ass = associated_primes(&m, &spec).unwrap();
        for (&x, w) in ass.points.iter().zip(&ass.witnesses) {
            let ann = annihilator(&m, w);
            match &ann {
                Ideal::Set(_) => assert_eq!(ann, spec.point(x).prime, "{name}"),
                Ideal::Principal(g) => {
                    assert_eq!(Some(g), spec.point(x).prime.generator(), "{name}")
                }
            }
        }
        if m.ring().is_finite() {
            assert_eq!(ass.as_set(), brute_ass(&m, &spec), "{name}");
            assert_eq!(associated_primes_by_support(&m, &spec).unwrap(), ass.as_set(), "{name}");
        }
    }
}

#[test]
fn localization_formula() {
    for (name, m) in all_modules() {
        let spec = spectrum(m.ring()).unwrap();
        let ass = associated_primes(&m, &spec).unwrap();
        for x in 0..spec.len() {
            let local = localize_module(&m, &spec, x).unwrap();
            let lm = local.module();
            let lspec = spectrum(lm.ring()).unwrap();
            let direct = associated_primes(lm, &lspec).unwrap();
            let predicted = ass_after_localization(&ass, &spec, x);
            assert_eq!(direct.points.len(), predicted.len(), "{name} at {}", spec.point(x).label);
            // the surviving points are the ones below x, matched by label on Z_S
            if lm.ring().as_semilocal().is_some() {
                let got: BTreeSet<&str> = direct.points.iter().map(|&y| lspec.point(y).label.as_str()).collect();
                let want: BTreeSet<&str> = predicted.iter().map(|y| spec.point(y).label.as_str()).collect();
                assert_eq!(got, want, "{name}");
            }
            assert!(predicted.iter().all(|y| spec.leq(y, x)));
        }
    }
}

#[test]
fn nu_is_injective() {
    for (name, m) in finite_modules() {
        let spec = spectrum(m.ring()).unwrap();
        let ass = associated_primes(&m, &spec).unwrap();
        let nu = nu_map(&m, &spec, &ass).unwrap();
        for a in m.elements().unwrap() {
            assert_eq!(nu.is_zero_at(&a), m.is_zero(&a), "{name}");
        }
        let images: BTreeSet<_> = m.elements().unwrap().iter().map(|a| nu.apply(a)).collect();
        assert_eq!(images.len(), m.elements().unwrap().len(), "{name}");
    }
    for (name, m) in semilocal_modules() {
        let spec = spectrum(m.ring()).unwrap();
        let ass = associated_primes(&m, &spec).unwrap();
        let nu = nu_map(&m, &spec, &ass).unwrap();
        let r = m.ring();
        for j in 0..m.gens() {
            for c in -6..=6 {
                let v = m.scale(&r.from_int(c), &m.gen(j));
                assert_eq!(nu.is_zero_at(&v), m.is_zero(&v), "{name}");
            }
        }
    }
}

#[test]
fn known_values() {
    let r = z(12);
    let spec = spectrum(&r).unwrap();
    let free = ModulePresentation::free(&r, 1).unwrap();
    assert_eq!(spec.format_set(&associated_primes(&free, &spec).unwrap().as_set()), "{(2),(3)}");
    let r4 = module(&r, 1, &[&["4"]]);
    assert_eq!(spec.format_set(&associated_primes(&r4, &spec).unwrap().as_set()), "{(2)}");
    let s = zs(&[2, 3]);
    let sspec = spectrum(&s).unwrap();
    let d = module(&s, 2, &[&["4", "0"], &["0", "6"]]);
    let ass = associated_primes(&d, &sspec).unwrap();
    assert_eq!(sspec.format_set(&ass.as_set()), "{(2),(3)}");
    assert!(ass_after_localization(&ass, &sspec, 0).is_empty());
    let mixed = module(&s, 2, &[&["18", "0"]]);
    assert_eq!(sspec.format_set(&associated_primes(&mixed, &sspec).unwrap().as_set()), "{(0),(2),(3)}");
}
