mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{finite_modules, geometry, module, semilocal_modules, z, zs};
use specpos_core::module::{hom_enumerate, Hom, ModulePresentation};
use specpos_core::presheaf::{
    enumerate_presheaf_morphisms, functor_s, functor_s_on_morphism, functor_t, inverse_limit, limit_obstruction,
    PresheafMorphism, Presheaf,
};
use specpos_core::ring::Elem;

fn all_tuples(stalks: &[Vec<Vec<Elem>>]) -> Vec<Vec<Vec<Elem>>> {
    stalks.iter().fold(vec![vec![]], |acc, choices| {
        acc.into_iter()
            .flat_map(|t| {
                choices.iter().map(move |c| {
                    let mut t = t.clone();
                    t.push(c.clone());
                    t
                })
            })
            .collect()
    })
}

#[test]
fn s_is_functorial() {
    let r = z(12);
    let mods = [module(&r, 1, &[]), module(&r, 1, &[&["4"]]), module(&r, 1, &[&["6"]]), module(&r, 1, &[&["3"]])];
    let (spec, locals) = geometry(&r);
    let s: Vec<Presheaf> = mods.iter().map(|m| functor_s(m, spec.clone(), &locals).unwrap()).collect();
    for (i, m) in mods.iter().enumerate() {
        let id = functor_s_on_morphism(&Hom::identity(m), &s[i], &s[i]);
        assert_eq!(id.canonical(&s[i]), PresheafMorphism::identity(&s[i]).canonical(&s[i]));
        for j in 0..mods.len() {
            for k in 0..mods.len() {
                for f in hom_enumerate(m, &mods[j]).unwrap() {
                    for g in hom_enumerate(&mods[j], &mods[k]).unwrap() {
                        let gf = f.then(&g, &mods[k]);
                        let lhs = functor_s_on_morphism(&gf, &s[i], &s[k]);
                        let sf = functor_s_on_morphism(&f, &s[i], &s[j]);
                        let sg = functor_s_on_morphism(&g, &s[j], &s[k]);
                        assert!(sf.is_valid(&s[i], &s[j]));
                        assert_eq!(lhs.canonical(&s[k]), sf.then(&sg, &s[k]).canonical(&s[k]));
                    }
                }
            }
        }
    }
}

#[test]
fn restrictions_are_functorial() {
    for (name, m) in semilocal_modules() {
        let (spec, locals) = geometry(m.ring());
        let g = functor_s(&m, spec.clone(), &locals).unwrap();
        g.validate().unwrap();
        let n = spec.len();
        for x in 0..n {
            for y in (0..n).filter(|&y| spec.leq(x, y)) {
                for w in (0..n).filter(|&w| spec.leq(y, w)) {
                    let composed = g.restriction(y, w).unwrap().then(&g.restriction(x, y).unwrap(), g.stalk(x));
                    assert_eq!(
                        composed.canonical(g.stalk(x)),
                        g.restriction(x, w).unwrap().canonical(g.stalk(x)),
                        "{name}"
                    );
                }
            }
        }
    }
}

// the limit represents compatible families, and R_C acts componentwise
#[test]
fn finite_limits_are_families() {
    for (name, m) in finite_modules() {
        let (spec, locals) = geometry(m.ring());
        let g = functor_s(&m, spec.clone(), &locals).unwrap();
        let l = inverse_limit(&g, &spec.whole()).unwrap();
        let stalk_elems: Vec<Vec<Vec<Elem>>> = l.points().iter().map(|&x| g.stalk(x).elements().unwrap()).collect();
        let families: BTreeSet<Vec<Vec<Elem>>> = all_tuples(&stalk_elems).into_iter().filter(|f| l.contains(f)).collect();
        let coords = l.module.elements().unwrap();
        let images: BTreeSet<Vec<Vec<Elem>>> = coords.iter().map(|c| l.family_of(c)).collect();
        assert_eq!(images.len(), coords.len(), "{name}");
        assert_eq!(images, families, "{name}");
        for fam in &families {
            let c = l.coordinates(fam).unwrap();
            assert_eq!(&l.family_of(&c), fam, "{name}");
        }
        let rc = l.ring.ring().clone();
        for r in rc.elements().unwrap() {
            for c in &coords {
                let lhs = l.family_of(&l.module.scale(&r, c));
                let rhs: Vec<Vec<Elem>> = l
                    .family_of(c)
                    .iter()
                    .enumerate()
                    .map(|(k, v)| g.stalk(l.points()[k]).scale(&l.ring.project(k, &r), v))
                    .collect();
                assert_eq!(lhs, rhs, "{name}");
            }
        }
    }
}

#[test]
fn semilocal_limits() {
    let r = zs(&[2, 3]);
    let (spec, locals) = geometry(&r);
    for (m, want) in [
        (module(&r, 1, &[]), vec!["0"]),
        (module(&r, 2, &[&["4", "0"], &["0", "6"]]), vec!["2", "12"]),
        (module(&r, 2, &[&["18", "0"]]), vec!["18", "0"]),
    ] {
        let g = functor_s(&m, spec.clone(), &locals).unwrap();
        assert!(limit_obstruction(&g, &spec.whole()).unwrap().is_none());
        let l = inverse_limit(&g, &spec.whole()).unwrap();
        let f: Vec<String> = l.module.smith().unwrap().nontrivial().iter().map(|d| d.to_string()).collect();
        assert_eq!(f, want);
        let t = functor_t(&g, &spec.whole()).unwrap();
        for c in &t.components {
            assert!(c.is_isomorphism(&t.limit.ring, g.stalk(c.point)).unwrap());
        }
    }
}

#[test]
fn non_finitely_generated_limit_is_detected() {
    // G((0)) = Q, G((2)) = Z_(2) restricting by 0, G((3)) = Z_(3) restricting by 1;
    // the limit is Z_(2), which needs every 1/3^k
    let r = zs(&[2, 3]);
    let (spec, locals) = geometry(&r);
    let p2 = spec.find("(2)").unwrap();
    let p3 = spec.find("(3)").unwrap();
    let stalks = vec![
        ModulePresentation::free(locals[0].ring(), 1).unwrap(),
        ModulePresentation::free(locals[p2].ring(), 1).unwrap(),
        ModulePresentation::free(locals[p3].ring(), 1).unwrap(),
    ];
    let mut maps = BTreeMap::new();
    maps.insert((0, p2), Hom { images: vec![vec![Elem::int(0)]] });
    maps.insert((0, p3), Hom { images: vec![vec![Elem::int(1)]] });
    let g = Presheaf::explicit(spec.clone(), locals.clone(), stalks, maps).unwrap();
    let ob = limit_obstruction(&g, &spec.whole()).unwrap().unwrap();
    assert_eq!(ob.point, p3);
    assert!(inverse_limit(&g, &spec.whole()).is_err());
    // the same stalks with G((3)) = 0 force every compatible family to vanish
    let stalks = vec![
        ModulePresentation::free(locals[0].ring(), 1).unwrap(),
        ModulePresentation::free(locals[p2].ring(), 1).unwrap(),
        ModulePresentation::zero_module(locals[p3].ring()),
    ];
    let mut maps = BTreeMap::new();
    maps.insert((0, p2), Hom { images: vec![vec![Elem::int(1)]] });
    maps.insert((0, p3), Hom { images: vec![] });
    let g = Presheaf::explicit(spec.clone(), locals, stalks, maps).unwrap();
    assert!(inverse_limit(&g, &spec.whole()).unwrap().module.is_zero_module());
}

#[test]
fn morphism_enumeration_counts() {
    let r = z(12);
    let (spec, locals) = geometry(&r);
    for (a, b, want) in [("0", "6", 6), ("4", "6", 2), ("3", "4", 1), ("0", "0", 12)] {
        let m = module(&r, 1, &[&[a]]);
        let n = module(&r, 1, &[&[b]]);
        let sm = functor_s(&m, spec.clone(), &locals).unwrap();
        let sn = functor_s(&n, spec.clone(), &locals).unwrap();
        let all = enumerate_presheaf_morphisms(&sm, &sn).unwrap();
        assert_eq!(all.len(), want);
        assert!(all.iter().all(|p| p.is_valid(&sm, &sn)));
    }
}
