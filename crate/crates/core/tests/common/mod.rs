#![allow(dead_code)]

use std::sync::Arc;

use specpos_core::localization::LocalRing;
use specpos_core::module::ModulePresentation;
use specpos_core::presheaf::structure_rings;
use specpos_core::ring::{Elem, Ring};
use specpos_core::spectrum::{spectrum, SpecPoset};

pub fn z(n: u64) -> Ring {
    Ring::zmod(n).unwrap()
}

pub fn zs(primes: &[u64]) -> Ring {
    Ring::semilocal_int(primes).unwrap()
}

pub fn geometry(r: &Ring) -> (Arc<SpecPoset>, Vec<Arc<LocalRing>>) {
    let spec = Arc::new(spectrum(r).unwrap());
    let locals = structure_rings(&spec).unwrap();
    (spec, locals)
}

pub fn parse(r: &Ring, s: &str) -> Elem {
    r.parse(s).unwrap()
}

pub fn module(r: &Ring, gens: usize, rows: &[&[&str]]) -> ModulePresentation {
    let rows = rows.iter().map(|row| row.iter().map(|s| parse(r, s)).collect()).collect();
    ModulePresentation::new(r, gens, rows).unwrap()
}

pub fn finite_rings() -> Vec<Ring> {
    vec![
        z(12),
        z(4),
        Ring::poly_quotient(2, &[1, 1, 1]).unwrap(),
        Ring::poly_quotient(2, &[0, 0, 1]).unwrap(),
        Ring::product(&[z(2), z(3)]).unwrap(),
    ]
}

/// The table-ring modules of the shipped corpus.
pub fn finite_modules() -> Vec<(String, ModulePresentation)> {
    let z12 = z(12);
    let z4 = z(4);
    let f4 = Ring::poly_quotient(2, &[1, 1, 1]).unwrap();
    let dual = Ring::poly_quotient(2, &[0, 0, 1]).unwrap();
    let z2z3 = Ring::product(&[z(2), z(3)]).unwrap();
    vec![
        ("Z/12 R".into(), module(&z12, 1, &[])),
        ("Z/12 R/(4)".into(), module(&z12, 1, &[&["4"]])),
        ("Z/12 R/(3)".into(), module(&z12, 1, &[&["3"]])),
        ("Z/12 R/(6)".into(), module(&z12, 1, &[&["6"]])),
        ("Z/12 diag(4,6)".into(), module(&z12, 2, &[&["4", "0"], &["0", "6"]])),
        ("Z/12 zero".into(), ModulePresentation::zero_module(&z12)),
        ("Z/4 R".into(), module(&z4, 1, &[])),
        ("Z/4 R/(2)".into(), module(&z4, 1, &[&["2"]])),
        ("Z/4 R^2/(2,2)".into(), module(&z4, 2, &[&["2", "2"]])),
        ("F4 R".into(), module(&f4, 1, &[])),
        ("F4 R^2".into(), module(&f4, 2, &[])),
        ("F2[x]/(x^2) R".into(), module(&dual, 1, &[])),
        ("F2[x]/(x^2) R/(x)".into(), module(&dual, 1, &[&["x"]])),
        ("Z/2xZ/3 R".into(), module(&z2z3, 1, &[])),
        ("Z/2xZ/3 R/(e)".into(), module(&z2z3, 1, &[&["(1,0)"]])),
    ]
}

pub fn semilocal_modules() -> Vec<(String, ModulePresentation)> {
    let a = zs(&[2]);
    let b = zs(&[2, 3]);
    vec![
        ("Z(2) R".into(), module(&a, 1, &[])),
        ("Z(2) R/(2)".into(), module(&a, 1, &[&["2"]])),
        ("Z(2) R/(4)".into(), module(&a, 1, &[&["4"]])),
        ("Z(2) R/(4)+R".into(), module(&a, 2, &[&["4", "0"]])),
        ("Z(2,3) R".into(), module(&b, 1, &[])),
        ("Z(2,3) diag(4,6)".into(), module(&b, 2, &[&["4", "0"], &["0", "6"]])),
        ("Z(2,3) R/(18)+R".into(), module(&b, 2, &[&["18", "0"]])),
        ("Z(2,3) R^2/(1/5,3)".into(), module(&b, 2, &[&["1/5", "3"]])),
        ("Z(2,3) zero".into(), ModulePresentation::zero_module(&b)),
    ]
}
