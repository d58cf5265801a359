//! Associated primes, support, and the embedding `ν : M → ∏ M_p`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::localization::{localize_module, LocalModule};
use crate::module::{annihilator, ModuleElement, ModulePresentation};
use crate::par;
use crate::ring::{Elem, Ring};
use crate::spectrum::{SpecPoset, SubPoset};

/// `Ass(M)` as spectrum points, each with an element whose annihilator is
/// exactly that prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssSet {
    pub points: Vec<usize>,
    pub witnesses: Vec<ModuleElement>,
}

impl AssSet {
    pub fn as_set(&self) -> SubPoset {
        SubPoset::new(self.points.iter().copied())
    }

    pub fn contains(&self, x: usize) -> bool {
        self.points.contains(&x)
    }
}

pub fn associated_primes(m: &ModulePresentation, spec: &SpecPoset) -> Result<AssSet> {
    if m.ring() != spec.ring() {
        return Err(Error::input("module and spectrum have different rings"));
    }
    match m.ring() {
        Ring::Finite(_) => {
            let elems = m.elements()?;
            let hits = par::map(&elems, |e| spec.index_of(&annihilator(m, e)));
            let mut first: BTreeMap<usize, ModuleElement> = BTreeMap::new();
            for (e, hit) in elems.iter().zip(hits) {
                if let Some(x) = hit {
                    first.entry(x).or_insert_with(|| e.clone());
                }
            }
            Ok(AssSet {
                points: first.keys().copied().collect(),
                witnesses: first.into_values().collect(),
            })
        }
        Ring::SemiLocal(_) => {
            let s = m.smith()?;
            let g = s.factors.len();
            let mut found: BTreeMap<usize, ModuleElement> = BTreeMap::new();
            for (i, d) in s.factors.iter().enumerate() {
                let mut y = vec![BigRational::zero(); g];
                if d.is_zero() {
                    y[i] = BigRational::one();
                    found.entry(0).or_insert_with(|| m.canon(&s.from_smith(&y)));
                    continue;
                }
                for x in 1..spec.len() {
                    let q = spec.point(x).prime.generator().unwrap().clone();
                    if (d % &q).is_zero() {
                        y[i] = BigRational::from_integer(d / &q);
                        found.entry(x).or_insert_with(|| m.canon(&s.from_smith(&y)));
                    }
                }
            }
            for (x, w) in &found {
                if annihilator(m, w) != spec.point(*x).prime {
                    return Err(Error::invariant("associated-prime witness has the wrong annihilator"));
                }
            }
            Ok(AssSet {
                points: found.keys().copied().collect(),
                witnesses: found.into_values().collect(),
            })
        }
    }
}

/// `{x : M_x ≠ 0}`.
pub fn support(m: &ModulePresentation, spec: &SpecPoset) -> Result<SubPoset> {
    let mut out = Vec::new();
    for x in 0..spec.len() {
        if !localize_module(m, spec, x)?.is_zero() {
            out.push(x);
        }
    }
    Ok(SubPoset::new(out))
}

/// `T_x = Ass(M) ∩ {y : y ≤ x}`: the associated points with `x` in their closure.
pub fn ass_after_localization(ass: &AssSet, spec: &SpecPoset, x: usize) -> SubPoset {
    SubPoset::new(ass.points.iter().copied().filter(|&y| spec.leq(y, x)))
}

/// The map `m ↦ (m/1)_p` into the stalks at the associated points.
#[derive(Debug, Clone)]
pub struct NuMap {
    pub points: Vec<usize>,
    pub stalks: Vec<LocalModule>,
}

impl NuMap {
    pub fn apply(&self, m: &[Elem]) -> Vec<ModuleElement> {
        self.stalks.iter().map(|s| s.germ(m)).collect()
    }

    pub fn is_zero_at(&self, m: &[Elem]) -> bool {
        self.stalks
            .iter()
            .all(|s| s.germ(m).iter().all(|e| s.module().ring().is_zero(e)))
    }
}

/// Builds `ν` and verifies that it is injective. A non-injective `ν` is a
/// bug, reported as an invariant violation.
pub fn nu_map(m: &ModulePresentation, spec: &SpecPoset, ass: &AssSet) -> Result<NuMap> {
    let stalks = ass
        .points
        .iter()
        .map(|&x| localize_module(m, spec, x))
        .collect::<Result<Vec<_>>>()?;
    let nu = NuMap {
        points: ass.points.clone(),
        stalks,
    };
    let kernel = match m.ring() {
        Ring::Finite(_) => {
            let elems = m.elements()?;
            par::position(elems.len(), |i| i > 0 && nu.is_zero_at(&elems[i])).map(|i| elems[i].clone())
        }
        Ring::SemiLocal(_) => semilocal_kernel_element(m, spec, &nu)?,
    };
    match kernel {
        Some(k) => Err(Error::invariant(format!(
            "nu is not injective: {} maps to zero",
            m.format(&k)
        ))),
        None => Ok(nu),
    }
}

// A nonzero kernel element, if any. Torsion in the kernel contains an element
// of prime order, which lies in a socle; free parts are detected at (0).
fn semilocal_kernel_element(m: &ModulePresentation, spec: &SpecPoset, nu: &NuMap) -> Result<Option<ModuleElement>> {
    let s = m.smith()?;
    let g = s.factors.len();
    for x in 1..spec.len() {
        let q = spec.point(x).prime.generator().unwrap().clone();
        let socle: Vec<usize> = (0..g).filter(|&i| !s.factors[i].is_zero() && (&s.factors[i] % &q).is_zero()).collect();
        let qn = q.to_usize().unwrap();
        let total = qn.checked_pow(socle.len() as u32).unwrap_or(usize::MAX);
        if total > 1 << 16 {
            return Err(Error::overflow("socle scan", total, 1 << 16));
        }
        let mut digits = vec![0usize; socle.len()];
        for _ in 1..total {
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                if digits[k] < qn {
                    break;
                }
                digits[k] = 0;
            }
            let mut y = vec![BigRational::zero(); g];
            for (&i, &d) in socle.iter().zip(&digits) {
                y[i] = BigRational::from_integer(BigInt::from(d) * (&s.factors[i] / &q));
            }
            let e = m.canon(&s.from_smith(&y));
            if nu.is_zero_at(&e) {
                return Ok(Some(e));
            }
        }
    }
    let free: Vec<usize> = (0..g).filter(|&i| s.factors[i].is_zero()).collect();
    if free.is_empty() {
        return Ok(None);
    }
    let Some(k) = nu.points.iter().position(|&x| x == 0) else {
        let mut y = vec![BigRational::zero(); g];
        y[free[0]] = BigRational::one();
        return Ok(Some(m.canon(&s.from_smith(&y))));
    };
    let generic = &nu.stalks[k];
    let gs = generic.module().smith()?;
    let rows: Vec<Vec<BigRational>> = free
        .iter()
        .map(|&i| {
            let mut y = vec![BigRational::zero(); g];
            y[i] = BigRational::one();
            let germ = generic.germ(&m.canon(&s.from_smith(&y)));
            gs.to_smith(&germ)
        })
        .collect();
    if linalg::rank_q(&rows, gs.factors.len()) < free.len() {
        let null = linalg::left_nullspace(&rows, rows.len(), gs.factors.len());
        let (ints, _) = linalg::clear_row_denominators(&null[..1]);
        let mut y = vec![BigRational::zero(); g];
        for (&i, c) in free.iter().zip(&ints[0]) {
            y[i] = BigRational::from_integer(c.clone());
        }
        return Ok(Some(m.canon(&s.from_smith(&y))));
    }
    Ok(None)
}

/// Associated primes by the second definition: the union, over submodules
/// `N`, of the generic points of `Supp(N) = ∪_{n∈N} V(Ann n)`. Cyclic
/// submodules already realize every such generic point.
pub fn associated_primes_by_support(m: &ModulePresentation, spec: &SpecPoset) -> Result<SubPoset> {
    let elems = m.elements()?;
    let per_element = par::map(&elems, |n| {
        let ann = annihilator(m, n);
        let supp = SubPoset::new((0..spec.len()).filter(|&x| ann.is_subset(&spec.point(x).prime)));
        spec.minimal(&supp)
    });
    Ok(SubPoset::new(per_element.into_iter().flatten()))
}
