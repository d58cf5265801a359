//! Localization of rings and modules at primes.
//!
//! For a table ring `R` and prime `P`, `R_P = R / K` with
//! `K = {a : ta = 0 for some t ∉ P}`; the quotient is re-emitted as a table
//! ring. For `ℤ_S` the stalk at `(q)` is `ℤ_(q)` and the stalk at `(0)` is `ℚ`.
//! Module stalks reuse the relation matrix with entries pushed into the
//! local ring.

use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::module::{Hom, ModuleElement, ModulePresentation};
use crate::ring::{Elem, FiniteKind, FiniteRing, Ideal, Ring};
use crate::spectrum::SpecPoset;

#[derive(Debug, Clone)]
pub struct LocalRing {
    base: Ring,
    prime: Ideal,
    ring: Ring,
    class_of: Option<Vec<usize>>,
}

impl LocalRing {
    pub fn base(&self) -> &Ring {
        &self.base
    }

    pub fn prime(&self) -> &Ideal {
        &self.prime
    }

    /// The local ring as a ring in its own right.
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    /// `a/1`.
    pub fn germ(&self, a: &Elem) -> Elem {
        match &self.class_of {
            Some(c) => Elem::Idx(c[a.idx()]),
            None => a.clone(),
        }
    }

    /// The least base representative of a local element (table rings), or
    /// the element itself (`ℤ_S`, where `R ⊂ R_P ⊂ ℚ`).
    pub fn lift(&self, a: &Elem) -> Elem {
        match self.ring.as_finite().map(|r| r.kind()) {
            Some(FiniteKind::Quotient { reps, .. }) => Elem::Idx(reps[a.idx()]),
            _ => a.clone(),
        }
    }

    pub fn outside_prime(&self, s: &Elem) -> bool {
        !self.prime.contains(&self.base, s)
    }

    /// `a/s`, for `s` outside the prime.
    pub fn fraction(&self, a: &Elem, s: &Elem) -> Result<Elem> {
        if !self.outside_prime(s) {
            return Err(Error::input(format!(
                "denominator {} lies in the prime {}",
                self.base.format(s),
                self.prime.format(&self.base)
            )));
        }
        let inv = self
            .ring
            .inverse(&self.germ(s))
            .ok_or_else(|| Error::invariant("element outside the prime is not a unit after localizing"))?;
        Ok(self.ring.mul(&self.germ(a), &inv))
    }

    /// Non-units of the local ring.
    pub fn maximal_ideal(&self) -> Ideal {
        match &self.ring {
            Ring::Finite(r) => Ideal::Set((0..r.size()).filter(|&a| !r.is_unit(a)).collect()),
            Ring::SemiLocal(r) => match r.primes().first() {
                Some(&q) => Ideal::Principal(q.into()),
                None => Ideal::Principal(Zero::zero()),
            },
        }
    }
}

/// `R_P` for an arbitrary prime ideal `P` of `ring`.
pub fn localize_ring_at(ring: &Ring, prime: &Ideal) -> Result<LocalRing> {
    match ring {
        Ring::Finite(r) => {
            let Ideal::Set(members) = prime else {
                return Err(Error::input("table ring prime must be an element set"));
            };
            let n = r.size();
            let outside: Vec<usize> = (0..n).filter(|a| members.binary_search(a).is_err()).collect();
            let killed: Vec<bool> = (0..n)
                .map(|a| outside.iter().any(|&t| r.mul(t, a) == r.zero()))
                .collect();
            let mut class_of = vec![usize::MAX; n];
            let mut reps = Vec::new();
            for a in 0..n {
                if class_of[a] != usize::MAX {
                    continue;
                }
                let id = reps.len();
                reps.push(a);
                for b in a..n {
                    if killed[r.sub(b, a)] {
                        class_of[b] = id;
                    }
                }
            }
            let name = format!("{}_{}", r.name(), prime.format(ring));
            let (cls, rps, base) = (class_of.clone(), reps.clone(), r.clone());
            let local = FiniteRing::from_fn(
                reps.len(),
                class_of[r.zero()],
                class_of[r.one()],
                FiniteKind::Quotient {
                    base: r.clone(),
                    class_of: class_of.clone(),
                    reps: reps.clone(),
                },
                name,
                |a, b| cls[base.add(rps[a], rps[b])],
                |a, b| cls[base.mul(rps[a], rps[b])],
            )?;
            Ok(LocalRing {
                base: ring.clone(),
                prime: prime.clone(),
                ring: Ring::Finite(Arc::new(local)),
                class_of: Some(class_of),
            })
        }
        Ring::SemiLocal(_) => {
            let g = prime
                .generator()
                .ok_or_else(|| Error::input("semi-local prime must be principal"))?;
            let local = if g.is_zero() {
                Ring::rationals()
            } else {
                let q = u64::try_from(g).map_err(|_| Error::input("prime generator out of range"))?;
                Ring::semilocal_int(&[q])?
            };
            Ok(LocalRing {
                base: ring.clone(),
                prime: prime.clone(),
                ring: local,
                class_of: None,
            })
        }
    }
}

/// The local ring at point `x` of `spec`.
pub fn localize_ring(spec: &SpecPoset, x: usize) -> Result<LocalRing> {
    if x >= spec.len() {
        return Err(Error::UnknownPoint(format!("#{x}")));
    }
    localize_ring_at(spec.ring(), &spec.point(x).prime)
}

/// `M_P` presented over `R_P`.
#[derive(Debug, Clone)]
pub struct LocalModule {
    base: ModulePresentation,
    local: Arc<LocalRing>,
    module: ModulePresentation,
}

impl LocalModule {
    pub fn base(&self) -> &ModulePresentation {
        &self.base
    }

    pub fn local_ring(&self) -> &Arc<LocalRing> {
        &self.local
    }

    pub fn module(&self) -> &ModulePresentation {
        &self.module
    }

    pub fn into_module(self) -> ModulePresentation {
        self.module
    }

    /// Canonical class of `m/1`.
    pub fn germ(&self, m: &[Elem]) -> ModuleElement {
        let v: Vec<Elem> = m.iter().map(|a| self.local.germ(a)).collect();
        self.module.canon(&v)
    }

    /// Canonical class of `m/s`.
    pub fn fraction(&self, m: &[Elem], s: &Elem) -> Result<Germ> {
        let inv = self.local.fraction(&self.local.base().one(), s)?;
        let value = self.module.scale(&inv, &self.germ(m));
        Ok(Germ {
            num: m.to_vec(),
            den: s.clone(),
            value,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.module.is_zero_module()
    }
}

/// A fraction `num/den` in a localized module together with its canonical
/// value. Germs compare by value.
#[derive(Debug, Clone)]
pub struct Germ {
    pub num: ModuleElement,
    pub den: Elem,
    pub value: ModuleElement,
}

impl PartialEq for Germ {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl Eq for Germ {}

pub fn localize_module_at(m: &ModulePresentation, local: Arc<LocalRing>) -> Result<LocalModule> {
    if local.base() != m.ring() {
        return Err(Error::input("module and local ring have different base rings"));
    }
    let rows = m
        .relations()
        .iter()
        .map(|row| row.iter().map(|a| local.germ(a)).collect())
        .collect();
    let module = ModulePresentation::new(local.ring(), m.gens(), rows)?;
    Ok(LocalModule {
        base: m.clone(),
        local,
        module,
    })
}

pub fn localize_module(m: &ModulePresentation, spec: &SpecPoset, x: usize) -> Result<LocalModule> {
    localize_module_at(m, Arc::new(localize_ring(spec, x)?))
}

/// The germ of `m` at `x`.
pub fn germ_of(m: &ModulePresentation, spec: &SpecPoset, x: usize, elem: &[Elem]) -> Result<Germ> {
    let lm = localize_module(m, spec, x)?;
    let elem = m.check_element(elem)?;
    lm.fraction(&elem, &m.ring().one())
}

/// The localization map `M_y → M_x` for `x ≤ y`, as a homomorphism given
/// by generator images.
///
/// Scalars of `R_y` are read as scalars of `R_x` unchanged: on table rings
/// `x ≤ y` forces `x = y`, and on `ℤ_S` both local rings are subrings of `ℚ`.
pub fn localization_map(m: &ModulePresentation, spec: &SpecPoset, x: usize, y: usize) -> Result<Hom> {
    if x >= spec.len() || y >= spec.len() {
        return Err(Error::UnknownPoint(format!("#{}", x.max(y))));
    }
    if !spec.leq(x, y) {
        return Err(Error::Order(format!(
            "{} is not below {}",
            spec.point(x).label,
            spec.point(y).label
        )));
    }
    let target = localize_module(m, spec, x)?;
    Ok(Hom {
        images: (0..m.gens()).map(|j| target.module().gen(j)).collect(),
    })
}
