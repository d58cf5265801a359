//! Presheaves of modules on a specialization poset, the specialization
//! functor `S`, and presheaf morphisms.
//!
//! A restriction `ρ_{x,y} : G(y) → G(x)` (for `x < y`) is stored by the
//! images of the generators of `G(y)`. Scalars of `O(y)` are read in `O(x)`
//! unchanged, which is exactly `o_{x,y}` for both ring backends.

mod limit;

pub use limit::{
    functor_t, inverse_limit, limit_obstruction, limit_ring, LimitModule, LimitRing, NaturalComponent, Obstruction,
    TPresheaf,
};

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::localization::{localize_module_at, localize_ring, LocalRing};
use crate::module::{hom_enumerate, Hom, ModuleElement, ModulePresentation};
use crate::par;
use crate::spectrum::{SpecPoset, SubPoset};

/// The local rings `O(x)` for every point, shared by all presheaves built
/// on the same spectrum.
pub fn structure_rings(spec: &SpecPoset) -> Result<Vec<Arc<LocalRing>>> {
    (0..spec.len()).map(|x| localize_ring(spec, x).map(Arc::new)).collect()
}

#[derive(Debug, Clone)]
pub struct Presheaf {
    spec: Arc<SpecPoset>,
    locals: Vec<Arc<LocalRing>>,
    stalks: Vec<ModulePresentation>,
    restrictions: BTreeMap<(usize, usize), Hom>,
}

impl Presheaf {
    /// Builds and validates a presheaf from stalks over `locals[x]` and
    /// restriction maps for every strict relation `x < y`.
    pub fn explicit(
        spec: Arc<SpecPoset>,
        locals: Vec<Arc<LocalRing>>,
        stalks: Vec<ModulePresentation>,
        restrictions: BTreeMap<(usize, usize), Hom>,
    ) -> Result<Presheaf> {
        let g = Presheaf {
            spec,
            locals,
            stalks,
            restrictions,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn spec(&self) -> &Arc<SpecPoset> {
        &self.spec
    }

    pub fn locals(&self) -> &[Arc<LocalRing>] {
        &self.locals
    }

    pub fn stalk(&self, x: usize) -> &ModulePresentation {
        &self.stalks[x]
    }

    pub fn stalks(&self) -> &[ModulePresentation] {
        &self.stalks
    }

    /// `ρ_{x,y}` for `x ≤ y`.
    pub fn restriction(&self, x: usize, y: usize) -> Result<Hom> {
        if x == y {
            return Ok(Hom::identity(&self.stalks[x]));
        }
        self.restrictions.get(&(x, y)).cloned().ok_or_else(|| {
            Error::Order(format!(
                "no restriction from {} to {}",
                self.spec.point(y).label,
                self.spec.point(x).label
            ))
        })
    }

    pub fn restrict(&self, x: usize, y: usize, s: &[crate::ring::Elem]) -> Result<ModuleElement> {
        Ok(self.restriction(x, y)?.apply(&self.stalks[x], s))
    }

    /// Checks stalk rings, the presence and well-definedness of every
    /// restriction, and functoriality along chains.
    pub fn validate(&self) -> Result<()> {
        let spec = &self.spec;
        let n = spec.len();
        if self.stalks.len() != n || self.locals.len() != n {
            return Err(Error::input(format!("presheaf needs exactly {n} stalks")));
        }
        for x in 0..n {
            if self.stalks[x].ring() != self.locals[x].ring() {
                return Err(Error::input(format!(
                    "stalk at {} is not a module over {}",
                    spec.point(x).label,
                    self.locals[x].ring().name()
                )));
            }
        }
        for &(x, y) in self.restrictions.keys() {
            if x >= n || y >= n || !spec.lt(x, y) {
                return Err(Error::Order(format!("restriction key ({x},{y}) is not a strict relation")));
            }
        }
        for y in 0..n {
            for x in 0..n {
                if !spec.lt(x, y) {
                    continue;
                }
                let label = format!("{}<{}", spec.point(x).label, spec.point(y).label);
                let rho = self
                    .restrictions
                    .get(&(x, y))
                    .ok_or_else(|| Error::input(format!("missing restriction {label}")))?;
                if rho.images.len() != self.stalks[y].gens() {
                    return Err(Error::input(format!(
                        "restriction {label} needs {} generator images",
                        self.stalks[y].gens()
                    )));
                }
                if rho.images.iter().any(|v| v.len() != self.stalks[x].gens()) {
                    return Err(Error::input(format!("restriction {label} has images of the wrong length")));
                }
                if !rho.is_homomorphism(&self.stalks[y], &self.stalks[x]) {
                    return Err(Error::input(format!("restriction {label} does not respect relations")));
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if !(spec.lt(x, y) && spec.lt(y, z)) {
                        continue;
                    }
                    let direct = self.restriction(x, z)?;
                    let two = self.restriction(y, z)?.then(&self.restriction(x, y)?, &self.stalks[x]);
                    let ok = (0..self.stalks[z].gens())
                        .all(|j| self.stalks[x].eq_elements(&direct.images[j], &two.images[j]));
                    if !ok {
                        return Err(Error::input(format!(
                            "restrictions are not functorial along {} < {} < {}",
                            spec.point(x).label,
                            spec.point(y).label,
                            spec.point(z).label
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether every stalk is a finite module.
    pub fn is_finite(&self) -> bool {
        self.stalks.iter().all(|m| m.element_count().as_usize().is_some())
    }

    /// A family `(σ_x)` over `over` is compatible when `ρ_{x,y}(σ_y) = σ_x`.
    pub fn is_compatible(&self, over: &SubPoset, family: &[ModuleElement]) -> bool {
        let pts: Vec<usize> = over.iter().collect();
        pts.iter().enumerate().all(|(i, &x)| {
            pts.iter().enumerate().all(|(j, &y)| {
                !self.spec.lt(x, y)
                    || self
                        .restrict(x, y, &family[j])
                        .map_or(false, |r| self.stalks[x].eq_elements(&r, &family[i]))
            })
        })
    }
}

/// Points of `over` in a linear extension of the order, generic points first.
pub fn linear_extension(spec: &SpecPoset, over: &SubPoset) -> Vec<usize> {
    let mut pts: Vec<usize> = over.iter().collect();
    pts.sort_by_key(|&x| (spec.downset(x).len(), x));
    pts
}

/// `S(M)`: stalks `M_x`, restrictions the localization maps.
pub fn functor_s(m: &ModulePresentation, spec: Arc<SpecPoset>, locals: &[Arc<LocalRing>]) -> Result<Presheaf> {
    let n = spec.len();
    let stalks = (0..n)
        .map(|x| localize_module_at(m, locals[x].clone()).map(|l| l.into_module()))
        .collect::<Result<Vec<_>>>()?;
    let mut restrictions = BTreeMap::new();
    for x in 0..n {
        for y in 0..n {
            if spec.lt(x, y) {
                let images = (0..m.gens()).map(|j| stalks[x].gen(j)).collect();
                restrictions.insert((x, y), Hom { images });
            }
        }
    }
    Presheaf::explicit(spec, locals.to_vec(), stalks, restrictions)
}

/// `S(R)`, the structure presheaf `O`.
pub fn structure_presheaf(spec: Arc<SpecPoset>, locals: &[Arc<LocalRing>]) -> Result<Presheaf> {
    let r = ModulePresentation::free(spec.ring(), 1)?;
    functor_s(&r, spec, locals)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PresheafMorphism {
    pub components: Vec<Hom>,
}

impl PresheafMorphism {
    pub fn identity(g: &Presheaf) -> PresheafMorphism {
        PresheafMorphism {
            components: g.stalks.iter().map(Hom::identity).collect(),
        }
    }

    /// Components are homomorphisms and every square
    /// `φ_x ∘ ρ^G_{x,y} = ρ^H_{x,y} ∘ φ_y` commutes.
    pub fn is_valid(&self, g: &Presheaf, h: &Presheaf) -> bool {
        let n = g.spec.len();
        self.components.len() == n
            && (0..n).all(|x| self.components[x].is_homomorphism(&g.stalks[x], &h.stalks[x]))
            && (0..n).all(|x| (0..n).all(|y| !g.spec.lt(x, y) || square_commutes(g, h, x, y, &self.components[x], &self.components[y])))
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &PresheafMorphism, last: &Presheaf) -> PresheafMorphism {
        PresheafMorphism {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .zip(&last.stalks)
                .map(|((a, b), m)| a.then(b, m))
                .collect(),
        }
    }

    pub fn canonical(&self, h: &Presheaf) -> PresheafMorphism {
        PresheafMorphism {
            components: self.components.iter().zip(&h.stalks).map(|(c, m)| c.canonical(m)).collect(),
        }
    }
}

fn square_commutes(g: &Presheaf, h: &Presheaf, x: usize, y: usize, phi_x: &Hom, phi_y: &Hom) -> bool {
    let (Ok(rg), Ok(rh)) = (g.restriction(x, y), h.restriction(x, y)) else {
        return false;
    };
    (0..g.stalks[y].gens()).all(|j| {
        let down_then = phi_x.apply(&h.stalks[x], &rg.images[j]);
        let then_down = rh.apply(&h.stalks[x], &phi_y.images[j]);
        h.stalks[x].eq_elements(&down_then, &then_down)
    })
}

/// `S(f)` for `f : M → N`: at `x` the generator `e_j/1` goes to `f(e_j)/1`.
pub fn functor_s_on_morphism(f: &Hom, sm: &Presheaf, sn: &Presheaf) -> PresheafMorphism {
    let components = (0..sm.spec.len())
        .map(|x| {
            let local = &sn.locals[x];
            Hom {
                images: f
                    .images
                    .iter()
                    .map(|v| {
                        let germ: Vec<_> = v.iter().map(|a| local.germ(a)).collect();
                        sn.stalks[x].canon(&germ)
                    })
                    .collect(),
            }
        })
        .collect();
    PresheafMorphism { components }
}

/// All presheaf morphisms `G → H`, assigned along a linear extension and
/// pruned on every square as soon as both corners are fixed.
pub fn enumerate_presheaf_morphisms(g: &Presheaf, h: &Presheaf) -> Result<Vec<PresheafMorphism>> {
    let spec = &g.spec;
    let order = linear_extension(spec, &spec.whole());
    let choices = order
        .iter()
        .map(|&x| hom_enumerate(&g.stalks[x], &h.stalks[x]))
        .collect::<Result<Vec<_>>>()?;
    let first = choices.first().map_or(1, |c| c.len());
    let branches = par::map_range(first, |c0| {
        let mut out = Vec::new();
        let mut picked = Vec::with_capacity(order.len());
        if !order.is_empty() {
            picked.push(c0);
        }
        assign(g, h, &order, &choices, &mut picked, &mut out);
        out
    });
    let mut found: Vec<PresheafMorphism> = branches.into_iter().flatten().collect();
    found.sort();
    Ok(found)
}

fn assign(
    g: &Presheaf,
    h: &Presheaf,
    order: &[usize],
    choices: &[Vec<Hom>],
    picked: &mut Vec<usize>,
    out: &mut Vec<PresheafMorphism>,
) {
    let k = picked.len();
    if k > 0 {
        let y = order[k - 1];
        let phi_y = &choices[k - 1][picked[k - 1]];
        for i in 0..k - 1 {
            let x = order[i];
            let phi_x = &choices[i][picked[i]];
            let ok = (!g.spec.lt(x, y) || square_commutes(g, h, x, y, phi_x, phi_y))
                && (!g.spec.lt(y, x) || square_commutes(g, h, y, x, phi_y, phi_x));
            if !ok {
                return;
            }
        }
    }
    if k == order.len() {
        let mut components = vec![Hom { images: Vec::new() }; order.len()];
        for (i, &x) in order.iter().enumerate() {
            components[x] = choices[i][picked[i]].clone();
        }
        out.push(PresheafMorphism { components });
        return;
    }
    for c in 0..choices[k].len() {
        picked.push(c);
        assign(g, h, order, choices, picked, out);
        picked.pop();
    }
}
