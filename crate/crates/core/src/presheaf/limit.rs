//! Inverse limits over subposets and the functor `T`.
//!
//! Two realizations:
//!
//! * finite stalks over a table ring: compatible families are enumerated by
//!   depth-first assignment along a linear extension, and the limit ring is a
//!   table ring of compatible families;
//! * `ℤ_S`: the poset is a star under `(0)`, and the limit is solved in Smith
//!   coordinates as a lattice inside the rational fiber product.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{linear_extension, Presheaf};
use crate::arith;
use crate::error::{Error, Result};
use crate::limits;
use crate::linalg::{self, RatMatrix};
use crate::localization::{localize_module_at, localize_ring_at, LocalRing};
use crate::module::{hom_inverse, Hom, ModuleElement, ModulePresentation};
use crate::par;
use crate::ring::{Elem, FiniteKind, FiniteRing, Ideal, Ring};
use crate::spectrum::{SpecPoset, SubPoset};

/// `R_C = lim O(x)` over a subposet, with the primes `P_x` it induces.
#[derive(Debug, Clone)]
pub struct LimitRing {
    ring: Ring,
    points: Vec<usize>,
    primes: Vec<Ideal>,
    families: Option<Vec<Vec<usize>>>,
}

impl LimitRing {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    /// Points of the subposet, in the order used for family components.
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn position(&self, x: usize) -> Option<usize> {
        self.points.iter().position(|&p| p == x)
    }

    /// `P_x = {r : r_x is not a unit}` for the point at position `k`.
    pub fn prime(&self, k: usize) -> &Ideal {
        &self.primes[k]
    }

    /// The component of `r` at position `k`, an element of `O(x)`.
    pub fn project(&self, k: usize, r: &Elem) -> Elem {
        match &self.families {
            Some(f) => Elem::Idx(f[r.idx()][k]),
            None => r.clone(),
        }
    }

    /// The element with the given components, if they form a compatible family.
    pub fn from_components(&self, comps: &[Elem]) -> Option<Elem> {
        match &self.families {
            Some(f) => {
                let want: Vec<usize> = comps.iter().map(Elem::idx).collect();
                f.iter().position(|fam| *fam == want).map(Elem::Idx)
            }
            None => {
                let first = comps.first()?;
                (comps.iter().all(|c| c == first) && self.ring.contains(first)).then(|| first.clone())
            }
        }
    }

    /// The family equal to `a` at position `k` and zero elsewhere.
    fn lift(&self, k: usize, a: usize) -> Option<Elem> {
        let f = self.families.as_ref()?;
        let zero = &f[self.ring.zero().idx()];
        let mut want = zero.clone();
        want[k] = a;
        f.iter().position(|fam| *fam == want).map(Elem::Idx)
    }
}

/// The limit of the structure presheaf `structure` over `over`.
pub fn limit_ring(structure: &Presheaf, over: &SubPoset) -> Result<LimitRing> {
    let spec = structure.spec();
    let pts = linear_extension(spec, over);
    if pts.is_empty() {
        return Err(Error::input("limit over an empty subposet"));
    }
    match spec.ring() {
        Ring::Finite(_) => {
            let fams = compatible_families(structure, &pts)?;
            let parts: Vec<Arc<FiniteRing>> = pts
                .iter()
                .map(|&x| structure.locals()[x].ring().as_finite().unwrap().clone())
                .collect();
            let families: Vec<Vec<usize>> = fams.iter().map(|f| f.iter().map(|v| v[0].idx()).collect()).collect();
            let index: HashMap<Vec<usize>, usize> = families.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
            let find = |f: Vec<usize>| index[&f];
            let zero = find(parts.iter().map(|r| r.zero()).collect());
            let one = find(parts.iter().map(|r| r.one()).collect());
            let name = format!(
                "lim({})",
                parts.iter().map(|r| r.name().to_string()).collect::<Vec<_>>().join(" x ")
            );
            let (fa, pa) = (&families, &parts);
            let ring = FiniteRing::from_fn(
                families.len(),
                zero,
                one,
                FiniteKind::Families {
                    parts: parts.clone(),
                    families: families.clone(),
                },
                name,
                |a, b| find((0..pa.len()).map(|k| pa[k].add(fa[a][k], fa[b][k])).collect()),
                |a, b| find((0..pa.len()).map(|k| pa[k].mul(fa[a][k], fa[b][k])).collect()),
            )?;
            let primes = (0..pts.len())
                .map(|k| Ideal::Set((0..families.len()).filter(|&a| !parts[k].is_unit(families[a][k])).collect()))
                .collect();
            Ok(LimitRing {
                ring: Ring::Finite(Arc::new(ring)),
                points: pts,
                primes,
                families: Some(families),
            })
        }
        Ring::SemiLocal(_) => {
            let generic = pts.iter().any(|&x| is_generic(spec, x));
            if !generic && pts.len() > 1 {
                return Err(Error::unsupported(
                    "limits over Spec Z_S are supported on subposets containing (0) or on single points",
                ));
            }
            let tops = top_primes(spec, &pts);
            let ring = if tops.is_empty() {
                Ring::rationals()
            } else {
                Ring::semilocal_int(&tops)?
            };
            let primes = pts.iter().map(|&x| spec.point(x).prime.clone()).collect();
            Ok(LimitRing {
                ring,
                points: pts,
                primes,
                families: None,
            })
        }
    }
}

fn is_generic(spec: &SpecPoset, x: usize) -> bool {
    spec.point(x).prime.generator().map_or(false, |g| g.is_zero())
}

fn top_primes(spec: &SpecPoset, pts: &[usize]) -> Vec<u64> {
    pts.iter()
        .filter_map(|&x| {
            let g = spec.point(x).prime.generator()?;
            (!g.is_zero()).then(|| u64::try_from(g).unwrap())
        })
        .collect()
}

/// Every compatible family over `pts` (a linear extension), in
/// lexicographic order of stalk element indices.
fn compatible_families(g: &Presheaf, pts: &[usize]) -> Result<Vec<Vec<ModuleElement>>> {
    let elems = pts
        .iter()
        .map(|&x| g.stalk(x).elements())
        .collect::<Result<Vec<_>>>()?;
    let spec = g.spec();
    // below[k]: earlier positions i with pts[i] < pts[k]
    let below: Vec<Vec<usize>> = (0..pts.len())
        .map(|k| (0..k).filter(|&i| spec.lt(pts[i], pts[k])).collect())
        .collect();
    let ok = |picked: &[usize]| -> bool {
        let k = picked.len() - 1;
        below[k].iter().all(|&i| {
            g.restrict(pts[i], pts[k], &elems[k][picked[k]])
                .map_or(false, |r| g.stalk(pts[i]).eq_elements(&r, &elems[i][picked[i]]))
        })
    };
    fn dfs(
        elems: &[Vec<ModuleElement>],
        ok: &(dyn Fn(&[usize]) -> bool + Sync),
        picked: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> bool {
        if !ok(picked) {
            return true;
        }
        if picked.len() == elems.len() {
            out.push(picked.clone());
            return out.len() <= cap;
        }
        for c in 0..elems[picked.len()].len() {
            picked.push(c);
            let go_on = dfs(elems, ok, picked, out, cap);
            picked.pop();
            if !go_on {
                return false;
            }
        }
        true
    }
    let cap = limits::max_carrier();
    let branches = par::map_range(elems[0].len(), |c0| {
        let mut out = Vec::new();
        let mut picked = vec![c0];
        let complete = dfs(&elems, &ok, &mut picked, &mut out, cap);
        (out, complete)
    });
    let mut all = Vec::new();
    for (out, complete) in branches {
        all.extend(out);
        if !complete || all.len() > cap {
            return Err(Error::overflow("limit carrier", format!(">{cap}"), cap));
        }
    }
    Ok(all
        .into_iter()
        .map(|p| p.iter().enumerate().map(|(k, &c)| elems[k][c].clone()).collect())
        .collect())
}

/// A nonzero compatible family that vanishes at `point`: the natural map
/// `T G(point) → G(point)` is not injective, and the limit is not finitely
/// generated over `R_C`.
#[derive(Debug, Clone)]
pub struct Obstruction {
    pub point: usize,
    pub family: Vec<ModuleElement>,
}

#[derive(Debug, Clone)]
struct Block {
    point: usize,
    free: Vec<usize>,
    offset: usize,
}

#[derive(Debug, Clone)]
struct Lattice {
    blocks: Vec<Block>,
    nvars: usize,
    w: RatMatrix,
    basis: RatMatrix,
}

#[derive(Debug, Clone)]
enum LimitKind {
    Finite { elements: Vec<Vec<ModuleElement>> },
    Structural(Lattice),
}

/// `lim_{x ∈ over} G(x)` as a module over [`LimitRing`], with the family
/// realizing each generator.
#[derive(Debug, Clone)]
pub struct LimitModule {
    pub ring: Arc<LimitRing>,
    pub module: ModulePresentation,
    pub generators: Vec<Vec<ModuleElement>>,
    presheaf: Presheaf,
    over: SubPoset,
    kind: LimitKind,
}

impl LimitModule {
    pub fn points(&self) -> &[usize] {
        self.ring.points()
    }

    pub fn presheaf(&self) -> &Presheaf {
        &self.presheaf
    }

    pub fn over(&self) -> &SubPoset {
        &self.over
    }

    /// `Σ c_j · (generator family j)`, computed componentwise through
    /// `R_C → O(x)`.
    pub fn family_of(&self, coords: &[Elem]) -> Vec<ModuleElement> {
        self.points()
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let scalars: Vec<Elem> = coords.iter().map(|c| self.ring.project(k, c)).collect();
                let comps: Vec<ModuleElement> = self.generators.iter().map(|f| f[k].clone()).collect();
                self.presheaf.stalk(x).combine(&scalars, &comps)
            })
            .collect()
    }

    /// Whether `family`, indexed like [`Self::points`], is compatible.
    pub fn contains(&self, family: &[ModuleElement]) -> bool {
        self.contains_ordered(family)
    }

    /// Coordinates of a compatible family in the limit presentation.
    pub fn coordinates(&self, family: &[ModuleElement]) -> Option<ModuleElement> {
        if !self.contains_ordered(family) {
            return None;
        }
        let coords = match &self.kind {
            LimitKind::Finite { .. } => {
                let mut c = Vec::with_capacity(self.module.gens());
                for (k, comp) in family.iter().enumerate() {
                    for a in comp {
                        c.push(self.ring.lift(k, a.idx())?);
                    }
                }
                c
            }
            LimitKind::Structural(lat) => {
                let mut u = vec![BigRational::zero(); lat.nvars];
                let mut torsion = Vec::new();
                for (k, b) in lat.blocks.iter().enumerate() {
                    let s = self.presheaf.stalk(b.point).smith().ok()?;
                    let y = s.reduce(&s.to_smith(&family[k]));
                    for (i, &f) in b.free.iter().enumerate() {
                        u[b.offset + i] = y[f].clone();
                    }
                    for (i, d) in s.factors.iter().enumerate() {
                        if !d.is_zero() && !d.is_one() {
                            torsion.push(y[i].clone());
                        }
                    }
                }
                let w = lat.w.len();
                let c = if w == 0 {
                    if u.iter().any(|x| !x.is_zero()) {
                        return None;
                    }
                    Vec::new()
                } else {
                    let c = linalg::solve_left(&lat.w, w, lat.nvars, &u)?;
                    linalg::solve_left(&lat.basis, w, w, &c)?
                };
                let r = self.ring.ring().as_semilocal()?;
                if !c.iter().all(|x| r.contains(x)) {
                    return None;
                }
                c.into_iter().chain(torsion).map(Elem::Frac).collect()
            }
        };
        let coords = self.module.canon(&coords);
        let back = self.family_of(&coords);
        let same = self
            .points()
            .iter()
            .enumerate()
            .all(|(k, &x)| self.presheaf.stalk(x).eq_elements(&back[k], &family[k]));
        same.then_some(coords)
    }

    fn contains_ordered(&self, family: &[ModuleElement]) -> bool {
        let pts = self.points();
        family.len() == pts.len()
            && pts.iter().enumerate().all(|(i, &x)| {
                pts.iter().enumerate().all(|(j, &y)| {
                    !self.presheaf.spec().lt(x, y)
                        || self
                            .presheaf
                            .restrict(x, y, &family[j])
                            .map_or(false, |r| self.presheaf.stalk(x).eq_elements(&r, &family[i]))
                })
            })
    }

    /// Every compatible family (finite limits only).
    pub fn elements(&self) -> Result<Vec<Vec<ModuleElement>>> {
        match &self.kind {
            LimitKind::Finite { elements } => Ok(elements.clone()),
            LimitKind::Structural(_) => Ok(self.module.elements()?.iter().map(|c| self.family_of(c)).collect()),
        }
    }

    /// A generating set grown greedily: an element is kept when it is not in
    /// the span of those kept before it.
    pub fn greedy_generators(&self) -> Result<Vec<Vec<ModuleElement>>> {
        match &self.kind {
            LimitKind::Structural(_) => Ok(self.generators.clone()),
            LimitKind::Finite { elements } => {
                let m = &self.module;
                let coords: Vec<ModuleElement> = elements
                    .iter()
                    .map(|f| self.coordinates(f).ok_or_else(|| Error::invariant("limit element without coordinates")))
                    .collect::<Result<_>>()?;
                let scalars = self.ring.ring().elements()?;
                let members = m.elements()?;
                let mut span = vec![false; elements.len()];
                let index = |c: &ModuleElement| m.index_of(c).unwrap();
                span[index(&m.zero())] = true;
                let mut kept = Vec::new();
                for (f, c) in elements.iter().zip(&coords) {
                    if span[index(c)] {
                        continue;
                    }
                    kept.push(f.clone());
                    loop {
                        let before = span.iter().filter(|&&b| b).count();
                        let current: Vec<usize> = (0..span.len()).filter(|&i| span[i]).collect();
                        for i in &current {
                            for r in &scalars {
                                let v = m.add(&members[*i], &m.scale(r, c));
                                span[index(&v)] = true;
                            }
                        }
                        if span.iter().filter(|&&b| b).count() == before {
                            break;
                        }
                    }
                }
                Ok(kept)
            }
        }
    }
}

/// `lim_{x ∈ over} G(x)`. Fails with `Unsupported` when the limit is not
/// finitely generated (see [`limit_obstruction`]).
pub fn inverse_limit(g: &Presheaf, over: &SubPoset) -> Result<LimitModule> {
    match build(g, over)? {
        Ok(l) => Ok(l),
        Err(ob) => Err(Error::unsupported(format!(
            "limit is not finitely generated: a nonzero family vanishes at {}",
            g.spec().point(ob.point).label
        ))),
    }
}

/// The obstruction to finite generation, if the limit has one.
pub fn limit_obstruction(g: &Presheaf, over: &SubPoset) -> Result<Option<Obstruction>> {
    Ok(build(g, over)?.err())
}

fn build(g: &Presheaf, over: &SubPoset) -> Result<std::result::Result<LimitModule, Obstruction>> {
    if over.iter().any(|x| x >= g.spec().len()) {
        return Err(Error::input("subposet has points outside the spectrum"));
    }
    let structure = super::structure_presheaf(g.spec().clone(), g.locals())?;
    let ring = Arc::new(limit_ring(&structure, over)?);
    match g.spec().ring() {
        Ring::Finite(_) => finite_limit(g, over, ring).map(Ok),
        Ring::SemiLocal(_) => structural_limit(g, over, ring),
    }
}

fn finite_limit(g: &Presheaf, over: &SubPoset, ring: Arc<LimitRing>) -> Result<LimitModule> {
    let pts = ring.points().to_vec();
    let elements = compatible_families(g, &pts)?;
    let rc = ring.ring().clone();
    let mut generators = Vec::new();
    let mut rows: Vec<Vec<Elem>> = Vec::new();
    let total: usize = pts.iter().map(|&x| g.stalk(x).gens()).sum();
    let mut offset = 0;
    for (k, &x) in pts.iter().enumerate() {
        let stalk = g.stalk(x);
        let missing = || Error::unsupported("table-ring limit over a non-discrete subposet");
        let eps = ring.lift(k, stalk.ring().one().idx()).ok_or_else(missing)?;
        for j in 0..stalk.gens() {
            let fam: Vec<ModuleElement> = pts
                .iter()
                .enumerate()
                .map(|(i, &y)| if i == k { stalk.gen(j) } else { g.stalk(y).zero() })
                .collect();
            generators.push(fam);
            let mut row = vec![rc.zero(); total];
            row[offset + j] = rc.sub(&rc.one(), &eps);
            rows.push(row);
        }
        for rel in stalk.relations() {
            let mut row = vec![rc.zero(); total];
            for (j, a) in rel.iter().enumerate() {
                row[offset + j] = ring.lift(k, a.idx()).ok_or_else(missing)?;
            }
            rows.push(row);
        }
        offset += stalk.gens();
    }
    let module = ModulePresentation::new(&rc, total, rows)?;
    if module.element_count().as_usize() != Some(elements.len()) {
        return Err(Error::invariant(format!(
            "limit presentation has {} elements, enumeration found {}",
            module.element_count(),
            elements.len()
        )));
    }
    Ok(LimitModule {
        ring,
        module,
        generators,
        presheaf: g.clone(),
        over: over.clone(),
        kind: LimitKind::Finite { elements },
    })
}

fn structural_limit(
    g: &Presheaf,
    over: &SubPoset,
    ring: Arc<LimitRing>,
) -> Result<std::result::Result<LimitModule, Obstruction>> {
    let spec = g.spec();
    let pts = ring.points().to_vec();
    let mut blocks = Vec::new();
    let mut nvars = 0;
    for &x in &pts {
        let s = g.stalk(x).smith()?;
        let free: Vec<usize> = (0..s.factors.len()).filter(|&i| s.factors[i].is_zero()).collect();
        blocks.push(Block {
            point: x,
            free: free.clone(),
            offset: nvars,
        });
        nvars += free.len();
    }
    let generic = pts.iter().position(|&x| is_generic(spec, x));

    // z_q · B_q = v for every special block q
    let mut constraints: RatMatrix = Vec::new();
    if let Some(gk) = generic {
        let g0 = g.stalk(pts[gk]);
        let s0 = g0.smith()?;
        let v_block = &blocks[gk];
        for (k, b) in blocks.iter().enumerate() {
            if k == gk {
                continue;
            }
            let stalk = g.stalk(b.point);
            let s = stalk.smith()?;
            let rho = g.restriction(pts[gk], b.point)?;
            let images: Vec<Vec<BigRational>> = b
                .free
                .iter()
                .map(|&i| {
                    let e = s.from_smith(&unit(s.factors.len(), i));
                    s0.to_smith(&rho.apply(g0, &e))
                })
                .collect();
            for (l, &f0) in v_block.free.iter().enumerate() {
                let mut row = vec![BigRational::zero(); nvars];
                for (i, img) in images.iter().enumerate() {
                    row[b.offset + i] = img[f0].clone();
                }
                row[v_block.offset + l] = -BigRational::one();
                constraints.push(row);
            }
        }
    }
    let w_basis: RatMatrix = if constraints.is_empty() {
        (0..nvars).map(|i| unit(nvars, i)).collect()
    } else {
        linalg::right_nullspace(&constraints, nvars)
    };
    let w = w_basis.len();
    let special: Vec<usize> = (0..blocks.len()).filter(|&k| Some(k) != generic).collect();
    let block_cols = |k: usize| -> RatMatrix {
        let b = &blocks[k];
        w_basis
            .iter()
            .map(|row| row[b.offset..b.offset + b.free.len()].to_vec())
            .collect()
    };
    let family_from = |u: &[BigRational]| -> Vec<ModuleElement> {
        blocks
            .iter()
            .map(|b| {
                let stalk = g.stalk(b.point);
                let s = stalk.smith().expect("semi-local stalk");
                let mut y = vec![BigRational::zero(); s.factors.len()];
                for (i, &f) in b.free.iter().enumerate() {
                    y[f] = u[b.offset + i].clone();
                }
                stalk.canon(&s.from_smith(&y))
            })
            .collect()
    };

    for &k in &special {
        let p = block_cols(k);
        if linalg::rank_q(&p, blocks[k].free.len()) < w {
            let c = &linalg::left_nullspace(&p, w, blocks[k].free.len())[0];
            let u = combine_rows(c, &w_basis, nvars);
            let (ints, _) = linalg::clear_row_denominators(&[u]);
            let u: Vec<BigRational> = ints[0].iter().cloned().map(BigRational::from_integer).collect();
            return Ok(Err(Obstruction {
                point: blocks[k].point,
                family: family_from(&u),
            }));
        }
    }

    let tops: Vec<u64> = special
        .iter()
        .map(|&k| u64::try_from(spec.point(blocks[k].point).prime.generator().unwrap()).unwrap())
        .collect();
    let basis: RatMatrix = if special.is_empty() || w == 0 {
        (0..w).map(|i| unit(w, i)).collect()
    } else {
        let cols: Vec<RatMatrix> = special.iter().map(|&k| block_cols(k)).collect();
        let member = |c: &[BigRational], t: usize| -> bool {
            let q = BigInt::from(tops[t]);
            combine_rows(c, &cols[t], blocks[special[t]].free.len())
                .iter()
                .all(|x| !(x.denom() % &q).is_zero())
        };
        let mut gens: RatMatrix = Vec::new();
        for (t, p) in cols.iter().enumerate() {
            for mut b in local_basis(p, w, blocks[special[t]].free.len()) {
                for (t2, &q2) in tops.iter().enumerate() {
                    if t2 == t {
                        continue;
                    }
                    let mut guard = 0;
                    while !member(&b, t2) {
                        b = b.iter().map(|x| x * BigRational::from_integer(q2.into())).collect();
                        guard += 1;
                        if guard > 4096 {
                            return Err(Error::invariant("local lattice scaling did not terminate"));
                        }
                    }
                }
                gens.push(b);
            }
        }
        span_basis(&gens, w, &tops)
    };

    let mut generators: Vec<Vec<ModuleElement>> = basis
        .iter()
        .map(|c| family_from(&combine_rows(c, &w_basis, nvars)))
        .collect();
    let mut diag: Vec<Elem> = vec![Elem::int(0); w];
    for (k, b) in blocks.iter().enumerate() {
        let stalk = g.stalk(b.point);
        let s = stalk.smith()?;
        for (i, d) in s.factors.iter().enumerate() {
            if d.is_zero() || d.is_one() {
                continue;
            }
            let fam: Vec<ModuleElement> = blocks
                .iter()
                .enumerate()
                .map(|(k2, b2)| {
                    if k2 == k {
                        stalk.canon(&s.from_smith(&unit(s.factors.len(), i)))
                    } else {
                        g.stalk(b2.point).zero()
                    }
                })
                .collect();
            generators.push(fam);
            diag.push(Elem::Frac(BigRational::from_integer(d.clone())));
        }
    }
    let module = ModulePresentation::diagonal(ring.ring(), &diag)?;
    let limit = LimitModule {
        ring,
        module,
        generators,
        presheaf: g.clone(),
        over: over.clone(),
        kind: LimitKind::Structural(Lattice {
            blocks,
            nvars,
            w: w_basis,
            basis,
        }),
    };
    for (j, fam) in limit.generators.iter().enumerate() {
        if limit.coordinates(fam) != Some(limit.module.gen(j)) {
            return Err(Error::invariant("limit generator does not round-trip through coordinates"));
        }
    }
    Ok(Ok(limit))
}

fn unit(n: usize, i: usize) -> Vec<BigRational> {
    (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()
}

fn combine_rows(c: &[BigRational], rows: &RatMatrix, cols: usize) -> Vec<BigRational> {
    (0..cols)
        .map(|j| c.iter().zip(rows).fold(BigRational::zero(), |acc, (ci, r)| acc + ci * &r[j]))
        .collect()
}

// Z_(q)-basis of {c : c·P ∈ Z_(q)^k} for P of full row rank w:
// with D·P = N integral and U·N·V = diag(δ), the rows (D/δᵢ)·Uᵢ.
fn local_basis(p: &RatMatrix, w: usize, k: usize) -> RatMatrix {
    let d = p.iter().flatten().fold(BigInt::one(), |acc, x| num_integer::lcm(acc, x.denom().clone()));
    let n: Vec<Vec<BigInt>> = p
        .iter()
        .map(|row| row.iter().map(|x| x.numer() * (&d / x.denom())).collect())
        .collect();
    let s = linalg::smith_int(&n, w, k);
    (0..w)
        .map(|i| {
            let scale = BigRational::new(d.clone(), s.diag[i].clone());
            s.u[i].iter().map(|x| &scale * BigRational::from_integer(x.clone())).collect()
        })
        .collect()
}

// Z_T-basis of the Z_T-span of rational rows spanning Q^w.
fn span_basis(gens: &RatMatrix, w: usize, tops: &[u64]) -> RatMatrix {
    let l = gens.iter().flatten().fold(BigInt::one(), |acc, x| num_integer::lcm(acc, x.denom().clone()));
    let ints: Vec<Vec<BigInt>> = gens
        .iter()
        .map(|row| row.iter().map(|x| x.numer() * (&l / x.denom())).collect())
        .collect();
    let s = linalg::smith_int(&ints, ints.len(), w);
    (0..w)
        .map(|i| {
            let di = arith::s_part(&s.diag[i], tops);
            s.v_inv[i]
                .iter()
                .map(|x| BigRational::new(&di * x, l.clone()))
                .collect()
        })
        .collect()
}

/// The component at `point` of the natural map `T G → G`.
#[derive(Debug, Clone)]
pub struct NaturalComponent {
    pub point: usize,
    /// `T G(x)`: the limit localized at `P_x`.
    pub source: ModulePresentation,
    /// Generator `j` goes to the `x`-component of limit generator `j`.
    pub images: Vec<ModuleElement>,
    local: Arc<LocalRing>,
    position: usize,
}

impl NaturalComponent {
    pub fn apply(&self, limit: &LimitRing, target: &ModulePresentation, c: &[Elem]) -> ModuleElement {
        let scalars: Vec<Elem> = c
            .iter()
            .map(|a| limit.project(self.position, &self.local.lift(a)))
            .collect();
        target.combine(&scalars, &self.images)
    }

    /// Whether the component is well defined and bijective. On `ℤ_S` the
    /// inverse is also computed and verified.
    pub fn is_isomorphism(&self, limit: &LimitRing, target: &ModulePresentation) -> Result<bool> {
        if self
            .source
            .relations()
            .iter()
            .any(|row| !target.is_zero(&self.apply(limit, target, row)))
        {
            return Err(Error::invariant(format!(
                "natural map at point #{} does not respect relations",
                self.point
            )));
        }
        if self.source.ring() == target.ring() && !self.source.ring().is_finite() {
            let f = Hom {
                images: self.images.clone(),
            };
            return Ok(hom_inverse(&self.source, target, &f)?.is_some());
        }
        let (src, tgt) = (self.source.elements()?, target.elements()?);
        if src.len() != tgt.len() {
            return Ok(false);
        }
        let mut seen = std::collections::HashSet::with_capacity(src.len());
        Ok(src.iter().all(|c| seen.insert(self.apply(limit, target, c))))
    }
}

/// `T G` on `over`, with the natural components `T G(x) → G(x)`.
#[derive(Debug, Clone)]
pub struct TPresheaf {
    pub limit: LimitModule,
    pub components: Vec<NaturalComponent>,
}

pub fn functor_t(g: &Presheaf, over: &SubPoset) -> Result<TPresheaf> {
    let limit = inverse_limit(g, over)?;
    let mut components = Vec::new();
    for (k, &x) in limit.points().iter().enumerate() {
        let local = Arc::new(localize_ring_at(limit.ring.ring(), limit.ring.prime(k))?);
        let source = localize_module_at(&limit.module, local.clone())?.into_module();
        let images = limit.generators.iter().map(|f| f[k].clone()).collect();
        components.push(NaturalComponent {
            point: x,
            source,
            images,
            local,
            position: k,
        });
    }
    Ok(TPresheaf { limit, components })
}
