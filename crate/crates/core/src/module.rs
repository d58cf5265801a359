//! Finitely presented modules `Rᵍ / ⟨relation rows⟩`.
//!
//! Elements are stored as canonical coset representatives:
//!
//! * table rings: the lexicographically least vector of the coset, found
//!   through a fully materialized row span;
//! * semi-local rings: coordinates reduced in the Smith basis and mapped
//!   back to the original generators.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith;
use crate::error::{Error, Result};
use crate::limits;
use crate::linalg::{self, IntMatrix};
use crate::par;
use crate::ring::{Elem, FiniteRing, Ideal, Ring};

/// Canonical coordinates of a module element with respect to the generators.
pub type ModuleElement = Vec<Elem>;

/// Cardinality of a module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Count {
    Finite(BigInt),
    Infinite,
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Finite(n) => write!(f, "{n}"),
            Count::Infinite => f.write_str("INFINITE"),
        }
    }
}

impl Count {
    pub fn as_usize(&self) -> Option<usize> {
        match self {
            Count::Finite(n) => n.to_usize(),
            Count::Infinite => None,
        }
    }
}

/// Smith normal form of a semi-local presentation.
///
/// `factors[i]` is the invariant factor of Smith coordinate `i`, stripped to
/// its `S`-part: `1` marks a unit (the coordinate is always zero), `0` a free
/// coordinate. Coordinates transform as `y = x·V` and `x = y·V⁻¹`.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub factors: Vec<BigInt>,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SmithForm {
    pub fn free_rank(&self) -> usize {
        self.factors.iter().filter(|d| d.is_zero()).count()
    }

    /// Factors other than units, in chain order (zeros for free rank last).
    pub fn nontrivial(&self) -> Vec<BigInt> {
        self.factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }

    /// Indices of the Smith coordinates that are not units.
    pub fn nontrivial_indices(&self) -> Vec<usize> {
        (0..self.factors.len()).filter(|&i| !self.factors[i].is_one()).collect()
    }

    pub fn to_smith(&self, x: &[Elem]) -> Vec<BigRational> {
        let g = self.factors.len();
        (0..g)
            .map(|j| {
                x.iter()
                    .enumerate()
                    .fold(BigRational::zero(), |acc, (i, xi)| acc + xi.frac() * BigRational::from_integer(self.v[i][j].clone()))
            })
            .collect()
    }

    pub fn from_smith(&self, y: &[BigRational]) -> Vec<Elem> {
        let g = self.factors.len();
        (0..g)
            .map(|j| {
                Elem::Frac(y.iter().enumerate().fold(BigRational::zero(), |acc, (i, yi)| {
                    acc + yi * BigRational::from_integer(self.v_inv[i][j].clone())
                }))
            })
            .collect()
    }

    /// Reduces Smith coordinates into canonical residues.
    pub fn reduce(&self, y: &[BigRational]) -> Vec<BigRational> {
        y.iter()
            .zip(&self.factors)
            .map(|(yi, d)| {
                if d.is_zero() {
                    yi.clone()
                } else if d.is_one() {
                    BigRational::zero()
                } else {
                    let inv = arith::mod_inverse(yi.denom(), d).expect("denominator prime to S");
                    BigRational::from_integer((yi.numer() * inv).mod_floor(d))
                }
            })
            .collect()
    }
}

struct FiniteQuotient {
    ring: Arc<FiniteRing>,
    g: usize,
    coset_of: Vec<u32>,
    reps: Vec<usize>,
    span_size: usize,
}

impl FiniteQuotient {
    fn encode(&self, v: &[usize]) -> usize {
        let n = self.ring.size();
        v.iter().fold(0usize, |acc, &x| acc * n + x)
    }

    fn decode(&self, mut code: usize) -> Vec<usize> {
        let n = self.ring.size();
        let mut v = vec![0; self.g];
        for slot in v.iter_mut().rev() {
            *slot = code % n;
            code /= n;
        }
        v
    }

    fn build(ring: Arc<FiniteRing>, g: usize, relations: &[Vec<Elem>]) -> Result<FiniteQuotient> {
        let n = ring.size();
        let ambient = n
            .checked_pow(g as u32)
            .filter(|&a| a <= limits::AMBIENT_CAP)
            .ok_or_else(|| Error::overflow("ambient module", format!("{n}^{g}"), limits::AMBIENT_CAP))?;
        let mut q = FiniteQuotient {
            ring,
            g,
            coset_of: Vec::new(),
            reps: Vec::new(),
            span_size: 0,
        };
        let cap = limits::max_carrier();
        let mut in_span = vec![false; ambient];
        in_span[0] = true;
        let mut span = vec![0usize];
        for row in relations {
            let row: Vec<usize> = row.iter().map(|e| e.idx()).collect();
            let multiples: Vec<Vec<usize>> = (0..n)
                .map(|r| row.iter().map(|&x| q.ring.mul(r, x)).collect())
                .collect();
            let current = span.clone();
            for s in current {
                let sv = q.decode(s);
                for m in &multiples {
                    let sum: Vec<usize> = sv.iter().zip(m).map(|(&a, &b)| q.ring.add(a, b)).collect();
                    let code = q.encode(&sum);
                    if !in_span[code] {
                        in_span[code] = true;
                        span.push(code);
                        if span.len() > cap {
                            return Err(Error::overflow("relation span", span.len(), cap));
                        }
                    }
                }
            }
        }
        let span_vecs: Vec<Vec<usize>> = span.iter().map(|&s| q.decode(s)).collect();
        let mut coset_of = vec![u32::MAX; ambient];
        let mut reps = Vec::with_capacity(ambient / span.len());
        for code in 0..ambient {
            if coset_of[code] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            reps.push(code);
            let v = q.decode(code);
            for s in &span_vecs {
                let w: Vec<usize> = v.iter().zip(s).map(|(&a, &b)| q.ring.add(a, b)).collect();
                coset_of[q.encode(&w)] = id;
            }
        }
        q.coset_of = coset_of;
        q.reps = reps;
        q.span_size = span.len();
        Ok(q)
    }

    fn canon(&self, v: &[usize]) -> Vec<usize> {
        self.decode(self.reps[self.coset_of[self.encode(v)] as usize])
    }
}

enum Backend {
    Finite(FiniteQuotient),
    Smith(SmithForm),
}

struct Inner {
    ring: Ring,
    gens: usize,
    relations: Vec<Vec<Elem>>,
    backend: Backend,
}

/// `Rᵍ` modulo the span of `relations`. Cheap to clone.
#[derive(Clone)]
pub struct ModulePresentation {
    inner: Arc<Inner>,
}

impl fmt::Debug for ModulePresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModulePresentation")
            .field("ring", &self.inner.ring.name())
            .field("gens", &self.inner.gens)
            .field("relations", &self.inner.relations.len())
            .finish()
    }
}

impl ModulePresentation {
    pub fn new(ring: &Ring, gens: usize, relations: Vec<Vec<Elem>>) -> Result<Self> {
        for (i, row) in relations.iter().enumerate() {
            if row.len() != gens {
                return Err(Error::input(format!(
                    "relation row {i} has {} entries, expected {gens}",
                    row.len()
                )));
            }
            for e in row {
                if !ring.contains(e) {
                    return Err(Error::input(format!("relation row {i}: {e:?} is not a ring element")));
                }
            }
        }
        let backend = match ring {
            Ring::Finite(r) => Backend::Finite(FiniteQuotient::build(r.clone(), gens, &relations)?),
            Ring::SemiLocal(r) => Backend::Smith(semilocal_smith(r.primes(), gens, &relations)),
        };
        Ok(ModulePresentation {
            inner: Arc::new(Inner {
                ring: ring.clone(),
                gens,
                relations,
                backend,
            }),
        })
    }

    pub fn free(ring: &Ring, rank: usize) -> Result<Self> {
        Self::new(ring, rank, Vec::new())
    }

    pub fn zero_module(ring: &Ring) -> Self {
        Self::new(ring, 0, Vec::new()).expect("the zero module always fits")
    }

    /// `R / (a)` as a cyclic module.
    pub fn cyclic(ring: &Ring, a: Elem) -> Result<Self> {
        Self::new(ring, 1, vec![vec![a]])
    }

    /// Diagonal presentation `⊕ R/(aᵢ)`.
    pub fn diagonal(ring: &Ring, entries: &[Elem]) -> Result<Self> {
        let g = entries.len();
        let rows = entries
            .iter()
            .enumerate()
            .map(|(i, a)| (0..g).map(|j| if i == j { a.clone() } else { ring.zero() }).collect())
            .collect();
        Self::new(ring, g, rows)
    }

    pub fn ring(&self) -> &Ring {
        &self.inner.ring
    }

    pub fn gens(&self) -> usize {
        self.inner.gens
    }

    pub fn relations(&self) -> &[Vec<Elem>] {
        &self.inner.relations
    }

    pub fn same(&self, other: &ModulePresentation) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    pub fn smith(&self) -> Result<&SmithForm> {
        match &self.inner.backend {
            Backend::Smith(s) => Ok(s),
            Backend::Finite(_) => Err(Error::unsupported(
                "Smith normal form needs the semi-local backend",
            )),
        }
    }

    pub fn canon(&self, x: &[Elem]) -> ModuleElement {
        debug_assert_eq!(x.len(), self.gens());
        match &self.inner.backend {
            Backend::Finite(q) => {
                let v: Vec<usize> = x.iter().map(|e| e.idx()).collect();
                q.canon(&v).into_iter().map(Elem::Idx).collect()
            }
            Backend::Smith(s) => s.from_smith(&s.reduce(&s.to_smith(x))),
        }
    }

    pub fn check_element(&self, x: &[Elem]) -> Result<ModuleElement> {
        if x.len() != self.gens() {
            return Err(Error::input(format!(
                "element has {} coordinates, module has {} generators",
                x.len(),
                self.gens()
            )));
        }
        for e in x {
            self.ring().check(e)?;
        }
        Ok(self.canon(x))
    }

    pub fn zero(&self) -> ModuleElement {
        vec![self.ring().zero(); self.gens()]
    }

    /// The `j`-th generator.
    pub fn gen(&self, j: usize) -> ModuleElement {
        let r = self.ring();
        let v: Vec<Elem> = (0..self.gens()).map(|i| if i == j { r.one() } else { r.zero() }).collect();
        self.canon(&v)
    }

    pub fn add(&self, a: &[Elem], b: &[Elem]) -> ModuleElement {
        let r = self.ring();
        let v: Vec<Elem> = a.iter().zip(b).map(|(x, y)| r.add(x, y)).collect();
        self.canon(&v)
    }

    pub fn sub(&self, a: &[Elem], b: &[Elem]) -> ModuleElement {
        let r = self.ring();
        let v: Vec<Elem> = a.iter().zip(b).map(|(x, y)| r.sub(x, y)).collect();
        self.canon(&v)
    }

    pub fn scale(&self, c: &Elem, a: &[Elem]) -> ModuleElement {
        let r = self.ring();
        let v: Vec<Elem> = a.iter().map(|x| r.mul(c, x)).collect();
        self.canon(&v)
    }

    /// `Σ cᵢ · vᵢ`.
    pub fn combine(&self, coeffs: &[Elem], vectors: &[ModuleElement]) -> ModuleElement {
        let r = self.ring();
        let mut acc = self.zero();
        for (c, v) in coeffs.iter().zip(vectors) {
            for (a, x) in acc.iter_mut().zip(v) {
                *a = r.add(a, &r.mul(c, x));
            }
        }
        self.canon(&acc)
    }

    pub fn is_zero(&self, a: &[Elem]) -> bool {
        let c = self.canon(a);
        c.iter().all(|e| self.ring().is_zero(e))
    }

    pub fn eq_elements(&self, a: &[Elem], b: &[Elem]) -> bool {
        self.canon(a) == self.canon(b)
    }

    pub fn element_count(&self) -> Count {
        match &self.inner.backend {
            Backend::Finite(q) => Count::Finite(BigInt::from(q.reps.len())),
            Backend::Smith(s) => {
                if s.factors.iter().any(|d| d.is_zero()) {
                    Count::Infinite
                } else {
                    Count::Finite(s.factors.iter().product())
                }
            }
        }
    }

    pub fn is_zero_module(&self) -> bool {
        self.element_count() == Count::Finite(BigInt::one())
    }

    /// Size of the materialized relation span (table rings only).
    pub fn span_size(&self) -> Option<usize> {
        match &self.inner.backend {
            Backend::Finite(q) => Some(q.span_size),
            Backend::Smith(_) => None,
        }
    }

    /// Every element, in canonical order (zero first). Requires a finite
    /// module no larger than the carrier cap.
    pub fn elements(&self) -> Result<Vec<ModuleElement>> {
        let cap = limits::max_carrier();
        match &self.inner.backend {
            Backend::Finite(q) => {
                if q.reps.len() > cap {
                    return Err(Error::overflow("module carrier", q.reps.len(), cap));
                }
                Ok(q.reps
                    .iter()
                    .map(|&code| q.decode(code).into_iter().map(Elem::Idx).collect())
                    .collect())
            }
            Backend::Smith(s) => {
                let count = match self.element_count() {
                    Count::Finite(n) => n,
                    Count::Infinite => {
                        return Err(Error::unsupported(format!(
                            "module over {} has positive free rank",
                            self.ring().name()
                        )))
                    }
                };
                if count > BigInt::from(cap) {
                    return Err(Error::overflow("module carrier", count, cap));
                }
                let radices: Vec<usize> = s.factors.iter().map(|d| d.to_usize().unwrap()).collect();
                let total = count.to_usize().unwrap();
                let mut out = Vec::with_capacity(total);
                let mut digits = vec![0usize; radices.len()];
                for _ in 0..total {
                    let y: Vec<BigRational> = digits
                        .iter()
                        .map(|&d| BigRational::from_integer(BigInt::from(d)))
                        .collect();
                    out.push(s.from_smith(&y));
                    for k in (0..digits.len()).rev() {
                        digits[k] += 1;
                        if digits[k] < radices[k] {
                            break;
                        }
                        digits[k] = 0;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Dense index of an element in [`ModulePresentation::elements`] order
    /// (table rings only).
    pub fn index_of(&self, a: &[Elem]) -> Option<usize> {
        match &self.inner.backend {
            Backend::Finite(q) => {
                let v: Vec<usize> = a.iter().map(|e| e.idx()).collect();
                Some(q.coset_of[q.encode(&v)] as usize)
            }
            Backend::Smith(_) => None,
        }
    }

    pub fn format(&self, a: &[Elem]) -> String {
        let r = self.ring();
        format!("[{}]", a.iter().map(|e| r.format(e)).collect::<Vec<_>>().join(","))
    }

    /// Relations rendered as rows of literals.
    pub fn format_presentation(&self) -> String {
        let r = self.ring();
        let rows: Vec<String> = self
            .relations()
            .iter()
            .map(|row| format!("[{}]", row.iter().map(|e| r.format(e)).collect::<Vec<_>>().join(",")))
            .collect();
        format!("generators={} relations=[{}]", self.gens(), rows.join(","))
    }
}

fn semilocal_smith(primes: &[u64], gens: usize, relations: &[Vec<Elem>]) -> SmithForm {
    let rows: Vec<Vec<BigRational>> = relations
        .iter()
        .map(|row| row.iter().map(|e| e.frac().clone()).collect())
        .collect();
    // denominators are units of ℤ_S, so clearing them is a unit row operation
    let (int_rows, _) = linalg::clear_row_denominators(&rows);
    let s = linalg::smith_int(&int_rows, int_rows.len(), gens);
    let mut factors: Vec<BigInt> = s.diag.iter().map(|d| arith::s_part(d, primes)).collect();
    factors.resize(gens, BigInt::zero());
    SmithForm {
        factors,
        v: s.v,
        v_inv: s.v_inv,
    }
}

pub fn free_module(ring: &Ring, rank: usize) -> Result<ModulePresentation> {
    ModulePresentation::free(ring, rank)
}

pub fn element_count(m: &ModulePresentation) -> Count {
    m.element_count()
}

pub fn smith_normal_form(m: &ModulePresentation) -> Result<SmithForm> {
    m.smith().cloned()
}

/// `{r : r·m = 0}`.
pub fn annihilator(m: &ModulePresentation, x: &[Elem]) -> Ideal {
    match m.ring() {
        Ring::Finite(r) => {
            let members: Vec<usize> = (0..r.size())
                .filter(|&a| m.is_zero(&m.scale(&Elem::Idx(a), x)))
                .collect();
            Ideal::Set(members)
        }
        Ring::SemiLocal(_) => {
            let s = m.smith().expect("semi-local backend");
            let y = s.reduce(&s.to_smith(x));
            let mut gen = BigInt::one();
            for (yi, d) in y.iter().zip(&s.factors) {
                if yi.is_zero() {
                    continue;
                }
                if d.is_zero() {
                    return Ideal::Principal(BigInt::zero());
                }
                let c = d / d.gcd(yi.numer());
                gen = arith::lcm(&gen, &c);
            }
            Ideal::Principal(gen)
        }
    }
}

/// A homomorphism given by the images of the source generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hom {
    pub images: Vec<ModuleElement>,
}

impl Hom {
    pub fn zero(source: &ModulePresentation, target: &ModulePresentation) -> Hom {
        Hom {
            images: vec![target.zero(); source.gens()],
        }
    }

    pub fn identity(m: &ModulePresentation) -> Hom {
        Hom {
            images: (0..m.gens()).map(|j| m.gen(j)).collect(),
        }
    }

    /// Multiplication by a scalar on a module.
    pub fn scalar(m: &ModulePresentation, c: &Elem) -> Hom {
        Hom {
            images: (0..m.gens()).map(|j| m.scale(c, &m.gen(j))).collect(),
        }
    }

    pub fn apply(&self, target: &ModulePresentation, x: &[Elem]) -> ModuleElement {
        target.combine(x, &self.images)
    }

    /// Every relation of the source maps to zero in the target.
    pub fn is_homomorphism(&self, source: &ModulePresentation, target: &ModulePresentation) -> bool {
        self.images.len() == source.gens()
            && source.relations().iter().all(|row| target.is_zero(&self.apply(target, row)))
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Hom, last: &ModulePresentation) -> Hom {
        Hom {
            images: self.images.iter().map(|x| other.apply(last, x)).collect(),
        }
    }

    pub fn canonical(&self, target: &ModulePresentation) -> Hom {
        Hom {
            images: self.images.iter().map(|x| target.canon(x)).collect(),
        }
    }

    pub fn format(&self, target: &ModulePresentation) -> String {
        format!(
            "[{}]",
            self.images.iter().map(|x| target.format(x)).collect::<Vec<_>>().join(";")
        )
    }
}

/// Upper bound on candidate generator-image tuples scanned by Hom enumeration.
pub const HOM_SEARCH_CAP: usize = 1 << 24;

/// All homomorphisms `M → N`, in lexicographic order of generator images.
pub fn hom_enumerate(m: &ModulePresentation, n: &ModulePresentation) -> Result<Vec<Hom>> {
    if m.ring() != n.ring() {
        return Err(Error::input("Hom between modules over different rings"));
    }
    if m.gens() == 0 {
        return Ok(vec![Hom { images: Vec::new() }]);
    }
    let targets = match n.elements() {
        Ok(t) => t,
        Err(Error::Unsupported(msg)) => {
            return Err(Error::unsupported(format!("Hom set is infinite: {msg}")))
        }
        Err(e) => return Err(e),
    };
    let size = targets.len();
    let g = m.gens();
    let candidates = size
        .checked_pow(g as u32)
        .ok_or_else(|| Error::overflow("Hom search", format!("{size}^{g}"), HOM_SEARCH_CAP))?;
    if candidates > HOM_SEARCH_CAP {
        return Err(Error::overflow("Hom search", candidates, HOM_SEARCH_CAP));
    }
    // a relation can be checked once all generators it touches are assigned
    let ring = m.ring();
    let last_touch: Vec<usize> = m
        .relations()
        .iter()
        .map(|row| row.iter().rposition(|e| !ring.is_zero(e)).unwrap_or(0))
        .collect();

    let branches = par::map_range(size, |first| {
        let mut found = Vec::new();
        let mut chosen = vec![first];
        dfs(m, n, &targets, &last_touch, &mut chosen, &mut found);
        found
    });
    Ok(branches.into_iter().flatten().collect())
}

fn dfs(
    m: &ModulePresentation,
    n: &ModulePresentation,
    targets: &[ModuleElement],
    last_touch: &[usize],
    chosen: &mut Vec<usize>,
    found: &mut Vec<Hom>,
) {
    let depth = chosen.len();
    let images: Vec<ModuleElement> = chosen.iter().map(|&i| targets[i].clone()).collect();
    for (row, &last) in m.relations().iter().zip(last_touch) {
        if last + 1 == depth {
            let img = n.combine(&row[..depth], &images);
            if !n.is_zero(&img) {
                return;
            }
        }
    }
    if depth == m.gens() {
        found.push(Hom { images });
        return;
    }
    for t in 0..targets.len() {
        chosen.push(t);
        dfs(m, n, targets, last_touch, chosen, found);
        chosen.pop();
    }
}

/// An isomorphism `M → N` with its inverse, both verified.
#[derive(Debug, Clone)]
pub struct IsoWitness {
    pub forward: Hom,
    pub backward: Hom,
}

/// Decides `M ≅ N`, returning an explicit inverse pair when they are.
pub fn module_isomorphic(m: &ModulePresentation, n: &ModulePresentation) -> Result<Option<IsoWitness>> {
    if m.ring() != n.ring() {
        return Err(Error::input("modules over different rings"));
    }
    let witness = match m.ring() {
        Ring::Finite(_) => finite_iso(m, n)?,
        Ring::SemiLocal(_) => smith_iso(m, n)?,
    };
    if let Some(w) = &witness {
        if !verify_iso(m, n, w) {
            return Err(Error::invariant("constructed isomorphism failed verification"));
        }
    }
    Ok(witness)
}

/// Both maps are homomorphisms and compose to the identity on generators.
pub fn verify_iso(m: &ModulePresentation, n: &ModulePresentation, w: &IsoWitness) -> bool {
    w.forward.is_homomorphism(m, n)
        && w.backward.is_homomorphism(n, m)
        && (0..m.gens()).all(|j| m.eq_elements(&w.backward.apply(m, &w.forward.images[j]), &m.gen(j)))
        && (0..n.gens()).all(|j| n.eq_elements(&w.forward.apply(n, &w.backward.images[j]), &n.gen(j)))
}

fn finite_iso(m: &ModulePresentation, n: &ModulePresentation) -> Result<Option<IsoWitness>> {
    let (em, en) = (m.elements()?, n.elements()?);
    if em.len() != en.len() {
        return Ok(None);
    }
    for f in hom_enumerate(m, n)? {
        let mut seen = HashSet::with_capacity(em.len());
        if !em.iter().all(|x| seen.insert(f.apply(n, x))) {
            continue;
        }
        let preimage = |y: &ModuleElement| em.iter().find(|x| f.apply(n, x) == *y).cloned();
        let backward = Hom {
            images: (0..n.gens())
                .map(|j| preimage(&n.gen(j)).expect("bijection"))
                .collect(),
        };
        return Ok(Some(IsoWitness { forward: f, backward }));
    }
    Ok(None)
}

fn smith_iso(m: &ModulePresentation, n: &ModulePresentation) -> Result<Option<IsoWitness>> {
    let (sm, sn) = (m.smith()?, n.smith()?);
    if sm.nontrivial() != sn.nontrivial() {
        return Ok(None);
    }
    let (im, in_) = (sm.nontrivial_indices(), sn.nontrivial_indices());
    let transfer = |from: &SmithForm, to: &SmithForm, fi: &[usize], ti: &[usize], target: &ModulePresentation, j: usize| {
        let row: Vec<BigRational> = from.v[j].iter().map(|x| BigRational::from_integer(x.clone())).collect();
        let mut y = vec![BigRational::zero(); to.factors.len()];
        for (&a, &b) in fi.iter().zip(ti) {
            y[b] = row[a].clone();
        }
        target.canon(&to.from_smith(&y))
    };
    let forward = Hom {
        images: (0..m.gens()).map(|j| transfer(sm, sn, &im, &in_, n, j)).collect(),
    };
    let backward = Hom {
        images: (0..n.gens()).map(|j| transfer(sn, sm, &in_, &im, m, j)).collect(),
    };
    Ok(Some(IsoWitness { forward, backward }))
}

/// Solves `y · C = t` for `y` with entries in `ℤ_S`, where `C` has rows over
/// `ℤ_S`.
pub fn pid_solve(primes: &[u64], c: &[Vec<BigRational>], cols: usize, t: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = c.len();
    let (ci, row_mult) = linalg::clear_row_denominators(c);
    let (ti, t_mult) = linalg::clear_row_denominators(&[t.to_vec()]);
    let (ti, t_mult) = (&ti[0], &t_mult[0]);
    let s = linalg::smith_int(&ci, n, cols);
    let r = s.rank();
    let tv: Vec<BigInt> = (0..cols)
        .map(|j| (0..cols).fold(BigInt::zero(), |acc, k| acc + &ti[k] * &s.v[k][j]))
        .collect();
    if tv[r..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut z = vec![BigRational::zero(); n];
    for j in 0..r {
        let q = BigRational::new(tv[j].clone(), s.diag[j].clone());
        if !arith::coprime_to(q.denom(), primes) {
            return None;
        }
        z[j] = q;
    }
    let y = (0..n)
        .map(|i| {
            let yi = (0..n).fold(BigRational::zero(), |acc, k| acc + &z[k] * BigRational::from_integer(s.u[k][i].clone()));
            yi * BigRational::new(row_mult[i].clone(), t_mult.clone())
        })
        .collect();
    Some(y)
}

/// The inverse of `f : A → B` when `f` is an isomorphism.
pub fn hom_inverse(a: &ModulePresentation, b: &ModulePresentation, f: &Hom) -> Result<Option<Hom>> {
    if a.ring() != b.ring() {
        return Err(Error::input("modules over different rings"));
    }
    if !f.is_homomorphism(a, b) {
        return Err(Error::input("map does not respect the source relations"));
    }
    let backward = match a.ring() {
        Ring::Finite(_) => {
            let (ea, eb) = (a.elements()?, b.elements()?);
            if ea.len() != eb.len() {
                return Ok(None);
            }
            let images: Vec<ModuleElement> = ea.iter().map(|x| f.apply(b, x)).collect();
            let distinct: HashSet<&ModuleElement> = images.iter().collect();
            if distinct.len() != ea.len() {
                return Ok(None);
            }
            Hom {
                images: (0..b.gens())
                    .map(|j| {
                        let gj = b.gen(j);
                        ea[images.iter().position(|y| *y == gj).unwrap()].clone()
                    })
                    .collect(),
            }
        }
        Ring::SemiLocal(r) => {
            if a.smith()?.nontrivial() != b.smith()?.nontrivial() {
                return Ok(None);
            }
            let rows: Vec<Vec<BigRational>> = f
                .images
                .iter()
                .chain(b.relations())
                .map(|row| row.iter().map(|e| e.frac().clone()).collect())
                .collect();
            let mut images = Vec::with_capacity(b.gens());
            for j in 0..b.gens() {
                let t: Vec<BigRational> = b.gen(j).iter().map(|e| e.frac().clone()).collect();
                match pid_solve(r.primes(), &rows, b.gens(), &t) {
                    Some(y) => images.push(a.canon(&y[..a.gens()].iter().cloned().map(Elem::Frac).collect::<Vec<_>>())),
                    None => return Ok(None),
                }
            }
            Hom { images }
        }
    };
    let w = IsoWitness {
        forward: f.clone(),
        backward,
    };
    if !verify_iso(a, b, &w) {
        return Err(Error::invariant("inverse of a bijective homomorphism failed verification"));
    }
    Ok(Some(w.backward))
}

/// `Hom(M, N)` over a semi-local ring, presented on elementary maps between
/// Smith summands.
#[derive(Debug, Clone)]
pub struct HomModule {
    pub source: ModulePresentation,
    pub target: ModulePresentation,
    pub module: ModulePresentation,
    /// `(i, j, c)`: Smith generator `i` of the source goes to `c` times Smith
    /// generator `j` of the target.
    pub pairs: Vec<(usize, usize, BigInt)>,
}

impl HomModule {
    fn smith_gen(m: &ModulePresentation, i: usize) -> ModuleElement {
        let s = m.smith().expect("semi-local backend");
        let mut y = vec![BigRational::zero(); s.factors.len()];
        y[i] = BigRational::one();
        s.from_smith(&y)
    }

    pub fn to_hom(&self, coords: &[Elem]) -> Hom {
        let (m, n) = (&self.source, &self.target);
        let sm = m.smith().expect("semi-local backend");
        let mut on_smith: Vec<ModuleElement> = vec![n.zero(); m.gens()];
        for ((i, j, c), k) in self.pairs.iter().zip(coords) {
            let t = Self::smith_gen(n, *j);
            let term = n.scale(&Elem::Frac(k.frac() * BigRational::from_integer(c.clone())), &t);
            on_smith[*i] = n.add(&on_smith[*i], &term);
        }
        Hom {
            images: (0..m.gens())
                .map(|k| {
                    let coeffs: Vec<Elem> = sm.v[k].iter().map(|x| Elem::Frac(BigRational::from_integer(x.clone()))).collect();
                    n.combine(&coeffs, &on_smith)
                })
                .collect(),
        }
    }

    /// Coordinates of a homomorphism in the elementary basis.
    pub fn coordinates(&self, f: &Hom) -> Option<Vec<Elem>> {
        let (m, n) = (&self.source, &self.target);
        let sn = n.smith().ok()?;
        let r = m.ring().as_semilocal()?;
        let mut out = Vec::with_capacity(self.pairs.len());
        for (i, j, c) in &self.pairs {
            let y = sn.reduce(&sn.to_smith(&f.apply(n, &Self::smith_gen(m, *i))));
            let q = &y[*j] / BigRational::from_integer(c.clone());
            if !r.contains(&q) {
                return None;
            }
            out.push(Elem::Frac(q));
        }
        let coords = self.module.canon(&out);
        let back = self.to_hom(&coords);
        (0..m.gens())
            .all(|k| n.eq_elements(&back.images[k], &f.images[k]))
            .then_some(coords)
    }
}

pub fn hom_module(m: &ModulePresentation, n: &ModulePresentation) -> Result<HomModule> {
    if m.ring() != n.ring() {
        return Err(Error::input("modules over different rings"));
    }
    let (sm, sn) = (m.smith()?, n.smith()?);
    let mut pairs = Vec::new();
    let mut diag = Vec::new();
    for i in sm.nontrivial_indices() {
        for j in sn.nontrivial_indices() {
            let (a, b) = (&sm.factors[i], &sn.factors[j]);
            match (a.is_zero(), b.is_zero()) {
                (true, _) => {
                    pairs.push((i, j, BigInt::one()));
                    diag.push(b.clone());
                }
                (false, true) => {}
                (false, false) => {
                    let g = a.gcd(b);
                    pairs.push((i, j, b / &g));
                    diag.push(g);
                }
            }
        }
    }
    let entries: Vec<Elem> = diag.into_iter().map(|d| Elem::Frac(BigRational::from_integer(d))).collect();
    let module = ModulePresentation::diagonal(m.ring(), &entries)?;
    Ok(HomModule {
        source: m.clone(),
        target: n.clone(),
        module,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: u64) -> Ring {
        Ring::zmod(n).unwrap()
    }

    fn big(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn counts() {
        let r = z(12);
        assert_eq!(ModulePresentation::free(&r, 1).unwrap().element_count(), Count::Finite(BigInt::from(12)));
        let m = ModulePresentation::cyclic(&r, Elem::Idx(4)).unwrap();
        assert_eq!(m.element_count(), Count::Finite(BigInt::from(4)));
        assert_eq!(m.span_size(), Some(3));
        assert!(ModulePresentation::free(&r, 0).unwrap().is_zero_module());

        let s = Ring::semilocal_int(&[2, 3]).unwrap();
        let d = ModulePresentation::diagonal(&s, &[Elem::int(4), Elem::int(6)]).unwrap();
        assert_eq!(d.element_count(), Count::Finite(BigInt::from(24)));
        let s2 = Ring::semilocal_int(&[2]).unwrap();
        assert_eq!(ModulePresentation::free(&s2, 1).unwrap().element_count(), Count::Infinite);
    }

    #[test]
    fn smith_factors() {
        let s = Ring::semilocal_int(&[2, 3]).unwrap();
        let d = ModulePresentation::diagonal(&s, &[Elem::int(4), Elem::int(6)]).unwrap();
        assert_eq!(d.smith().unwrap().factors, big(&[2, 12]));
        let s2 = Ring::semilocal_int(&[2]).unwrap();
        let d2 = ModulePresentation::diagonal(&s2, &[Elem::int(4), Elem::int(6)]).unwrap();
        assert_eq!(d2.smith().unwrap().factors, big(&[2, 4]));
        let f = ModulePresentation::free(&s, 2).unwrap();
        assert_eq!(f.smith().unwrap().factors, big(&[0, 0]));
        assert!(ModulePresentation::free(&z(4), 1).unwrap().smith().is_err());
    }

    #[test]
    fn semilocal_canonical_forms() {
        let s = Ring::semilocal_int(&[2]).unwrap();
        let m = ModulePresentation::cyclic(&s, Elem::int(4)).unwrap();
        // 1/3 ≡ 3 (mod 4)
        let x = m.canon(&[s.parse("1/3").unwrap()]);
        assert_eq!(x, vec![Elem::int(3)]);
        assert_eq!(m.canon(&x), x);
        assert!(m.is_zero(&[Elem::int(8)]));
        assert_eq!(m.elements().unwrap().len(), 4);
    }

    #[test]
    fn annihilators() {
        let r = z(12);
        let m = ModulePresentation::free(&r, 1).unwrap();
        assert_eq!(annihilator(&m, &[Elem::Idx(6)]), Ideal::Set(vec![0, 2, 4, 6, 8, 10]));
        assert_eq!(annihilator(&m, &[Elem::Idx(4)]), Ideal::Set(vec![0, 3, 6, 9]));
        assert_eq!(annihilator(&m, &[Elem::Idx(0)]), Ideal::whole(&r));

        let s = Ring::semilocal_int(&[2, 3]).unwrap();
        let d = ModulePresentation::diagonal(&s, &[Elem::int(4), Elem::int(6)]).unwrap();
        assert_eq!(annihilator(&d, &[Elem::int(2), Elem::int(0)]), Ideal::Principal(BigInt::from(2)));
        assert_eq!(annihilator(&d, &[Elem::int(1), Elem::int(1)]), Ideal::Principal(BigInt::from(12)));
        let f = ModulePresentation::free(&s, 1).unwrap();
        assert_eq!(annihilator(&f, &[Elem::int(5)]), Ideal::Principal(BigInt::from(0)));
    }

    #[test]
    fn hom_counts() {
        let r = z(12);
        let free = ModulePresentation::free(&r, 1).unwrap();
        let r6 = ModulePresentation::cyclic(&r, Elem::Idx(6)).unwrap();
        assert_eq!(hom_enumerate(&free, &r6).unwrap().len(), 6);
        let zero = ModulePresentation::zero_module(&r);
        assert_eq!(hom_enumerate(&zero, &r6).unwrap().len(), 1);
        let r4 = ModulePresentation::cyclic(&r, Elem::Idx(4)).unwrap();
        let r3 = ModulePresentation::cyclic(&r, Elem::Idx(3)).unwrap();
        assert_eq!(hom_enumerate(&r4, &r3).unwrap().len(), 1);
        for f in hom_enumerate(&free, &r6).unwrap() {
            assert!(f.is_homomorphism(&free, &r6));
        }
        let s = Ring::semilocal_int(&[2]).unwrap();
        let fs = ModulePresentation::free(&s, 1).unwrap();
        assert!(matches!(hom_enumerate(&fs, &fs), Err(Error::Unsupported(_))));
    }

    #[test]
    fn isomorphisms() {
        let r = z(12);
        let free = ModulePresentation::free(&r, 1).unwrap();
        let d = ModulePresentation::diagonal(&r, &[Elem::Idx(4), Elem::Idx(3)]).unwrap();
        assert!(module_isomorphic(&free, &d).unwrap().is_some());
        let r4 = ModulePresentation::cyclic(&r, Elem::Idx(4)).unwrap();
        let r3 = ModulePresentation::cyclic(&r, Elem::Idx(3)).unwrap();
        assert!(module_isomorphic(&r4, &r3).unwrap().is_none());
        let w = module_isomorphic(&r4, &r4).unwrap().unwrap();
        assert!(verify_iso(&r4, &r4, &w));

        let s = Ring::semilocal_int(&[2, 3]).unwrap();
        let a = ModulePresentation::diagonal(&s, &[Elem::int(4), Elem::int(6)]).unwrap();
        let b = ModulePresentation::diagonal(&s, &[Elem::int(2), Elem::int(12)]).unwrap();
        let c = ModulePresentation::cyclic(&s, Elem::int(24)).unwrap();
        assert!(module_isomorphic(&a, &b).unwrap().is_some());
        assert!(module_isomorphic(&a, &c).unwrap().is_none());
    }

    #[test]
    fn pid_solutions() {
        let q = |n: i64| BigRational::from_integer(BigInt::from(n));
        let c = vec![vec![q(2), q(0)], vec![q(0), q(3)]];
        assert_eq!(pid_solve(&[2], &c, 2, &[q(4), q(1)]), Some(vec![q(2), BigRational::new(1.into(), 3.into())]));
        assert_eq!(pid_solve(&[2], &c, 2, &[q(1), q(0)]), None);
        assert!(pid_solve(&[2, 3], &c, 2, &[q(0), q(1)]).is_none());
    }

    #[test]
    fn inverses_of_isomorphisms() {
        let s = Ring::semilocal_int(&[2]).unwrap();
        let f = ModulePresentation::free(&s, 1).unwrap();
        let three = Hom::scalar(&f, &Elem::int(3));
        let inv = hom_inverse(&f, &f, &three).unwrap().unwrap();
        assert_eq!(inv.images, vec![vec![s.parse("1/3").unwrap()]]);
        assert!(hom_inverse(&f, &f, &Hom::scalar(&f, &Elem::int(2))).unwrap().is_none());

        let r = z(12);
        let m = ModulePresentation::free(&r, 1).unwrap();
        let five = Hom::scalar(&m, &Elem::Idx(5));
        assert_eq!(hom_inverse(&m, &m, &five).unwrap().unwrap().images, vec![vec![Elem::Idx(5)]]);
        assert!(hom_inverse(&m, &m, &Hom::scalar(&m, &Elem::Idx(2))).unwrap().is_none());
    }

    #[test]
    fn pid_hom_modules() {
        let s = Ring::semilocal_int(&[2, 3]).unwrap();
        let m = ModulePresentation::diagonal(&s, &[Elem::int(4), Elem::int(0)]).unwrap();
        let n = ModulePresentation::diagonal(&s, &[Elem::int(6), Elem::int(0)]).unwrap();
        let h = hom_module(&m, &n).unwrap();
        // Hom(Z/4, Z/2) ⊕ Hom(Z, Z/6) ⊕ Hom(Z, Z), Hom(Z/4, Z) = 0
        assert_eq!(h.module.smith().unwrap().nontrivial(), vec![BigInt::from(2), BigInt::from(6), BigInt::zero()]);
        for k in 0..h.module.gens() {
            let f = h.to_hom(&h.module.gen(k));
            assert!(f.is_homomorphism(&m, &n));
            assert_eq!(h.coordinates(&f), Some(h.module.gen(k)));
        }
    }
}
