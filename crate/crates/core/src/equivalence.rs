//! Theorem-level verifications: the key lemma with section certificates,
//! full faithfulness of `S`, admissibility, and the affine check.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use num_bigint::BigInt;

use crate::assoc::{ass_after_localization, associated_primes, nu_map, AssSet};
use crate::error::{Error, Result};
use crate::localization::{localization_map, localize_module_at, localize_ring_at, LocalModule, LocalRing};
use crate::module::{hom_enumerate, hom_inverse, hom_module, Count, Hom, ModuleElement, ModulePresentation};
use crate::par;
use crate::presheaf::{
    functor_s, functor_s_on_morphism, functor_t, enumerate_presheaf_morphisms, inverse_limit, limit_obstruction,
    limit_ring, structure_presheaf, structure_rings, LimitModule, LimitRing, Presheaf, PresheafMorphism,
};
use crate::ring::{Elem, Ring};
use crate::spectrum::{spectrum, SpecPoset, SubPoset};

/// `σ_y = τ/f` on the open neighbourhood `U_x` of `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionCertificate {
    pub point: usize,
    pub tau: ModuleElement,
    pub f: Elem,
    /// `T_x`: associated points specializing to `x`.
    pub ass_local: SubPoset,
    /// `Z_x = V(f) ∪ closures of the associated points outside T_x`.
    pub excluded: SubPoset,
    pub neighborhood: SubPoset,
}

/// Data shared by every section reconstruction for one module.
struct SectionContext<'a> {
    module: &'a ModulePresentation,
    spec: &'a SpecPoset,
    ass: AssSet,
    stalks: Vec<LocalModule>,
    elements: Vec<ModuleElement>,
    scalars: Vec<Elem>,
}

impl<'a> SectionContext<'a> {
    fn new(module: &'a ModulePresentation, spec: &'a SpecPoset, locals: &[Arc<LocalRing>]) -> Result<Self> {
        if !module.ring().is_finite() {
            return Err(Error::unsupported("section certificates need a table ring"));
        }
        Ok(SectionContext {
            module,
            spec,
            ass: associated_primes(module, spec)?,
            stalks: locals
                .iter()
                .map(|l| localize_module_at(module, l.clone()))
                .collect::<Result<_>>()?,
            elements: module.elements()?,
            scalars: module.ring().elements()?,
        })
    }

    fn value(&self, y: usize, tau: &[Elem], f: &Elem) -> Option<ModuleElement> {
        self.stalks[y].fraction(tau, f).ok().map(|g| g.value)
    }

    // `family` is indexed by spectrum point.
    fn certify(&self, family: &[ModuleElement], x: usize) -> Result<SectionCertificate> {
        let spec = self.spec;
        let prime = &spec.point(x).prime;
        let ring = self.module.ring();
        let outside: Vec<&Elem> = self.scalars.iter().filter(|f| !prime.contains(ring, f)).collect();
        let target = self.stalks[x].module().canon(&family[x]);
        let n = self.elements.len();
        let hit = par::position(n, |i| {
            outside
                .iter()
                .any(|f| self.value(x, &self.elements[i], f).as_ref() == Some(&target))
        });
        let Some(i) = hit else {
            return Err(Error::invariant(format!(
                "no fraction tau/f represents {} at {}",
                self.stalks[x].module().format(&family[x]),
                spec.point(x).label
            )));
        };
        let tau = self.elements[i].clone();
        let f = outside
            .iter()
            .find(|f| self.value(x, &tau, f).as_ref() == Some(&target))
            .map(|f| (*f).clone())
            .unwrap();

        let ass_local = ass_after_localization(&self.ass, spec, x);
        let mut excluded = spec.vanishing_locus(&f);
        for y in self.ass.points.iter().copied().filter(|y| !ass_local.contains(*y)) {
            excluded = excluded.union(&spec.upset(y));
        }
        let neighborhood = spec.complement(&excluded);
        let cert = SectionCertificate {
            point: x,
            tau,
            f,
            ass_local,
            excluded,
            neighborhood,
        };
        self.check(family, &cert)?;
        Ok(cert)
    }

    fn check(&self, family: &[ModuleElement], c: &SectionCertificate) -> Result<()> {
        let spec = self.spec;
        let ring = self.module.ring();
        let fail = |why: String| Err(Error::invariant(format!("certificate at {}: {why}", spec.point(c.point).label)));
        if !c.neighborhood.contains(c.point) || !spec.is_open(&c.neighborhood) {
            return fail("neighbourhood is not an open set containing the point".into());
        }
        for y in c.neighborhood.iter() {
            if spec.point(y).prime.contains(ring, &c.f) {
                return fail(format!("f is not invertible at {}", spec.point(y).label));
            }
            let stalk = self.stalks[y].module();
            match self.value(y, &c.tau, &c.f) {
                Some(v) if stalk.eq_elements(&v, &family[y]) => {}
                _ => return fail(format!("tau/f differs from the section at {}", spec.point(y).label)),
            }
        }
        Ok(())
    }
}

/// Finds `(τ, f)` with `σ_x = τ/f` and certifies it on `U_x`. `family` is
/// indexed by spectrum point. Table rings only.
pub fn reconstruct_section(m: &ModulePresentation, family: &[ModuleElement], x: usize) -> Result<SectionCertificate> {
    let spec = Arc::new(spectrum(m.ring())?);
    let locals = structure_rings(&spec)?;
    let g = functor_s(m, spec.clone(), &locals)?;
    if family.len() != spec.len() || !g.is_compatible(&spec.whole(), family) {
        return Err(Error::input("family is not a compatible section of S(M)"));
    }
    if x >= spec.len() {
        return Err(Error::UnknownPoint(x.to_string()));
    }
    SectionContext::new(m, &spec, &locals)?.certify(family, x)
}

#[derive(Debug, Clone)]
enum Inverse {
    Table(HashMap<Vec<ModuleElement>, ModuleElement>),
    Smith(Hom),
}

/// A verified bijection `M ≅ lim S(M)`.
#[derive(Debug, Clone)]
pub struct KeyLemma {
    pub module: ModulePresentation,
    pub presheaf: Presheaf,
    pub limit: LimitModule,
    /// Certificates for every limit element at every point (table rings).
    pub certificates: Vec<Vec<SectionCertificate>>,
    inverse: Inverse,
}

impl KeyLemma {
    /// `m ↦ (m/1)_x`, indexed like `limit.points()`.
    pub fn canonical(&self, m: &[Elem]) -> Vec<ModuleElement> {
        canonical_family(&self.presheaf, self.limit.points(), m)
    }

    /// The unique `m` with `canonical(m) = family`.
    pub fn glue(&self, family: &[ModuleElement]) -> Option<ModuleElement> {
        match &self.inverse {
            Inverse::Table(t) => {
                let canon: Vec<ModuleElement> = self
                    .limit
                    .points()
                    .iter()
                    .zip(family)
                    .map(|(&x, v)| self.presheaf.stalk(x).canon(v))
                    .collect();
                t.get(&canon).cloned()
            }
            Inverse::Smith(back) => {
                let c = self.limit.coordinates(family)?;
                Some(back.apply(&self.module, &c))
            }
        }
    }

    pub fn summary(&self) -> String {
        let m = &self.module;
        let size = m.element_count();
        match &self.inverse {
            Inverse::Table(t) => format!(
                "M = {} over {}: {} elements, bijective onto lim S(M) ({} families, {} certificates)",
                m.format_presentation(),
                m.ring().name(),
                size,
                t.len(),
                self.certificates.iter().map(Vec::len).sum::<usize>()
            ),
            Inverse::Smith(_) => format!(
                "M = {} over {}: invariant factors [{}], isomorphic to lim S(M) with invariant factors [{}]",
                m.format_presentation(),
                m.ring().name(),
                factors(m).join(", "),
                factors(&self.limit.module).join(", ")
            ),
        }
    }
}

fn factors(m: &ModulePresentation) -> Vec<String> {
    m.smith()
        .map(|s| s.nontrivial().iter().map(BigInt::to_string).collect())
        .unwrap_or_default()
}

fn canonical_family(g: &Presheaf, points: &[usize], m: &[Elem]) -> Vec<ModuleElement> {
    points
        .iter()
        .map(|&x| {
            let local = &g.locals()[x];
            let germ: Vec<Elem> = m.iter().map(|a| local.germ(a)).collect();
            g.stalk(x).canon(&germ)
        })
        .collect()
}

/// Verifies `M ≅ lim S(M)` and builds the inverse. Any failure is an
/// invariant violation.
pub fn verify_key_lemma(m: &ModulePresentation) -> Result<KeyLemma> {
    let spec = Arc::new(spectrum(m.ring())?);
    let locals = structure_rings(&spec)?;
    let g = functor_s(m, spec.clone(), &locals)?;
    let limit = inverse_limit(&g, &spec.whole()).map_err(|e| match e {
        Error::Unsupported(why) => Error::invariant(format!("lim S(M) is not finitely generated: {why}")),
        other => other,
    })?;
    let pts = limit.points().to_vec();
    match m.ring() {
        Ring::Finite(fr) => {
            let ctx = SectionContext::new(m, &spec, &locals)?;
            let families = limit.elements()?;
            // idempotent e_x: 1 at x, 0 elsewhere
            let scalars = m.ring().elements()?;
            let germ_at = |x: usize, a: &Elem| locals[x].germ(a);
            let idempotents: Vec<Elem> = pts
                .iter()
                .map(|&x| {
                    scalars
                        .iter()
                        .find(|e| {
                            pts.iter().all(|&y| {
                                let v = germ_at(y, e);
                                let want = if y == x { locals[y].ring().one() } else { locals[y].ring().zero() };
                                v == want
                            })
                        })
                        .cloned()
                        .ok_or_else(|| Error::invariant(format!("no idempotent for {}", spec.point(x).label)))
                })
                .collect::<Result<_>>()?;
            let results = par::map(&families, |fam| -> Result<(Vec<SectionCertificate>, ModuleElement)> {
                let mut by_point = vec![Vec::new(); spec.len()];
                for (k, &x) in pts.iter().enumerate() {
                    by_point[x] = fam[k].clone();
                }
                let certs = pts
                    .iter()
                    .map(|&x| ctx.certify(&by_point, x))
                    .collect::<Result<Vec<_>>>()?;
                // m = Σ e_x · g_x · τ_x with g_x inverting f_x at x
                let mut glued = m.zero();
                for (k, c) in certs.iter().enumerate() {
                    let x = pts[k];
                    let want = locals[x]
                        .ring()
                        .inverse(&germ_at(x, &c.f))
                        .ok_or_else(|| Error::invariant("certificate denominator is not a unit"))?;
                    let gx = scalars
                        .iter()
                        .find(|a| germ_at(x, a) == want)
                        .ok_or_else(|| Error::invariant("R does not surject onto a local ring"))?;
                    let coeff = Elem::Idx(fr.mul(idempotents[k].idx(), gx.idx()));
                    glued = m.add(&glued, &m.scale(&coeff, &c.tau));
                }
                if canonical_family(&g, &pts, &glued) != *fam {
                    return Err(Error::invariant(format!(
                        "glued element {} does not restrict to its family",
                        m.format(&glued)
                    )));
                }
                Ok((certs, glued))
            });
            let mut certificates = Vec::with_capacity(families.len());
            let mut table = HashMap::with_capacity(families.len());
            for (fam, r) in families.iter().zip(results) {
                let (certs, glued) = r?;
                certificates.push(certs);
                table.insert(fam.clone(), glued);
            }
            let elems = m.elements()?;
            let images: HashSet<Vec<ModuleElement>> = elems.iter().map(|e| canonical_family(&g, &pts, e)).collect();
            if images.len() != elems.len() || elems.len() != families.len() {
                return Err(Error::invariant(format!(
                    "canonical map M -> lim S(M) is not bijective: |M| = {}, image {}, |lim| = {}",
                    elems.len(),
                    images.len(),
                    families.len()
                )));
            }
            Ok(KeyLemma {
                module: m.clone(),
                presheaf: g,
                limit,
                certificates,
                inverse: Inverse::Table(table),
            })
        }
        Ring::SemiLocal(_) => {
            if limit.ring.ring() != m.ring() {
                return Err(Error::invariant("limit ring differs from R"));
            }
            let images = (0..m.gens())
                .map(|j| {
                    limit
                        .coordinates(&canonical_family(&g, &pts, &m.gen(j)))
                        .ok_or_else(|| Error::invariant(format!("germs of generator {j} are not a limit element")))
                })
                .collect::<Result<Vec<_>>>()?;
            let forward = Hom { images };
            let back = hom_inverse(m, &limit.module, &forward)
                .map_err(|e| Error::invariant(format!("canonical map: {e}")))?
                .ok_or_else(|| Error::invariant("canonical map M -> lim S(M) is not an isomorphism"))?;
            Ok(KeyLemma {
                module: m.clone(),
                presheaf: g,
                limit,
                certificates: Vec::new(),
                inverse: Inverse::Smith(back),
            })
        }
    }
}

/// `ψ` with `S(ψ) = φ`, glued from the components on the generators of `M`.
pub fn reconstruct_morphism(m: &ModulePresentation, key_n: &KeyLemma, phi: &PresheafMorphism) -> Result<Hom> {
    let sn = &key_n.presheaf;
    let spec = sn.spec().clone();
    let sm = functor_s(m, spec.clone(), sn.locals())?;
    if !phi.is_valid(&sm, sn) {
        return Err(Error::input("not a presheaf morphism S(M) -> S(N)"));
    }
    let n = &key_n.module;
    let pts = key_n.limit.points();
    let mut images = Vec::with_capacity(m.gens());
    for j in 0..m.gens() {
        let family: Vec<ModuleElement> = pts.iter().map(|&x| phi.components[x].images[j].clone()).collect();
        let v = key_n
            .glue(&family)
            .ok_or_else(|| Error::invariant(format!("component family of generator {j} does not glue")))?;
        images.push(n.canon(&v));
    }
    let psi = Hom { images };
    if !psi.is_homomorphism(m, n) || functor_s_on_morphism(&psi, &sm, sn).canonical(sn) != phi.canonical(sn) {
        return Err(Error::invariant("reconstructed morphism does not restrict to the given one"));
    }
    Ok(psi)
}

/// Outcome of comparing `Hom_R(M, N)` with presheaf morphisms `S M → S N`.
#[derive(Debug, Clone)]
pub struct FullFaithReport {
    pub hom_count: Count,
    pub morphism_count: Count,
    /// Invariant factors of `Hom_R(M, N)` when it was compared structurally.
    pub invariant_factors: Option<Vec<BigInt>>,
}

impl FullFaithReport {
    pub fn summary(&self) -> String {
        match &self.invariant_factors {
            None => format!(
                "|Hom_R(M,N)| = {}, |Mor(SM,SN)| = {}, bijection verified",
                self.hom_count, self.morphism_count
            ),
            Some(f) => format!(
                "Hom_R(M,N) ~ Mor(SM,SN) with invariant factors [{}], bijection verified",
                f.iter().map(BigInt::to_string).collect::<Vec<_>>().join(", ")
            ),
        }
    }
}

pub fn verify_fully_faithful(m: &ModulePresentation, n: &ModulePresentation) -> Result<FullFaithReport> {
    if m.ring() != n.ring() {
        return Err(Error::input("modules over different rings"));
    }
    let key_n = verify_key_lemma(n)?;
    let sn = &key_n.presheaf;
    let spec = sn.spec().clone();
    let sm = functor_s(m, spec.clone(), sn.locals())?;
    let ass = associated_primes(n, &spec)?;
    nu_map(n, &spec, &ass)?;
    match m.ring() {
        Ring::Finite(_) => {
            let homs = hom_enumerate(m, n)?;
            let morphisms = enumerate_presheaf_morphisms(&sm, sn)?;
            let images: Vec<PresheafMorphism> = par::map(&homs, |f| functor_s_on_morphism(f, &sm, sn).canonical(sn));
            let distinct: HashSet<&PresheafMorphism> = images.iter().collect();
            if distinct.len() != homs.len() {
                return Err(Error::invariant("S is not injective on Hom_R(M, N)"));
            }
            let all: HashSet<PresheafMorphism> = morphisms.iter().map(|p| p.canonical(sn)).collect();
            if let Some(missed) = all.iter().find(|p| !distinct.contains(p)) {
                return Err(Error::invariant(format!(
                    "presheaf morphism not in the image of S: {:?}",
                    missed
                        .components
                        .iter()
                        .zip(sn.stalks())
                        .map(|(h, t)| h.format(t))
                        .collect::<Vec<_>>()
                )));
            }
            let back = par::map(&morphisms, |phi| reconstruct_morphism(m, &key_n, phi));
            for (phi, psi) in morphisms.iter().zip(back) {
                let psi = psi?;
                if functor_s_on_morphism(&psi, &sm, sn).canonical(sn) != phi.canonical(sn) {
                    return Err(Error::invariant("round trip S(reconstruct(phi)) != phi"));
                }
            }
            for f in &homs {
                let phi = functor_s_on_morphism(f, &sm, sn);
                if reconstruct_morphism(m, &key_n, &phi)?.canonical(n) != f.canonical(n) {
                    return Err(Error::invariant(format!(
                        "round trip reconstruct(S(f)) != f for f = {}",
                        f.format(n)
                    )));
                }
            }
            Ok(FullFaithReport {
                hom_count: Count::Finite(homs.len().into()),
                morphism_count: Count::Finite(morphisms.len().into()),
                invariant_factors: None,
            })
        }
        Ring::SemiLocal(_) => structural_fully_faithful(m, n, &key_n, &sm),
    }
}

// Presheaf morphisms S M → S N are the limit of the Hom presheaf
// x ↦ Hom(M_x, N_x); compare that limit with Hom_R(M, N).
fn structural_fully_faithful(
    m: &ModulePresentation,
    n: &ModulePresentation,
    key_n: &KeyLemma,
    sm: &Presheaf,
) -> Result<FullFaithReport> {
    let sn = &key_n.presheaf;
    let spec = sn.spec().clone();
    let stalk_homs = (0..spec.len())
        .map(|x| hom_module(sm.stalk(x), sn.stalk(x)))
        .collect::<Result<Vec<_>>>()?;
    let mut restrictions = BTreeMap::new();
    for x in 0..spec.len() {
        for y in 0..spec.len() {
            if !spec.lt(x, y) {
                continue;
            }
            let images = (0..stalk_homs[y].module.gens())
                .map(|k| {
                    let f = stalk_homs[y].to_hom(&stalk_homs[y].module.gen(k));
                    let local = Hom {
                        images: f.images.iter().map(|v| sn.stalk(x).canon(v)).collect(),
                    };
                    stalk_homs[x]
                        .coordinates(&local)
                        .ok_or_else(|| Error::invariant("localized hom has no coordinates"))
                })
                .collect::<Result<Vec<_>>>()?;
            restrictions.insert((x, y), Hom { images });
        }
    }
    let hom_presheaf = Presheaf::explicit(
        spec.clone(),
        sn.locals().to_vec(),
        stalk_homs.iter().map(|h| h.module.clone()).collect(),
        restrictions,
    )?;
    let lim = inverse_limit(&hom_presheaf, &spec.whole())
        .map_err(|e| Error::invariant(format!("morphisms S M -> S N: {e}")))?;
    let pts = lim.points().to_vec();
    let as_morphism = |family: &[ModuleElement]| PresheafMorphism {
        components: (0..spec.len())
            .map(|x| stalk_homs[x].to_hom(&family[pts.iter().position(|&p| p == x).unwrap()]))
            .collect(),
    };
    for fam in &lim.generators {
        let phi = as_morphism(fam);
        if !phi.is_valid(sm, sn) {
            return Err(Error::invariant("limit of the Hom presheaf contains a non-morphism"));
        }
        reconstruct_morphism(m, key_n, &phi)?;
    }
    let global = hom_module(m, n)?;
    let images = (0..global.module.gens())
        .map(|k| {
            let f = global.to_hom(&global.module.gen(k));
            let phi = functor_s_on_morphism(&f, sm, sn);
            let family: Vec<ModuleElement> = pts
                .iter()
                .map(|&x| stalk_homs[x].coordinates(&phi.components[x]).unwrap_or_default())
                .collect();
            lim.coordinates(&family)
                .ok_or_else(|| Error::invariant("S(f) is not a compatible family of stalk homs"))
        })
        .collect::<Result<Vec<_>>>()?;
    let forward = Hom { images };
    if lim.ring.ring() != global.module.ring() {
        return Err(Error::invariant("limit ring of the Hom presheaf differs from R"));
    }
    if hom_inverse(&global.module, &lim.module, &forward)?.is_none() {
        return Err(Error::invariant("Hom_R(M, N) -> Mor(SM, SN) is not bijective"));
    }
    Ok(FullFaithReport {
        hom_count: global.module.element_count(),
        morphism_count: lim.module.element_count(),
        invariant_factors: Some(global.module.smith()?.nontrivial()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Admissible,
    QuasiOnly,
    Rejected,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Admissible => "ADMISSIBLE",
            Verdict::QuasiOnly => "QUASI_ONLY",
            Verdict::Rejected => "REJECTED",
        }
    }
}

/// Result of checking one covering element.
#[derive(Debug, Clone)]
pub struct CoverReport {
    pub over: SubPoset,
    /// `(x, T G(x) → G(x) is an isomorphism)` in point order.
    pub components: Vec<(usize, bool)>,
    /// A generating set of the limit, when it is finitely generated.
    pub generators: Option<Vec<Vec<ModuleElement>>>,
}

#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub verdict: Verdict,
    pub cover: Vec<SubPoset>,
    pub parts: Vec<CoverReport>,
    pub failing: Option<usize>,
}

impl AdmissibilityReport {
    pub fn verdict_line(&self, spec: &SpecPoset) -> String {
        match self.failing {
            Some(x) => format!("{} {}", self.verdict.as_str(), spec.point(x).label),
            None => self.verdict.as_str().to_string(),
        }
    }
}

/// Checks `T_{C_i} G(x) ≅ G(x)` on every covering element, then finite
/// generation of each limit. An empty cover means the whole poset.
pub fn check_admissible(g: &Presheaf, cover: &[SubPoset]) -> Result<AdmissibilityReport> {
    let spec = g.spec().clone();
    let cover: Vec<SubPoset> = if cover.is_empty() { vec![spec.whole()] } else { cover.to_vec() };
    if cover.iter().any(|c| c.iter().any(|x| x >= spec.len())) {
        return Err(Error::input("cover mentions points outside the spectrum"));
    }
    if !spec.is_open_cover(&cover) {
        return Err(Error::input("cover is not a cover by open subposets"));
    }
    let structure = structure_presheaf(spec.clone(), g.locals())?;
    for c in &cover {
        let a = affine_noetherian_on(&structure, c)?;
        if let Some(why) = a.failure {
            return Err(Error::input(format!(
                "covering element {} is not affine noetherian: {why}",
                spec.format_set(c)
            )));
        }
    }
    let mut parts = Vec::new();
    let mut failing: Option<usize> = None;
    for c in &cover {
        if let Some(ob) = limit_obstruction(g, c)? {
            parts.push(CoverReport {
                over: c.clone(),
                components: vec![(ob.point, false)],
                generators: None,
            });
            failing = failing.or(Some(ob.point));
            continue;
        }
        let t = functor_t(g, c)?;
        let mut checks = par::map(&t.components, |comp| comp.is_isomorphism(&t.limit.ring, g.stalk(comp.point)))
            .into_iter()
            .zip(&t.components)
            .map(|(ok, comp)| ok.map(|ok| (comp.point, ok)))
            .collect::<Result<Vec<_>>>()?;
        checks.sort();
        if let Some(&(x, _)) = checks.iter().find(|(_, ok)| !ok) {
            failing = failing.or(Some(x));
        }
        let generators = Some(t.limit.greedy_generators()?);
        parts.push(CoverReport {
            over: c.clone(),
            components: checks,
            generators,
        });
    }
    let verdict = if failing.is_some() {
        Verdict::Rejected
    } else if parts.iter().all(|p| p.generators.is_some()) {
        Verdict::Admissible
    } else {
        Verdict::QuasiOnly
    };
    Ok(AdmissibilityReport {
        verdict,
        cover,
        parts,
        failing,
    })
}

/// The module `lim G` over `R`, with a verified isomorphism `S(lim G) ≅ G`.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub module: ModulePresentation,
    pub presheaf: Presheaf,
    pub forward: PresheafMorphism,
    pub backward: PresheafMorphism,
}

pub fn reconstruct_module(g: &Presheaf) -> Result<Reconstruction> {
    let spec = g.spec().clone();
    let r = spec.ring().clone();
    let limit = inverse_limit(g, &spec.whole())?;
    let pts = limit.points().to_vec();
    let lr = &limit.ring;
    // R_C → R, inverse of r ↦ (r/1)_x
    let to_r: HashMap<Elem, Elem> = match &r {
        Ring::Finite(_) => {
            let mut map = HashMap::new();
            for a in r.elements()? {
                let comps: Vec<Elem> = pts.iter().map(|&x| g.locals()[x].germ(&a)).collect();
                let c = lr
                    .from_components(&comps)
                    .ok_or_else(|| Error::invariant("R -> R_C is not defined"))?;
                map.insert(c, a);
            }
            if Some(map.len()) != lr.ring().size() {
                return Err(Error::invariant("R -> R_C is not bijective"));
            }
            map
        }
        Ring::SemiLocal(_) => {
            if lr.ring() != &r {
                return Err(Error::invariant("R_C differs from R"));
            }
            HashMap::new()
        }
    };
    let convert = |a: &Elem| to_r.get(a).cloned().unwrap_or_else(|| a.clone());
    let relations = limit
        .module
        .relations()
        .iter()
        .map(|row| row.iter().map(convert).collect())
        .collect();
    let module = ModulePresentation::new(&r, limit.module.gens(), relations)?;
    let sm = functor_s(&module, spec.clone(), g.locals())?;
    let forward = PresheafMorphism {
        components: (0..spec.len())
            .map(|x| {
                let k = pts.iter().position(|&p| p == x).unwrap();
                Hom {
                    images: limit.generators.iter().map(|f| f[k].clone()).collect(),
                }
            })
            .collect(),
    };
    if !forward.is_valid(&sm, g) {
        return Err(Error::invariant("S(lim G) -> G is not a presheaf morphism"));
    }
    let mut back = Vec::with_capacity(spec.len());
    for x in 0..spec.len() {
        let inv = hom_inverse(sm.stalk(x), g.stalk(x), &forward.components[x])?
            .ok_or_else(|| Error::Invariant(format!("S(lim G) -> G is not invertible at {}", spec.point(x).label)))?;
        back.push(inv);
    }
    let backward = PresheafMorphism { components: back };
    if !backward.is_valid(g, &sm) {
        return Err(Error::invariant("inverse of S(lim G) -> G is not a presheaf morphism"));
    }
    Ok(Reconstruction {
        module,
        presheaf: sm,
        forward,
        backward,
    })
}

/// Comparison of `(C, O|_C)` with the ringed poset induced by `R_C`.
#[derive(Debug, Clone)]
pub struct AffineReport {
    pub limit: LimitRing,
    /// For each point of `C` (in limit order), the matching point of `Spec R_C`.
    pub point_map: Vec<usize>,
    /// Whether `R → R_C` is a ring isomorphism (checked on the whole spectrum).
    pub ring_iso: Option<bool>,
    pub failure: Option<String>,
}

impl AffineReport {
    pub fn holds(&self) -> bool {
        self.failure.is_none()
    }

    pub fn summary(&self) -> String {
        match &self.failure {
            None => format!(
                "R_C = {} ({} points), poset and stalks match{}",
                self.limit.ring().name(),
                self.point_map.len(),
                if self.ring_iso == Some(true) { ", R -> R_C is a ring isomorphism" } else { "" }
            ),
            Some(why) => format!("not affine noetherian: {why}"),
        }
    }
}

/// Checks that `R_C` recovers the whole spectrum and `R`.
pub fn affine_noetherian_check(spec: Arc<SpecPoset>) -> Result<AffineReport> {
    let locals = structure_rings(&spec)?;
    let structure = structure_presheaf(spec.clone(), &locals)?;
    let mut report = affine_noetherian_on(&structure, &spec.whole())?;
    if report.failure.is_none() {
        let ok = ring_map_is_iso(&structure, &report.limit)?;
        report.ring_iso = Some(ok);
        if !ok {
            report.failure = Some("R -> R_C is not a ring isomorphism".into());
        }
    }
    Ok(report)
}

fn ring_map_is_iso(structure: &Presheaf, lr: &LimitRing) -> Result<bool> {
    let r = structure.spec().ring();
    let pts = lr.points();
    let image = |a: &Elem| {
        let comps: Vec<Elem> = pts.iter().map(|&x| structure.locals()[x].germ(a)).collect();
        lr.from_components(&comps)
    };
    match r {
        Ring::SemiLocal(_) => Ok(lr.ring() == r),
        Ring::Finite(_) => {
            let elems = r.elements()?;
            let imgs: Vec<Option<Elem>> = elems.iter().map(image).collect();
            if imgs.iter().any(Option::is_none) {
                return Ok(false);
            }
            let imgs: Vec<Elem> = imgs.into_iter().map(Option::unwrap).collect();
            if imgs.iter().collect::<HashSet<_>>().len() != elems.len() || lr.ring().size() != Some(elems.len()) {
                return Ok(false);
            }
            let c = lr.ring();
            let hom = |i: usize, j: usize| {
                let (a, b) = (&elems[i], &elems[j]);
                image(&r.add(a, b)).as_ref() == Some(&c.add(&imgs[i], &imgs[j]))
                    && image(&r.mul(a, b)).as_ref() == Some(&c.mul(&imgs[i], &imgs[j]))
            };
            let n = elems.len();
            Ok(par::all(n * n, |k| hom(k / n, k % n)) && image(&r.one()) == Some(c.one()))
        }
    }
}

fn affine_noetherian_on(structure: &Presheaf, over: &SubPoset) -> Result<AffineReport> {
    let spec = structure.spec();
    let lr = match limit_ring(structure, over) {
        Ok(lr) => lr,
        Err(Error::Unsupported(why)) => {
            return Ok(AffineReport {
                limit: limit_ring(structure, &SubPoset::new([over.iter().next().unwrap_or(0)]))?,
                point_map: Vec::new(),
                ring_iso: None,
                failure: Some(why),
            })
        }
        Err(e) => return Err(e),
    };
    let rc = lr.ring().clone();
    let spec_c = spectrum(&rc)?;
    let mut report = AffineReport {
        limit: lr.clone(),
        point_map: Vec::new(),
        ring_iso: None,
        failure: None,
    };
    let pts = lr.points().to_vec();
    let mut map = Vec::with_capacity(pts.len());
    for k in 0..pts.len() {
        match spec_c.index_of(lr.prime(k)) {
            Some(i) => map.push(i),
            None => {
                report.failure = Some(format!("P_{} is not a prime of R_C", spec.point(pts[k]).label));
                return Ok(report);
            }
        }
    }
    if spec_c.len() != pts.len() {
        report.failure = Some(format!("Spec R_C has {} points, C has {}", spec_c.len(), pts.len()));
        return Ok(report);
    }
    for (a, &x) in pts.iter().enumerate() {
        for (b, &y) in pts.iter().enumerate() {
            if spec.leq(x, y) != spec_c.leq(map[a], map[b]) {
                report.failure = Some("specialization order differs".into());
                return Ok(report);
            }
        }
    }
    // stalks: (R_C)_{P_x} → O(x) induced by projection
    for (k, &x) in pts.iter().enumerate() {
        let local = localize_ring_at(&rc, lr.prime(k))?;
        if !local_matches(&local, &lr, k, structure.locals()[x].ring())? {
            report.failure = Some(format!("stalk at {} differs", spec.point(x).label));
            return Ok(report);
        }
    }
    // restrictions: localization maps of R_C against those of O
    let free = ModulePresentation::free(&rc, 1)?;
    for (a, &x) in pts.iter().enumerate() {
        for (b, &y) in pts.iter().enumerate() {
            if !spec.lt(x, y) {
                continue;
            }
            let mine = localization_map(&free, &spec_c, map[a], map[b])?;
            let theirs = structure.restriction(x, y)?;
            let target = structure.stalk(x);
            let ours: Vec<ModuleElement> = mine
                .images
                .iter()
                .map(|v| target.canon(&v.iter().map(|e| lr.project(a, e)).collect::<Vec<_>>()))
                .collect();
            if (0..ours.len()).any(|j| !target.eq_elements(&ours[j], &theirs.images[j])) {
                report.failure = Some(format!(
                    "restriction {} -> {} differs",
                    spec.point(y).label,
                    spec.point(x).label
                ));
                return Ok(report);
            }
        }
    }
    report.point_map = map;
    Ok(report)
}

fn local_matches(local: &LocalRing, lr: &LimitRing, k: usize, target: &Ring) -> Result<bool> {
    let lring = local.ring();
    match lring {
        Ring::SemiLocal(_) => Ok(lring == target),
        Ring::Finite(_) => {
            let elems = lring.elements()?;
            let map = |a: &Elem| lr.project(k, &local.lift(a));
            let imgs: Vec<Elem> = elems.iter().map(map).collect();
            if target.size() != Some(elems.len()) || imgs.iter().collect::<HashSet<_>>().len() != elems.len() {
                return Ok(false);
            }
            let n = elems.len();
            Ok(par::all(n * n, |p| {
                let (i, j) = (p / n, p % n);
                map(&lring.add(&elems[i], &elems[j])) == target.add(&imgs[i], &imgs[j])
                    && map(&lring.mul(&elems[i], &elems[j])) == target.mul(&imgs[i], &imgs[j])
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::{hom_enumerate, module_isomorphic};

    fn z(n: u64) -> Ring {
        Ring::zmod(n).unwrap()
    }

    fn setup(r: &Ring) -> (Arc<SpecPoset>, Vec<Arc<LocalRing>>) {
        let spec = Arc::new(spectrum(r).unwrap());
        let locals = structure_rings(&spec).unwrap();
        (spec, locals)
    }

    #[test]
    fn key_lemma_z12() {
        let r = z(12);
        let m = ModulePresentation::free(&r, 1).unwrap();
        let k = verify_key_lemma(&m).unwrap();
        assert_eq!(k.certificates.len(), 12);
        for a in m.elements().unwrap() {
            assert_eq!(k.glue(&k.canonical(&a)), Some(a));
        }
        // σ = ν(6) at (2): some τ/f equals 2 in Z/4
        let six = k.canonical(&[Elem::Idx(6)]);
        let c = reconstruct_section(&m, &six, 0).unwrap();
        assert!(c.neighborhood.contains(0));
        assert_eq!(k.glue(&six), Some(vec![Elem::Idx(6)]));
        // unit section
        let one = reconstruct_section(&m, &k.canonical(&[Elem::Idx(1)]), 0).unwrap();
        assert_eq!((one.tau.clone(), one.f.clone()), (vec![Elem::Idx(1)], Elem::Idx(1)));
    }

    #[test]
    fn key_lemma_zero_section() {
        let r = z(12);
        let m = ModulePresentation::cyclic(&r, Elem::Idx(6)).unwrap();
        let k = verify_key_lemma(&m).unwrap();
        let zero = k.canonical(&m.zero());
        let c = reconstruct_section(&m, &zero, 1).unwrap();
        assert_eq!((c.tau, c.f), (m.zero(), r.one()));
    }

    #[test]
    fn key_lemma_semilocal() {
        let r = Ring::semilocal_int(&[2, 3]).unwrap();
        for m in [
            ModulePresentation::free(&r, 1).unwrap(),
            ModulePresentation::diagonal(&r, &[Elem::int(4), Elem::int(6)]).unwrap(),
            ModulePresentation::new(&r, 2, vec![vec![Elem::int(18), Elem::int(0)]]).unwrap(),
            ModulePresentation::zero_module(&r),
        ] {
            let k = verify_key_lemma(&m).unwrap();
            for j in 0..m.gens() {
                let back = k.glue(&k.canonical(&m.gen(j))).unwrap();
                assert!(m.eq_elements(&back, &m.gen(j)));
            }
        }
    }

    #[test]
    fn crt_reconstruction() {
        let r = z(12);
        let m = ModulePresentation::free(&r, 1).unwrap();
        let key = verify_key_lemma(&m).unwrap();
        let g = &key.presheaf;
        // multiply by 2 on Z/4 and by 1 on Z/3
        let phi = PresheafMorphism {
            components: (0..2)
                .map(|x| {
                    let c = if x == 0 { g.locals()[0].germ(&Elem::Idx(2)) } else { g.locals()[1].germ(&Elem::Idx(1)) };
                    Hom::scalar(g.stalk(x), &c)
                })
                .collect(),
        };
        assert_eq!(reconstruct_morphism(&m, &key, &phi).unwrap().images, vec![vec![Elem::Idx(10)]]);
    }

    #[test]
    fn fully_faithful_counts() {
        let r = z(12);
        let free = ModulePresentation::free(&r, 1).unwrap();
        let r6 = ModulePresentation::cyclic(&r, Elem::Idx(6)).unwrap();
        let rep = verify_fully_faithful(&free, &r6).unwrap();
        assert_eq!(rep.hom_count, Count::Finite(6.into()));
        assert_eq!(rep.morphism_count, Count::Finite(6.into()));
        assert_eq!(hom_enumerate(&free, &r6).unwrap().len(), 6);
        let zero = ModulePresentation::zero_module(&r);
        assert_eq!(verify_fully_faithful(&zero, &zero).unwrap().hom_count, Count::Finite(1.into()));
    }

    #[test]
    fn fully_faithful_semilocal() {
        let r = Ring::semilocal_int(&[2]).unwrap();
        let free = ModulePresentation::free(&r, 1).unwrap();
        let rep = verify_fully_faithful(&free, &free).unwrap();
        assert_eq!(rep.invariant_factors, Some(vec![BigInt::from(0)]));
        let t = ModulePresentation::cyclic(&r, Elem::int(4)).unwrap();
        let rep = verify_fully_faithful(&t, &free).unwrap();
        assert_eq!(rep.invariant_factors, Some(vec![]));
        let r23 = Ring::semilocal_int(&[2, 3]).unwrap();
        let d = ModulePresentation::diagonal(&r23, &[Elem::int(4), Elem::int(0)]).unwrap();
        let e = ModulePresentation::diagonal(&r23, &[Elem::int(6)]).unwrap();
        let rep = verify_fully_faithful(&d, &e).unwrap();
        assert_eq!(rep.invariant_factors, Some(vec![BigInt::from(2), BigInt::from(6)]));
    }

    #[test]
    fn admissibility() {
        let r = Ring::semilocal_int(&[2]).unwrap();
        let (spec, locals) = setup(&r);
        let q = ModulePresentation::free(locals[0].ring(), 1).unwrap();
        let zero0 = ModulePresentation::zero_module(locals[0].ring());
        let zero2 = ModulePresentation::zero_module(locals[1].ring());
        let z2 = ModulePresentation::cyclic(locals[1].ring(), Elem::int(2)).unwrap();

        let mut res = BTreeMap::new();
        res.insert((0, 1), Hom { images: vec![] });
        let bad = Presheaf::explicit(spec.clone(), locals.clone(), vec![q, zero2], res).unwrap();
        let rep = check_admissible(&bad, &[]).unwrap();
        assert_eq!(rep.verdict_line(&spec), "REJECTED (0)");

        let mut res = BTreeMap::new();
        res.insert((0, 1), Hom { images: vec![vec![]] });
        let sky = Presheaf::explicit(spec.clone(), locals.clone(), vec![zero0, z2], res).unwrap();
        assert_eq!(check_admissible(&sky, &[]).unwrap().verdict, Verdict::Admissible);
        let rec = reconstruct_module(&sky).unwrap();
        let r2 = ModulePresentation::cyclic(&r, Elem::int(2)).unwrap();
        assert!(module_isomorphic(&rec.module, &r2).unwrap().is_some());

        let free = ModulePresentation::free(&r, 2).unwrap();
        let s = functor_s(&free, spec.clone(), &locals).unwrap();
        assert_eq!(check_admissible(&s, &[]).unwrap().verdict, Verdict::Admissible);
        // {(2)} alone is not open
        assert!(check_admissible(&s, &[SubPoset::new([1])]).is_err());
    }

    #[test]
    fn admissibility_finite() {
        let r = z(12);
        let (spec, locals) = setup(&r);
        let m = ModulePresentation::diagonal(&r, &[Elem::Idx(4), Elem::Idx(6)]).unwrap();
        let s = functor_s(&m, spec.clone(), &locals).unwrap();
        let rep = check_admissible(&s, &[SubPoset::new([0]), SubPoset::new([1])]).unwrap();
        assert_eq!(rep.verdict, Verdict::Admissible);
        let rec = reconstruct_module(&s).unwrap();
        assert!(module_isomorphic(&rec.module, &m).unwrap().is_some());
    }

    #[test]
    fn affine_checks() {
        for r in [z(12), Ring::semilocal_int(&[2, 3]).unwrap(), Ring::poly_quotient(2, &[1, 1, 1]).unwrap()] {
            let spec = Arc::new(spectrum(&r).unwrap());
            let a = affine_noetherian_check(spec).unwrap();
            assert!(a.holds(), "{}", a.summary());
            assert_eq!(a.ring_iso, Some(true));
        }
    }
}
