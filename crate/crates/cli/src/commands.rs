//! One function per subcommand. Each returns an [`Outcome`]; errors carry
//! their own exit code.

use std::path::Path;

use serde_json::json;

use specpos_core::assoc::{associated_primes, nu_map, support};
use specpos_core::equivalence::{
    affine_noetherian_check, check_admissible, reconstruct_module, verify_fully_faithful, verify_key_lemma, Verdict,
};
use specpos_core::localization::localize_module;
use specpos_core::module::ModulePresentation;
use specpos_core::presheaf::{inverse_limit, limit_obstruction, linear_extension};
use specpos_core::spectrum::SpecPoset;

use crate::input::{load_cover, load_germ, load_module, load_presheaf, load_ring, Geometry};
use crate::{CliError, Outcome, EXIT_INVARIANT, EXIT_PASS, EXIT_REJECTED};

fn geometry(ring: &Path) -> Result<Geometry, CliError> {
    Geometry::new(load_ring(ring)?)
}

fn factors(m: &ModulePresentation) -> Result<Vec<String>, CliError> {
    Ok(m.smith()?.nontrivial().iter().map(|d| d.to_string()).collect())
}

fn label(spec: &SpecPoset, x: usize) -> String {
    spec.point(x).label.clone()
}

pub fn spec(ring: &Path, dot: bool) -> Result<Outcome, CliError> {
    let geo = geometry(ring)?;
    let spec = &geo.spec;
    let edges = spec.hasse();
    let verdict = format!("points={} edges={}", spec.format_set(&spec.whole()), edges.len());
    let lines: Vec<String> = if dot {
        spec.to_dot().lines().map(str::to_string).collect()
    } else {
        let mut v: Vec<String> = spec
            .points()
            .iter()
            .map(|p| format!("point {} {}", p.label, p.id))
            .collect();
        v.extend(edges.iter().map(|&(x, y)| format!("{} < {}", label(spec, x), label(spec, y))));
        v
    };
    let data = json!({
        "ring": geo.ring.name(),
        "points": spec.points().iter().map(|p| json!({"label": p.label, "id": p.id})).collect::<Vec<_>>(),
        "hasse": edges.iter().map(|&(x, y)| [label(spec, x), label(spec, y)]).collect::<Vec<_>>(),
    });
    Ok(Outcome::new(verdict, EXIT_PASS).lines(lines).data(data))
}

pub fn ass(ring: &Path, module: &Path) -> Result<Outcome, CliError> {
    let geo = geometry(ring)?;
    let m = load_module(&geo.ring, module)?;
    let ass = associated_primes(&m, &geo.spec)?;
    nu_map(&m, &geo.spec, &ass)?;
    let supp = support(&m, &geo.spec)?;
    let mut out = Outcome::new(format!("ass={}", geo.spec.format_set(&ass.as_set())), EXIT_PASS);
    for (x, w) in ass.points.iter().zip(&ass.witnesses) {
        out = out.line(format!("{} witness {}", label(&geo.spec, *x), m.format(w)));
    }
    let data = json!({
        "ass": ass.points.iter().zip(&ass.witnesses)
            .map(|(&x, w)| json!({"point": label(&geo.spec, x), "witness": m.format(w)}))
            .collect::<Vec<_>>(),
        "support": supp.iter().map(|x| label(&geo.spec, x)).collect::<Vec<_>>(),
    });
    Ok(out.line(format!("support {}", geo.spec.format_set(&supp))).data(data))
}

pub fn limit(ring: &Path, presheaf: &Path) -> Result<Outcome, CliError> {
    let geo = geometry(ring)?;
    let g = load_presheaf(&geo, presheaf)?;
    let whole = geo.spec.whole();
    if let Some(ob) = limit_obstruction(&g, &whole)? {
        let at = label(&geo.spec, ob.point);
        let family: Vec<String> = linear_extension(&geo.spec, &whole)
            .into_iter()
            .zip(&ob.family)
            .map(|(x, v)| format!("{}: {}", label(&geo.spec, x), g.stalk(x).format(v)))
            .collect();
        return Ok(Outcome::new(format!("NOT_FINITELY_GENERATED {at}"), EXIT_REJECTED)
            .line(format!("the limit is not finitely generated: a nonzero family vanishes at {at}"))
            .line(format!("family {}", family.join(", ")))
            .data(json!({"finitely_generated": false, "point": at})));
    }
    let l = inverse_limit(&g, &whole)?;
    let rc = l.ring.ring();
    let mut out;
    match l.module.element_count().as_usize() {
        Some(n) if rc.is_finite() => {
            out = Outcome::new(format!("elements={n}"), EXIT_PASS)
                .line(format!("limit ring {} ({} elements)", rc.name(), rc.size().unwrap_or(0)))
                .line(format!("elements {n}"))
                .line(format!("presentation {}", l.module.format_presentation()));
            out = out.data(json!({"ring": rc.name(), "elements": n, "presentation": l.module.format_presentation()}));
        }
        _ => {
            let f = factors(&l.module)?;
            out = Outcome::new(format!("factors=[{}]", f.join(",")), EXIT_PASS)
                .line(format!("limit ring {}", rc.name()))
                .line(format!("invariant factors [{}]", f.join(", ")));
            out = out.data(json!({"ring": rc.name(), "factors": f}));
        }
    }
    for (j, fam) in l.generators.iter().enumerate() {
        let comps: Vec<String> = l
            .points()
            .iter()
            .zip(fam)
            .map(|(&x, v)| format!("{}: {}", label(&geo.spec, x), g.stalk(x).format(v)))
            .collect();
        out = out.line(format!("generator {j}: {}", comps.join(", ")));
    }
    Ok(out)
}

pub fn germ(ring: &Path, module: &Path, germ: &Path) -> Result<Outcome, CliError> {
    let geo = geometry(ring)?;
    let m = load_module(&geo.ring, module)?;
    let (x, num, den) = load_germ(&geo, &m, germ)?;
    let local = localize_module(&m, &geo.spec, x)?;
    let g = local.fraction(&num, &den).map_err(|e| CliError::parse(germ, e))?;
    let value = local.module().format(&g.value);
    Ok(Outcome::new(format!("germ={value}"), EXIT_PASS)
        .line(format!("{} / {} at {} = {}", m.format(&num), geo.ring.format(&den), label(&geo.spec, x), value))
        .data(json!({"point": label(&geo.spec, x), "value": value})))
}

pub fn key_lemma(ring: &Path, module: &Path) -> Result<Outcome, CliError> {
    let geo = geometry(ring)?;
    let m = load_module(&geo.ring, module)?;
    let k = verify_key_lemma(&m)?;
    let certs: usize = k.certificates.iter().map(Vec::len).sum();
    Ok(Outcome::new("PASS", EXIT_PASS)
        .line(k.summary())
        .data(json!({"summary": k.summary(), "limit_elements": k.certificates.len(), "certificates": certs})))
}

pub fn full_faithful(ring: &Path, m: &Path, n: &Path) -> Result<Outcome, CliError> {
    let geo = geometry(ring)?;
    let (m, n) = (load_module(&geo.ring, m)?, load_module(&geo.ring, n)?);
    let r = verify_fully_faithful(&m, &n)?;
    let verdict = match &r.invariant_factors {
        None => format!("PASS hom={} morphisms={}", r.hom_count, r.morphism_count),
        Some(f) => format!(
            "PASS factors=[{}]",
            f.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
        ),
    };
    Ok(Outcome::new(verdict, EXIT_PASS)
        .line(r.summary())
        .data(json!({"hom": r.hom_count.to_string(), "morphisms": r.morphism_count.to_string()})))
}

pub fn admissible(ring: &Path, presheaf: &Path, cover: Option<&Path>) -> Result<Outcome, CliError> {
    let geo = geometry(ring)?;
    let g = load_presheaf(&geo, presheaf)?;
    let cover = match cover {
        Some(p) => load_cover(&geo, p)?,
        None => Vec::new(),
    };
    let rep = check_admissible(&g, &cover)?;
    let spec = &geo.spec;
    let code = if rep.verdict == Verdict::Admissible { EXIT_PASS } else { EXIT_REJECTED };
    let mut out = Outcome::new(rep.verdict_line(spec), code).line(rep.verdict_line(spec));
    let mut parts = Vec::new();
    for p in &rep.parts {
        let comps: Vec<String> = p
            .components
            .iter()
            .map(|&(x, ok)| format!("{} {}", label(spec, x), if ok { "iso" } else { "not iso" }))
            .collect();
        let gens = p.generators.as_ref().map(Vec::len);
        out = out.line(format!(
            "cover element {}: {}; generating set {}",
            spec.format_set(&p.over),
            comps.join(", "),
            gens.map_or("none".to_string(), |n| format!("of size {n}"))
        ));
        parts.push(json!({
            "over": spec.format_set(&p.over),
            "components": p.components.iter().map(|&(x, ok)| json!({"point": label(spec, x), "iso": ok})).collect::<Vec<_>>(),
            "generators": gens,
        }));
    }
    if rep.verdict == Verdict::Admissible {
        let rec = reconstruct_module(&g)?;
        out = out.line(format!(
            "reconstructed module {} over {}; S(M) -> G verified isomorphic",
            rec.module.format_presentation(),
            geo.ring.name()
        ));
    }
    let data = json!({
        "verdict": rep.verdict.as_str(),
        "failing": rep.failing.map(|x| label(spec, x)),
        "cover": parts,
    });
    Ok(out.data(data))
}

pub fn affine(ring: &Path) -> Result<Outcome, CliError> {
    let geo = geometry(ring)?;
    let rep = affine_noetherian_check(geo.spec.clone())?;
    let (verdict, code) = if rep.holds() { ("PASS", EXIT_PASS) } else { ("FAIL", EXIT_INVARIANT) };
    Ok(Outcome::new(verdict, code)
        .line(rep.summary())
        .data(json!({"holds": rep.holds(), "limit_ring": rep.limit.ring().name()})))
}
