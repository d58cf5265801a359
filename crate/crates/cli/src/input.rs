//! JSON input files: rings, modules, presheaves, covers and germs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use specpos_core::localization::LocalRing;
use specpos_core::module::{Hom, ModulePresentation};
use specpos_core::presheaf::{functor_s, structure_rings, Presheaf};
use specpos_core::ring::{Elem, Ring};
use specpos_core::spectrum::{spectrum, SpecPoset, SubPoset};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RingSpec {
    Zmod { n: u64 },
    PolyQuotient { p: u64, modulus: Vec<i64> },
    Product { factors: Vec<RingSpec> },
    SemilocalInt { primes: Vec<u64> },
}

/// A ring-element literal: a JSON string, or an integer for convenience.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Text(String),
}

impl Literal {
    fn text(&self) -> String {
        match self {
            Literal::Int(n) => n.to_string(),
            Literal::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSpec {
    pub generators: usize,
    #[serde(default)]
    pub relations: Vec<Vec<Literal>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PresheafSpec {
    Specialization {
        module: ModuleSpec,
    },
    Explicit {
        stalks: BTreeMap<String, ModuleSpec>,
        #[serde(default)]
        restrictions: BTreeMap<String, Vec<Vec<Literal>>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverSpec {
    pub cover: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermSpec {
    pub point: String,
    pub num: Vec<Literal>,
    pub den: Literal,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
}

pub fn build_ring(spec: &RingSpec) -> specpos_core::Result<Ring> {
    match spec {
        RingSpec::Zmod { n } => Ring::zmod(*n),
        RingSpec::PolyQuotient { p, modulus } => Ring::poly_quotient(*p, modulus),
        RingSpec::Product { factors } => {
            let parts = factors.iter().map(build_ring).collect::<specpos_core::Result<Vec<_>>>()?;
            Ring::product(&parts)
        }
        RingSpec::SemilocalInt { primes } => Ring::semilocal_int(primes),
    }
}

pub fn load_ring(path: &Path) -> Result<Ring, CliError> {
    let spec: RingSpec = read_json(path)?;
    build_ring(&spec).map_err(|e| CliError::parse(path, e))
}

fn parse_row(ring: &Ring, row: &[Literal], what: &str) -> Result<Vec<Elem>, String> {
    row.iter()
        .enumerate()
        .map(|(j, lit)| ring.parse(&lit.text()).map_err(|e| format!("{what}, entry {j}: {e}")))
        .collect()
}

pub fn build_module(ring: &Ring, spec: &ModuleSpec) -> Result<ModulePresentation, String> {
    let mut rows = Vec::with_capacity(spec.relations.len());
    for (i, row) in spec.relations.iter().enumerate() {
        if row.len() != spec.generators {
            return Err(format!(
                "relations row {i} has {} entries, expected {} (one per generator)",
                row.len(),
                spec.generators
            ));
        }
        rows.push(parse_row(ring, row, &format!("relations row {i}"))?);
    }
    ModulePresentation::new(ring, spec.generators, rows).map_err(|e| e.to_string())
}

pub fn load_module(ring: &Ring, path: &Path) -> Result<ModulePresentation, CliError> {
    let spec: ModuleSpec = read_json(path)?;
    build_module(ring, &spec).map_err(|e| CliError::parse(path, e))
}

/// The spectrum of a ring with its local rings, built once per command.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub ring: Ring,
    pub spec: Arc<SpecPoset>,
    pub locals: Vec<Arc<LocalRing>>,
}

impl Geometry {
    pub fn new(ring: Ring) -> Result<Self, CliError> {
        let spec = Arc::new(spectrum(&ring)?);
        let locals = structure_rings(&spec)?;
        Ok(Geometry { ring, spec, locals })
    }

    pub fn point(&self, key: &str) -> Result<usize, String> {
        self.spec.find(key).map_err(|e| e.to_string())
    }
}

pub fn build_presheaf(geo: &Geometry, spec: &PresheafSpec) -> Result<Presheaf, String> {
    match spec {
        PresheafSpec::Specialization { module } => {
            let m = build_module(&geo.ring, module).map_err(|e| format!("module: {e}"))?;
            functor_s(&m, geo.spec.clone(), &geo.locals).map_err(|e| e.to_string())
        }
        PresheafSpec::Explicit { stalks, restrictions } => {
            let n = geo.spec.len();
            let mut built: Vec<Option<ModulePresentation>> = vec![None; n];
            for (key, m) in stalks {
                let x = geo.point(key).map_err(|e| format!("stalks: {e}"))?;
                if built[x].is_some() {
                    return Err(format!("stalks: point {key} given twice"));
                }
                let module = build_module(geo.locals[x].ring(), m).map_err(|e| format!("stalks.{key}: {e}"))?;
                built[x] = Some(module);
            }
            let stalks: Vec<ModulePresentation> = built
                .into_iter()
                .enumerate()
                .map(|(x, m)| m.ok_or_else(|| format!("stalks: missing point {}", geo.spec.point(x).label)))
                .collect::<Result<_, _>>()?;
            let mut maps = BTreeMap::new();
            for (key, images) in restrictions {
                let (a, b) = key
                    .split_once('<')
                    .ok_or_else(|| format!("restrictions: key `{key}` is not of the form `x<y`"))?;
                let (x, y) = (geo.point(a).map_err(|e| format!("restrictions.{key}: {e}"))?, geo.point(b).map_err(|e| format!("restrictions.{key}: {e}"))?);
                if !geo.spec.lt(x, y) {
                    return Err(format!("restrictions: `{key}` is not a strict specialization"));
                }
                if images.len() != stalks[y].gens() {
                    return Err(format!(
                        "restrictions.{key}: {} generator images given, G({b}) has {} generators",
                        images.len(),
                        stalks[y].gens()
                    ));
                }
                let target = &stalks[x];
                let mut parsed = Vec::with_capacity(images.len());
                for (j, img) in images.iter().enumerate() {
                    if img.len() != target.gens() {
                        return Err(format!(
                            "restrictions.{key}, image {j}: {} entries, G({a}) has {} generators",
                            img.len(),
                            target.gens()
                        ));
                    }
                    parsed.push(parse_row(target.ring(), img, &format!("restrictions.{key}, image {j}"))?);
                }
                maps.insert((x, y), Hom { images: parsed });
            }
            // maps out of a stalk without generators may be omitted
            for x in 0..n {
                for y in 0..n {
                    if geo.spec.lt(x, y) && stalks[y].gens() == 0 {
                        maps.entry((x, y)).or_insert(Hom { images: Vec::new() });
                    }
                }
            }
            Presheaf::explicit(geo.spec.clone(), geo.locals.clone(), stalks, maps).map_err(|e| e.to_string())
        }
    }
}

pub fn load_presheaf(geo: &Geometry, path: &Path) -> Result<Presheaf, CliError> {
    let spec: PresheafSpec = read_json(path)?;
    build_presheaf(geo, &spec).map_err(|e| CliError::parse(path, e))
}

pub fn load_cover(geo: &Geometry, path: &Path) -> Result<Vec<SubPoset>, CliError> {
    let spec: CoverSpec = read_json(path)?;
    spec.cover
        .iter()
        .enumerate()
        .map(|(i, part)| {
            part.iter()
                .map(|k| geo.point(k).map_err(|e| CliError::parse(path, format!("cover element {i}: {e}"))))
                .collect::<Result<Vec<_>, _>>()
                .map(SubPoset::new)
        })
        .collect()
}

/// A germ `num/den` at a point, as `(point, numerator, denominator)`.
pub fn load_germ(geo: &Geometry, m: &ModulePresentation, path: &Path) -> Result<(usize, Vec<Elem>, Elem), CliError> {
    let spec: GermSpec = read_json(path)?;
    let x = geo.point(&spec.point).map_err(|e| CliError::parse(path, format!("point: {e}")))?;
    if spec.num.len() != m.gens() {
        return Err(CliError::parse(
            path,
            format!("num has {} entries, module has {} generators", spec.num.len(), m.gens()),
        ));
    }
    let num = parse_row(&geo.ring, &spec.num, "num").map_err(|e| CliError::parse(path, e))?;
    let den = geo
        .ring
        .parse(&spec.den.text())
        .map_err(|e| CliError::parse(path, format!("den: {e}")))?;
    Ok((x, num, den))
}
