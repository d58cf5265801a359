//! Prime spectra as posets under specialization, and the topology on them.
//!
//! Convention: `x ≤ y` when `y` lies in the closure of `{x}`, i.e. when
//! `prime(x) ⊆ prime(y)`. Generic points are minimal; edges in the Hasse
//! diagram and the DOT export run from generic to special.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::ring::{ideal_generated, is_prime_ideal, Elem, Ideal, Ring};

/// Upper bound on the number of ideals explored when enumerating a spectrum.
pub const IDEAL_ENUMERATION_CAP: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point {
    pub prime: Ideal,
    /// Canonical identifier: the sorted element-index list for table rings,
    /// `(0)` or `(p)` for the semi-local backend.
    pub id: String,
    /// Short human name, `(g)` for a principal prime with least generator `g`.
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct SpecPoset {
    ring: Ring,
    points: Vec<Point>,
    leq: Vec<Vec<bool>>,
}

/// A subset of a spectrum, by point index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SubPoset {
    pub members: BTreeSet<usize>,
}

impl SubPoset {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        SubPoset {
            members: members.into_iter().collect(),
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn union(&self, other: &SubPoset) -> SubPoset {
        SubPoset::new(self.members.union(&other.members).copied())
    }
}

/// All ideals of a table ring, by closure from `{0}` one element at a time.
pub fn enumerate_ideals(ring: &Ring) -> Result<Vec<Ideal>> {
    let r = ring
        .as_finite()
        .ok_or_else(|| Error::unsupported("ideal enumeration needs a table ring"))?;
    let n = r.size();
    let start = ideal_generated(ring, &[])?;
    let mut seen: HashSet<Ideal> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut out = Vec::new();
    while let Some(ideal) = queue.pop_front() {
        let Ideal::Set(members) = &ideal else { unreachable!() };
        let mut member = vec![false; n];
        for &m in members {
            member[m] = true;
        }
        for a in (0..n).filter(|&a| !member[a]) {
            // I + Ra: members already form an ideal, so this is its closure with a
            let mut next = member.clone();
            let multiples: Vec<usize> = (0..n).map(|x| r.mul(x, a)).collect();
            for &i in members {
                for &m in &multiples {
                    next[r.add(i, m)] = true;
                }
            }
            let cand = Ideal::Set((0..n).filter(|&i| next[i]).collect());
            if seen.insert(cand.clone()) {
                if seen.len() > IDEAL_ENUMERATION_CAP {
                    return Err(Error::overflow("ideal enumeration", seen.len(), IDEAL_ENUMERATION_CAP));
                }
                queue.push_back(cand);
            }
        }
        out.push(ideal);
    }
    out.sort();
    Ok(out)
}

impl SpecPoset {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x][y]
    }

    pub fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.leq[x][y]
    }

    pub fn whole(&self) -> SubPoset {
        SubPoset::new(0..self.points.len())
    }

    /// Looks a point up by id, by label, or by `(g)` for a ring-element
    /// literal `g` generating the prime.
    pub fn find(&self, key: &str) -> Result<usize> {
        let key = key.trim();
        if let Some(i) = self.points.iter().position(|p| p.id == key || p.label == key) {
            return Ok(i);
        }
        let inner = key
            .strip_prefix('(')
            .and_then(|k| k.strip_suffix(')'))
            .ok_or_else(|| Error::UnknownPoint(key.to_string()))?;
        let g = self.ring.parse(inner).map_err(|_| Error::UnknownPoint(key.to_string()))?;
        let ideal = ideal_generated(&self.ring, &[g])?;
        self.points
            .iter()
            .position(|p| p.prime == ideal)
            .ok_or_else(|| Error::UnknownPoint(key.to_string()))
    }

    /// Index of the point whose prime is `ideal`.
    pub fn index_of(&self, ideal: &Ideal) -> Option<usize> {
        self.points.iter().position(|p| &p.prime == ideal)
    }

    pub fn upset(&self, x: usize) -> SubPoset {
        SubPoset::new((0..self.len()).filter(|&y| self.leq[x][y]))
    }

    pub fn downset(&self, x: usize) -> SubPoset {
        SubPoset::new((0..self.len()).filter(|&y| self.leq[y][x]))
    }

    /// Members with nothing strictly below them inside the set.
    pub fn minimal(&self, s: &SubPoset) -> Vec<usize> {
        s.iter().filter(|&x| !s.iter().any(|y| self.lt(y, x))).collect()
    }

    /// Closed means a finite union of upsets of single points; the empty set
    /// is the empty union.
    pub fn is_closed(&self, s: &SubPoset) -> bool {
        let generated = self
            .minimal(s)
            .into_iter()
            .fold(SubPoset::default(), |acc, x| acc.union(&self.upset(x)));
        generated == *s
    }

    pub fn is_open(&self, s: &SubPoset) -> bool {
        self.is_closed(&self.complement(s))
    }

    pub fn complement(&self, s: &SubPoset) -> SubPoset {
        SubPoset::new((0..self.len()).filter(|&i| !s.contains(i)))
    }

    /// `X ∖ Z` together with whether it is open (i.e. whether `Z` is closed).
    pub fn open_complement(&self, z: &SubPoset) -> (SubPoset, bool) {
        (self.complement(z), self.is_closed(z))
    }

    /// Points whose prime contains `f`.
    pub fn vanishing_locus(&self, f: &Elem) -> SubPoset {
        SubPoset::new((0..self.len()).filter(|&i| self.points[i].prime.contains(&self.ring, f)))
    }

    pub fn is_open_cover(&self, parts: &[SubPoset]) -> bool {
        parts.iter().all(|p| p.iter().all(|i| i < self.len()) && self.is_open(p))
            && parts.iter().fold(SubPoset::default(), |acc, p| acc.union(p)) == self.whole()
    }

    /// Covering pairs `x < y` with nothing strictly between.
    pub fn hasse(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if self.lt(x, y) && !(0..n).any(|z| self.lt(x, z) && self.lt(z, y)) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph spec {\n");
        for (i, p) in self.points.iter().enumerate() {
            let _ = writeln!(s, "  p{i} [label=\"{}\"];", p.id);
        }
        for (x, y) in self.hasse() {
            let _ = writeln!(s, "  p{x} -> p{y};");
        }
        s.push_str("}\n");
        s
    }

    pub fn format_set(&self, s: &SubPoset) -> String {
        let ids: Vec<&str> = s.iter().map(|i| self.points[i].label.as_str()).collect();
        format!("{{{}}}", ids.join(","))
    }
}

/// The prime spectrum of `ring` ordered by inclusion of primes.
pub fn spectrum(ring: &Ring) -> Result<SpecPoset> {
    let points = match ring {
        Ring::Finite(r) => {
            let mut pts = Vec::new();
            for ideal in enumerate_ideals(ring)? {
                if !is_prime_ideal(ring, &ideal)? {
                    continue;
                }
                let Ideal::Set(members) = &ideal else { unreachable!() };
                let id = format!(
                    "{{{}}}",
                    members.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",")
                );
                let label = (0..r.size())
                    .find(|&g| ideal_generated(ring, &[Elem::Idx(g)]).ok().as_ref() == Some(&ideal))
                    .map(|g| format!("({})", ring.format(&Elem::Idx(g))))
                    .unwrap_or_else(|| id.clone());
                pts.push(Point { prime: ideal, id, label });
            }
            pts
        }
        Ring::SemiLocal(r) => std::iter::once(BigInt::zero())
            .chain(r.primes().iter().map(|&p| BigInt::from(p)))
            .map(|g| {
                let id = format!("({g})");
                Point {
                    prime: Ideal::Principal(g),
                    label: id.clone(),
                    id,
                }
            })
            .collect(),
    };
    let leq = points
        .iter()
        .map(|x| points.iter().map(|y| x.prime.is_subset(&y.prime)).collect())
        .collect();
    Ok(SpecPoset {
        ring: ring.clone(),
        points,
        leq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(p: &SpecPoset) -> Vec<String> {
        p.points().iter().map(|x| x.label.clone()).collect()
    }

    #[test]
    fn z12_is_an_antichain_of_two_points() {
        let p = spectrum(&Ring::zmod(12).unwrap()).unwrap();
        assert_eq!(ids(&p), vec!["(2)", "(3)"]);
        assert_eq!(p.point(0).id, "{0,2,4,6,8,10}");
        assert!(p.hasse().is_empty());
        assert_eq!(p.upset(0), SubPoset::new([0]));
    }

    #[test]
    fn semilocal_star() {
        let r = Ring::semilocal_int(&[2, 3]).unwrap();
        let p = spectrum(&r).unwrap();
        assert_eq!(ids(&p), vec!["(0)", "(2)", "(3)"]);
        assert_eq!(p.hasse(), vec![(0, 1), (0, 2)]);
        assert_eq!(p.upset(0), p.whole());
        assert_eq!(p.upset(1), SubPoset::new([1]));
        assert!(p.is_closed(&SubPoset::new([1, 2])));
        assert!(!p.is_closed(&SubPoset::new([0])));
        assert!(p.is_closed(&SubPoset::default()));
        assert_eq!(p.vanishing_locus(&r.parse("6").unwrap()), SubPoset::new([1, 2]));
        assert!(p.vanishing_locus(&r.one()).is_empty());
        assert!(p.is_open_cover(&[SubPoset::new([0, 1]), SubPoset::new([0, 2])]));
        assert!(!p.is_open_cover(&[SubPoset::new([1]), SubPoset::new([0, 2])]));
        assert!(p.is_open_cover(&[p.whole()]));
        let (u, open) = p.open_complement(&SubPoset::new([1]));
        assert_eq!((u, open), (SubPoset::new([0, 2]), true));
        assert!(p.to_dot().contains("p0 -> p1"));
    }

    #[test]
    fn field_has_one_point() {
        let f4 = Ring::poly_quotient(2, &[1, 1, 1]).unwrap();
        let p = spectrum(&f4).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.point(0).id, "{0}");
    }

    #[test]
    fn lookup_by_generator() {
        let p = spectrum(&Ring::zmod(12).unwrap()).unwrap();
        assert_eq!(p.find("(2)").unwrap(), 0);
        assert_eq!(p.find("(10)").unwrap(), 0);
        assert_eq!(p.find("{0,3,6,9}").unwrap(), 1);
        assert!(p.find("(5)").is_err());
    }
}
