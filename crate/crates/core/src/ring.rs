//! Commutative rings in two backends.
//!
//! * [`FiniteRing`]: an explicit table ring on `0..n`. Every question about
//!   it can be answered by enumeration.
//! * [`SemiLocalRing`]: `ℤ_S`, the fractions `a/b` with `b` prime to every
//!   prime of a finite set `S`. With `S = ∅` this is `ℚ`, which only arises
//!   as a localization.
//!
//! The rest of the crate reaches rings through [`Ring`].

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith;
use crate::error::{Error, Result};
use crate::limits;

/// A ring element. `Idx` for table rings, `Frac` (always in lowest terms)
/// for the semi-local backend.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Idx(usize),
    Frac(BigRational),
}

impl Elem {
    pub fn idx(&self) -> usize {
        match self {
            Elem::Idx(i) => *i,
            Elem::Frac(_) => panic!("expected a table-ring element"),
        }
    }

    pub fn frac(&self) -> &BigRational {
        match self {
            Elem::Frac(q) => q,
            Elem::Idx(_) => panic!("expected a semi-local element"),
        }
    }

    pub fn int(n: i64) -> Elem {
        Elem::Frac(BigRational::from_integer(BigInt::from(n)))
    }
}

/// How a table ring was built; drives element labels and literal parsing.
#[derive(Debug, Clone)]
pub enum FiniteKind {
    Zmod(u64),
    PolyQuotient { p: u64, modulus: Vec<u64> },
    /// Mixed radix, first factor most significant.
    Product(Vec<Arc<FiniteRing>>),
    /// `base / K` with classes listed by their least base representative.
    Quotient {
        base: Arc<FiniteRing>,
        class_of: Vec<usize>,
        reps: Vec<usize>,
    },
    /// Compatible families of elements of other table rings.
    Families {
        parts: Vec<Arc<FiniteRing>>,
        families: Vec<Vec<usize>>,
    },
}

#[derive(Debug, Clone)]
pub struct FiniteRing {
    size: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    zero: usize,
    one: usize,
    kind: FiniteKind,
    name: String,
}

impl PartialEq for FiniteRing {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
            && self.zero == other.zero
            && self.one == other.one
            && self.add == other.add
            && self.mul == other.mul
    }
}

impl FiniteRing {
    /// Builds a table ring from `add`/`mul` closures. Tables are not checked
    /// against the ring axioms here; see [`FiniteRing::check_axioms`].
    pub fn from_fn(
        size: usize,
        zero: usize,
        one: usize,
        kind: FiniteKind,
        name: String,
        add: impl Fn(usize, usize) -> usize,
        mul: impl Fn(usize, usize) -> usize,
    ) -> Result<FiniteRing> {
        let cap = limits::ring_cap();
        if size > cap {
            return Err(Error::overflow("table ring", size, cap));
        }
        let mut at = Vec::with_capacity(size * size);
        let mut mt = Vec::with_capacity(size * size);
        for a in 0..size {
            for b in 0..size {
                at.push(add(a, b) as u16);
                mt.push(mul(a, b) as u16);
            }
        }
        let mut neg = vec![0u16; size];
        for (a, n) in neg.iter_mut().enumerate() {
            let b = (0..size)
                .find(|&b| at[a * size + b] as usize == zero)
                .ok_or_else(|| Error::input(format!("element {a} has no additive inverse")))?;
            *n = b as u16;
        }
        Ok(FiniteRing {
            size,
            add: at,
            mul: mt,
            neg,
            zero,
            one,
            kind,
            name,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }
    pub fn zero(&self) -> usize {
        self.zero
    }
    pub fn one(&self) -> usize {
        self.one
    }
    pub fn kind(&self) -> &FiniteKind {
        &self.kind
    }
    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.size + b] as usize
    }
    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.size + b] as usize
    }
    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        self.neg[a] as usize
    }
    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn inverse(&self, a: usize) -> Option<usize> {
        (0..self.size).find(|&b| self.mul(a, b) == self.one)
    }

    pub fn is_unit(&self, a: usize) -> bool {
        self.inverse(a).is_some()
    }

    /// Exhaustive check of the commutative ring axioms over all triples.
    /// Returns the first failing law with its witnesses.
    pub fn check_axioms(&self) -> std::result::Result<(), String> {
        let n = self.size;
        for a in 0..n {
            if self.add(a, self.zero) != a {
                return Err(format!("{a} + 0 != {a}"));
            }
            if self.mul(a, self.one) != a {
                return Err(format!("{a} * 1 != {a}"));
            }
            if self.add(a, self.neg(a)) != self.zero {
                return Err(format!("{a} has no negative"));
            }
            for b in 0..n {
                if self.add(a, b) != self.add(b, a) {
                    return Err(format!("+ not commutative at ({a},{b})"));
                }
                if self.mul(a, b) != self.mul(b, a) {
                    return Err(format!("* not commutative at ({a},{b})"));
                }
                let ab = self.add(a, b);
                let mab = self.mul(a, b);
                for c in 0..n {
                    if self.add(ab, c) != self.add(a, self.add(b, c)) {
                        return Err(format!("+ not associative at ({a},{b},{c})"));
                    }
                    if self.mul(mab, c) != self.mul(a, self.mul(b, c)) {
                        return Err(format!("* not associative at ({a},{b},{c})"));
                    }
                    if self.mul(a, self.add(b, c)) != self.add(mab, self.mul(a, c)) {
                        return Err(format!("distributivity fails at ({a},{b},{c})"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn label(&self, a: usize) -> String {
        match &self.kind {
            FiniteKind::Zmod(_) => a.to_string(),
            FiniteKind::PolyQuotient { p, modulus } => {
                let d = modulus.len() - 1;
                let digits: Vec<u64> = poly_digits(a, *p, d).into_iter().map(|c| c as u64).collect();
                let s = poly_string(&digits);
                if s.is_empty() {
                    "0".to_string()
                } else {
                    s
                }
            }
            FiniteKind::Product(parts) => {
                let digits = mixed_radix_digits(a, parts);
                let labels: Vec<String> = parts.iter().zip(digits).map(|(r, i)| r.label(i)).collect();
                format!("({})", labels.join(","))
            }
            FiniteKind::Quotient { base, reps, .. } => base.label(reps[a]),
            FiniteKind::Families { parts, families } => {
                let labels: Vec<String> = parts.iter().zip(&families[a]).map(|(r, &i)| r.label(i)).collect();
                format!("({})", labels.join(","))
            }
        }
    }

    pub fn parse(&self, text: &str) -> Result<usize> {
        let text = text.trim();
        match &self.kind {
            FiniteKind::Zmod(n) => {
                let v: i64 = text
                    .parse()
                    .map_err(|_| Error::input(format!("`{text}` is not an integer literal for Z/{n}")))?;
                Ok(v.rem_euclid(*n as i64) as usize)
            }
            FiniteKind::PolyQuotient { p, modulus } => {
                let d = modulus.len() - 1;
                if text.contains('x') {
                    return parse_poly(text, *p, d);
                }
                let parts = split_tuple(text);
                if parts.len() > d {
                    return Err(Error::input(format!(
                        "coefficient tuple `{text}` has {} entries, ring has degree {d}",
                        parts.len()
                    )));
                }
                let mut idx = 0usize;
                let mut scale = 1usize;
                for part in parts {
                    let c: i64 = part
                        .trim()
                        .parse()
                        .map_err(|_| Error::input(format!("bad coefficient `{part}` in `{text}`")))?;
                    idx += c.rem_euclid(*p as i64) as usize * scale;
                    scale *= *p as usize;
                }
                Ok(idx)
            }
            FiniteKind::Product(parts) => {
                let items = split_tuple(text);
                if items.len() != parts.len() {
                    return Err(Error::input(format!(
                        "`{text}` needs {} components for this product ring",
                        parts.len()
                    )));
                }
                let mut idx = 0usize;
                for (r, item) in parts.iter().zip(items) {
                    idx = idx * r.size() + r.parse(&item)?;
                }
                Ok(idx)
            }
            FiniteKind::Quotient { base, class_of, .. } => Ok(class_of[base.parse(text)?]),
            FiniteKind::Families { parts, families } => {
                let items = split_tuple(text);
                if items.len() != parts.len() {
                    return Err(Error::input(format!("`{text}` needs {} components", parts.len())));
                }
                let want = parts
                    .iter()
                    .zip(items)
                    .map(|(r, item)| r.parse(&item))
                    .collect::<Result<Vec<_>>>()?;
                families
                    .iter()
                    .position(|f| *f == want)
                    .ok_or_else(|| Error::input(format!("`{text}` is not a compatible family")))
            }
        }
    }
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn poly_digits(mut a: usize, p: u64, d: usize) -> Vec<usize> {
    let p = p as usize;
    (0..d)
        .map(|_| {
            let c = a % p;
            a /= p;
            c
        })
        .collect()
}

fn mixed_radix_digits(mut a: usize, parts: &[Arc<FiniteRing>]) -> Vec<usize> {
    let mut out = vec![0; parts.len()];
    for (k, r) in parts.iter().enumerate().rev() {
        out[k] = a % r.size();
        a /= r.size();
    }
    out
}

/// Splits `(a,(b,c),d)` into its top-level comma-separated items. A bare
/// literal without parentheses yields itself.
pub(crate) fn split_tuple(text: &str) -> Vec<String> {
    let t = text.trim();
    let inner = if (t.starts_with('(') && t.ends_with(')')) || (t.starts_with('[') && t.ends_with(']')) {
        &t[1..t.len() - 1]
    } else {
        t
    };
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in inner.chars() {
        match ch {
            '(' | '[' => {
                depth += 1;
                cur.push(ch);
            }
            ')' | ']' => {
                depth -= 1;
                cur.push(ch);
            }
            ',' if depth == 0 => out.push(std::mem::take(&mut cur).trim().to_string()),
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// `ℤ_S`: integers with every prime outside `S` inverted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiLocalRing {
    primes: Vec<u64>,
}

impl SemiLocalRing {
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn is_field(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        arith::coprime_to(q.denom(), &self.primes)
    }

    pub fn is_unit(&self, q: &BigRational) -> bool {
        !q.is_zero() && arith::s_part(q.numer(), &self.primes).is_one()
    }

    /// Generator of the ideal `(q)`, normalized to a product of primes of `S`.
    pub fn normalize(&self, q: &BigRational) -> BigInt {
        arith::s_part(q.numer(), &self.primes)
    }

    pub fn name(&self) -> String {
        if self.primes.is_empty() {
            "Q".to_string()
        } else {
            format!("Z_({})", join(self.primes.iter()))
        }
    }
}

/// A computable commutative ring. Cloning is cheap.
#[derive(Debug, Clone)]
pub enum Ring {
    Finite(Arc<FiniteRing>),
    SemiLocal(Arc<SemiLocalRing>),
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Ring::Finite(a), Ring::Finite(b)) => Arc::ptr_eq(a, b) || a == b,
            (Ring::SemiLocal(a), Ring::SemiLocal(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Ring {
    /// `ℤ/n`.
    pub fn zmod(n: u64) -> Result<Ring> {
        if n < 2 {
            return Err(Error::input("n must be ≥ 2"));
        }
        let cap = limits::ring_cap();
        if n as usize > cap {
            return Err(Error::overflow("table ring", n, cap));
        }
        let m = n as usize;
        let r = FiniteRing::from_fn(
            m,
            0,
            1,
            FiniteKind::Zmod(n),
            format!("Z/{n}"),
            |a, b| (a + b) % m,
            |a, b| (a * b) % m,
        )?;
        Ok(Ring::Finite(Arc::new(r)))
    }

    /// `𝔽_p[x]/(f)` for a monic `f` given by coefficients `c₀..c_d`.
    /// The tuple `(c₀,…,c_{d−1})` has index `Σ cᵢ pⁱ`.
    pub fn poly_quotient(p: u64, modulus: &[i64]) -> Result<Ring> {
        if !arith::is_prime(p) {
            return Err(Error::input(format!("p = {p} is not prime")));
        }
        if modulus.len() < 2 {
            return Err(Error::input("modulus must have degree ≥ 1"));
        }
        let f: Vec<u64> = modulus.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
        if *f.last().unwrap() != 1 {
            return Err(Error::input("modulus must be monic"));
        }
        let d = f.len() - 1;
        let size = (p as usize)
            .checked_pow(d as u32)
            .filter(|&s| s <= limits::ring_cap())
            .ok_or_else(|| Error::overflow("table ring", format!("{p}^{d}"), limits::ring_cap()))?;
        let pu = p as usize;
        let digits = |a: usize| poly_digits(a, p, d);
        let encode = |c: &[usize]| c.iter().rev().fold(0usize, |acc, &x| acc * pu + x);
        let add = |a: usize, b: usize| {
            let (x, y) = (digits(a), digits(b));
            let s: Vec<usize> = x.iter().zip(&y).map(|(u, v)| (u + v) % pu).collect();
            encode(&s)
        };
        let mul = |a: usize, b: usize| {
            let (x, y) = (digits(a), digits(b));
            let mut prod = vec![0usize; 2 * d];
            for (i, u) in x.iter().enumerate() {
                for (j, v) in y.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + u * v) % pu;
                }
            }
            // reduce by the monic modulus from the top degree down
            for k in (d..2 * d).rev() {
                let c = prod[k];
                if c == 0 {
                    continue;
                }
                prod[k] = 0;
                for (i, &fi) in f.iter().take(d).enumerate() {
                    let sub = (c * fi as usize) % pu;
                    prod[k - d + i] = (prod[k - d + i] + pu - sub) % pu;
                }
            }
            encode(&prod[..d])
        };
        let name = format!("F_{p}[x]/({})", poly_string(&f));
        let r = FiniteRing::from_fn(
            size,
            0,
            1 % size,
            FiniteKind::PolyQuotient { p, modulus: f.clone() },
            name,
            add,
            mul,
        )?;
        Ok(Ring::Finite(Arc::new(r)))
    }

    /// Componentwise product of table rings.
    pub fn product(factors: &[Ring]) -> Result<Ring> {
        if factors.len() < 2 {
            return Err(Error::input("a product needs at least two factors"));
        }
        let parts = factors
            .iter()
            .map(|r| match r {
                Ring::Finite(f) => Ok(f.clone()),
                Ring::SemiLocal(_) => Err(Error::input("product factors must be table rings")),
            })
            .collect::<Result<Vec<_>>>()?;
        let size = parts
            .iter()
            .try_fold(1usize, |acc, r| acc.checked_mul(r.size()))
            .filter(|&s| s <= limits::ring_cap())
            .ok_or_else(|| Error::overflow("table ring", "product of factor sizes", limits::ring_cap()))?;
        let encode = |d: &[usize]| d.iter().zip(&parts).fold(0usize, |acc, (&x, r)| acc * r.size() + x);
        let op = |a: usize, b: usize, mul: bool| {
            let (x, y) = (mixed_radix_digits(a, &parts), mixed_radix_digits(b, &parts));
            let z: Vec<usize> = parts
                .iter()
                .enumerate()
                .map(|(k, r)| if mul { r.mul(x[k], y[k]) } else { r.add(x[k], y[k]) })
                .collect();
            encode(&z)
        };
        let zero = encode(&parts.iter().map(|r| r.zero()).collect::<Vec<_>>());
        let one = encode(&parts.iter().map(|r| r.one()).collect::<Vec<_>>());
        let name = parts.iter().map(|r| r.name().to_string()).collect::<Vec<_>>().join(" x ");
        let r = FiniteRing::from_fn(
            size,
            zero,
            one,
            FiniteKind::Product(parts.clone()),
            name,
            |a, b| op(a, b, false),
            |a, b| op(a, b, true),
        )?;
        Ok(Ring::Finite(Arc::new(r)))
    }

    /// `ℤ_S` for a nonempty set of primes.
    pub fn semilocal_int(primes: &[u64]) -> Result<Ring> {
        if primes.is_empty() {
            return Err(Error::input("prime set must be nonempty"));
        }
        if let Some(&bad) = primes.iter().find(|&&p| !arith::is_prime(p)) {
            return Err(Error::input(format!("{bad} is not prime")));
        }
        let mut ps = primes.to_vec();
        ps.sort_unstable();
        ps.dedup();
        if ps.len() != primes.len() {
            return Err(Error::input("prime set has duplicates"));
        }
        Ok(Ring::SemiLocal(Arc::new(SemiLocalRing { primes: ps })))
    }

    /// `ℚ`, the semi-local ring with no primes.
    pub fn rationals() -> Ring {
        Ring::SemiLocal(Arc::new(SemiLocalRing { primes: Vec::new() }))
    }

    pub fn name(&self) -> String {
        match self {
            Ring::Finite(r) => r.name().to_string(),
            Ring::SemiLocal(r) => r.name(),
        }
    }

    pub fn as_finite(&self) -> Option<&Arc<FiniteRing>> {
        match self {
            Ring::Finite(r) => Some(r),
            Ring::SemiLocal(_) => None,
        }
    }

    pub fn as_semilocal(&self) -> Option<&Arc<SemiLocalRing>> {
        match self {
            Ring::SemiLocal(r) => Some(r),
            Ring::Finite(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Ring::Finite(_))
    }

    pub fn size(&self) -> Option<usize> {
        self.as_finite().map(|r| r.size())
    }

    /// All elements of a table ring in index order.
    pub fn elements(&self) -> Result<Vec<Elem>> {
        match self {
            Ring::Finite(r) => Ok((0..r.size()).map(Elem::Idx).collect()),
            Ring::SemiLocal(r) => Err(Error::unsupported(format!("{} is infinite", r.name()))),
        }
    }

    pub fn zero(&self) -> Elem {
        match self {
            Ring::Finite(r) => Elem::Idx(r.zero()),
            Ring::SemiLocal(_) => Elem::Frac(BigRational::zero()),
        }
    }

    pub fn one(&self) -> Elem {
        match self {
            Ring::Finite(r) => Elem::Idx(r.one()),
            Ring::SemiLocal(_) => Elem::Frac(BigRational::one()),
        }
    }

    /// Image of an integer under `ℤ → R`.
    pub fn from_int(&self, n: i64) -> Elem {
        match self {
            Ring::Finite(r) => {
                let mut acc = r.zero();
                let step = if n >= 0 { r.one() } else { r.neg(r.one()) };
                for _ in 0..n.unsigned_abs() % r.size() as u64 {
                    acc = r.add(acc, step);
                }
                Elem::Idx(acc)
            }
            Ring::SemiLocal(_) => Elem::int(n),
        }
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        match self {
            Ring::Finite(r) => Elem::Idx(r.add(a.idx(), b.idx())),
            Ring::SemiLocal(_) => Elem::Frac(a.frac() + b.frac()),
        }
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        match self {
            Ring::Finite(r) => Elem::Idx(r.sub(a.idx(), b.idx())),
            Ring::SemiLocal(_) => Elem::Frac(a.frac() - b.frac()),
        }
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        match self {
            Ring::Finite(r) => Elem::Idx(r.neg(a.idx())),
            Ring::SemiLocal(_) => Elem::Frac(-a.frac()),
        }
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        match self {
            Ring::Finite(r) => Elem::Idx(r.mul(a.idx(), b.idx())),
            Ring::SemiLocal(_) => Elem::Frac(a.frac() * b.frac()),
        }
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        match self {
            Ring::Finite(r) => a.idx() == r.zero(),
            Ring::SemiLocal(_) => a.frac().is_zero(),
        }
    }

    pub fn is_unit(&self, a: &Elem) -> bool {
        match self {
            Ring::Finite(r) => r.is_unit(a.idx()),
            Ring::SemiLocal(r) => r.is_unit(a.frac()),
        }
    }

    pub fn inverse(&self, a: &Elem) -> Option<Elem> {
        match self {
            Ring::Finite(r) => r.inverse(a.idx()).map(Elem::Idx),
            Ring::SemiLocal(r) => r.is_unit(a.frac()).then(|| Elem::Frac(a.frac().recip())),
        }
    }

    /// Whether `a` is a valid element of this ring.
    pub fn contains(&self, a: &Elem) -> bool {
        match (self, a) {
            (Ring::Finite(r), Elem::Idx(i)) => *i < r.size(),
            (Ring::SemiLocal(r), Elem::Frac(q)) => r.contains(q),
            _ => false,
        }
    }

    pub fn check(&self, a: &Elem) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::input(format!("{a:?} is not an element of {}", self.name())))
        }
    }

    pub fn format(&self, a: &Elem) -> String {
        match (self, a) {
            (Ring::Finite(r), Elem::Idx(i)) => r.label(*i),
            (_, Elem::Frac(q)) => {
                if q.denom().is_one() {
                    q.numer().to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                }
            }
            (_, Elem::Idx(i)) => format!("#{i}"),
        }
    }

    /// Parses an element literal: integers for `ℤ/n`, coefficient tuples
    /// `(c₀,…)` for polynomial quotients, component tuples for products, and
    /// `a/b` fractions for the semi-local backend.
    pub fn parse(&self, text: &str) -> Result<Elem> {
        match self {
            Ring::Finite(r) => r.parse(text).map(Elem::Idx),
            Ring::SemiLocal(r) => {
                let text = text.trim();
                let (num, den) = match text.split_once('/') {
                    Some((a, b)) => (a.trim(), b.trim()),
                    None => (text, "1"),
                };
                let num: BigInt = num
                    .parse()
                    .map_err(|_| Error::input(format!("`{text}` is not a fraction literal")))?;
                let den: BigInt = den
                    .parse()
                    .map_err(|_| Error::input(format!("`{text}` is not a fraction literal")))?;
                if den.is_zero() {
                    return Err(Error::input(format!("`{text}` has zero denominator")));
                }
                let q = BigRational::new(num, den);
                if !r.contains(&q) {
                    return Err(Error::input(format!(
                        "`{text}` is not in {}: denominator {} is divisible by a prime of S",
                        r.name(),
                        q.denom()
                    )));
                }
                Ok(Elem::Frac(q))
            }
        }
    }
}

// `c*x^k` terms joined by `+`, reduced to an index below `p^d`
fn parse_poly(text: &str, p: u64, d: usize) -> Result<usize> {
    let bad = || Error::input(format!("`{text}` is not a polynomial in x"));
    let mut coeffs = vec![0u64; d];
    for term in text.split('+').map(str::trim) {
        let (c, k) = match term.split_once('x') {
            None => (term, 0),
            Some((c, rest)) => {
                let c = c.trim().trim_end_matches('*').trim();
                let k = match rest.trim() {
                    "" => 1,
                    e => e.strip_prefix('^').ok_or_else(bad)?.trim().parse().map_err(|_| bad())?,
                };
                (if c.is_empty() { "1" } else { c }, k)
            }
        };
        let c: i64 = c.parse().map_err(|_| bad())?;
        if k >= d {
            return Err(Error::input(format!("`{text}` has degree {k}, ring has degree {d}")));
        }
        coeffs[k] = (coeffs[k] + c.rem_euclid(p as i64) as u64) % p;
    }
    Ok(coeffs.iter().rev().fold(0usize, |acc, &c| acc * p as usize + c as usize))
}

fn poly_string(f: &[u64]) -> String {
    let mut terms = Vec::new();
    for (i, &c) in f.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{i}"),
        };
        terms.push(match (c, i) {
            (_, 0) => c.to_string(),
            (1, _) => mono,
            _ => format!("{c}{mono}"),
        });
    }
    terms.join("+")
}

/// An ideal. Table rings store the full element set; the semi-local backend
/// stores one generator normalized to a product of primes of `S` (`0` for
/// the zero ideal, `1` for the whole ring).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ideal {
    Set(Vec<usize>),
    Principal(BigInt),
}

impl Ideal {
    pub fn contains(&self, ring: &Ring, a: &Elem) -> bool {
        match (self, ring) {
            (Ideal::Set(s), _) => s.binary_search(&a.idx()).is_ok(),
            (Ideal::Principal(g), Ring::SemiLocal(r)) => {
                let q = a.frac();
                if g.is_zero() {
                    return q.is_zero();
                }
                q.is_zero() || (r.normalize(q) % g).is_zero()
            }
            (Ideal::Principal(_), Ring::Finite(_)) => false,
        }
    }

    /// `self ⊆ other`.
    pub fn is_subset(&self, other: &Ideal) -> bool {
        match (self, other) {
            (Ideal::Set(a), Ideal::Set(b)) => a.iter().all(|x| b.binary_search(x).is_ok()),
            (Ideal::Principal(a), Ideal::Principal(b)) => {
                if b.is_zero() {
                    a.is_zero()
                } else {
                    (a % b).is_zero()
                }
            }
            _ => false,
        }
    }

    pub fn is_whole(&self, ring: &Ring) -> bool {
        match self {
            Ideal::Set(s) => Some(s.len()) == ring.size(),
            Ideal::Principal(g) => g.is_one(),
        }
    }

    pub fn whole(ring: &Ring) -> Ideal {
        match ring {
            Ring::Finite(r) => Ideal::Set((0..r.size()).collect()),
            Ring::SemiLocal(_) => Ideal::Principal(BigInt::one()),
        }
    }

    pub fn zero(ring: &Ring) -> Ideal {
        match ring {
            Ring::Finite(r) => Ideal::Set(vec![r.zero()]),
            Ring::SemiLocal(_) => Ideal::Principal(BigInt::zero()),
        }
    }

    /// The generator of a principal semi-local ideal.
    pub fn generator(&self) -> Option<&BigInt> {
        match self {
            Ideal::Principal(g) => Some(g),
            Ideal::Set(_) => None,
        }
    }

    pub fn format(&self, ring: &Ring) -> String {
        match self {
            Ideal::Set(s) => format!("{{{}}}", s.iter().map(|&i| ring.format(&Elem::Idx(i))).collect::<Vec<_>>().join(",")),
            Ideal::Principal(g) => format!("({g})"),
        }
    }
}

/// The least ideal containing `gens`.
pub fn ideal_generated(ring: &Ring, gens: &[Elem]) -> Result<Ideal> {
    for g in gens {
        ring.check(g)?;
    }
    match ring {
        Ring::Finite(r) => {
            let n = r.size();
            let mut member = vec![false; n];
            member[r.zero()] = true;
            for g in gens {
                // I + Rg, with I already an ideal
                let multiples: Vec<usize> = (0..n).map(|x| r.mul(x, g.idx())).collect();
                let current: Vec<usize> = (0..n).filter(|&i| member[i]).collect();
                for &i in &current {
                    for &m in &multiples {
                        member[r.add(i, m)] = true;
                    }
                }
            }
            Ok(Ideal::Set((0..n).filter(|&i| member[i]).collect()))
        }
        Ring::SemiLocal(r) => {
            let g = gens
                .iter()
                .fold(BigInt::zero(), |acc, x| acc.gcd(x.frac().numer()));
            Ok(Ideal::Principal(arith::s_part(&g, r.primes())))
        }
    }
}

/// Closure under addition and ring multiplication.
pub fn is_ideal(ring: &Ring, ideal: &Ideal) -> bool {
    match (ring, ideal) {
        (Ring::Finite(r), Ideal::Set(s)) => {
            let n = r.size();
            let mut member = vec![false; n];
            for &i in s {
                if i >= n {
                    return false;
                }
                member[i] = true;
            }
            if !member[r.zero()] || s.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            s.iter().all(|&a| {
                s.iter().all(|&b| member[r.add(a, b)]) && (0..n).all(|x| member[r.mul(x, a)])
            })
        }
        (Ring::SemiLocal(r), Ideal::Principal(g)) => {
            !g.is_negative() && (g.is_zero() || arith::s_part(g, r.primes()) == *g)
        }
        _ => false,
    }
}

pub fn is_prime_ideal(ring: &Ring, ideal: &Ideal) -> Result<bool> {
    if !is_ideal(ring, ideal) {
        return Err(Error::input(format!(
            "{} is not an ideal of {}",
            ideal.format(ring),
            ring.name()
        )));
    }
    if ideal.is_whole(ring) {
        return Ok(false);
    }
    match (ring, ideal) {
        (Ring::Finite(r), Ideal::Set(s)) => {
            let n = r.size();
            let mut member = vec![false; n];
            for &i in s {
                member[i] = true;
            }
            Ok((0..n).all(|a| member[a] || (0..n).all(|b| member[b] || !member[r.mul(a, b)])))
        }
        (Ring::SemiLocal(r), Ideal::Principal(g)) => {
            Ok(g.is_zero() || g.to_u64().map_or(false, |p| r.primes().contains(&p)))
        }
        _ => unreachable!("checked by is_ideal"),
    }
}
