//! Paths and integer linear combinations of paths.
//!
//! Words are written in composition order: the word `[a, b]` is the path
//! "first `b`, then `a`", so its source is the source of `b`.

use std::collections::BTreeMap;
use std::fmt;

use super::NcError;

/// A path. `word` is empty for the idempotent at `src == tgt`.
///
/// The derived ordering (degree, then word lexicographically by generator
/// index, then endpoints) is the monomial order. Two distinct words of the
/// same degree are never prefixes of one another since degrees are positive,
/// so the order is compatible with concatenation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono {
    pub deg: u32,
    pub word: Vec<u32>,
    pub src: u32,
    pub tgt: u32,
}

impl Mono {
    pub fn idempotent(v: u32) -> Self {
        Mono {
            deg: 0,
            word: Vec::new(),
            src: v,
            tgt: v,
        }
    }

    pub fn is_idempotent(&self) -> bool {
        self.word.is_empty()
    }

    /// `self * other`, i.e. first `other` then `self`; `None` if not
    /// composable.
    pub fn compose(&self, other: &Mono) -> Option<Mono> {
        if self.src != other.tgt {
            return None;
        }
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        Some(Mono {
            deg: self.deg + other.deg,
            word,
            src: other.src,
            tgt: self.tgt,
        })
    }
}

/// Integer combination of paths with checked `i64` coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<Mono, i64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn mono(m: Mono) -> Self {
        Self::term(m, 1)
    }

    pub fn term(m: Mono, c: i64) -> Self {
        let mut p = Poly::zero();
        if c != 0 {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &i64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Mono) -> i64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn leading(&self) -> Option<(&Mono, i64)> {
        self.terms.iter().next_back().map(|(m, c)| (m, *c))
    }

    pub fn pop_leading(&mut self) -> Option<(Mono, i64)> {
        self.terms.pop_last()
    }

    pub fn degree(&self) -> u32 {
        self.leading().map(|(m, _)| m.deg).unwrap_or(0)
    }

    /// Common `(src, tgt)` of all terms, if the polynomial is nonzero and
    /// homogeneous in endpoints.
    pub fn endpoints(&self) -> Option<(u32, u32)> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let e = (first.src, first.tgt);
        it.all(|m| (m.src, m.tgt) == e).then_some(e)
    }

    pub fn add_term(&mut self, m: Mono, c: i64) -> Result<(), NcError> {
        if c == 0 {
            return Ok(());
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().checked_add(c).ok_or(NcError::Overflow)?;
                if s == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
        Ok(())
    }

    pub fn add_scaled(&mut self, other: &Poly, k: i64) -> Result<(), NcError> {
        for (m, c) in &other.terms {
            let v = c.checked_mul(k).ok_or(NcError::Overflow)?;
            self.add_term(m.clone(), v)?;
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly, NcError> {
        let mut p = self.clone();
        p.add_scaled(other, 1)?;
        Ok(p)
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly, NcError> {
        let mut p = self.clone();
        p.add_scaled(other, -1)?;
        Ok(p)
    }

    pub fn scale(&self, k: i64) -> Result<Poly, NcError> {
        let mut p = Poly::zero();
        p.add_scaled(self, k)?;
        Ok(p)
    }

    /// Path-algebra product; non-composable term pairs contribute zero.
    pub fn mul(&self, other: &Poly) -> Result<Poly, NcError> {
        let mut p = Poly::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some(m) = a.compose(b) {
                    p.add_term(m, ca.checked_mul(*cb).ok_or(NcError::Overflow)?)?;
                }
            }
        }
        Ok(p)
    }

    /// `left * self * right` for paths `left`, `right` (either may be
    /// `None` for no factor).
    pub fn sandwich(&self, left: Option<&Mono>, right: Option<&Mono>) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in &self.terms {
            let mut x = m.clone();
            if let Some(r) = right {
                match x.compose(r) {
                    Some(y) => x = y,
                    None => continue,
                }
            }
            if let Some(l) = left {
                match l.compose(&x) {
                    Some(y) => x = y,
                    None => continue,
                }
            }
            // distinct inputs give distinct outputs
            p.terms.insert(x, *c);
        }
        p
    }

    /// Keeps only the terms with the given endpoints.
    pub fn corner(&self, src: u32, tgt: u32) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.src == src && m.tgt == tgt)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    pub fn map_monos<F: FnMut(&Mono) -> Mono>(&self, mut f: F) -> Result<Poly, NcError> {
        let mut p = Poly::zero();
        for (m, c) in &self.terms {
            p.add_term(f(m), *c)?;
        }
        Ok(p)
    }
}

impl FromIterator<(Mono, i64)> for Poly {
    fn from_iter<I: IntoIterator<Item = (Mono, i64)>>(iter: I) -> Self {
        let mut p = Poly::zero();
        for (m, c) in iter {
            p.add_term(m, c).expect("coefficient overflow");
        }
        p
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| {
                let w = if m.word.is_empty() {
                    format!("e{}", m.src)
                } else {
                    m.word
                        .iter()
                        .map(|g| format!("g{g}"))
                        .collect::<Vec<_>>()
                        .join("*")
                };
                format!("{c}*{w}")
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
