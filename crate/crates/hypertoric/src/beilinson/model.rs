//! Closed-form model of the Beilinson algebra.
//!
//! With `R = Z[s, s^-1]`, every corner is free of rank one over `R`:
//! `e1 B e1 = R` via `s -> t`, `e2 B e2 = R` via `s -> tau`, paths
//! `1 -> 2` are `x * f(t)` and paths `2 -> 1` are `y * f(tau)`. Products are
//! those of 2x2 matrices over `R`, except that an off-diagonal pair picks up
//! a factor `s - 1` (since `yx = t - 1` and `xy = tau - 1`).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ncalg::{NcError, Poly, Presentation, RewriteSystem};

/// Laurent polynomial in `s` with checked `i64` coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Laurent(BTreeMap<i64, i64>);

impl Laurent {
    pub fn zero() -> Self {
        Laurent::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 1)
    }

    pub fn monomial(k: i64, c: i64) -> Self {
        let mut l = Laurent::zero();
        if c != 0 {
            l.0.insert(k, c);
        }
        l
    }

    /// `s - 1`
    pub fn s_minus_one() -> Self {
        let mut l = Self::monomial(1, 1);
        l.0.insert(0, -1);
        l
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.0.iter().map(|(k, c)| (*k, *c))
    }

    pub fn coeff(&self, k: i64) -> i64 {
        self.0.get(&k).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, k: i64, c: i64) -> Result<(), NcError> {
        if c == 0 {
            return Ok(());
        }
        let v = self.coeff(k).checked_add(c).ok_or(NcError::Overflow)?;
        if v == 0 {
            self.0.remove(&k);
        } else {
            self.0.insert(k, v);
        }
        Ok(())
    }

    pub fn add(&self, other: &Laurent) -> Result<Laurent, NcError> {
        let mut out = self.clone();
        for (k, c) in other.terms() {
            out.add_term(k, c)?;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Laurent) -> Result<Laurent, NcError> {
        let mut out = Laurent::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                out.add_term(a + b, ca.checked_mul(cb).ok_or(NcError::Overflow)?)?;
            }
        }
        Ok(out)
    }

    /// Substitutes `s^k` for `s`.
    pub fn pow_subst(&self, k: i64) -> Laurent {
        Laurent(self.0.iter().map(|(e, c)| (e * k, *c)).collect())
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms().map(|(k, c)| format!("{c}s^{k}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Element of the Beilinson algebra in the matrix model. `entries[i][j]` is
/// the component from node `j+1` to node `i+1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BElem {
    pub entries: [[Laurent; 2]; 2],
}

impl BElem {
    pub fn zero() -> Self {
        BElem::default()
    }

    pub fn unit() -> Self {
        let mut e = BElem::zero();
        e.entries[0][0] = Laurent::one();
        e.entries[1][1] = Laurent::one();
        e
    }

    /// Single corner `f` from node `src` to node `tgt` (0-based).
    pub fn corner(tgt: usize, src: usize, f: Laurent) -> Self {
        let mut e = BElem::zero();
        e.entries[tgt][src] = f;
        e
    }

    pub fn e1() -> Self {
        Self::corner(0, 0, Laurent::one())
    }
    pub fn e2() -> Self {
        Self::corner(1, 1, Laurent::one())
    }
    pub fn x() -> Self {
        Self::corner(1, 0, Laurent::one())
    }
    pub fn y() -> Self {
        Self::corner(0, 1, Laurent::one())
    }
    pub fn t_pow(k: i64) -> Self {
        Self::corner(0, 0, Laurent::monomial(k, 1))
    }
    pub fn tau_pow(k: i64) -> Self {
        Self::corner(1, 1, Laurent::monomial(k, 1))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(Laurent::is_zero)
    }

    pub fn add(&self, other: &BElem) -> Result<BElem, NcError> {
        let mut out = self.clone();
        for i in 0..2 {
            for j in 0..2 {
                out.entries[i][j] = self.entries[i][j].add(&other.entries[i][j])?;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: i64) -> Result<BElem, NcError> {
        let mut out = BElem::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.entries[i][j] = self.entries[i][j].mul(&Laurent::monomial(0, c))?;
            }
        }
        Ok(out)
    }

    fn sources(&self) -> Vec<usize> {
        (0..2)
            .filter(|&j| (0..2).any(|i| !self.entries[i][j].is_zero()))
            .collect()
    }

    fn targets(&self) -> Vec<usize> {
        (0..2)
            .filter(|&i| (0..2).any(|j| !self.entries[i][j].is_zero()))
            .collect()
    }
}

/// Product `a * b` (first `b`, then `a`) in the matrix model.
///
/// Fails with `NotComposable` when both factors are nonzero but no source
/// node of `a` is a target node of `b`.
pub fn b_multiply(a: &BElem, b: &BElem) -> Result<BElem, NcError> {
    if !a.is_zero() && !b.is_zero() {
        let (src, tgt) = (a.sources(), b.targets());
        if !src.iter().any(|v| tgt.contains(v)) {
            return Err(NcError::NotComposable(format!("{a:?} after {b:?}")));
        }
    }
    let u = Laurent::s_minus_one();
    let mut out = BElem::zero();
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = Laurent::zero();
            for k in 0..2 {
                let mut p = a.entries[i][k].mul(&b.entries[k][j])?;
                // going around the other node costs s - 1
                if i == j && k != i {
                    p = p.mul(&u)?;
                }
                acc = acc.add(&p)?;
            }
            out.entries[i][j] = acc;
        }
    }
    Ok(out)
}

/// Value in the matrix model of a polynomial in the rewriting presentation
/// (vertices `1, 2`; generators `x, y, t, t^-1, tau, tau^-1`).
pub fn from_poly(pres: &Presentation, p: &Poly) -> Result<BElem, NcError> {
    let gens: Vec<BElem> = pres
        .generators
        .iter()
        .map(|g| match g.name.as_str() {
            "x" => Ok(BElem::x()),
            "y" => Ok(BElem::y()),
            "t" => Ok(BElem::t_pow(1)),
            "t^-1" => Ok(BElem::t_pow(-1)),
            "tau" => Ok(BElem::tau_pow(1)),
            "tau^-1" => Ok(BElem::tau_pow(-1)),
            other => Err(NcError::UnknownGenerator(other.to_string())),
        })
        .collect::<Result<_, _>>()?;
    let mut out = BElem::zero();
    for (m, c) in p.terms() {
        let mut v = if m.src == 0 { BElem::e1() } else { BElem::e2() };
        for &g in m.word.iter().rev() {
            v = b_multiply(&gens[g as usize], &v)?;
        }
        out = out.add(&v.scale(*c)?)?;
    }
    Ok(out)
}

/// Normal form in the rewriting model of a matrix-model element.
pub fn to_poly(rw: &RewriteSystem, e: &BElem) -> Result<Poly, NcError> {
    let pres = &rw.base;
    let power = |name: &str, inv: &str, k: i64| -> Result<Vec<String>, NcError> {
        let g = if k >= 0 { name } else { inv };
        Ok(vec![g.to_string(); k.unsigned_abs() as usize])
    };
    let mut out = Poly::zero();
    for i in 0..2 {
        for j in 0..2 {
            for (k, c) in e.entries[i][j].terms() {
                let mut names: Vec<String> = match (i, j) {
                    (0, 0) => power("t", "t^-1", k)?,
                    (1, 1) => power("tau", "tau^-1", k)?,
                    (1, 0) => {
                        let mut w = vec!["x".to_string()];
                        w.extend(power("t", "t^-1", k)?);
                        w
                    }
                    _ => {
                        let mut w = vec!["y".to_string()];
                        w.extend(power("tau", "tau^-1", k)?);
                        w
                    }
                };
                if names.is_empty() {
                    names.push(format!("e:{}", j + 1));
                }
                out.add_term(pres.path(&names)?, c)?;
            }
        }
    }
    rw.normal_form(&out)
}
