//! Exact lattice data for the defining short exact sequence of tori
//! `1 -> T -> (C*)^n -> G -> 1` and its dual.
//!
//! Tori only appear through their cocharacter lattices: `iota` is the
//! `n x k` integer matrix of `Z^k -> Z^n`, and everything else is derived.

mod matrix;
pub mod snf;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use matrix::IntMatrix;
pub use snf::{integer_kernel, row_hnf, smith_normal_form, SmithForm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("invalid tori sequence: {0}")]
    InvalidSequence(String),
    #[error("no rational lift of beta through iota^T")]
    NoLift,
    #[error("cannot parse rational {0:?}")]
    BadRational(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Outcome of a report-valued check: passes iff `failures` is empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn from_failures(failures: Vec<String>) -> Self {
        ValidationReport {
            passed: failures.is_empty(),
            failures,
        }
    }
}

/// Presentation of `1 -> T -> (C*)^n -> G -> 1` by the cocharacter map of `T`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToriSequence {
    pub n: usize,
    pub k: usize,
    pub iota: IntMatrix,
}

/// Lattice data of the dual sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualData {
    /// `n x d`: columns are a Hermite-reduced Z-basis of `ker(iota^T)`.
    pub l_basis: IntMatrix,
    /// `d x n`: projection of `Z^n` onto the cocharacters of `G`.
    pub quot: IntMatrix,
    /// `n x k`: columns completing `l_basis` to a unimodular matrix.
    pub completion: IntMatrix,
}

impl ToriSequence {
    pub fn new(n: usize, iota: IntMatrix) -> Result<Self, LatticeError> {
        if iota.rows() != n {
            return Err(LatticeError::Dimension(format!(
                "iota has {} rows, expected n = {n}",
                iota.rows()
            )));
        }
        let k = iota.cols();
        if k >= n {
            return Err(LatticeError::Dimension(format!("need k < n, got k = {k}, n = {n}")));
        }
        Ok(ToriSequence { n, k, iota })
    }

    /// The sequence with trivial `T`: `G = (C*)^n`.
    pub fn trivial(n: usize) -> Self {
        ToriSequence {
            n,
            k: 0,
            iota: IntMatrix::zeros(n, 0),
        }
    }

    pub fn from_columns_i64(n: usize, cols: &[Vec<i64>]) -> Result<Self, LatticeError> {
        let cols: Vec<Vec<BigInt>> = cols
            .iter()
            .map(|c| c.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        if cols.iter().any(|c| c.len() != n) {
            return Err(LatticeError::Dimension("iota column length differs from n".into()));
        }
        Self::new(n, IntMatrix::from_cols(n, &cols))
    }

    /// Rank of `G`.
    pub fn d(&self) -> usize {
        self.n - self.k
    }

    pub fn validate(&self) -> ValidationReport {
        validate_sequence(self)
    }

    pub fn dual_data(&self) -> Result<DualData, LatticeError> {
        dual_data(self)
    }
}

pub fn validate_sequence(seq: &ToriSequence) -> ValidationReport {
    let mut failures = Vec::new();
    if seq.iota.rows() != seq.n || seq.iota.cols() != seq.k || seq.k >= seq.n {
        failures.push(format!(
            "dimensions: iota is {}x{}, expected n x k with k < n (n = {}, k = {})",
            seq.iota.rows(),
            seq.iota.cols(),
            seq.n,
            seq.k
        ));
        return ValidationReport::from_failures(failures);
    }
    let snf = smith_normal_form(&seq.iota);
    let rank = snf.rank();
    if rank < seq.k {
        failures.push(format!("iota is not injective: rank {rank} < k = {}", seq.k));
    }
    if !snf.all_units() {
        let factors: Vec<String> = snf.diagonal().iter().map(|d| d.to_string()).collect();
        failures.push(format!(
            "cokernel of iota has torsion: invariant factors [{}]",
            factors.join(", ")
        ));
    }
    for i in 0..seq.n {
        let mut e = IntMatrix::zeros(seq.n, 1);
        e.set(i, 0, BigInt::one());
        if seq.iota.hcat(&e).rank() == rank {
            failures.push(format!(
                "coordinate subtorus: e_{} lies in the rational span of iota",
                i + 1
            ));
        }
    }
    ValidationReport::from_failures(failures)
}

pub fn dual_data(seq: &ToriSequence) -> Result<DualData, LatticeError> {
    let report = validate_sequence(seq);
    if !report.passed {
        return Err(LatticeError::InvalidSequence(report.failures.join("; ")));
    }
    let l_basis = integer_kernel(&seq.iota.transpose());
    let quot = l_basis.transpose();
    let completion = snf::unimodular_completion(&quot)
        .map(|rest| rest.transpose())
        .ok_or_else(|| LatticeError::InvalidSequence("kernel basis is not saturated".into()))?;
    Ok(DualData {
        l_basis,
        quot,
        completion,
    })
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<BigRational, LatticeError> {
    let bad = || LatticeError::BadRational(s.to_string());
    let t = s.trim();
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `q - floor(q)`, in `[0, 1)`.
pub fn frac(q: &BigRational) -> BigRational {
    q - BigRational::from_integer(q.numer().div_floor(q.denom()))
}

/// A point of the real torus `R^k / Z^k` with exact rational coordinates,
/// stored reduced into `[0, 1)^k`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalPoint {
    coords: Vec<BigRational>,
}

impl RationalPoint {
    pub fn new(coords: Vec<BigRational>) -> Self {
        RationalPoint {
            coords: coords.iter().map(frac).collect(),
        }
    }

    pub fn zero(k: usize) -> Self {
        RationalPoint {
            coords: vec![BigRational::zero(); k],
        }
    }

    pub fn parse<S: AsRef<str>>(items: &[S]) -> Result<Self, LatticeError> {
        let coords = items
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(coords))
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl fmt::Debug for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl FromStr for RationalPoint {
    type Err = LatticeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let items: Vec<&str> = s.split(',').filter(|x| !x.trim().is_empty()).collect();
        Self::parse(&items)
    }
}

impl Serialize for RationalPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.coords.iter().map(format_rational).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        Self::parse(&v).map_err(serde::de::Error::custom)
    }
}

/// Serde helpers for rationals written as `"p/q"` strings.
pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        format_rational(q).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
            let strs: Vec<String> = v.iter().map(format_rational).collect();
            strs.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| parse_rational(s))
                .collect::<Result<_, _>>()
                .map_err(serde::de::Error::custom)
        }
    }
}

/// Serde helpers for big integers written as decimal strings.
pub mod int_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        v.to_string().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.trim().parse().map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
            let strs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            strs.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| s.trim().parse::<BigInt>())
                .collect::<Result<_, _>>()
                .map_err(serde::de::Error::custom)
        }
    }
}
