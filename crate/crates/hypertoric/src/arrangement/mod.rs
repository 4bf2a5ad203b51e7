//! The periodic hyperplane arrangement on the dual Lie algebra of `G` and its
//! quotient on the torus.
//!
//! A family `i` is the set of walls `{u : alpha_i . u + o_i in Z}`. Lifted
//! cells are labelled by integer vectors `h`, one entry per family:
//! `h_i = 2m` on the wall `alpha_i . u + o_i = m`, `h_i = 2m + 1` strictly
//! between walls `m` and `m + 1`. Translation by `lambda in Z^d` adds
//! `2 alpha_i . lambda` to `h_i`.

pub mod fm;
mod faces;
mod polytope;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{
    format_rational, int_serde, rational_serde, snf, IntMatrix, LatticeError, RationalPoint,
    ToriSequence, ValidationReport,
};

pub use faces::{
    deck_act, enumerate_faces, face_local_data, lifted_cells_in_box, ActiveWall, Face,
    FaceLocalData, FacePoset, Incidence, LiftedCell, LiftedFace, Side, Square,
};
pub use polytope::{chamber_polytope, Facet, PolytopeDescription};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArrangementError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("non-generic arrangement: {}", .0.join("; "))]
    NonGeneric(Vec<String>),
    #[error("active conormals at face {0} do not extend to a Z-basis")]
    NonUnimodularFlat(usize),
    #[error("no face with index {0}")]
    NoSuchFace(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallKind {
    /// A family coming from a coordinate subtorus.
    Hyperplane,
    /// An auxiliary coordinate cut `u_j - c_j in Z` used to subdivide cells.
    Cut,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    #[serde(with = "int_serde::vec")]
    pub conormal: Vec<BigInt>,
    #[serde(with = "rational_serde")]
    pub offset: BigRational,
    pub kind: WallKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicArrangement {
    pub d: usize,
    pub families: Vec<Family>,
}

impl PeriodicArrangement {
    pub fn new(d: usize, families: Vec<Family>) -> Result<Self, ArrangementError> {
        if let Some(i) = families.iter().position(|f| f.conormal.len() != d) {
            return Err(LatticeError::Dimension(format!("family {i} conormal length != {d}")).into());
        }
        Ok(PeriodicArrangement { d, families })
    }

    /// Convenience constructor from machine integers and rationals.
    pub fn from_i64(d: usize, fams: &[(Vec<i64>, BigRational)]) -> Result<Self, ArrangementError> {
        let families = fams
            .iter()
            .map(|(a, o)| Family {
                conormal: a.iter().map(|&x| BigInt::from(x)).collect(),
                offset: o.clone(),
                kind: WallKind::Hyperplane,
            })
            .collect();
        Self::new(d, families)
    }

    pub fn n(&self) -> usize {
        self.families.len()
    }

    /// `n x d` matrix whose rows are the conormals.
    pub fn conormal_matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(
            self.d,
            self.families.iter().map(|f| f.conormal.clone()).collect(),
        )
    }

    /// Indices of the hyperplane (non-cut) families.
    pub fn hyperplane_families(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.families[i].kind == WallKind::Hyperplane)
            .collect()
    }

    /// Adds the coordinate cuts `u_j - shift_j in Z`, one per coordinate.
    pub fn with_cuts(&self, shift: &[BigRational]) -> PeriodicArrangement {
        assert_eq!(shift.len(), self.d);
        let mut families = self.families.clone();
        for (j, c) in shift.iter().enumerate() {
            let mut conormal = vec![BigInt::zero(); self.d];
            conormal[j] = BigInt::from(1);
            families.push(Family {
                conormal,
                offset: -c.clone(),
                kind: WallKind::Cut,
            });
        }
        PeriodicArrangement { d: self.d, families }
    }

    /// `alpha_i . u + o_i`.
    pub fn value(&self, i: usize, u: &[BigRational]) -> BigRational {
        let f = &self.families[i];
        f.conormal
            .iter()
            .zip(u)
            .fold(f.offset.clone(), |acc, (a, x)| {
                acc + BigRational::from_integer(a.clone()) * x
            })
    }

    /// Cell label of a point of the lift.
    pub fn label_of(&self, u: &[BigRational]) -> Vec<BigInt> {
        (0..self.n())
            .map(|i| {
                let v = self.value(i, u);
                let fl = v.floor().to_integer();
                if v.is_integer() {
                    fl * 2
                } else {
                    fl * 2 + 1
                }
            })
            .collect()
    }
}

pub fn build_arrangement(
    seq: &ToriSequence,
    beta: &RationalPoint,
) -> Result<PeriodicArrangement, ArrangementError> {
    let dual = seq.dual_data()?;
    if beta.dim() != seq.k {
        return Err(LatticeError::Dimension(format!(
            "beta has {} coordinates, expected k = {}",
            beta.dim(),
            seq.k
        ))
        .into());
    }
    let offsets = if seq.k == 0 {
        vec![BigRational::zero(); seq.n]
    } else {
        snf::solve_rational(&seq.iota.transpose(), beta.coords()).ok_or(LatticeError::NoLift)?
    };
    let families = (0..seq.n)
        .map(|i| Family {
            conormal: dual.l_basis.row(i),
            offset: offsets[i].clone(),
            kind: WallKind::Hyperplane,
        })
        .collect();
    PeriodicArrangement::new(seq.d(), families)
}

/// Checks normal crossings at every face of the torus arrangement, that
/// hyperplane conormals at each face extend to a Z-basis, and that no two
/// parallel families share a wall. Cut families are only required to cross
/// normally.
pub fn genericity_check(arr: &PeriodicArrangement) -> ValidationReport {
    let mut failures = Vec::new();
    for (i, f) in arr.families.iter().enumerate() {
        if f.conormal.iter().all(Zero::is_zero) {
            failures.push(format!("family {i} has zero conormal"));
        }
    }
    if !failures.is_empty() {
        return ValidationReport::from_failures(failures);
    }
    let zero = vec![BigRational::zero(); arr.d];
    let one = vec![BigRational::from_integer(1.into()); arr.d];
    for cell in lifted_cells_in_box(arr, &zero, &one, true) {
        let active: Vec<usize> = (0..arr.n())
            .filter(|&i| (&cell.label[i] % 2u32).is_zero())
            .collect();
        if active.is_empty() {
            continue;
        }
        let at = cell
            .point
            .iter()
            .map(format_rational)
            .collect::<Vec<_>>()
            .join(", ");
        for (x, &i) in active.iter().enumerate() {
            for &j in &active[x + 1..] {
                if parallel(&arr.families[i].conormal, &arr.families[j].conormal) {
                    failures.push(format!(
                        "parallel families {i} and {j} share a wall at ({at})"
                    ));
                }
            }
        }
        let m = IntMatrix::from_rows(
            arr.d,
            active.iter().map(|&i| arr.families[i].conormal.clone()).collect(),
        );
        let r = m.rank();
        if r != active.len() {
            failures.push(format!(
                "flat at ({at}) with active walls {active:?} has codim {r} < {}",
                active.len()
            ));
            continue;
        }
        let hyp: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&i| arr.families[i].kind == WallKind::Hyperplane)
            .collect();
        if !hyp.is_empty() {
            let mh = IntMatrix::from_rows(
                arr.d,
                hyp.iter().map(|&i| arr.families[i].conormal.clone()).collect(),
            );
            if !snf::rows_extend_to_basis(&mh) {
                failures.push(format!(
                    "conormals of walls {hyp:?} at ({at}) do not extend to a Z-basis"
                ));
            }
        }
    }
    let mut unique: Vec<String> = Vec::new();
    for f in failures {
        if !unique.contains(&f) {
            unique.push(f);
        }
    }
    let failures = unique;
    ValidationReport::from_failures(failures)
}

fn parallel(a: &[BigInt], b: &[BigInt]) -> bool {
    // 2x2 minors vanish
    for p in 0..a.len() {
        for q in p + 1..a.len() {
            if &a[p] * &b[q] != &a[q] * &b[p] {
                return false;
            }
        }
    }
    true
}
