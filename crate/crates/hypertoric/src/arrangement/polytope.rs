//! Closure of a lifted chamber, read off from the cover relation.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::faces::{FacePoset, LiftedFace, Side};
use crate::lattice::{int_serde, rational_serde};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facet {
    pub family: usize,
    /// The facet lies on `alpha . u + o = m`.
    #[serde(with = "int_serde")]
    pub m: BigInt,
    #[serde(with = "int_serde::vec")]
    pub outward: Vec<BigInt>,
    pub face: LiftedFace,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub face: LiftedFace,
    #[serde(with = "rational_serde::vec")]
    pub coords: Vec<BigRational>,
}

/// The canonical lift of a chamber. When the conormals do not span, the
/// chamber contains lines; `lineality_dim` records how many and `bounded`
/// is false.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeDescription {
    pub chamber: usize,
    pub bounded: bool,
    pub lineality_dim: usize,
    pub vertices: Vec<Vertex>,
    pub facets: Vec<Facet>,
    /// Every lifted face of the closure, the chamber included.
    pub closure: Vec<LiftedFace>,
}

pub fn chamber_polytope(poset: &FacePoset, chamber: usize) -> PolytopeDescription {
    let d = poset.d();
    assert!(poset.faces[chamber].is_chamber(), "face {chamber} is not a chamber");
    let rank = poset.arrangement.conormal_matrix().rank();
    let start = LiftedFace {
        face: chamber,
        shift: vec![BigInt::from(0); d],
    };
    let mut seen: BTreeSet<(usize, Vec<BigInt>)> = BTreeSet::new();
    seen.insert((start.face, start.shift.clone()));
    let mut queue = vec![start];
    let mut closure = Vec::new();
    let mut facets = Vec::new();
    while let Some(u) = queue.pop() {
        for k in poset.incidences_below(u.face) {
            let inc = &poset.incidences[k];
            let shift: Vec<BigInt> = u.shift.iter().zip(&inc.shift).map(|(a, b)| a - b).collect();
            let lower = LiftedFace {
                face: inc.lower,
                shift,
            };
            if u.face == chamber && u.shift.iter().all(|x| x == &BigInt::from(0)) {
                let fam = &poset.arrangement.families[inc.wall];
                let outward: Vec<BigInt> = match inc.side {
                    Side::Positive => fam.conormal.iter().map(|a| -a).collect(),
                    Side::Negative => fam.conormal.clone(),
                };
                let m = poset.label(&lower)[inc.wall].clone() / 2;
                facets.push(Facet {
                    family: inc.wall,
                    m,
                    outward,
                    face: lower.clone(),
                });
            }
            if seen.insert((lower.face, lower.shift.clone())) {
                queue.push(lower);
            }
        }
        closure.push(u);
    }
    closure.sort_by(|a, b| (a.face, &a.shift).cmp(&(b.face, &b.shift)));
    facets.sort_by(|a, b| (a.family, &a.m).cmp(&(b.family, &b.m)));
    let vertices: Vec<Vertex> = closure
        .iter()
        .filter(|lf| poset.faces[lf.face].dim == 0)
        .map(|lf| Vertex {
            face: lf.clone(),
            coords: poset.faces[lf.face]
                .rep_point
                .iter()
                .zip(&lf.shift)
                .map(|(x, s)| x + BigRational::from_integer(s.clone()))
                .collect(),
        })
        .collect();
    PolytopeDescription {
        chamber,
        bounded: rank == d,
        lineality_dim: d - rank,
        vertices,
        facets,
        closure,
    }
}

impl PolytopeDescription {
    /// Whether `u` satisfies every facet inequality (closed polytope).
    pub fn contains(&self, poset: &FacePoset, u: &[BigRational]) -> bool {
        self.facets.iter().all(|f| {
            let v = poset.arrangement.value(f.family, u) - BigRational::from_integer(f.m.clone());
            // outward = +alpha means the chamber is below the wall
            if f.outward == poset.arrangement.families[f.family].conormal {
                v <= BigRational::from_integer(0.into())
            } else {
                v >= BigRational::from_integer(0.into())
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build_arrangement, enumerate_faces, PeriodicArrangement};
    use super::*;
    use crate::lattice::{RationalPoint, ToriSequence};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn circle_segment() {
        let arr = build_arrangement(&ToriSequence::trivial(1), &RationalPoint::zero(0)).unwrap();
        let p = enumerate_faces(&arr).unwrap();
        let poly = chamber_polytope(&p, p.chambers()[0]);
        assert!(poly.bounded);
        let coords: Vec<_> = poly.vertices.iter().map(|v| v.coords[0].clone()).collect();
        assert_eq!(coords.len(), 2);
        assert!(coords.contains(&q(0, 1)) && coords.contains(&q(1, 1)));
        // Both endpoints are the same torus vertex.
        assert_eq!(poly.vertices[0].face.face, poly.vertices[1].face.face);
        assert_eq!(poly.facets.len(), 2);
    }

    #[test]
    fn two_point_arcs() {
        let seq = ToriSequence::from_columns_i64(2, &[vec![1, 1]]).unwrap();
        let arr = build_arrangement(&seq, &RationalPoint::new(vec![q(1, 3)])).unwrap();
        let p = enumerate_faces(&arr).unwrap();
        for c in p.chambers() {
            let poly = chamber_polytope(&p, c);
            let ends: BTreeSet<usize> = poly.vertices.iter().map(|v| v.face.face).collect();
            assert_eq!(ends.len(), 2);
        }
    }

    #[test]
    fn square_closure_lattice() {
        let arr =
            PeriodicArrangement::from_i64(2, &[(vec![1, 0], q(1, 3)), (vec![0, 1], q(2, 5))])
                .unwrap();
        let p = enumerate_faces(&arr).unwrap();
        let poly = chamber_polytope(&p, p.chambers()[0]);
        assert_eq!(poly.vertices.len(), 4);
        assert_eq!(poly.facets.len(), 4);
        assert_eq!(poly.closure.len(), 9);
        for v in &poly.vertices {
            assert!(poly.contains(&p, &v.coords));
        }
    }

    #[test]
    fn empty_line_is_recession() {
        let arr = PeriodicArrangement::new(1, vec![]).unwrap();
        let p = enumerate_faces(&arr).unwrap();
        let poly = chamber_polytope(&p, 0);
        assert!(!poly.bounded);
        assert_eq!(poly.lineality_dim, 1);
        assert!(poly.facets.is_empty());
    }
}
