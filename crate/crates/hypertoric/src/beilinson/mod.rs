//! The two-node stalk algebras, their tensor powers over faces of an
//! arrangement, central lattice embeddings and corestrictions.

mod model;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{FaceLocalData, Side};
use crate::lattice::snf::solve_rational;
use crate::ncalg::{
    complete, quotient_central, tensor_product, AlgebraMap, Mono, NcError, Poly, Presentation,
    RewriteSystem, TensorProduct,
};

pub use model::{b_multiply, from_poly, to_poly, BElem, Laurent};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BeilinsonError {
    #[error(transparent)]
    Algebra(#[from] NcError),
    #[error("faces {0} and {1} are not adjacent across wall {2}")]
    NotAdjacent(usize, usize, usize),
    #[error("no side given for wall {0}")]
    SideUnspecified(usize),
    #[error("lattice vector {0:?} is not integral in the adapted basis")]
    NotIntegral(Vec<String>),
    #[error("stalk rewriting system is incomplete")]
    IncompleteStalk,
}

/// Which cosheaf: the invertible-monodromy algebra or its degeneration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flavor {
    B,
    B0,
}

/// Completion bound used for stalks; their rewriting systems close up well
/// below it.
const STALK_COMPLETION_DEGREE: u32 = 12;

/// `x: 1 -> 2`, `y: 2 -> 1`, `xy = yx = 0`.
pub fn b0_stalk() -> Presentation {
    let mut p = Presentation::new(&["1", "2"]);
    p.add_generator("x", 0, 1, 1).expect("fresh");
    p.add_generator("y", 1, 0, 1).expect("fresh");
    for w in [["x", "y"], ["y", "x"]] {
        let r = p.expr(&[(1, &w)]).expect("typed");
        p.add_relation(r).expect("homogeneous");
    }
    p
}

/// `x, y` as in [`b0_stalk`], invertible loops `t` at 1 and `tau` at 2 of
/// degree 2, with `t = e1 + yx` and `tau = e2 + xy`.
pub fn b_stalk() -> Presentation {
    let mut p = Presentation::new(&["1", "2"]);
    p.add_generator("x", 0, 1, 1).expect("fresh");
    p.add_generator("y", 1, 0, 1).expect("fresh");
    p.add_invertible("t", 0, 0, 2).expect("fresh");
    p.add_invertible("tau", 1, 1, 2).expect("fresh");
    let r1 = p
        .expr(&[(1, &["t"]), (-1, &["e:1"]), (-1, &["y", "x"])])
        .expect("typed");
    let r2 = p
        .expr(&[(1, &["tau"]), (-1, &["e:2"]), (-1, &["x", "y"])])
        .expect("typed");
    p.add_relation(r1).expect("homogeneous");
    p.add_relation(r2).expect("homogeneous");
    p
}

/// `Z[s, s^-1]` with `s` of degree 2, matching `t` and `tau`.
pub fn laurent_factor() -> Presentation {
    let mut p = Presentation::new(&["*"]);
    p.add_invertible("s", 0, 0, 2).expect("fresh");
    p
}

/// `t + tau`, the image of `s` in the center.
pub fn b_central_generator(p: &Presentation) -> Poly {
    p.expr(&[(1, &["t"]), (1, &["tau"])]).expect("typed")
}

fn b_central_power(p: &Presentation, k: i64) -> Poly {
    let (a, b) = if k >= 0 { ("t", "tau") } else { ("t^-1", "tau^-1") };
    let n = k.unsigned_abs() as usize;
    if n == 0 {
        return p.one();
    }
    let wa = vec![a; n];
    let wb = vec![b; n];
    p.expr(&[(1, &wa), (1, &wb)]).expect("typed")
}

/// `t^k + tau^k` for `|k| <= d`, ordered by `k`.
pub fn b_center_basis(d: u32) -> Vec<BElem> {
    let d = d as i64;
    (-d..=d)
        .map(|k| {
            BElem::t_pow(k)
                .add(&BElem::tau_pow(k))
                .expect("small coefficients")
        })
        .collect()
}

/// The same elements as polynomials in [`b_stalk`].
pub fn b_center_polys(d: u32) -> Vec<Poly> {
    let p = b_stalk();
    let d = d as i64;
    (-d..=d).map(|k| b_central_power(&p, k)).collect()
}

/// `B` with the central generator set to 1.
pub fn b_reduce() -> Result<Presentation, BeilinsonError> {
    let p = b_stalk();
    let rw = complete(&p, STALK_COMPLETION_DEGREE)?;
    let z = b_central_generator(&p).sub(&p.one())?;
    Ok(quotient_central(&rw, &[z])?)
}

/// What a tensor factor of a stalk stands for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorLabel {
    /// The two-node factor of an active hyperplane family.
    Wall { family: usize },
    /// A Laurent factor for a free direction (a row of the adapted
    /// splitting).
    Free {
        #[serde(with = "crate::lattice::int_serde::vec")]
        direction: Vec<BigInt>,
    },
}

impl FactorLabel {
    pub fn name(&self, j: usize) -> String {
        match self {
            FactorLabel::Wall { family } => format!("H{family}"),
            FactorLabel::Free { .. } => format!("s{j}"),
        }
    }
}

/// Stalk at a face: a tensor product of one two-node factor per active wall
/// (ordered by family) and, for flavor `B`, one Laurent factor per free
/// direction.
#[derive(Clone, Debug)]
pub struct StalkAlgebra {
    pub flavor: Flavor,
    pub local: FaceLocalData,
    pub labeling: Vec<FactorLabel>,
    pub tensor: TensorProduct,
    pub rewrite: RewriteSystem,
}

impl StalkAlgebra {
    pub fn pres(&self) -> &Presentation {
        &self.tensor.pres
    }

    fn wall_factor(&self, family: usize) -> Option<usize> {
        self.labeling
            .iter()
            .position(|l| *l == FactorLabel::Wall { family })
    }

    /// Graded dimensions up to `d`.
    pub fn dims(&self, d: u32) -> Result<Vec<usize>, NcError> {
        Ok(self.rewrite.basis(d)?.dims())
    }
}

pub fn stalk_algebra(fld: &FaceLocalData, flavor: Flavor) -> Result<StalkAlgebra, BeilinsonError> {
    let wall = match flavor {
        Flavor::B => b_stalk(),
        Flavor::B0 => b0_stalk(),
    };
    let lf = laurent_factor();
    let mut labeling: Vec<FactorLabel> = fld
        .active
        .iter()
        .map(|a| FactorLabel::Wall { family: a.family })
        .collect();
    if flavor == Flavor::B {
        labeling.extend(
            fld.free_directions
                .row_vecs()
                .into_iter()
                .map(|direction| FactorLabel::Free { direction }),
        );
    }
    let names: Vec<String> = labeling.iter().enumerate().map(|(j, l)| l.name(j)).collect();
    let factors: Vec<(&str, &Presentation)> = labeling
        .iter()
        .zip(&names)
        .map(|(l, n)| {
            let p = match l {
                FactorLabel::Wall { .. } => &wall,
                FactorLabel::Free { .. } => &lf,
            };
            (n.as_str(), p)
        })
        .collect();
    let tensor = tensor_product(&factors);
    let rewrite = complete(&tensor.pres, STALK_COMPLETION_DEGREE)?;
    if !rewrite.fully_complete {
        return Err(BeilinsonError::IncompleteStalk);
    }
    Ok(StalkAlgebra {
        flavor,
        local: fld.clone(),
        labeling,
        tensor,
        rewrite,
    })
}

/// Coordinates of `ell` in the adapted splitting.
pub fn adapted_coordinates(fld: &FaceLocalData, ell: &[BigInt]) -> Result<Vec<i64>, BeilinsonError> {
    let rhs: Vec<BigRational> = ell.iter().map(|x| BigRational::from(x.clone())).collect();
    let not_integral = || BeilinsonError::NotIntegral(ell.iter().map(|x| x.to_string()).collect());
    // ell = a * S, i.e. S^T a = ell
    let a = solve_rational(&fld.adapted_splitting.transpose(), &rhs).ok_or_else(not_integral)?;
    a.iter()
        .map(|q| {
            if q.is_integer() {
                q.to_integer().to_i64().ok_or(BeilinsonError::Algebra(NcError::Overflow))
            } else {
                Err(not_integral())
            }
        })
        .collect()
}

/// Image of the lattice vector `ell` in the center of a `B`-flavor stalk:
/// the product of powers of the factors' central generators (`t + tau` for a
/// wall factor, `s` for a free one) with exponents the adapted coordinates.
pub fn central_embed(stalk: &StalkAlgebra, ell: &[BigInt]) -> Result<Poly, BeilinsonError> {
    let coords = adapted_coordinates(&stalk.local, ell)?;
    let b = b_stalk();
    let lf = laurent_factor();
    let mut acc = stalk.pres().one();
    for (i, (label, &k)) in stalk.labeling.iter().zip(&coords).enumerate() {
        if k == 0 {
            continue;
        }
        let local = match label {
            FactorLabel::Wall { .. } => b_central_power(&b, k),
            FactorLabel::Free { .. } => {
                let g = if k > 0 { "s" } else { "s^-1" };
                let w = vec![g; k.unsigned_abs() as usize];
                lf.expr(&[(1, &w)])?
            }
        };
        acc = acc.mul(&stalk.tensor.lift(i, &local))?;
    }
    Ok(stalk.rewrite.normal_form(&acc)?)
}

/// Node of a wall factor that the given side of the wall corestricts to:
/// the negative side goes to node 1 (`t`), the positive side to node 2
/// (`tau`).
pub fn side_node(side: Side) -> usize {
    match side {
        Side::Negative => 0,
        Side::Positive => 1,
    }
}

/// Corestriction from the stalk of a face `F` to the stalk of a face `G` one
/// step deeper, where `wall` is the family active at `G` but not at `F` and
/// `side` is the side of that wall `F` lies on.
///
/// Shared wall factors map identically (placed at the side node of the new
/// factor); a free factor of `F` with direction `ell` maps to the
/// corresponding corner of the central image of `ell` in `G`. The unit of
/// `F` maps to an idempotent, so the map is non-unital in general.
pub fn corestriction(
    f: &StalkAlgebra,
    g: &StalkAlgebra,
    wall: usize,
    side: Option<Side>,
) -> Result<AlgebraMap, BeilinsonError> {
    let side = side.ok_or(BeilinsonError::SideUnspecified(wall))?;
    let not_adjacent = || BeilinsonError::NotAdjacent(f.local.face, g.local.face, wall);
    let f_walls: Vec<usize> = f.local.active.iter().map(|a| a.family).collect();
    let g_walls: Vec<usize> = g.local.active.iter().map(|a| a.family).collect();
    let mut expected = f_walls.clone();
    expected.push(wall);
    expected.sort();
    if f_walls.contains(&wall) || expected != g_walls || f.flavor != g.flavor {
        return Err(not_adjacent());
    }
    let new_factor = g.wall_factor(wall).ok_or_else(not_adjacent)?;
    // factor of G for each factor of F (None for free factors)
    let factor_map: Vec<Option<usize>> = f
        .labeling
        .iter()
        .map(|l| match l {
            FactorLabel::Wall { family } => g.wall_factor(*family),
            FactorLabel::Free { .. } => None,
        })
        .collect();
    let g_tuple = |ft: &[usize]| -> Vec<usize> {
        let mut t = vec![0; g.labeling.len()];
        t[new_factor] = side_node(side);
        for (i, gi) in factor_map.iter().enumerate() {
            if let Some(j) = gi {
                t[*j] = ft[i];
            }
        }
        t
    };
    let vertices: Vec<usize> = f
        .tensor
        .tuples
        .iter()
        .map(|ft| g.tensor.vertex_of(&g_tuple(ft)).expect("tuple in range"))
        .collect();
    let mut central_cache: HashMap<(usize, bool), Poly> = HashMap::new();
    let mut generators = Vec::with_capacity(f.pres().generators.len());
    for (gi, (i, k, ctx)) in f.tensor.origin.iter().enumerate() {
        let gen = &f.pres().generators[gi];
        let src = vertices[gen.source] as u32;
        match (&f.labeling[*i], factor_map[*i]) {
            (FactorLabel::Wall { .. }, Some(j)) => {
                let gctx = g_tuple(ctx);
                let c = g.tensor.copy_of(j, *k, &gctx).expect("shared factor copy");
                generators.push(g.pres().generator(c));
            }
            (FactorLabel::Free { direction }, _) => {
                // generator 0 is s, generator 1 its inverse
                let inverse = *k == 1;
                let key = (*i, inverse);
                if !central_cache.contains_key(&key) {
                    let ell: Vec<BigInt> = if inverse {
                        direction.iter().map(|x| -x).collect()
                    } else {
                        direction.clone()
                    };
                    central_cache.insert(key, central_embed(g, &ell)?);
                }
                generators.push(central_cache[&key].corner(src, src));
            }
            _ => return Err(not_adjacent()),
        }
    }
    let map = AlgebraMap {
        vertices,
        generators,
    };
    map.check_typed(f.pres(), g.pres())?;
    Ok(map)
}

/// Whether `map` kills every relation of `a` (including inverse pairs)
/// modulo `b`.
pub fn is_homomorphism(
    a: &Presentation,
    b: &RewriteSystem,
    map: &AlgebraMap,
) -> Result<bool, NcError> {
    for r in a.all_relations() {
        if !b.reduce(&map.apply(&r)?)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sum of the idempotents a corestriction sends the unit to.
pub fn image_of_unit(map: &AlgebraMap) -> Poly {
    let mut vs = map.vertices.clone();
    vs.sort();
    vs.dedup();
    vs.into_iter()
        .map(|v| (Mono::idempotent(v as u32), 1))
        .collect()
}

/// Powers with exponent zero or an empty lattice vector give the unit.
pub fn is_unit(stalk: &StalkAlgebra, p: &Poly) -> bool {
    *p == stalk.pres().one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_completes_and_matches_model_basis() {
        let p = b_stalk();
        let rw = complete(&p, STALK_COMPLETION_DEGREE).unwrap();
        assert!(rw.fully_complete);
        let basis = rw.basis(8).unwrap();
        // Each corner is free of rank one over Z[s, s^-1]. On the diagonal
        // s^k and s^-k first appear in degree 2|k|; off the diagonal the
        // extra arrow adds one, so every corner gains two words per degree.
        let dims = basis.dims();
        assert_eq!(&dims[..2], &[2, 2]);
        assert!(dims[2..].iter().all(|&n| n == 4), "{dims:?}");
        for m in &basis.monos {
            let e = from_poly(&p, &Poly::mono(m.clone())).unwrap();
            assert_eq!(to_poly(&rw, &e).unwrap(), Poly::mono(m.clone()));
        }
    }

    #[test]
    fn stalk_products() {
        let p = b_stalk();
        let rw = complete(&p, STALK_COMPLETION_DEGREE).unwrap();
        let yx = rw.normal_form(&p.expr(&[(1, &["y", "x"])]).unwrap()).unwrap();
        let t_minus = rw
            .normal_form(&p.expr(&[(1, &["t"]), (-1, &["e:1"])]).unwrap())
            .unwrap();
        assert_eq!(yx, t_minus);
        let tt = rw.normal_form(&p.expr(&[(1, &["t", "t^-1"])]).unwrap()).unwrap();
        assert_eq!(tt, p.idempotent(0));
    }

    #[test]
    fn reduce_kills_u() {
        let r = b_reduce().unwrap();
        let rw = complete(&r, 8).unwrap();
        assert_eq!(rw.basis(4).unwrap().dims(), vec![2, 2, 0, 0, 0]);
        let u = r.expr(&[(1, &["t"]), (-1, &["e:1"])]).unwrap();
        assert!(rw.normal_form(&u).unwrap().is_zero());
        let x = r.expr(&[(1, &["x"])]).unwrap();
        assert!(!rw.normal_form(&x).unwrap().is_zero());
    }
}
