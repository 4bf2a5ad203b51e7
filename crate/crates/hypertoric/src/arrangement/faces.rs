//! Face enumeration of the torus arrangement, covers, deck action and
//! per-face local splittings.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::fm::{feasible_point, Constraint, Rel};
use super::{genericity_check, ArrangementError, PeriodicArrangement, WallKind};
use crate::lattice::{int_serde, rational_serde, smith_normal_form, snf, IntMatrix, SmithForm};

/// A lifted cell: its label and a point of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedCell {
    pub label: Vec<BigInt>,
    pub point: Vec<BigRational>,
}

fn rat(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

fn family_constraint(
    arr: &PeriodicArrangement,
    i: usize,
    shift: &BigInt,
    negate: bool,
    rel: Rel,
) -> Constraint {
    // alpha . u + o - shift  (or its negative)
    let f = &arr.families[i];
    let mut coeffs: Vec<BigRational> = f.conormal.iter().map(rat).collect();
    let mut constant = &f.offset - rat(shift);
    if negate {
        coeffs.iter_mut().for_each(|c| *c = -c.clone());
        constant = -constant;
    }
    Constraint::new(coeffs, constant, rel)
}

/// Constraints cutting out the lifted cell with label `h` (restricted to the
/// first `h.len()` families).
pub(crate) fn label_constraints(arr: &PeriodicArrangement, h: &[BigInt]) -> Vec<Constraint> {
    let mut out = Vec::new();
    for (i, hi) in h.iter().enumerate() {
        let (m, r) = hi.div_mod_floor(&BigInt::from(2));
        if r.is_zero() {
            out.push(family_constraint(arr, i, &m, false, Rel::Eq));
        } else {
            out.push(family_constraint(arr, i, &m, false, Rel::Gt));
            out.push(family_constraint(arr, i, &(&m + 1), true, Rel::Gt));
        }
    }
    out
}

fn box_constraints(d: usize, lo: &[BigRational], hi: &[BigRational], half_open: bool) -> Vec<Constraint> {
    let mut out = Vec::new();
    for j in 0..d {
        let mut e = vec![BigRational::zero(); d];
        e[j] = BigRational::one();
        out.push(Constraint::new(e.clone(), -lo[j].clone(), Rel::Ge));
        let neg: Vec<BigRational> = e.iter().map(|x| -x.clone()).collect();
        let rel = if half_open { Rel::Gt } else { Rel::Ge };
        out.push(Constraint::new(neg, hi[j].clone(), rel));
    }
    out
}

/// Every lifted cell meeting the box `lo <= u <= hi` (or `lo <= u < hi` when
/// `half_open`), sorted by label. Each point returned lies in the box.
pub fn lifted_cells_in_box(
    arr: &PeriodicArrangement,
    lo: &[BigRational],
    hi: &[BigRational],
    half_open: bool,
) -> Vec<LiftedCell> {
    let d = arr.d;
    let base = box_constraints(d, lo, hi, half_open);
    let mut partial: Vec<(Vec<BigInt>, Vec<Constraint>)> = vec![(Vec::new(), base)];
    for i in 0..arr.n() {
        let f = &arr.families[i];
        let mut vmin = f.offset.clone();
        let mut vmax = f.offset.clone();
        for (j, a) in f.conormal.iter().enumerate() {
            let x = rat(a) * &lo[j];
            let y = rat(a) * &hi[j];
            if x <= y {
                vmin += x;
                vmax += y;
            } else {
                vmin += y;
                vmax += x;
            }
        }
        let fl = vmin.floor().to_integer();
        let ce = vmax.ceil().to_integer();
        let mut candidates: Vec<(BigInt, Vec<Constraint>)> = Vec::new();
        let mut m = fl.clone();
        while m <= ce {
            if rat(&m) >= vmin && rat(&m) <= vmax {
                candidates.push((
                    &m * 2,
                    vec![family_constraint(arr, i, &m, false, Rel::Eq)],
                ));
            }
            if m < ce {
                candidates.push((
                    &m * 2 + 1,
                    vec![
                        family_constraint(arr, i, &m, false, Rel::Gt),
                        family_constraint(arr, i, &(&m + 1), true, Rel::Gt),
                    ],
                ));
            }
            m += 1;
        }
        let mut next = Vec::new();
        for (label, cons) in &partial {
            for (h, extra) in &candidates {
                let mut c2 = cons.clone();
                c2.extend(extra.iter().cloned());
                if feasible_point(d, &c2).is_some() {
                    let mut l2 = label.clone();
                    l2.push(h.clone());
                    next.push((l2, c2));
                }
            }
        }
        partial = next;
    }
    let mut cells: Vec<LiftedCell> = partial
        .into_iter()
        .map(|(label, cons)| {
            let point = feasible_point(d, &cons).expect("feasible cell lost its point");
            LiftedCell { label, point }
        })
        .collect();
    cells.sort_by(|a, b| a.label.cmp(&b.label));
    cells
}

/// Quotient of labels by the deck action `h -> h + 2 A lambda`.
#[derive(Clone, Debug)]
struct OrbitIndex {
    snf: SmithForm,
    diag: Vec<BigInt>,
    rows: usize,
}

impl OrbitIndex {
    fn new(a: &IntMatrix) -> Self {
        let snf = smith_normal_form(a);
        let diag = snf.diagonal();
        OrbitIndex {
            snf,
            diag,
            rows: a.rows(),
        }
    }

    fn halves(h: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
        let two = BigInt::from(2);
        h.iter().map(|x| x.div_mod_floor(&two)).unzip()
    }

    fn reduced(&self, w: &[BigInt]) -> Vec<BigInt> {
        if self.rows == 0 {
            return Vec::new();
        }
        self.snf.u_inv.mul_vec(w)
    }

    /// Parity vector followed by the class of `floor(h/2)` modulo the
    /// column span of `A`.
    fn key(&self, h: &[BigInt]) -> Vec<BigInt> {
        let (w, parity) = Self::halves(h);
        let y = self.reduced(&w);
        let mut key = parity;
        for (i, yi) in y.iter().enumerate() {
            match self.diag.get(i) {
                Some(di) if !di.is_zero() => key.push(yi.mod_floor(di)),
                _ => key.push(yi.clone()),
            }
        }
        key
    }

    /// `lambda` with `to = from + 2 A lambda`, if any.
    fn translation(&self, from: &[BigInt], to: &[BigInt]) -> Option<Vec<BigInt>> {
        let (wf, pf) = Self::halves(from);
        let (wt, pt) = Self::halves(to);
        if pf != pt {
            return None;
        }
        let diff: Vec<BigInt> = wt.iter().zip(&wf).map(|(a, b)| a - b).collect();
        let y = self.reduced(&diff);
        let d = self.snf.v.rows();
        let mut z = vec![BigInt::zero(); d];
        for (i, yi) in y.iter().enumerate() {
            match self.diag.get(i) {
                Some(di) if !di.is_zero() => {
                    let (q, r) = yi.div_rem(di);
                    if !r.is_zero() {
                        return None;
                    }
                    z[i] = q;
                }
                _ => {
                    if !yi.is_zero() {
                        return None;
                    }
                }
            }
        }
        Some(self.snf.v_inv.mul_vec(&z))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveWall {
    pub family: usize,
    #[serde(with = "int_serde")]
    pub m: BigInt,
}

/// A face of the torus arrangement, stored through its canonical lift.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub index: usize,
    #[serde(with = "int_serde::vec")]
    pub label: Vec<BigInt>,
    /// Walls `alpha_i . u + o_i = m` containing the canonical lift.
    pub active: Vec<ActiveWall>,
    /// For inactive families: `m < alpha_i . u + o_i < m + 1`.
    pub sign_vector: Vec<ActiveWall>,
    #[serde(with = "rational_serde::vec")]
    pub rep_point: Vec<BigRational>,
    pub dim: usize,
    pub codim: usize,
}

impl Face {
    pub fn is_chamber(&self) -> bool {
        self.codim == 0
    }

    pub fn active_families(&self) -> Vec<usize> {
        self.active.iter().map(|w| w.family).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Side {
    pub fn sign(self) -> i64 {
        match self {
            Side::Positive => 1,
            Side::Negative => -1,
        }
    }

    pub fn both() -> [Side; 2] {
        [Side::Positive, Side::Negative]
    }
}

/// `upper` covers `lower` across `wall`, lying on `side` of it. The lift of
/// `upper` adjacent to the canonical lift of `lower` is the canonical lift of
/// `upper` translated by `shift`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Incidence {
    pub upper: usize,
    pub lower: usize,
    pub wall: usize,
    pub side: Side,
    #[serde(with = "int_serde::vec")]
    pub shift: Vec<BigInt>,
}

/// A codimension-two square `lower < mid_a, mid_b < upper`. `path_a` leaves
/// `walls[0]` first, `path_b` leaves `walls[1]` first; each lists the
/// incidence indices bottom-up.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Square {
    pub lower: usize,
    pub upper: usize,
    pub walls: [usize; 2],
    pub sides: [Side; 2],
    pub path_a: [usize; 2],
    pub path_b: [usize; 2],
}

/// A face of the lifted arrangement: a torus face and a deck translation
/// of its canonical lift.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LiftedFace {
    pub face: usize,
    #[serde(with = "int_serde::vec")]
    pub shift: Vec<BigInt>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FacePoset {
    pub arrangement: PeriodicArrangement,
    pub faces: Vec<Face>,
    pub incidences: Vec<Incidence>,
    pub squares: Vec<Square>,
    #[serde(skip)]
    index: OrbitIndex,
    #[serde(skip)]
    by_key: HashMap<Vec<BigInt>, usize>,
    #[serde(skip)]
    by_cover: HashMap<(usize, usize, Side), usize>,
}

impl FacePoset {
    pub fn d(&self) -> usize {
        self.arrangement.d
    }

    pub fn chambers(&self) -> Vec<usize> {
        self.faces
            .iter()
            .filter(|f| f.is_chamber())
            .map(|f| f.index)
            .collect()
    }

    pub fn faces_of_dim(&self, dim: usize) -> Vec<usize> {
        self.faces
            .iter()
            .filter(|f| f.dim == dim)
            .map(|f| f.index)
            .collect()
    }

    /// Label of a lifted face.
    pub fn label(&self, lf: &LiftedFace) -> Vec<BigInt> {
        let a = self.arrangement.conormal_matrix();
        let t = a.mul_vec(&lf.shift);
        self.faces[lf.face]
            .label
            .iter()
            .zip(&t)
            .map(|(h, x)| h + x * 2)
            .collect()
    }

    /// The lifted face with the given label, if it is one.
    pub fn locate(&self, label: &[BigInt]) -> Option<LiftedFace> {
        let face = *self.by_key.get(&self.index.key(label))?;
        let shift = self.index.translation(&self.faces[face].label, label)?;
        Some(LiftedFace { face, shift })
    }

    /// The incidence where `lower` is left across `wall` towards `side`.
    pub fn incidence(&self, lower: usize, wall: usize, side: Side) -> Option<usize> {
        self.by_cover.get(&(lower, wall, side)).copied()
    }

    pub fn incidences_above(&self, lower: usize) -> Vec<usize> {
        (0..self.incidences.len())
            .filter(|&k| self.incidences[k].lower == lower)
            .collect()
    }

    pub fn incidences_below(&self, upper: usize) -> Vec<usize> {
        (0..self.incidences.len())
            .filter(|&k| self.incidences[k].upper == upper)
            .collect()
    }

    /// Euler characteristic of the face decomposition.
    pub fn euler_sum(&self) -> i64 {
        self.faces
            .iter()
            .map(|f| if f.dim % 2 == 0 { 1 } else { -1 })
            .sum()
    }
}

pub fn deck_act(_poset: &FacePoset, lambda: &[BigInt], lf: &LiftedFace) -> LiftedFace {
    LiftedFace {
        face: lf.face,
        shift: lf.shift.iter().zip(lambda).map(|(a, b)| a + b).collect(),
    }
}

fn parse_label(label: &[BigInt]) -> (Vec<ActiveWall>, Vec<ActiveWall>) {
    let two = BigInt::from(2);
    let mut active = Vec::new();
    let mut between = Vec::new();
    for (family, h) in label.iter().enumerate() {
        let (m, r) = h.div_mod_floor(&two);
        if r.is_zero() {
            active.push(ActiveWall { family, m });
        } else {
            between.push(ActiveWall { family, m });
        }
    }
    (active, between)
}

pub fn enumerate_faces(arr: &PeriodicArrangement) -> Result<FacePoset, ArrangementError> {
    let report = genericity_check(arr);
    if !report.passed {
        return Err(ArrangementError::NonGeneric(report.failures));
    }
    let d = arr.d;
    let zero = vec![BigRational::zero(); d];
    let one = vec![BigRational::one(); d];
    let a = arr.conormal_matrix();
    let index = OrbitIndex::new(&a);

    // Cells come sorted by label, so the first of each orbit is canonical.
    let mut canon: Vec<LiftedCell> = Vec::new();
    let mut seen: HashMap<Vec<BigInt>, ()> = HashMap::new();
    for cell in lifted_cells_in_box(arr, &zero, &one, true) {
        if seen.insert(index.key(&cell.label), ()).is_none() {
            canon.push(cell);
        }
    }
    let mut faces: Vec<Face> = canon
        .into_iter()
        .map(|cell| {
            let (active, sign_vector) = parse_label(&cell.label);
            let codim = active.len();
            Face {
                index: 0,
                label: cell.label,
                active,
                sign_vector,
                rep_point: cell.point,
                dim: d - codim,
                codim,
            }
        })
        .collect();
    faces.sort_by(|x, y| (x.dim, &x.label).cmp(&(y.dim, &y.label)));
    let mut by_key = HashMap::new();
    for (k, f) in faces.iter_mut().enumerate() {
        f.index = k;
        by_key.insert(index.key(&f.label), k);
    }

    let mut poset = FacePoset {
        arrangement: arr.clone(),
        faces,
        incidences: Vec::new(),
        squares: Vec::new(),
        index,
        by_key,
        by_cover: HashMap::new(),
    };

    let mut incidences = Vec::new();
    let mut by_cover = HashMap::new();
    for g in 0..poset.faces.len() {
        for w in poset.faces[g].active.clone() {
            for side in Side::both() {
                let mut label = poset.faces[g].label.clone();
                label[w.family] += side.sign();
                debug_assert!(feasible_point(d, &label_constraints(arr, &label)).is_some());
                let lf = poset
                    .locate(&label)
                    .expect("neighbouring cell outside the enumerated faces");
                by_cover.insert((g, w.family, side), incidences.len());
                incidences.push(Incidence {
                    upper: lf.face,
                    lower: g,
                    wall: w.family,
                    side,
                    shift: lf.shift,
                });
            }
        }
    }
    poset.incidences = incidences;
    poset.by_cover = by_cover;

    let mut squares = Vec::new();
    for g in 0..poset.faces.len() {
        let act = poset.faces[g].active_families();
        for (x, &i) in act.iter().enumerate() {
            for &j in &act[x + 1..] {
                for si in Side::both() {
                    for sj in Side::both() {
                        let base = &poset.faces[g].label;
                        let mut li = base.clone();
                        li[i] += si.sign();
                        let mut lj = base.clone();
                        lj[j] += sj.sign();
                        let mut lij = li.clone();
                        lij[j] += sj.sign();
                        let ei = poset.locate(&li).expect("square side");
                        let ej = poset.locate(&lj).expect("square side");
                        let f = poset.locate(&lij).expect("square top");
                        let path_a = [
                            poset.incidence(g, i, si).expect("cover"),
                            poset.incidence(ei.face, j, sj).expect("cover"),
                        ];
                        let path_b = [
                            poset.incidence(g, j, sj).expect("cover"),
                            poset.incidence(ej.face, i, si).expect("cover"),
                        ];
                        squares.push(Square {
                            lower: g,
                            upper: f.face,
                            walls: [i, j],
                            sides: [si, sj],
                            path_a,
                            path_b,
                        });
                    }
                }
            }
        }
    }
    poset.squares = squares;
    Ok(poset)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveConormal {
    pub family: usize,
    #[serde(with = "int_serde::vec")]
    pub conormal: Vec<BigInt>,
    /// Co-orientation: the positive side is `alpha . u + o - m > 0`.
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceLocalData {
    pub face: usize,
    pub codim: usize,
    pub active: Vec<ActiveConormal>,
    pub adapted_splitting: IntMatrix,
    pub free_directions: IntMatrix,
}

/// Local splitting at a face. Only hyperplane walls count; cut walls are
/// ignored.
pub fn face_local_data(poset: &FacePoset, face: usize) -> Result<FaceLocalData, ArrangementError> {
    let f = poset.faces.get(face).ok_or(ArrangementError::NoSuchFace(face))?;
    let arr = &poset.arrangement;
    let d = arr.d;
    let active: Vec<ActiveConormal> = f
        .active
        .iter()
        .filter(|w| arr.families[w.family].kind == WallKind::Hyperplane)
        .map(|w| ActiveConormal {
            family: w.family,
            conormal: arr.families[w.family].conormal.clone(),
            sign: 1,
        })
        .collect();
    let c = active.len();
    let mut rows: Vec<Vec<BigInt>> = active.iter().map(|a| a.conormal.clone()).collect();
    if !snf::rows_extend_to_basis(&IntMatrix::from_rows(d, rows.clone())) {
        return Err(ArrangementError::NonUnimodularFlat(face));
    }
    // Greedy completion by standard basis vectors keeps the splitting
    // readable; fall back to the Smith completion when that gets stuck.
    for j in 0..d {
        if rows.len() == d {
            break;
        }
        let mut e = vec![BigInt::zero(); d];
        e[j] = BigInt::one();
        let mut trial = rows.clone();
        trial.push(e);
        if snf::rows_extend_to_basis(&IntMatrix::from_rows(d, trial.clone())) {
            rows = trial;
        }
    }
    if rows.len() < d {
        let head = IntMatrix::from_rows(d, rows[..c].to_vec());
        let rest = snf::unimodular_completion(&head).ok_or(ArrangementError::NonUnimodularFlat(face))?;
        rows.truncate(c);
        rows.extend(rest.row_vecs());
    }
    let adapted_splitting = IntMatrix::from_rows(d, rows);
    debug_assert!(adapted_splitting.is_unimodular());
    let free_directions = adapted_splitting.select_rows(&(c..d).collect::<Vec<_>>());
    Ok(FaceLocalData {
        face,
        codim: c,
        active,
        adapted_splitting,
        free_directions,
    })
}
