//! Combinatorial skeleton of the punctured cotangent bundle over a torus
//! arrangement, its Euler characteristic and local structure, and a
//! numerical check of the planar Liouville model.

mod liouville;
mod ode;

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{face_local_data, genericity_check, FacePoset, PeriodicArrangement, Side};
use crate::beilinson::{stalk_algebra, BeilinsonError, FactorLabel, Flavor};
use crate::cosheaf::{build_cosheaf, AlgebraCosheaf, CellComplex, CosheafError};
use crate::lattice::IntMatrix;
use crate::ncalg::{Poly, Presentation};

pub use liouville::{
    annulus_points, distance_to_skeleton, flow_report, flow_to_skeleton, liouville_check_2d,
    max_admissible_c, Eta, FlowOutcome, FlowParams, FlowReport, Limit, LiouvilleReport,
    Trajectory,
};
pub use ode::{dormand_prince, OdeError, OdeOptions, OdeSolution};

#[derive(Debug, Error)]
pub enum SkeletonError {
    #[error("non-generic arrangement: {0:?}")]
    NonGenericArrangement(Vec<String>),
    #[error(transparent)]
    Cosheaf(#[from] CosheafError),
    #[error(transparent)]
    Stalk(#[from] BeilinsonError),
    #[error(transparent)]
    Algebra(#[from] crate::ncalg::NcError),
    #[error(transparent)]
    Arrangement(#[from] crate::arrangement::ArrangementError),
}

/// Position in the circle fiber over a wall. The points are where the two
/// sides of the wall are attached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FiberLabel {
    MinusPoint,
    PlusPoint,
    UpperArc,
    LowerArc,
}

impl FiberLabel {
    pub const ALL: [FiberLabel; 4] = [
        FiberLabel::MinusPoint,
        FiberLabel::PlusPoint,
        FiberLabel::UpperArc,
        FiberLabel::LowerArc,
    ];

    pub fn is_arc(self) -> bool {
        matches!(self, FiberLabel::UpperArc | FiberLabel::LowerArc)
    }

    pub fn point(side: Side) -> Self {
        match side {
            Side::Positive => FiberLabel::PlusPoint,
            Side::Negative => FiberLabel::MinusPoint,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stratum {
    pub index: usize,
    pub base_face: usize,
    /// Active hyperplane families of the base face, increasing.
    pub walls: Vec<usize>,
    pub labels: Vec<FiberLabel>,
    pub dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Cover {
    /// An arc over `wall` degenerating to one of its endpoints.
    Fiber { wall: usize },
    /// Leaving a wall of the base along a face incidence.
    Base { incidence: usize },
}

/// `lower` lies in the closure of `upper`, one dimension down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SkeletonIncidence {
    pub upper: usize,
    pub lower: usize,
    pub cover: Cover,
}

#[derive(Clone, Debug, Serialize)]
pub struct AbstractSkeleton {
    #[serde(skip)]
    pub poset: FacePoset,
    pub strata: Vec<Stratum>,
    pub incidences: Vec<SkeletonIncidence>,
    #[serde(skip)]
    by_key: HashMap<(usize, Vec<FiberLabel>), usize>,
}

fn label_tuples(c: usize) -> Vec<Vec<FiberLabel>> {
    let mut out = vec![vec![]];
    for _ in 0..c {
        out = out
            .into_iter()
            .flat_map(|v| {
                FiberLabel::ALL.iter().map(move |&l| {
                    let mut w = v.clone();
                    w.push(l);
                    w
                })
            })
            .collect();
    }
    out
}

fn hyperplane_walls(poset: &FacePoset, face: usize) -> Vec<usize> {
    let arr = &poset.arrangement;
    let hyper = arr.hyperplane_families();
    let mut w: Vec<usize> = poset.faces[face]
        .active_families()
        .into_iter()
        .filter(|f| hyper.contains(f))
        .collect();
    w.sort();
    w
}

pub fn build_skeleton(poset: &FacePoset) -> Result<AbstractSkeleton, SkeletonError> {
    let report = genericity_check(&poset.arrangement);
    if !report.passed {
        return Err(SkeletonError::NonGenericArrangement(report.failures));
    }
    let mut strata = Vec::new();
    let mut by_key = HashMap::new();
    for f in 0..poset.faces.len() {
        let walls = hyperplane_walls(poset, f);
        for labels in label_tuples(walls.len()) {
            let dim = poset.faces[f].dim + labels.iter().filter(|l| l.is_arc()).count();
            let index = strata.len();
            by_key.insert((f, labels.clone()), index);
            strata.push(Stratum {
                index,
                base_face: f,
                walls: walls.clone(),
                labels,
                dim,
            });
        }
    }
    let mut incidences = Vec::new();
    for s in &strata {
        for (i, l) in s.labels.iter().enumerate() {
            if l.is_arc() {
                for end in [FiberLabel::MinusPoint, FiberLabel::PlusPoint] {
                    let mut lab = s.labels.clone();
                    lab[i] = end;
                    incidences.push(SkeletonIncidence {
                        upper: s.index,
                        lower: by_key[&(s.base_face, lab)],
                        cover: Cover::Fiber { wall: s.walls[i] },
                    });
                }
            }
        }
    }
    for (k, inc) in poset.incidences.iter().enumerate() {
        if !poset.arrangement.hyperplane_families().contains(&inc.wall) {
            continue;
        }
        let low_walls = hyperplane_walls(poset, inc.lower);
        let pos = low_walls.iter().position(|&w| w == inc.wall).expect("active wall");
        for labels in label_tuples(low_walls.len()) {
            if labels[pos] != FiberLabel::point(inc.side) {
                continue;
            }
            let mut up = labels.clone();
            up.remove(pos);
            incidences.push(SkeletonIncidence {
                upper: by_key[&(inc.upper, up)],
                lower: by_key[&(inc.lower, labels)],
                cover: Cover::Base { incidence: k },
            });
        }
    }
    Ok(AbstractSkeleton {
        poset: poset.clone(),
        strata,
        incidences,
        by_key,
    })
}

impl AbstractSkeleton {
    pub fn stratum(&self, face: usize, labels: &[FiberLabel]) -> Option<usize> {
        self.by_key.get(&(face, labels.to_vec())).copied()
    }

    pub fn strata_over(&self, face: usize) -> Vec<usize> {
        (0..self.strata.len())
            .filter(|&s| self.strata[s].base_face == face)
            .collect()
    }

    /// Projection to the base.
    pub fn project(&self, stratum: usize) -> usize {
        self.strata[stratum].base_face
    }

    /// Every incidence projects to an equality or an incidence of the base.
    pub fn projection_is_poset_map(&self) -> bool {
        self.incidences.iter().all(|inc| {
            let (u, l) = (self.project(inc.upper), self.project(inc.lower));
            match inc.cover {
                Cover::Fiber { .. } => u == l,
                Cover::Base { incidence } => {
                    let b = &self.poset.incidences[incidence];
                    b.upper == u && b.lower == l
                }
            }
        })
    }

    /// Incidences with the given lower stratum.
    pub fn covers_of(&self, lower: usize) -> Vec<&SkeletonIncidence> {
        self.incidences.iter().filter(|i| i.lower == lower).collect()
    }
}

/// Alternating count of skeleton cells, using the cell refinement of the
/// base: over a cell of dimension `k` tagged by a face with `c` walls there
/// are `4^c` cells, one per fiber label tuple.
pub fn euler_characteristic(skel: &AbstractSkeleton, cells: &CellComplex) -> i64 {
    let mut chi = 0i64;
    for (k, cell) in cells.cells.faces.iter().enumerate() {
        let face = cells.tags[k];
        for s in skel.strata_over(face) {
            let extra = skel.strata[s].dim - skel.poset.faces[face].dim;
            chi += if (cell.dim + extra) % 2 == 0 { 1 } else { -1 };
        }
    }
    chi
}

/// Euler characteristic from inclusion-exclusion: the circle fibers
/// contribute nothing, so the answer is `chi(T^d) - chi(union of walls)`,
/// and only full-rank intersections (finite point sets of size `|det|`)
/// have nonzero Euler characteristic.
pub fn euler_oracle(arr: &PeriodicArrangement) -> i64 {
    let d = arr.d;
    let hyper = arr.hyperplane_families();
    let mut union = 0i64;
    for subset in subsets(&hyper, d) {
        let rows: Vec<_> = subset.iter().map(|&i| arr.families[i].conormal.clone()).collect();
        let det = IntMatrix::from_rows(d, rows).determinant().abs();
        let n: i64 = det.try_into().expect("small determinant");
        union += if (d + 1) % 2 == 0 { n } else { -n };
    }
    -union
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = subsets(&items[1..], k - 1);
    for s in out.iter_mut() {
        s.insert(0, items[0]);
    }
    out.extend(subsets(&items[1..], k));
    out
}

/// Local position in the star of a stratum, per wall of the base face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Local {
    Label(FiberLabel),
    Ray(Side),
}

fn local_dim(l: Local) -> usize {
    match l {
        Local::Label(f) => f.is_arc() as usize,
        Local::Ray(_) => 1,
    }
}

/// One-wall star: a point sees both arcs and the ray on its side; an arc
/// sees only itself.
fn one_wall_star(l: FiberLabel) -> Vec<Local> {
    match l {
        FiberLabel::MinusPoint => vec![
            Local::Label(l),
            Local::Label(FiberLabel::UpperArc),
            Local::Label(FiberLabel::LowerArc),
            Local::Ray(Side::Negative),
        ],
        FiberLabel::PlusPoint => vec![
            Local::Label(l),
            Local::Label(FiberLabel::UpperArc),
            Local::Label(FiberLabel::LowerArc),
            Local::Ray(Side::Positive),
        ],
        arc => vec![Local::Label(arc)],
    }
}

/// Whether the star of `stratum` (everything reachable upwards through the
/// skeleton incidences, kept apart by the local side data) is the product
/// over the walls of the one-wall stars, with matching dimensions and
/// covering relations.
pub fn local_model_check(skel: &AbstractSkeleton, stratum: usize) -> bool {
    let root = &skel.strata[stratum];
    let walls = root.walls.clone();
    let base_dim = skel.poset.faces[root.base_face].dim;
    let start: Vec<Local> = root.labels.iter().map(|&l| Local::Label(l)).collect();
    // state: local tuple -> stratum
    let mut seen: HashMap<Vec<Local>, usize> = HashMap::new();
    let mut edges: BTreeSet<(Vec<Local>, Vec<Local>)> = BTreeSet::new();
    seen.insert(start.clone(), stratum);
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        let s = seen[&cur];
        for inc in skel.incidences.iter().filter(|i| i.lower == s) {
            let up = &skel.strata[inc.upper];
            let mut next = cur.clone();
            match inc.cover {
                Cover::Fiber { wall } => {
                    let Some(i) = walls.iter().position(|&w| w == wall) else {
                        return false;
                    };
                    let Some(pos) = up.walls.iter().position(|&w| w == wall) else {
                        return false;
                    };
                    next[i] = Local::Label(up.labels[pos]);
                }
                Cover::Base { incidence } => {
                    let b = &skel.poset.incidences[incidence];
                    let Some(i) = walls.iter().position(|&w| w == b.wall) else {
                        // leaving a wall that is not active at the root
                        return false;
                    };
                    next[i] = Local::Ray(b.side);
                }
            }
            // the reached stratum must carry exactly the labels predicted
            let kept: Vec<FiberLabel> = next
                .iter()
                .filter_map(|l| match l {
                    Local::Label(f) => Some(*f),
                    Local::Ray(_) => None,
                })
                .collect();
            if up.labels != kept {
                return false;
            }
            let dim = base_dim + next.iter().map(|&l| local_dim(l)).sum::<usize>();
            if up.dim != dim {
                return false;
            }
            edges.insert((cur.clone(), next.clone()));
            match seen.get(&next) {
                Some(&t) if t != inc.upper => return false,
                Some(_) => {}
                None => {
                    seen.insert(next.clone(), inc.upper);
                    queue.push_back(next);
                }
            }
        }
    }
    // expected product poset
    let factors: Vec<Vec<Local>> = root.labels.iter().map(|&l| one_wall_star(l)).collect();
    let mut expected: Vec<Vec<Local>> = vec![vec![]];
    for f in &factors {
        expected = expected
            .into_iter()
            .flat_map(|v| {
                f.iter().map(move |&l| {
                    let mut w = v.clone();
                    w.push(l);
                    w
                })
            })
            .collect();
    }
    let got: BTreeSet<Vec<Local>> = seen.keys().cloned().collect();
    let want: BTreeSet<Vec<Local>> = expected.into_iter().collect();
    if got != want {
        return false;
    }
    let mut want_edges = BTreeSet::new();
    for v in &want {
        for (i, l) in v.iter().enumerate() {
            if let Local::Label(f) = l {
                if !f.is_arc() {
                    for up in one_wall_star(*f).into_iter().skip(1) {
                        let mut w = v.clone();
                        w[i] = up;
                        want_edges.insert((v.clone(), w));
                    }
                }
            }
        }
    }
    edges == want_edges
}

/// What a skeleton stratum corresponds to in the stalk of the degenerate
/// cosheaf: fiber points pick nodes (minus point the first node, plus point
/// the second), arcs pick arrows (upper arc `x`, lower arc `y`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DictionaryEntry {
    pub stratum: usize,
    pub face: usize,
    pub element: String,
}

pub fn attach_microsheaf_cosheaf(
    skel: &AbstractSkeleton,
) -> Result<(AlgebraCosheaf, Vec<DictionaryEntry>), SkeletonError> {
    let sheaf = build_cosheaf(&skel.poset, Flavor::B0)?;
    let mut entries = Vec::with_capacity(skel.strata.len());
    let mut stalks = HashMap::new();
    for s in &skel.strata {
        if !stalks.contains_key(&s.base_face) {
            let fld = face_local_data(&skel.poset, s.base_face)?;
            stalks.insert(s.base_face, stalk_algebra(&fld, Flavor::B0)?);
        }
        let st = &stalks[&s.base_face];
        let pres: &Presentation = st.pres();
        let wall_gen = |name: &str| {
            crate::beilinson::b0_stalk()
                .generator_index(name)
                .expect("two-node generator")
        };
        let factor = |w: usize| {
            st.labeling
                .iter()
                .position(|l| *l == FactorLabel::Wall { family: w })
                .expect("wall factor")
        };
        let mut tuple = vec![0usize; st.labeling.len()];
        for (i, l) in s.labels.iter().enumerate() {
            tuple[factor(s.walls[i])] = match l {
                FiberLabel::MinusPoint | FiberLabel::UpperArc => 0,
                FiberLabel::PlusPoint | FiberLabel::LowerArc => 1,
            };
        }
        let v = st.tensor.vertex_of(&tuple).expect("vertex");
        let mut elem: Poly = pres.idempotent(v);
        for (i, l) in s.labels.iter().enumerate() {
            let g = match l {
                FiberLabel::UpperArc => wall_gen("x"),
                FiberLabel::LowerArc => wall_gen("y"),
                _ => continue,
            };
            let j = factor(s.walls[i]);
            let copy = st.tensor.copy_of(j, g, &tuple).expect("copy");
            elem = pres.generator(copy).mul(&elem)?;
            tuple[j] = 1 - tuple[j];
        }
        entries.push(DictionaryEntry {
            stratum: s.index,
            face: s.base_face,
            element: match elem.leading() {
                Some((m, 1)) if elem.len() == 1 => pres.format_mono(m),
                _ => pres.format_poly(&elem),
            },
        });
    }
    Ok((sheaf, entries))
}
