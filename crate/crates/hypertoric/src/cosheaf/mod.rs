//! Cosheaves of stalk algebras over a face poset, the cell refinement used
//! for gluing, and global algebras.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arrangement::{
    enumerate_faces, face_local_data, ArrangementError, FacePoset, WallKind,
};
use crate::beilinson::{
    central_embed, corestriction, image_of_unit, stalk_algebra, BeilinsonError, Flavor,
    StalkAlgebra,
};
use crate::lattice::{format_rational, rational_serde};
use crate::ncalg::{
    amalgamate, complete, iso_check, morita_collapse_all, quotient_central, AlgebraMap, Diagram,
    DiagramMap, DiagramSquare, IsoReport, NcError, Poly, Presentation, RewriteSystem, Transport,
};

#[derive(Debug, Error)]
pub enum CosheafError {
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
    #[error(transparent)]
    Stalk(#[from] BeilinsonError),
    #[error(transparent)]
    Algebra(#[from] NcError),
    #[error("corestrictions around square {square} disagree on generator {generator}")]
    FunctorialityFailure { square: usize, generator: String },
    #[error("corestriction along incidence {0} is not a homomorphism")]
    NotHomomorphism(usize),
    #[error("corestriction along incidence {0} does not intertwine the lattice action")]
    CentralMismatch(usize),
    #[error("cut walls at {shift:?} are not transverse: {detail}")]
    NonTransverseCut { shift: Vec<String>, detail: String },
    #[error("cell {0} has no arrangement face")]
    Untagged(usize),
    #[error("operation needs a {0:?}-flavor cosheaf")]
    WrongFlavor(Flavor),
}

/// Stalk presentation at one face together with its rewriting system.
#[derive(Clone, Debug)]
pub struct CosheafStalk {
    pub face: usize,
    pub pres: Presentation,
    pub rewrite: RewriteSystem,
}

#[derive(Clone, Debug)]
pub struct AlgebraCosheaf {
    pub poset: FacePoset,
    pub flavor: Flavor,
    /// Stalks were obtained by base change from flavor `B`.
    pub reduced: bool,
    pub stalks: Vec<CosheafStalk>,
    /// One map per incidence of the poset, from the upper stalk to the lower.
    pub corestrictions: Vec<AlgebraMap>,
    /// Flavor `B`: images of the standard lattice basis in each stalk.
    pub central: Option<Vec<Vec<Poly>>>,
}

fn unit_vector(d: usize, j: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); d];
    v[j] = BigInt::one();
    v
}

pub fn build_cosheaf(poset: &FacePoset, flavor: Flavor) -> Result<AlgebraCosheaf, CosheafError> {
    let d = poset.d();
    let stalks: Vec<StalkAlgebra> = (0..poset.faces.len())
        .map(|f| Ok(stalk_algebra(&face_local_data(poset, f)?, flavor)?))
        .collect::<Result<_, CosheafError>>()?;
    let mut corestrictions = Vec::with_capacity(poset.incidences.len());
    for (k, inc) in poset.incidences.iter().enumerate() {
        let (f, g) = (&stalks[inc.upper], &stalks[inc.lower]);
        let map = corestriction(f, g, inc.wall, Some(inc.side))?;
        if !crate::beilinson::is_homomorphism(f.pres(), &g.rewrite, &map)? {
            return Err(CosheafError::NotHomomorphism(k));
        }
        corestrictions.push(map);
    }
    let central = match flavor {
        Flavor::B => Some(
            stalks
                .iter()
                .map(|s| {
                    (0..d)
                        .map(|j| central_embed(s, &unit_vector(d, j)))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
        Flavor::B0 => None,
    };
    let sheaf = AlgebraCosheaf {
        poset: poset.clone(),
        flavor,
        reduced: false,
        stalks: stalks
            .into_iter()
            .map(|s| CosheafStalk {
                face: s.local.face,
                pres: s.tensor.pres,
                rewrite: s.rewrite,
            })
            .collect(),
        corestrictions,
        central,
    };
    check_functoriality(&sheaf)?;
    check_central(&sheaf)?;
    Ok(sheaf)
}

/// Both composites around every square agree on every generator of the top
/// stalk.
pub fn check_functoriality(sheaf: &AlgebraCosheaf) -> Result<(), CosheafError> {
    let p = &sheaf.poset;
    for (k, sq) in p.squares.iter().enumerate() {
        let top = &sheaf.stalks[sq.upper].pres;
        let bottom = &sheaf.stalks[sq.lower].rewrite;
        let composite = |path: [usize; 2], g: &Poly| -> Result<Poly, NcError> {
            let first = &sheaf.corestrictions[path[1]];
            let second = &sheaf.corestrictions[path[0]];
            bottom.normal_form(&second.apply(&first.apply(g)?)?)
        };
        for g in 0..top.generators.len() {
            let gp = top.generator(g);
            if composite(sq.path_a, &gp)? != composite(sq.path_b, &gp)? {
                return Err(CosheafError::FunctorialityFailure {
                    square: k,
                    generator: top.generators[g].name.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Corestrictions carry the lattice action of the upper stalk to that of the
/// lower one, cut down to the image of the unit.
pub fn check_central(sheaf: &AlgebraCosheaf) -> Result<(), CosheafError> {
    let Some(central) = &sheaf.central else {
        return Ok(());
    };
    for (k, inc) in sheaf.poset.incidences.iter().enumerate() {
        let map = &sheaf.corestrictions[k];
        let low = &sheaf.stalks[inc.lower].rewrite;
        let unit = image_of_unit(map);
        for (a, b) in central[inc.upper].iter().zip(&central[inc.lower]) {
            let lhs = low.normal_form(&map.apply(a)?)?;
            if lhs != low.multiply(b, &unit)? {
                return Err(CosheafError::CentralMismatch(k));
            }
        }
    }
    Ok(())
}

/// Base change along `Z[L] -> Z`: every stalk of a `B`-flavor cosheaf is
/// divided by the images of `e_j - 1`.
pub fn reduce_cosheaf(sheaf: &AlgebraCosheaf) -> Result<AlgebraCosheaf, CosheafError> {
    let central = sheaf
        .central
        .as_ref()
        .ok_or(CosheafError::WrongFlavor(Flavor::B))?;
    let mut stalks = Vec::with_capacity(sheaf.stalks.len());
    for (s, zs) in sheaf.stalks.iter().zip(central) {
        let elems: Vec<Poly> = zs
            .iter()
            .map(|z| z.sub(&s.pres.one()))
            .collect::<Result<_, _>>()?;
        let pres = quotient_central(&s.rewrite, &elems)?;
        let rewrite = complete(&pres, s.rewrite.completion_degree)?;
        stalks.push(CosheafStalk {
            face: s.face,
            pres,
            rewrite,
        });
    }
    Ok(AlgebraCosheaf {
        poset: sheaf.poset.clone(),
        flavor: Flavor::B0,
        reduced: true,
        stalks,
        corestrictions: sheaf.corestrictions.clone(),
        central: None,
    })
}

/// Stalkwise comparison of a reduced cosheaf with the `B0` cosheaf, mapping
/// generators by name.
pub fn compare_stalks(
    b0: &AlgebraCosheaf,
    reduced: &AlgebraCosheaf,
    degree: u32,
) -> Result<Vec<IsoReport>, CosheafError> {
    b0.stalks
        .iter()
        .zip(&reduced.stalks)
        .map(|(a, b)| {
            let map = AlgebraMap::by_name(&a.pres, &b.pres)?;
            Ok(iso_check(&a.rewrite, &b.rewrite, &map, degree)?)
        })
        .collect()
}

/// The face poset refined by the coordinate cuts, each cell tagged with the
/// arrangement face containing it.
#[derive(Clone, Debug, Serialize)]
pub struct CellComplex {
    #[serde(with = "rational_serde::vec")]
    pub shift: Vec<BigRational>,
    pub cells: FacePoset,
    pub tags: Vec<usize>,
}

impl CellComplex {
    /// Number of cells of each dimension.
    pub fn counts(&self) -> Vec<usize> {
        (0..=self.cells.d())
            .map(|k| self.cells.faces_of_dim(k).len())
            .collect()
    }
}

pub fn refine_cells(poset: &FacePoset, shift: &[BigRational]) -> Result<CellComplex, CosheafError> {
    let arr = &poset.arrangement;
    let n = arr.n();
    let refined = arr.with_cuts(shift);
    let cells = enumerate_faces(&refined).map_err(|e| match e {
        ArrangementError::NonGeneric(fails) => CosheafError::NonTransverseCut {
            shift: shift.iter().map(format_rational).collect(),
            detail: fails.join("; "),
        },
        other => other.into(),
    })?;
    debug_assert!(refined.families[n..].iter().all(|f| f.kind == WallKind::Cut));
    let tags = cells
        .faces
        .iter()
        .map(|c| {
            poset
                .locate(&c.label[..n])
                .map(|lf| lf.face)
                .ok_or(CosheafError::Untagged(c.index))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CellComplex {
        shift: shift.to_vec(),
        cells,
        tags,
    })
}

/// Shifts tried by [`refine_cells_auto`]: 1/2, 1/3, 2/5, 3/7, ...
pub fn auto_shifts() -> impl Iterator<Item = BigRational> {
    std::iter::once(BigRational::new(1.into(), 2.into()))
        .chain(std::iter::once(BigRational::new(1.into(), 3.into())))
        .chain((2i64..).map(|k| BigRational::new(k.into(), (2 * k + 1).into())))
}

/// The first shift (same value in every coordinate) that is transverse.
pub fn refine_cells_auto(poset: &FacePoset) -> Result<CellComplex, CosheafError> {
    let mut last = None;
    for q in auto_shifts().take(64) {
        match refine_cells(poset, &vec![q; poset.d()]) {
            Ok(c) => return Ok(c),
            Err(e @ CosheafError::NonTransverseCut { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

pub fn cell_label(k: usize) -> String {
    format!("c{k}")
}

/// Stalk maps along the cell incidences: corestrictions across hyperplane
/// walls, identities across cuts.
fn cell_maps(sheaf: &AlgebraCosheaf, cells: &CellComplex) -> Result<Vec<AlgebraMap>, CosheafError> {
    let n = sheaf.poset.arrangement.n();
    cells
        .cells
        .incidences
        .iter()
        .map(|inc| {
            let (fu, fl) = (cells.tags[inc.upper], cells.tags[inc.lower]);
            if inc.wall >= n {
                debug_assert_eq!(fu, fl);
                let p = &sheaf.stalks[fu].pres;
                return Ok(AlgebraMap::by_name(p, p)?);
            }
            let k = sheaf
                .poset
                .incidence(fl, inc.wall, inc.side)
                .ok_or(CosheafError::Untagged(inc.lower))?;
            debug_assert_eq!(sheaf.poset.incidences[k].upper, fu);
            Ok(sheaf.corestrictions[k].clone())
        })
        .collect()
}

/// The gluing presentation: one copy of the tagged stalk per cell,
/// invertible connectors along cell incidences intertwining the stalk maps,
/// and coherence relations on squares.
pub fn global_algebra(sheaf: &AlgebraCosheaf, cells: &CellComplex) -> Result<Presentation, CosheafError> {
    Ok(amalgamate(&gluing_diagram(sheaf, cells)?)?)
}

pub fn gluing_diagram(sheaf: &AlgebraCosheaf, cells: &CellComplex) -> Result<Diagram, CosheafError> {
    let maps = cell_maps(sheaf, cells)?;
    let objects = cells
        .tags
        .iter()
        .enumerate()
        .map(|(k, &f)| (cell_label(k), sheaf.stalks[f].pres.clone()))
        .collect();
    let maps = cells
        .cells
        .incidences
        .iter()
        .zip(maps)
        .enumerate()
        .map(|(k, (inc, map))| DiagramMap {
            label: format!("g{k}"),
            source: inc.upper,
            target: inc.lower,
            map,
        })
        .collect();
    let squares = cells
        .cells
        .squares
        .iter()
        .map(|sq| DiagramSquare {
            path_a: [sq.path_a[1], sq.path_a[0]],
            path_b: [sq.path_b[1], sq.path_b[0]],
        })
        .collect();
    Ok(Diagram {
        objects,
        maps,
        squares,
    })
}

/// Places a stalk element of cell `k` into the glued presentation.
pub fn embed_cell_element(
    glued: &Presentation,
    k: usize,
    stalk: &Presentation,
    p: &Poly,
) -> Result<Poly, NcError> {
    let label = cell_label(k);
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        let names: Vec<String> = if m.word.is_empty() {
            vec![format!("e:{label}/{}", stalk.vertices[m.src as usize])]
        } else {
            m.word
                .iter()
                .map(|&g| format!("{label}/{}", stalk.generators[g as usize].name))
                .collect()
        };
        out.add_term(glued.path(&names)?, *c)?;
    }
    Ok(out)
}

/// Sum over cells of the image of the `j`-th lattice basis vector.
pub fn glued_central(
    sheaf: &AlgebraCosheaf,
    cells: &CellComplex,
    glued: &Presentation,
) -> Result<Vec<Poly>, CosheafError> {
    let central = sheaf
        .central
        .as_ref()
        .ok_or(CosheafError::WrongFlavor(Flavor::B))?;
    let d = sheaf.poset.d();
    (0..d)
        .map(|j| {
            let mut z = Poly::zero();
            for (k, &f) in cells.tags.iter().enumerate() {
                let e = embed_cell_element(glued, k, &sheaf.stalks[f].pres, &central[f][j])?;
                z.add_scaled(&e, 1)?;
            }
            Ok(z)
        })
        .collect()
}

/// A glued presentation after collapsing all connectors, completed up to a
/// degree.
#[derive(Clone, Debug)]
pub struct CollapsedAlgebra {
    pub glued: Presentation,
    pub collapsed: Presentation,
    pub transport: Transport,
    pub rewrite: RewriteSystem,
}

impl CollapsedAlgebra {
    pub fn dims(&self, d: u32) -> Result<Vec<usize>, NcError> {
        Ok(self.rewrite.basis(d)?.dims())
    }
}

pub fn collapse_and_complete(glued: Presentation, degree: u32) -> Result<CollapsedAlgebra, CosheafError> {
    let (collapsed, transport) = morita_collapse_all(&glued)?;
    let rewrite = complete(&collapsed, degree)?;
    Ok(CollapsedAlgebra {
        glued,
        collapsed,
        transport,
        rewrite,
    })
}

/// Completion bound for a comparison up to filtration degree `d`.
pub fn working_degree(d: u32) -> u32 {
    d + 4
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub degree: u32,
    pub dims_reduced_then_glued: Vec<usize>,
    pub dims_glued_then_reduced: Vec<usize>,
    pub dims_b0: Vec<usize>,
    pub b0_vs_reduced_then_glued: bool,
    pub b0_vs_glued_then_reduced: bool,
    pub reduced_then_glued_vs_glued_then_reduced: bool,
    pub stalks_agree: bool,
    pub failures: Vec<String>,
    pub modeling_note: &'static str,
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        self.stalks_agree
            && self.b0_vs_reduced_then_glued
            && self.b0_vs_glued_then_reduced
            && self.reduced_then_glued_vs_glued_then_reduced
    }
}

pub const MODELING_NOTE: &str = "global sections are modeled as modules over the gluing quiver \
(stalks, invertible connectors, square coherence); agreement is certified up to the stated degree";

/// Compares three routes to the degenerate global algebra: reduce stalks
/// then glue, glue then divide by the glued lattice, and glue the `B0`
/// cosheaf directly.
pub fn verify_reduction_commutes(
    poset: &FacePoset,
    cells: &CellComplex,
    degree: u32,
) -> Result<ReductionReport, CosheafError> {
    let wd = working_degree(degree);
    let b = build_cosheaf(poset, Flavor::B)?;
    let b0 = build_cosheaf(poset, Flavor::B0)?;
    let r = reduce_cosheaf(&b)?;
    let stalk_reports = compare_stalks(&b0, &r, degree)?;
    let mut failures: Vec<String> = stalk_reports
        .iter()
        .enumerate()
        .filter(|(_, rep)| !rep.isomorphic)
        .map(|(f, rep)| format!("stalk {f}: {}", rep.reason.clone().unwrap_or_default()))
        .collect();
    let stalks_agree = failures.is_empty();

    let a = collapse_and_complete(global_algebra(&r, cells)?, wd)?;
    let gb = collapse_and_complete(global_algebra(&b, cells)?, wd)?;
    let zs = glued_central(&b, cells, &gb.glued)?;
    let elems: Vec<Poly> = zs
        .iter()
        .map(|z| {
            let t = gb.transport.central_image(z)?;
            t.sub(&gb.collapsed.one())
        })
        .collect::<Result<_, NcError>>()?;
    let gr = quotient_central(&gb.rewrite, &elems)?;
    let gr_rw = complete(&gr, wd)?;
    let c = collapse_and_complete(global_algebra(&b0, cells)?, wd)?;

    let mut check = |name: &str,
                     src: &RewriteSystem,
                     tgt: &RewriteSystem|
     -> Result<bool, CosheafError> {
        let map = AlgebraMap::by_name(&src.base, &tgt.base)?;
        let rep = iso_check(src, tgt, &map, degree)?;
        if let Some(reason) = &rep.reason {
            failures.push(format!("{name}: {reason}"));
        }
        Ok(rep.isomorphic)
    };
    let ca = check("b0 vs reduced-then-glued", &c.rewrite, &a.rewrite)?;
    let cb = check("b0 vs glued-then-reduced", &c.rewrite, &gr_rw)?;
    let ab = check("reduced-then-glued vs glued-then-reduced", &a.rewrite, &gr_rw)?;
    Ok(ReductionReport {
        degree,
        dims_reduced_then_glued: a.dims(degree)?,
        dims_glued_then_reduced: gr_rw.basis(degree)?.dims(),
        dims_b0: c.dims(degree)?,
        b0_vs_reduced_then_glued: ca,
        b0_vs_glued_then_reduced: cb,
        reduced_then_glued_vs_glued_then_reduced: ab,
        stalks_agree,
        failures,
        modeling_note: MODELING_NOTE,
    })
}

/// JSON view of a cosheaf: faces, stalk presentations and corestriction
/// generator images.
#[derive(Clone, Debug, Serialize)]
pub struct CosheafExport {
    pub flavor: Flavor,
    pub reduced: bool,
    pub stalks: Vec<StalkExport>,
    pub corestrictions: Vec<CorestrictionExport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StalkExport {
    pub face: usize,
    pub dim: usize,
    pub presentation: Presentation,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorestrictionExport {
    pub upper: usize,
    pub lower: usize,
    pub wall: usize,
    pub side: String,
    pub images: Vec<(String, String)>,
}

impl AlgebraCosheaf {
    pub fn export(&self) -> CosheafExport {
        CosheafExport {
            flavor: self.flavor,
            reduced: self.reduced,
            stalks: self
                .stalks
                .iter()
                .map(|s| StalkExport {
                    face: s.face,
                    dim: self.poset.faces[s.face].dim,
                    presentation: s.pres.clone(),
                })
                .collect(),
            corestrictions: self
                .poset
                .incidences
                .iter()
                .zip(&self.corestrictions)
                .map(|(inc, map)| {
                    let src = &self.stalks[inc.upper].pres;
                    let tgt = &self.stalks[inc.lower].pres;
                    CorestrictionExport {
                        upper: inc.upper,
                        lower: inc.lower,
                        wall: inc.wall,
                        side: match inc.side {
                            crate::arrangement::Side::Positive => "+".into(),
                            crate::arrangement::Side::Negative => "-".into(),
                        },
                        images: src
                            .generators
                            .iter()
                            .zip(&map.generators)
                            .map(|(g, img)| (g.name.clone(), tgt.format_poly(img)))
                            .collect(),
                    }
                })
                .collect(),
        }
    }
}
