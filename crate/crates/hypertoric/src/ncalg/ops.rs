//! Constructions on presentations: tensor products, central quotients,
//! centers, amalgamation along algebra maps, Morita collapse and
//! isomorphism checks.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{Mono, Poly};
use super::presentation::Presentation;
use super::rewrite::RewriteSystem;
use super::NcError;
use crate::lattice::{integer_kernel, IntMatrix};

/// Vertex assignment plus an image for every generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraMap {
    pub vertices: Vec<usize>,
    pub generators: Vec<Poly>,
}

impl AlgebraMap {
    /// Sends every vertex and generator of `a` to the one of `b` with the
    /// same name.
    pub fn by_name(a: &Presentation, b: &Presentation) -> Result<Self, NcError> {
        let vertices = a
            .vertices
            .iter()
            .map(|v| b.vertex_index(v))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| NcError::IllTypedMap(e.to_string()))?;
        let lookup = b.name_lookup();
        let generators = a
            .generators
            .iter()
            .map(|g| {
                lookup
                    .get(g.name.as_str())
                    .map(|&i| b.generator(i))
                    .ok_or_else(|| NcError::IllTypedMap(format!("no generator {:?}", g.name)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AlgebraMap {
            vertices,
            generators,
        })
    }

    /// Checks that each image runs between the images of the endpoints.
    pub fn check_typed(&self, a: &Presentation, b: &Presentation) -> Result<(), NcError> {
        if self.vertices.len() != a.vertices.len() || self.generators.len() != a.generators.len()
        {
            return Err(NcError::IllTypedMap("arity mismatch".into()));
        }
        if self.vertices.iter().any(|&v| v >= b.vertices.len()) {
            return Err(NcError::IllTypedMap("vertex out of range".into()));
        }
        for (g, img) in a.generators.iter().zip(&self.generators) {
            let want = (self.vertices[g.source] as u32, self.vertices[g.target] as u32);
            if img.terms().any(|(m, _)| (m.src, m.tgt) != want) {
                return Err(NcError::IllTypedMap(format!(
                    "image of {} is {}",
                    g.name,
                    b.format_poly(img)
                )));
            }
        }
        Ok(())
    }

    pub fn apply_mono(&self, m: &Mono) -> Result<Poly, NcError> {
        if m.word.is_empty() {
            return Ok(Poly::mono(Mono::idempotent(self.vertices[m.src as usize] as u32)));
        }
        let mut it = m.word.iter();
        let mut acc = self.generators[*it.next().expect("nonempty") as usize].clone();
        for &g in it {
            acc = acc.mul(&self.generators[g as usize])?;
        }
        Ok(acc)
    }

    pub fn apply(&self, p: &Poly) -> Result<Poly, NcError> {
        let mut out = Poly::zero();
        for (m, c) in p.terms() {
            out.add_scaled(&self.apply_mono(m)?, *c)?;
        }
        Ok(out)
    }
}

/// Tensor product of two presentations.
pub fn tensor(a: &Presentation, b: &Presentation) -> Presentation {
    tensor_many(&[("", a), ("", b)])
}

/// Tensor product of several labelled factors. Vertices are tuples named by
/// joining the vertex names of the factors with more than one vertex with
/// `|` (or `*` if there are none); the copy of generator `g` of the
/// factor labelled `L` is named `L.g`, followed by `@` and the other
/// factors' vertices when some other factor has more than one vertex.
pub fn tensor_many(factors: &[(&str, &Presentation)]) -> Presentation {
    tensor_product(factors).pres
}

/// A tensor product together with the bookkeeping needed to embed factor
/// elements.
#[derive(Clone, Debug)]
pub struct TensorProduct {
    pub pres: Presentation,
    /// Vertex `v` of `pres` is the tuple `tuples[v]` of factor vertices.
    pub tuples: Vec<Vec<usize>>,
    /// For each generator: factor, generator within the factor, and the
    /// tuple of the other factors' vertices (own slot set to 0).
    pub origin: Vec<(usize, usize, Vec<usize>)>,
    copy: HashMap<(usize, usize, Vec<usize>), usize>,
    tuple_index: HashMap<Vec<usize>, usize>,
}

impl TensorProduct {
    pub fn vertex_of(&self, tuple: &[usize]) -> Option<usize> {
        self.tuple_index.get(tuple).copied()
    }

    /// Copy of generator `g` of factor `i` with the other factors sitting at
    /// `ctx` (slot `i` ignored).
    pub fn copy_of(&self, i: usize, g: usize, ctx: &[usize]) -> Option<usize> {
        let mut c = ctx.to_vec();
        c[i] = 0;
        self.copy.get(&(i, g, c)).copied()
    }

    /// The path of factor `i` placed in context `ctx`.
    pub fn lift_mono_at(&self, i: usize, m: &Mono, ctx: &[usize]) -> Mono {
        if m.word.is_empty() {
            let mut t = ctx.to_vec();
            t[i] = m.src as usize;
            return Mono::idempotent(self.tuple_index[&t] as u32);
        }
        let word: Vec<usize> = m
            .word
            .iter()
            .map(|&g| self.copy_of(i, g as usize, ctx).expect("generator copy"))
            .collect();
        self.pres.path_of(&word).expect("copied path composes")
    }

    pub fn lift_at(&self, i: usize, p: &Poly, ctx: &[usize]) -> Poly {
        p.terms()
            .map(|(m, c)| (self.lift_mono_at(i, m, ctx), *c))
            .collect()
    }

    /// `p` in factor `i` tensored with the units of all other factors.
    pub fn lift(&self, i: usize, p: &Poly) -> Poly {
        let mut out = Poly::zero();
        for t in self.tuples.iter().filter(|t| t[i] == 0) {
            out.add_scaled(&self.lift_at(i, p, t), 1)
                .expect("disjoint contexts");
        }
        out
    }
}

/// Tensor product with factor bookkeeping; see [`tensor_many`].
pub fn tensor_product(factors: &[(&str, &Presentation)]) -> TensorProduct {
    let nf = factors.len();
    let sizes: Vec<usize> = factors.iter().map(|(_, p)| p.vertices.len()).collect();
    let mut tuples: Vec<Vec<usize>> = vec![vec![]];
    for &s in &sizes {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                (0..s).map(move |v| {
                    let mut u = t.clone();
                    u.push(v);
                    u
                })
            })
            .collect();
    }
    let tuple_index: HashMap<Vec<usize>, usize> =
        tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let names: Vec<String> = tuples
        .iter()
        .map(|t| {
            let parts: Vec<&str> = t
                .iter()
                .enumerate()
                .filter(|&(i, _)| sizes[i] > 1)
                .map(|(i, &v)| factors[i].1.vertices[v].as_str())
                .collect();
            if parts.is_empty() {
                "*".to_string()
            } else {
                parts.join("|")
            }
        })
        .collect();
    let mut out = Presentation::new(&names);

    let gen_name = |i: usize, g: &str, t: &[usize]| -> String {
        let label = factors[i].0;
        let base = if label.is_empty() {
            g.to_string()
        } else {
            format!("{label}.{g}")
        };
        let others_trivial = (0..nf).all(|k| k == i || sizes[k] == 1);
        if others_trivial {
            base
        } else {
            let ctx: Vec<&str> = (0..nf)
                .filter(|&k| k != i)
                .map(|k| factors[k].1.vertices[t[k]].as_str())
                .collect();
            format!("{base}@{}", ctx.join("|"))
        }
    };

    // copy[(i, g, context)] with context = tuple with slot i zeroed
    let mut copy: HashMap<(usize, usize, Vec<usize>), usize> = HashMap::new();
    let mut origin = Vec::new();
    for (i, (_, p)) in factors.iter().enumerate() {
        for t in tuples.iter().filter(|t| t[i] == 0) {
            for (g, gen) in p.generators.iter().enumerate() {
                let mut s = t.clone();
                s[i] = gen.source;
                let mut e = t.clone();
                e[i] = gen.target;
                let idx = out
                    .add_generator(
                        &gen_name(i, &gen.name, t),
                        tuple_index[&s],
                        tuple_index[&e],
                        gen.degree,
                    )
                    .expect("fresh generator name");
                copy.insert((i, g, t.clone()), idx);
                origin.push((i, g, t.clone()));
            }
            for &(g, h) in &p.inverses {
                out.inverses
                    .push((copy[&(i, g, t.clone())], copy[&(i, h, t.clone())]));
            }
        }
    }

    let lift = |i: usize, m: &Mono, ctx: &[usize]| -> Mono {
        if m.word.is_empty() {
            let mut t = ctx.to_vec();
            t[i] = m.src as usize;
            return Mono::idempotent(tuple_index[&t] as u32);
        }
        let word: Vec<usize> = m
            .word
            .iter()
            .map(|&g| copy[&(i, g as usize, ctx.to_vec())])
            .collect();
        out.path_of(&word).expect("copied path composes")
    };

    let mut relations = Vec::new();
    for (i, (_, p)) in factors.iter().enumerate() {
        for t in tuples.iter().filter(|t| t[i] == 0) {
            for r in &p.relations {
                let lifted: Poly = r.terms().map(|(m, c)| (lift(i, m, t), *c)).collect();
                relations.push(lifted);
            }
        }
    }
    // g (in factor i) commutes with h (in factor j)
    for i in 0..nf {
        for j in i + 1..nf {
            let (pi, pj) = (factors[i].1, factors[j].1);
            for t in tuples.iter().filter(|t| t[i] == 0 && t[j] == 0) {
                for (g, gg) in pi.generators.iter().enumerate() {
                    for (h, hh) in pj.generators.iter().enumerate() {
                        let ctx = |vi: usize, vj: usize| {
                            let mut c = t.clone();
                            c[i] = vi;
                            c[j] = vj;
                            c
                        };
                        // g at j = target(h), after h at i = source(g)
                        let mut cg = ctx(0, hh.target);
                        cg[i] = 0;
                        let mut ch = ctx(gg.source, 0);
                        ch[j] = 0;
                        let w1 = vec![copy[&(i, g, cg)], copy[&(j, h, ch)]];
                        let mut cg2 = ctx(0, hh.source);
                        cg2[i] = 0;
                        let mut ch2 = ctx(gg.target, 0);
                        ch2[j] = 0;
                        let w2 = vec![copy[&(j, h, ch2)], copy[&(i, g, cg2)]];
                        let mut r = Poly::mono(out.path_of(&w1).expect("composable"));
                        r.add_term(out.path_of(&w2).expect("composable"), -1)
                            .expect("small coefficients");
                        relations.push(r);
                    }
                }
            }
        }
    }
    for r in relations {
        out.add_relation(r).expect("endpoint-homogeneous");
    }
    TensorProduct {
        pres: out,
        tuples,
        origin,
        copy,
        tuple_index,
    }
}

/// Adds the corner components `e_v z e_v` of each element as relations,
/// after checking that each element commutes with every generator.
pub fn quotient_central(rw: &RewriteSystem, elems: &[Poly]) -> Result<Presentation, NcError> {
    let pres = &rw.base;
    for z in elems {
        for g in 0..pres.generators.len() {
            let gp = pres.generator(g);
            let c = z.mul(&gp)?.sub(&gp.mul(z)?)?;
            if !rw.normal_form(&c)?.is_zero() {
                return Err(NcError::NotCentral(format!(
                    "{} against {}",
                    pres.format_poly(z),
                    pres.generators[g].name
                )));
            }
        }
    }
    let mut out = pres.clone();
    for z in elems {
        for v in 0..pres.vertices.len() {
            out.add_relation(z.corner(v as u32, v as u32))?;
        }
    }
    Ok(out)
}

/// A Z-basis of the central elements of filtration degree at most `d`.
pub fn center_up_to(rw: &RewriteSystem, d: u32) -> Result<Vec<Poly>, NcError> {
    let pres = &rw.base;
    let max_gen = pres.generators.iter().map(|g| g.degree).max().unwrap_or(0);
    if !rw.covers_degree(d + max_gen) {
        return Err(NcError::DegreeOverflow {
            needed: d + max_gen,
            available: rw.completion_degree,
        });
    }
    let basis = rw.basis(d)?;
    let unknowns: Vec<Mono> = basis
        .monos
        .iter()
        .filter(|m| m.src == m.tgt)
        .cloned()
        .collect();
    let mut coords: HashMap<Mono, usize> = HashMap::new();
    let mut columns: Vec<Vec<(usize, i64)>> = vec![Vec::new(); unknowns.len()];
    let mut row_count = 0usize;
    for g in 0..pres.generators.len() {
        let gp = pres.generator(g);
        for (k, b) in unknowns.iter().enumerate() {
            let bp = Poly::mono(b.clone());
            let c = bp.mul(&gp)?.sub(&gp.mul(&bp)?)?;
            let c = rw.normal_form(&c)?;
            for (m, v) in c.terms() {
                let r = *coords.entry(tagged(m, g)).or_insert_with(|| {
                    row_count += 1;
                    row_count - 1
                });
                columns[k].push((r, *v));
            }
        }
    }
    let mut mat = IntMatrix::zeros(row_count, unknowns.len());
    for (k, col) in columns.iter().enumerate() {
        for &(r, v) in col {
            let cur = mat.get(r, k).clone();
            mat.set(r, k, cur + BigInt::from(v));
        }
    }
    let ker = integer_kernel(&mat);
    let mut out = Vec::new();
    for j in 0..ker.cols() {
        let mut p = Poly::zero();
        for (k, m) in unknowns.iter().enumerate() {
            let c = ker.get(k, j);
            if !c.is_zero() {
                p.add_term(m.clone(), c.to_i64().ok_or(NcError::Overflow)?)?;
            }
        }
        out.push(p);
    }
    Ok(out)
}

/// Equations for different generators live in different coordinates.
fn tagged(m: &Mono, g: usize) -> Mono {
    let mut t = m.clone();
    t.word.push(u32::MAX - g as u32);
    t
}

/// Image of the original algebra in a collapsed one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transport {
    pub map: AlgebraMap,
    /// Generators used as tree edges.
    pub tree: Vec<usize>,
}

impl Transport {
    pub fn apply(&self, p: &Poly) -> Result<Poly, NcError> {
        self.map.apply(p)
    }

    /// Image of a central element: its corner at the root of each collapsed
    /// component (every corner of a central element carries the same
    /// information along invertible connectors).
    pub fn central_image(&self, z: &Poly) -> Result<Poly, NcError> {
        let mut seen = vec![false; self.map.vertices.len()];
        let mut out = Poly::zero();
        for (v, &r) in self.map.vertices.iter().enumerate() {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            out.add_scaled(&self.map.apply(&z.corner(v as u32, v as u32))?, 1)?;
        }
        Ok(out)
    }
}

/// Collapses along all invertible non-loop generators.
pub fn morita_collapse_all(pres: &Presentation) -> Result<(Presentation, Transport), NcError> {
    let conn: Vec<usize> = pres
        .inverses
        .iter()
        .map(|&(g, _)| g)
        .filter(|&g| pres.generators[g].source != pres.generators[g].target)
        .collect();
    morita_collapse(pres, &conn)
}

/// Identifies the endpoints of a spanning forest chosen greedily (in the
/// given order) among `connectors`, sending tree arrows and their inverses
/// to idempotents and retyping every other generator.
pub fn morita_collapse(
    pres: &Presentation,
    connectors: &[usize],
) -> Result<(Presentation, Transport), NcError> {
    let nv = pres.vertices.len();
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nxt = p[y];
            p[y] = r;
            y = nxt;
        }
        r
    }
    let mut tree = Vec::new();
    for &g in connectors {
        let inv = pres.inverse_of(g).ok_or_else(|| {
            NcError::NoSpanningForest(format!("{} is not invertible", pres.generators[g].name))
        })?;
        let (a, b) = (pres.generators[g].source, pres.generators[g].target);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            // keep the smaller index as the root
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[hi] = lo;
            tree.push(g);
            tree.push(inv);
        }
    }
    let roots: Vec<usize> = (0..nv).map(|v| find(&mut parent, v)).collect();
    let mut root_list: Vec<usize> = roots.clone();
    root_list.sort();
    root_list.dedup();
    let new_index: HashMap<usize, usize> =
        root_list.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let names: Vec<&str> = root_list.iter().map(|&r| pres.vertices[r].as_str()).collect();
    let mut out = Presentation::new(&names);
    let vmap: Vec<usize> = roots.iter().map(|r| new_index[r]).collect();
    let mut gmap: Vec<Poly> = Vec::with_capacity(pres.generators.len());
    let mut new_gen: HashMap<usize, usize> = HashMap::new();
    for (g, gen) in pres.generators.iter().enumerate() {
        if tree.contains(&g) {
            gmap.push(Poly::mono(Mono::idempotent(vmap[gen.source] as u32)));
        } else {
            let idx = out.add_generator(&gen.name, vmap[gen.source], vmap[gen.target], gen.degree)?;
            new_gen.insert(g, idx);
            gmap.push(Poly::zero());
        }
    }
    for (&g, &idx) in &new_gen {
        gmap[g] = out.generator(idx);
    }
    for &(g, h) in &pres.inverses {
        if let (Some(&a), Some(&b)) = (new_gen.get(&g), new_gen.get(&h)) {
            out.inverses.push((a, b));
        }
    }
    let map = AlgebraMap {
        vertices: vmap,
        generators: gmap,
    };
    for r in &pres.relations {
        out.add_relation(map.apply(r)?)?;
    }
    Ok((out, Transport { map, tree }))
}

/// One algebra map of a diagram; vertex images must be single vertices.
#[derive(Clone, Debug)]
pub struct DiagramMap {
    pub label: String,
    pub source: usize,
    pub target: usize,
    pub map: AlgebraMap,
}

/// Two composable pairs of maps `[first, second]` with the same composite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiagramSquare {
    pub path_a: [usize; 2],
    pub path_b: [usize; 2],
}

#[derive(Clone, Debug, Default)]
pub struct Diagram {
    pub objects: Vec<(String, Presentation)>,
    pub maps: Vec<DiagramMap>,
    pub squares: Vec<DiagramSquare>,
}

/// Colimit presentation of a diagram. Each object keeps its vertices,
/// generators and relations (names prefixed by `label/`). Each map `m` and
/// vertex `v` of its source adds an invertible degree-one connector
/// `m/v: v -> m(v)`, with intertwining relations `m/tgt(g) * g = m(g) *
/// m/src(g)` and, for every square, equality of the two composite
/// connectors.
pub fn amalgamate(diagram: &Diagram) -> Result<Presentation, NcError> {
    let mut out = Presentation::default();
    let mut voff = Vec::new();
    let mut goff = Vec::new();
    for (label, p) in &diagram.objects {
        voff.push(out.vertices.len());
        for v in &p.vertices {
            out.add_vertex(&format!("{label}/{v}"))?;
        }
    }
    for (k, (label, p)) in diagram.objects.iter().enumerate() {
        goff.push(out.generators.len());
        for g in &p.generators {
            out.add_generator(
                &format!("{label}/{}", g.name),
                g.source + voff[k],
                g.target + voff[k],
                g.degree,
            )?;
        }
        for &(g, h) in &p.inverses {
            out.inverses.push((g + goff[k], h + goff[k]));
        }
    }
    let shift = |k: usize, p: &Poly| -> Poly {
        p.terms()
            .map(|(m, c)| {
                let mut m = m.clone();
                m.src += voff[k] as u32;
                m.tgt += voff[k] as u32;
                for g in m.word.iter_mut() {
                    *g += goff[k] as u32;
                }
                (m, *c)
            })
            .collect()
    };
    for (k, (_, p)) in diagram.objects.iter().enumerate() {
        for r in &p.relations {
            out.add_relation(shift(k, r))?;
        }
    }
    // connectors
    let mut conn: Vec<Vec<usize>> = Vec::new();
    for m in &diagram.maps {
        let src = &diagram.objects[m.source].1;
        let tgt = &diagram.objects[m.target].1;
        m.map.check_typed(src, tgt)?;
        let mut ids = Vec::new();
        for (v, vname) in src.vertices.iter().enumerate() {
            let (g, _) = out.add_invertible(
                &format!("{}/{vname}", m.label),
                voff[m.source] + v,
                voff[m.target] + m.map.vertices[v],
                1,
            )?;
            ids.push(g);
        }
        conn.push(ids);
    }
    for (mi, m) in diagram.maps.iter().enumerate() {
        let src = &diagram.objects[m.source].1;
        for (g, gen) in src.generators.iter().enumerate() {
            let lhs = out.generator(conn[mi][gen.target]).mul(&out.generator(g + goff[m.source]))?;
            let img = shift(m.target, &m.map.generators[g]);
            let rhs = img.mul(&out.generator(conn[mi][gen.source]))?;
            out.add_relation(lhs.sub(&rhs)?)?;
        }
    }
    for sq in &diagram.squares {
        let composite = |path: [usize; 2]| -> Result<Vec<Poly>, NcError> {
            let (m1, m2) = (&diagram.maps[path[0]], &diagram.maps[path[1]]);
            if m1.target != m2.source {
                return Err(NcError::IllTypedMap(format!(
                    "{} then {} do not compose",
                    m1.label, m2.label
                )));
            }
            let nv = diagram.objects[m1.source].1.vertices.len();
            (0..nv)
                .map(|v| {
                    let w = m1.map.vertices[v];
                    out.generator(conn[path[1]][w])
                        .mul(&out.generator(conn[path[0]][v]))
                })
                .collect()
        };
        let a = composite(sq.path_a)?;
        let b = composite(sq.path_b)?;
        for (x, y) in a.iter().zip(&b) {
            if x.endpoints() != y.endpoints() {
                return Err(NcError::IllTypedMap("square does not commute on vertices".into()));
            }
            out.add_relation(x.sub(y)?)?;
        }
    }
    Ok(out)
}

/// Outcome of [`iso_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoReport {
    pub isomorphic: bool,
    pub reason: Option<String>,
    pub dims_source: Vec<usize>,
    pub dims_target: Vec<usize>,
}

/// Whether `map: A -> B` respects relations and maps the normal basis of
/// `A` up to each filtration degree `n <= d` unimodularly onto that of `B`.
pub fn iso_check(
    a: &RewriteSystem,
    b: &RewriteSystem,
    map: &AlgebraMap,
    d: u32,
) -> Result<IsoReport, NcError> {
    let fail = |reason: String, da: Vec<usize>, db: Vec<usize>| IsoReport {
        isomorphic: false,
        reason: Some(reason),
        dims_source: da,
        dims_target: db,
    };
    let ba = a.basis(d)?;
    let bb = b.basis(d)?;
    let (da, db) = (ba.dims(), bb.dims());
    if let Err(e) = map.check_typed(&a.base, &b.base) {
        return Ok(fail(e.to_string(), da, db));
    }
    if da != db {
        return Ok(fail("graded dimensions differ".into(), da, db));
    }
    for r in a.base.all_relations() {
        let img = b.reduce(&map.apply(&r)?)?;
        if !img.is_zero() {
            return Ok(fail(
                format!(
                    "relation {} maps to {}",
                    a.base.format_poly(&r),
                    b.base.format_poly(&img)
                ),
                da,
                db,
            ));
        }
    }
    let images: Vec<Poly> = ba
        .monos
        .iter()
        .map(|m| b.normal_form(&map.apply_mono(m)?))
        .collect::<Result<_, _>>()?;
    for n in 0..=d {
        let cols: Vec<usize> = (0..ba.len()).filter(|&i| ba.monos[i].deg <= n).collect();
        let rows: Vec<usize> = (0..bb.len()).filter(|&i| bb.monos[i].deg <= n).collect();
        if rows.len() != cols.len() {
            return Ok(fail(format!("filtration level {n} sizes differ"), da, db));
        }
        let row_of: HashMap<&Mono, usize> =
            rows.iter().enumerate().map(|(r, &i)| (&bb.monos[i], r)).collect();
        let mut m = IntMatrix::zeros(rows.len(), cols.len());
        for (c, &i) in cols.iter().enumerate() {
            for (mono, v) in images[i].terms() {
                match row_of.get(mono) {
                    Some(&r) => m.set(r, c, BigInt::from(*v)),
                    None => {
                        return Ok(fail(
                            format!(
                                "image of {} leaves filtration level {n}",
                                a.base.format_mono(&ba.monos[i])
                            ),
                            da,
                            db,
                        ))
                    }
                }
            }
        }
        if !m.determinant().abs().is_one() {
            return Ok(fail(format!("not unimodular at filtration level {n}"), da, db));
        }
    }
    Ok(IsoReport {
        isomorphic: true,
        reason: None,
        dims_source: da,
        dims_target: db,
    })
}

#[cfg(test)]
mod tests {
    use super::super::rewrite::complete;
    use super::*;

    fn b0() -> Presentation {
        let mut p = Presentation::new(&["1", "2"]);
        p.add_generator("x", 0, 1, 1).unwrap();
        p.add_generator("y", 1, 0, 1).unwrap();
        let r1 = p.expr(&[(1, &["x", "y"])]).unwrap();
        let r2 = p.expr(&[(1, &["y", "x"])]).unwrap();
        p.add_relation(r1).unwrap();
        p.add_relation(r2).unwrap();
        p
    }

    fn laurent(deg: u32) -> Presentation {
        let mut p = Presentation::new(&["*"]);
        p.add_invertible("s", 0, 0, deg).unwrap();
        p
    }

    fn free2() -> Presentation {
        let mut p = Presentation::new(&["*"]);
        p.add_generator("a", 0, 0, 1).unwrap();
        p.add_generator("b", 0, 0, 1).unwrap();
        p
    }

    fn convolve(a: &[usize], b: &[usize], n: usize) -> Vec<usize> {
        (0..=n)
            .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
            .collect()
    }

    #[test]
    fn tensor_with_ground_is_identity() {
        let p = tensor(&b0(), &Presentation::ground());
        assert_eq!(p.vertices.len(), 2);
        let rw = complete(&p, 6).unwrap();
        assert_eq!(rw.basis(4).unwrap().dims(), vec![2, 2, 0, 0, 0]);
    }

    #[test]
    fn b0_squared_by_convolution() {
        let p = tensor_many(&[("a", &b0()), ("b", &b0())]);
        assert_eq!(p.vertices.len(), 4);
        assert_eq!(p.generators.len(), 8);
        let rw = complete(&p, 8).unwrap();
        let one = complete(&b0(), 4).unwrap().basis(4).unwrap().dims();
        assert_eq!(rw.basis(4).unwrap().dims(), convolve(&one, &one, 4));
    }

    #[test]
    fn laurent_squared_by_convolution() {
        let p = tensor_many(&[("1", &laurent(1)), ("2", &laurent(1))]);
        let rw = complete(&p, 12).unwrap();
        assert!(rw.fully_complete);
        let one = vec![1, 2, 2, 2, 2, 2, 2];
        assert_eq!(rw.basis(6).unwrap().dims(), convolve(&one, &one, 6));
    }

    #[test]
    fn laurent_mod_s_minus_one() {
        let p = laurent(1);
        let rw = complete(&p, 6).unwrap();
        let z = p.expr(&[(1, &["s"]), (-1, &["e:*"])]).unwrap();
        let q = quotient_central(&rw, &[z]).unwrap();
        let rq = complete(&q, 6).unwrap();
        assert_eq!(rq.basis(4).unwrap().dims(), vec![1, 0, 0, 0, 0]);
        // quotient by nothing changes nothing
        assert_eq!(quotient_central(&rw, &[]).unwrap(), p);
    }

    #[test]
    fn non_central_rejected() {
        let p = b0();
        let rw = complete(&p, 6).unwrap();
        let z = p.expr(&[(1, &["e:1"])]).unwrap();
        assert!(matches!(
            quotient_central(&rw, &[z]),
            Err(NcError::NotCentral(_))
        ));
    }

    #[test]
    fn centers_of_small_algebras() {
        let p = b0();
        let rw = complete(&p, 8).unwrap();
        let c = center_up_to(&rw, 4).unwrap();
        assert_eq!(c, vec![p.one()]);
        let rw = complete(&free2(), 8).unwrap();
        let c = center_up_to(&rw, 4).unwrap();
        assert_eq!(c, vec![free2().one()]);
    }

    #[test]
    fn collapse_single_arrow() {
        let mut p = Presentation::new(&["1", "2"]);
        p.add_invertible("g", 0, 1, 1).unwrap();
        let (q, t) = morita_collapse_all(&p).unwrap();
        assert_eq!(q.vertices.len(), 1);
        assert!(q.generators.is_empty());
        assert_eq!(t.tree.len(), 2);
    }

    #[test]
    fn collapse_transports_arrow_to_loop() {
        let mut p = Presentation::new(&["1", "2"]);
        p.add_invertible("g", 0, 1, 1).unwrap();
        p.add_generator("x", 0, 1, 1).unwrap();
        let (q, t) = morita_collapse_all(&p).unwrap();
        assert_eq!(q.generators.len(), 1);
        let x = &q.generators[0];
        assert_eq!((x.source, x.target), (0, 0));
        let rw = complete(&q, 6).unwrap();
        assert_eq!(rw.basis(3).unwrap().dims(), vec![1, 1, 1, 1]);
        let img = t.apply(&p.expr(&[(1, &["x"])]).unwrap()).unwrap();
        assert_eq!(q.format_poly(&img), "1*x");
    }

    #[test]
    fn iso_identity_and_mismatch() {
        let p = b0();
        let rw = complete(&p, 6).unwrap();
        let id = AlgebraMap::by_name(&p, &p).unwrap();
        assert!(iso_check(&rw, &rw, &id, 4).unwrap().isomorphic);
        let l = laurent(1);
        let rl = complete(&l, 6).unwrap();
        let map = AlgebraMap {
            vertices: vec![0, 0],
            generators: vec![Poly::zero(), Poly::zero()],
        };
        assert!(!iso_check(&rw, &rl, &map, 4).unwrap().isomorphic);
    }

    #[test]
    fn one_object_diagram() {
        let d = Diagram {
            objects: vec![("A".into(), b0())],
            ..Default::default()
        };
        let p = amalgamate(&d).unwrap();
        let rw = complete(&p, 4).unwrap();
        assert_eq!(rw.basis(3).unwrap().dims(), vec![2, 2, 0, 0]);
    }

    #[test]
    fn node_inclusions_collapse_back() {
        // Z -> B0 hitting e_1, glued along its connector, collapses to B0.
        let z = Presentation::ground();
        let b = b0();
        let d = Diagram {
            objects: vec![("z".into(), z), ("b".into(), b.clone())],
            maps: vec![DiagramMap {
                label: "i".into(),
                source: 0,
                target: 1,
                map: AlgebraMap {
                    vertices: vec![0],
                    generators: vec![],
                },
            }],
            squares: vec![],
        };
        let glued = amalgamate(&d).unwrap();
        let (c, _) = morita_collapse_all(&glued).unwrap();
        let rc = complete(&c, 6).unwrap();
        let rb = complete(&b, 6).unwrap();
        let map = AlgebraMap {
            vertices: vec![0, 1],
            generators: vec![
                c.expr(&[(1, &["b/x"])]).unwrap(),
                c.expr(&[(1, &["b/y"])]).unwrap(),
            ],
        };
        assert!(iso_check(&rb, &rc, &map, 4).unwrap().isomorphic);
    }
}
