//! Finitely presented path algebras over the integers.

use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::poly::{Mono, Poly};
use super::NcError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub source: usize,
    pub target: usize,
    pub degree: u32,
}

/// Vertices, arrows with positive degrees, relations and formal inverses.
///
/// An inverse pair `(g, h)` stands for the relations `g h = e_target(g)` and
/// `h g = e_source(g)`; they are added by [`Presentation::all_relations`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Presentation {
    pub vertices: Vec<String>,
    pub generators: Vec<Generator>,
    pub relations: Vec<Poly>,
    pub inverses: Vec<(usize, usize)>,
}

pub fn inverse_name(g: &str) -> String {
    format!("{g}^-1")
}

impl Presentation {
    pub fn new<S: AsRef<str>>(vertices: &[S]) -> Self {
        Presentation {
            vertices: vertices.iter().map(|v| v.as_ref().to_string()).collect(),
            ..Default::default()
        }
    }

    /// The ground ring: one vertex, nothing else.
    pub fn ground() -> Self {
        Self::new(&["*"])
    }

    pub fn add_vertex(&mut self, name: &str) -> Result<usize, NcError> {
        if self.vertices.iter().any(|v| v == name) {
            return Err(NcError::DuplicateName(name.to_string()));
        }
        self.vertices.push(name.to_string());
        Ok(self.vertices.len() - 1)
    }

    pub fn add_generator(
        &mut self,
        name: &str,
        source: usize,
        target: usize,
        degree: u32,
    ) -> Result<usize, NcError> {
        if degree == 0 {
            return Err(NcError::BadDegree(name.to_string()));
        }
        if name.starts_with("e:") || self.generators.iter().any(|g| g.name == name) {
            return Err(NcError::DuplicateName(name.to_string()));
        }
        if source >= self.vertices.len() || target >= self.vertices.len() {
            return Err(NcError::UnknownVertex(format!("{source} or {target}")));
        }
        self.generators.push(Generator {
            name: name.to_string(),
            source,
            target,
            degree,
        });
        Ok(self.generators.len() - 1)
    }

    /// Adds `g` and its formal inverse `g^-1` of the same degree.
    pub fn add_invertible(
        &mut self,
        name: &str,
        source: usize,
        target: usize,
        degree: u32,
    ) -> Result<(usize, usize), NcError> {
        let g = self.add_generator(name, source, target, degree)?;
        let h = self.add_generator(&inverse_name(name), target, source, degree)?;
        self.inverses.push((g, h));
        Ok((g, h))
    }

    pub fn add_relation(&mut self, r: Poly) -> Result<(), NcError> {
        if r.is_zero() {
            return Ok(());
        }
        if r.endpoints().is_none() {
            return Err(NcError::InhomogeneousRelation(self.format_poly(&r)));
        }
        self.relations.push(r);
        Ok(())
    }

    pub fn generator_index(&self, name: &str) -> Result<usize, NcError> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| NcError::UnknownGenerator(name.to_string()))
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize, NcError> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| NcError::UnknownVertex(name.to_string()))
    }

    pub fn inverse_of(&self, g: usize) -> Option<usize> {
        self.inverses.iter().find_map(|&(a, b)| {
            if a == g {
                Some(b)
            } else if b == g {
                Some(a)
            } else {
                None
            }
        })
    }

    pub fn gen_mono(&self, g: usize) -> Mono {
        let gen = &self.generators[g];
        Mono {
            deg: gen.degree,
            word: vec![g as u32],
            src: gen.source as u32,
            tgt: gen.target as u32,
        }
    }

    /// Path from generator indices in composition order.
    pub fn path_of(&self, word: &[usize]) -> Result<Mono, NcError> {
        let mut it = word.iter().rev();
        let Some(&first) = it.next() else {
            return Err(NcError::NotComposable("empty word without vertex".into()));
        };
        let mut m = self.gen_mono(first);
        for &g in it {
            m = self
                .gen_mono(g)
                .compose(&m)
                .ok_or_else(|| NcError::NotComposable(self.word_name(word)))?;
        }
        Ok(m)
    }

    /// Path from names in composition order; `["e:v"]` is the idempotent of
    /// vertex `v`.
    pub fn path<S: AsRef<str>>(&self, names: &[S]) -> Result<Mono, NcError> {
        if names.len() == 1 {
            if let Some(v) = names[0].as_ref().strip_prefix("e:") {
                return Ok(Mono::idempotent(self.vertex_index(v)? as u32));
            }
        }
        let idx = names
            .iter()
            .map(|n| self.generator_index(n.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        self.path_of(&idx)
    }

    pub fn expr(&self, terms: &[(i64, &[&str])]) -> Result<Poly, NcError> {
        let mut p = Poly::zero();
        for (c, names) in terms {
            p.add_term(self.path(names)?, *c)?;
        }
        Ok(p)
    }

    pub fn idempotent(&self, v: usize) -> Poly {
        Poly::mono(Mono::idempotent(v as u32))
    }

    /// `sum_v e_v`.
    pub fn one(&self) -> Poly {
        (0..self.vertices.len())
            .map(|v| (Mono::idempotent(v as u32), 1))
            .collect()
    }

    pub fn generator(&self, g: usize) -> Poly {
        Poly::mono(self.gen_mono(g))
    }

    /// Declared relations followed by the inverse relations.
    pub fn all_relations(&self) -> Vec<Poly> {
        let mut out = self.relations.clone();
        for &(g, h) in &self.inverses {
            let gm = self.gen_mono(g);
            let hm = self.gen_mono(h);
            let gh = gm.compose(&hm).expect("ill-typed inverse pair");
            let hg = hm.compose(&gm).expect("ill-typed inverse pair");
            let mut r1 = Poly::mono(gh);
            r1.add_term(Mono::idempotent(gm.tgt), -1).unwrap();
            let mut r2 = Poly::mono(hg);
            r2.add_term(Mono::idempotent(gm.src), -1).unwrap();
            out.push(r1);
            out.push(r2);
        }
        out
    }

    pub fn max_relation_degree(&self) -> u32 {
        self.all_relations().iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn word_name(&self, word: &[usize]) -> String {
        word.iter()
            .map(|&g| self.generators[g].name.as_str())
            .collect::<Vec<_>>()
            .join("*")
    }

    pub fn mono_names(&self, m: &Mono) -> Vec<String> {
        if m.word.is_empty() {
            vec![format!("e:{}", self.vertices[m.src as usize])]
        } else {
            m.word
                .iter()
                .map(|&g| self.generators[g as usize].name.clone())
                .collect()
        }
    }

    pub fn format_mono(&self, m: &Mono) -> String {
        self.mono_names(m).join("*")
    }

    pub fn format_poly(&self, p: &Poly) -> String {
        if p.is_zero() {
            return "0".into();
        }
        p.terms()
            .rev()
            .map(|(m, c)| format!("{c}*{}", self.format_mono(m)))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Renames generators and vertices with a common prefix.
    pub fn prefixed(&self, prefix: &str) -> Presentation {
        let mut p = self.clone();
        for v in p.vertices.iter_mut() {
            *v = format!("{prefix}{v}");
        }
        for g in p.generators.iter_mut() {
            g.name = format!("{prefix}{}", g.name);
        }
        p
    }

    pub fn name_lookup(&self) -> HashMap<&str, usize> {
        self.generators
            .iter()
            .enumerate()
            .map(|(i, g)| (g.name.as_str(), i))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct GeneratorJson {
    name: String,
    source: String,
    target: String,
    degree: u32,
}

#[derive(Serialize, Deserialize)]
struct PresentationJson {
    vertices: Vec<String>,
    generators: Vec<GeneratorJson>,
    /// Each relation is a list of `[coefficient, [names...]]`.
    relations: Vec<Vec<(i64, Vec<String>)>>,
    inverses: Vec<(String, String)>,
}

impl Serialize for Presentation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PresentationJson {
            vertices: self.vertices.clone(),
            generators: self
                .generators
                .iter()
                .map(|g| GeneratorJson {
                    name: g.name.clone(),
                    source: self.vertices[g.source].clone(),
                    target: self.vertices[g.target].clone(),
                    degree: g.degree,
                })
                .collect(),
            relations: self
                .relations
                .iter()
                .map(|r| {
                    r.terms()
                        .rev()
                        .map(|(m, c)| (*c, self.mono_names(m)))
                        .collect()
                })
                .collect(),
            inverses: self
                .inverses
                .iter()
                .map(|&(g, h)| {
                    (
                        self.generators[g].name.clone(),
                        self.generators[h].name.clone(),
                    )
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Presentation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let j = PresentationJson::deserialize(d)?;
        let mut p = Presentation::new(&j.vertices);
        for g in &j.generators {
            let s = p.vertex_index(&g.source).map_err(D::Error::custom)?;
            let t = p.vertex_index(&g.target).map_err(D::Error::custom)?;
            p.add_generator(&g.name, s, t, g.degree)
                .map_err(D::Error::custom)?;
        }
        for (g, h) in &j.inverses {
            let gi = p.generator_index(g).map_err(D::Error::custom)?;
            let hi = p.generator_index(h).map_err(D::Error::custom)?;
            let (a, b) = (&p.generators[gi], &p.generators[hi]);
            if a.source != b.target || a.target != b.source {
                return Err(D::Error::custom(format!("ill-typed inverse pair {g}, {h}")));
            }
            p.inverses.push((gi, hi));
        }
        for r in &j.relations {
            let mut poly = Poly::zero();
            for (c, names) in r {
                let m = p.path(names).map_err(D::Error::custom)?;
                poly.add_term(m, *c).map_err(D::Error::custom)?;
            }
            p.add_relation(poly).map_err(D::Error::custom)?;
        }
        Ok(p)
    }
}
