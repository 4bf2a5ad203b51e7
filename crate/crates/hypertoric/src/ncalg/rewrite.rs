//! Degree-bounded completion of path-algebra presentations and normal forms.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::poly::{Mono, Poly};
use super::presentation::Presentation;
use super::NcError;

pub const DEFAULT_RULE_CAP: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompletionOptions {
    /// Ambiguities of degree above this are left unresolved.
    pub degree_bound: u32,
    pub max_rules: usize,
}

impl CompletionOptions {
    pub fn up_to(degree_bound: u32) -> Self {
        CompletionOptions {
            degree_bound,
            max_rules: DEFAULT_RULE_CAP,
        }
    }
}

/// `lhs -> rhs` with `rhs` strictly below `lhs` in the monomial order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Mono,
    pub rhs: Poly,
}

impl Rule {
    fn as_poly(&self) -> Poly {
        let mut p = self.rhs.scale(-1).expect("negation overflow");
        p.add_term(self.lhs.clone(), 1).expect("overflow");
        p
    }
}

#[derive(Clone, Debug)]
pub struct RewriteSystem {
    pub base: Presentation,
    pub rules: Vec<Rule>,
    /// Every ambiguity of degree at most this resolves.
    pub completion_degree: u32,
    /// True when no ambiguity was left unresolved at any degree, so the
    /// rules form a finite Groebner basis.
    pub fully_complete: bool,
    lookup: HashMap<Vec<u32>, usize>,
    max_lhs: usize,
}

/// Proper overlaps `l1 = u v`, `l2 = v w` with `v` nonempty; returns the
/// lengths `|u|`.
fn overlaps(l1: &[u32], l2: &[u32]) -> Vec<usize> {
    let mut out = Vec::new();
    for k in 1..l1.len().min(l2.len()) {
        if l1[l1.len() - k..] == l2[..k] {
            out.push(l1.len() - k);
        }
    }
    out
}

fn contains(hay: &[u32], needle: &[u32]) -> bool {
    needle.len() <= hay.len() && hay.windows(needle.len()).any(|w| w == needle)
}

fn sub_mono(pres: &Presentation, word: &[u32], src: u32, tgt: u32) -> Option<Mono> {
    if word.is_empty() {
        return None;
    }
    let deg = word
        .iter()
        .map(|&g| pres.generators[g as usize].degree)
        .sum();
    Some(Mono {
        deg,
        word: word.to_vec(),
        src,
        tgt,
    })
}

fn gen_src(pres: &Presentation, g: u32) -> u32 {
    pres.generators[g as usize].source as u32
}

fn gen_tgt(pres: &Presentation, g: u32) -> u32 {
    pres.generators[g as usize].target as u32
}

/// Leftmost, then shortest, subword of `w` that is a rule's left side.
fn find_redex(
    lookup: &HashMap<Vec<u32>, usize>,
    max_lhs: usize,
    w: &[u32],
) -> Option<(usize, usize, usize)> {
    for i in 0..w.len() {
        for j in i + 1..=w.len().min(i + max_lhs) {
            if let Some(&k) = lookup.get(&w[i..j]) {
                return Some((i, j, k));
            }
        }
    }
    None
}

/// Replaces `m.word[i..j]` by `rhs`.
fn splice(pres: &Presentation, m: &Mono, i: usize, j: usize, rhs: &Poly) -> Poly {
    let w = &m.word;
    let left = if i == 0 {
        None
    } else {
        sub_mono(pres, &w[..i], gen_src(pres, w[i - 1]), m.tgt)
    };
    let right = if j == w.len() {
        None
    } else {
        sub_mono(pres, &w[j..], m.src, gen_tgt(pres, w[j]))
    };
    rhs.sandwich(left.as_ref(), right.as_ref())
}

struct Engine<'a> {
    pres: &'a Presentation,
    rules: Vec<Option<Rule>>,
    lookup: HashMap<Vec<u32>, usize>,
    max_lhs: usize,
}

impl Engine<'_> {
    fn step(&self, m: &Mono) -> Option<Poly> {
        let (i, j, k) = find_redex(&self.lookup, self.max_lhs, &m.word)?;
        let rule = self.rules[k].as_ref().expect("stale lookup");
        Some(splice(self.pres, m, i, j, &rule.rhs))
    }

    fn normal_form(&self, p: &Poly) -> Result<Poly, NcError> {
        let mut work = p.clone();
        let mut done = Poly::zero();
        while let Some((m, c)) = work.pop_leading() {
            match self.step(&m) {
                Some(r) => work.add_scaled(&r, c)?,
                None => done.add_term(m, c)?,
            }
        }
        Ok(done)
    }

    fn active(&self) -> impl Iterator<Item = (usize, &Rule)> {
        self.rules
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.as_ref().map(|r| (i, r)))
    }

    /// S-polynomials for overlaps of `a` (left) with `b` (right).
    fn critical_pairs(&self, a: &Rule, b: &Rule) -> Vec<(u32, Poly)> {
        let mut out = Vec::new();
        for ulen in overlaps(&a.lhs.word, &b.lhs.word) {
            // word = u v w where a.lhs = u v and b.lhs = v w
            let k = a.lhs.word.len() - ulen;
            let wword = &b.lhs.word[k..];
            let uword = &a.lhs.word[..ulen];
            let w = sub_mono(self.pres, wword, b.lhs.src, gen_tgt(self.pres, wword[0]))
                .expect("nonempty");
            let u = sub_mono(self.pres, uword, gen_src(self.pres, uword[ulen - 1]), a.lhs.tgt)
                .expect("nonempty");
            let deg = u.deg + b.lhs.deg;
            let s1 = a.rhs.sandwich(None, Some(&w));
            let s2 = b.rhs.sandwich(Some(&u), None);
            let mut s = s1;
            s.add_scaled(&s2, -1).expect("overflow");
            out.push((deg, s));
        }
        out
    }
}

/// Polynomials awaiting reduction, smallest degree first, then FIFO.
#[derive(Default)]
struct Pending {
    heap: BinaryHeap<Reverse<(u32, usize)>>,
    items: Vec<Option<Poly>>,
}

impl Pending {
    fn push(&mut self, deg: u32, p: Poly) {
        self.items.push(Some(p));
        self.heap.push(Reverse((deg, self.items.len() - 1)));
    }

    fn pop(&mut self) -> Option<(u32, Poly)> {
        let Reverse((deg, idx)) = self.heap.pop()?;
        Some((deg, self.items[idx].take().expect("queue item used twice")))
    }
}

/// Completes `pres` with the default rule cap.
pub fn complete(pres: &Presentation, degree_bound: u32) -> Result<RewriteSystem, NcError> {
    complete_with(pres, CompletionOptions::up_to(degree_bound))
}

pub fn complete_with(
    pres: &Presentation,
    opts: CompletionOptions,
) -> Result<RewriteSystem, NcError> {
    let mut eng = Engine {
        pres,
        rules: Vec::new(),
        lookup: HashMap::new(),
        max_lhs: 0,
    };
    let mut queue = Pending::default();
    for r in pres.all_relations() {
        let d = r.degree();
        queue.push(d, r);
    }
    let mut truncated = false;
    let mut live = 0usize;
    while let Some((deg, p)) = queue.pop() {
        if deg > opts.degree_bound {
            truncated = true;
            break;
        }
        let r = eng.normal_form(&p)?;
        let Some((lead, c)) = r.leading().map(|(m, c)| (m.clone(), c)) else {
            continue;
        };
        if lead.is_idempotent() {
            return Err(NcError::IdempotentRelation(pres.format_poly(&r)));
        }
        let r = match c {
            1 => r,
            -1 => r.scale(-1)?,
            _ => return Err(NcError::NonUnitLeading(pres.format_poly(&r))),
        };
        let mut rhs = r.scale(-1)?;
        rhs.add_term(lead.clone(), 1)?;
        let rule = Rule { lhs: lead, rhs };

        // Rules whose left side contains the new one are re-queued.
        let stale: Vec<usize> = eng
            .active()
            .filter(|(_, old)| contains(&old.lhs.word, &rule.lhs.word))
            .map(|(i, _)| i)
            .collect();
        for i in stale {
            let old = eng.rules[i].take().expect("active");
            eng.lookup.remove(&old.lhs.word);
            live -= 1;
            queue.push(old.lhs.deg, old.as_poly());
        }

        let mut pairs = Vec::new();
        for (_, old) in eng.active() {
            pairs.extend(eng.critical_pairs(&rule, old));
            pairs.extend(eng.critical_pairs(old, &rule));
        }
        pairs.extend(eng.critical_pairs(&rule, &rule));
        for (d, s) in pairs {
            queue.push(d, s);
        }

        eng.max_lhs = eng.max_lhs.max(rule.lhs.word.len());
        eng.lookup.insert(rule.lhs.word.clone(), eng.rules.len());
        eng.rules.push(Some(rule));
        live += 1;
        if live > opts.max_rules {
            return Err(NcError::CompletionBlowup {
                rules: live,
                cap: opts.max_rules,
            });
        }
    }

    // Final interreduction of right-hand sides.
    let mut rules: Vec<Rule> = eng.rules.iter().flatten().cloned().collect();
    for k in 0..rules.len() {
        rules[k].rhs = eng.normal_form(&rules[k].rhs)?;
    }
    rules.sort_by(|a, b| a.lhs.cmp(&b.lhs));
    let lookup = rules
        .iter()
        .enumerate()
        .map(|(i, r)| (r.lhs.word.clone(), i))
        .collect();
    let max_lhs = rules.iter().map(|r| r.lhs.word.len()).max().unwrap_or(0);
    Ok(RewriteSystem {
        base: pres.clone(),
        rules,
        completion_degree: opts.degree_bound,
        fully_complete: !truncated,
        lookup,
        max_lhs,
    })
}

impl RewriteSystem {
    fn engine(&self) -> Engine<'_> {
        Engine {
            pres: &self.base,
            rules: self.rules.iter().cloned().map(Some).collect(),
            lookup: self.lookup.clone(),
            max_lhs: self.max_lhs,
        }
    }

    /// Whether normal forms are exact for paths of this degree.
    pub fn covers_degree(&self, deg: u32) -> bool {
        self.fully_complete || deg <= self.completion_degree
    }

    pub fn normal_form(&self, p: &Poly) -> Result<Poly, NcError> {
        let deg = p.degree();
        if !self.covers_degree(deg) {
            return Err(NcError::DegreeOverflow {
                needed: deg,
                available: self.completion_degree,
            });
        }
        self.reduce(p)
    }

    /// Reduction without the degree guard.
    pub fn reduce(&self, p: &Poly) -> Result<Poly, NcError> {
        let mut work = p.clone();
        let mut done = Poly::zero();
        while let Some((m, c)) = work.pop_leading() {
            match self.step(&m) {
                Some(r) => work.add_scaled(&r, c)?,
                None => done.add_term(m, c)?,
            }
        }
        Ok(done)
    }

    fn step(&self, m: &Mono) -> Option<Poly> {
        let (i, j, k) = find_redex(&self.lookup, self.max_lhs, &m.word)?;
        Some(splice(&self.base, m, i, j, &self.rules[k].rhs))
    }

    pub fn is_irreducible(&self, m: &Mono) -> bool {
        self.step(m).is_none()
    }

    /// Product followed by reduction.
    pub fn multiply(&self, a: &Poly, b: &Poly) -> Result<Poly, NcError> {
        self.normal_form(&a.mul(b)?)
    }

    /// Re-checks every ambiguity of degree at most `degree` against the
    /// final rules. Returns the first unresolved one.
    pub fn certify(&self, degree: u32) -> Result<(), NcError> {
        let eng = self.engine();
        for a in &self.rules {
            for b in &self.rules {
                for (d, s) in eng.critical_pairs(a, b) {
                    if d > degree {
                        continue;
                    }
                    let r = self.reduce(&s)?;
                    if !r.is_zero() {
                        return Err(NcError::Unresolved(format!(
                            "{} / {}: {}",
                            self.base.format_mono(&a.lhs),
                            self.base.format_mono(&b.lhs),
                            self.base.format_poly(&r)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Irreducible paths of degree at most `max_degree`.
    pub fn basis(&self, max_degree: u32) -> Result<GradedBasis, NcError> {
        if !self.covers_degree(max_degree) {
            return Err(NcError::DegreeOverflow {
                needed: max_degree,
                available: self.completion_degree,
            });
        }
        let mut monos: Vec<Mono> = Vec::new();
        let mut stack: Vec<Mono> = (0..self.base.vertices.len())
            .map(|v| Mono::idempotent(v as u32))
            .collect();
        while let Some(m) = stack.pop() {
            for (g, gen) in self.base.generators.iter().enumerate() {
                if gen.source as u32 != m.tgt || m.deg + gen.degree > max_degree {
                    continue;
                }
                let ext = self.base.gen_mono(g).compose(&m).expect("typed");
                // only prefixes of the extended word can be new redexes
                let w = &ext.word;
                let reducible =
                    (1..=w.len().min(self.max_lhs)).any(|j| self.lookup.contains_key(&w[..j]));
                if !reducible {
                    stack.push(ext);
                }
            }
            monos.push(m);
        }
        Ok(GradedBasis::new(max_degree, monos))
    }
}

/// Normal-form paths up to a degree, sorted in monomial order.
#[derive(Clone, Debug)]
pub struct GradedBasis {
    pub max_degree: u32,
    pub monos: Vec<Mono>,
    index: HashMap<Mono, usize>,
}

impl GradedBasis {
    fn new(max_degree: u32, mut monos: Vec<Mono>) -> Self {
        monos.sort();
        let index = monos
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        GradedBasis {
            max_degree,
            monos,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn position(&self, m: &Mono) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Number of basis paths in each degree `0..=max_degree`.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![0; self.max_degree as usize + 1];
        for m in &self.monos {
            d[m.deg as usize] += 1;
        }
        d
    }

    pub fn of_degree(&self, deg: u32) -> Vec<&Mono> {
        self.monos.iter().filter(|m| m.deg == deg).collect()
    }

    /// Paths from `src` to `tgt`.
    pub fn between(&self, src: u32, tgt: u32) -> Vec<&Mono> {
        self.monos
            .iter()
            .filter(|m| m.src == src && m.tgt == tgt)
            .collect()
    }
}
