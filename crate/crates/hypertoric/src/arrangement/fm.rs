//! Exact feasibility of small systems of linear (in)equalities by
//! Fourier-Motzkin elimination, returning a witness point.

use std::collections::HashSet;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    /// strictly positive
    Gt,
    /// nonnegative
    Ge,
}

/// `coeffs . u + constant  (rel)  0`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub coeffs: Vec<BigRational>,
    pub constant: BigRational,
    pub rel: Rel,
}

impl Constraint {
    pub fn new(coeffs: Vec<BigRational>, constant: BigRational, rel: Rel) -> Self {
        Constraint {
            coeffs,
            constant,
            rel,
        }
    }

    fn eval(&self, u: &[BigRational]) -> BigRational {
        self.coeffs
            .iter()
            .zip(u)
            .fold(self.constant.clone(), |acc, (a, x)| acc + a * x)
    }

    pub fn holds(&self, u: &[BigRational]) -> bool {
        let v = self.eval(u);
        match self.rel {
            Rel::Eq => v.is_zero(),
            Rel::Gt => v.is_positive(),
            Rel::Ge => !v.is_negative(),
        }
    }

    /// Scale so the first nonzero coefficient has absolute value one.
    fn normalized(mut self) -> Self {
        let lead = self
            .coeffs
            .iter()
            .find(|c| !c.is_zero())
            .cloned()
            .or_else(|| (!self.constant.is_zero()).then(|| self.constant.clone()));
        if let Some(l) = lead {
            let s = l.abs();
            for c in self.coeffs.iter_mut() {
                *c = &*c / &s;
            }
            self.constant = &self.constant / &s;
        }
        self
    }
}

/// Substitution `u[var] = sum coeffs . u + constant` recorded for
/// back-substitution of an eliminated equality.
struct Substitution {
    var: usize,
    coeffs: Vec<BigRational>,
    constant: BigRational,
}

enum Step {
    Subst(Substitution),
    Eliminate { var: usize, constraints: Vec<Constraint> },
}

/// Returns a point satisfying every constraint, or `None` if the system is
/// infeasible. Deterministic for a fixed constraint order.
pub fn feasible_point(dim: usize, constraints: &[Constraint]) -> Option<Vec<BigRational>> {
    let mut cur: Vec<Constraint> = constraints.to_vec();
    let mut steps: Vec<Step> = Vec::new();
    let mut eliminated = vec![false; dim];

    // Equalities first, by substitution.
    while let Some(pos) = cur.iter().position(|c| c.rel == Rel::Eq) {
        let eq = cur.remove(pos);
        let Some(var) = (0..dim).find(|&j| !eq.coeffs[j].is_zero()) else {
            if eq.constant.is_zero() {
                continue;
            }
            return None;
        };
        let a = eq.coeffs[var].clone();
        let mut coeffs: Vec<BigRational> = eq.coeffs.iter().map(|c| -(c / &a)).collect();
        coeffs[var] = BigRational::zero();
        let constant = -(&eq.constant / &a);
        cur = cur
            .into_iter()
            .map(|c| substitute(c, var, &coeffs, &constant))
            .collect();
        eliminated[var] = true;
        steps.push(Step::Subst(Substitution {
            var,
            coeffs,
            constant,
        }));
    }

    for var in 0..dim {
        if eliminated[var] {
            continue;
        }
        let (with, without): (Vec<_>, Vec<_>) =
            cur.into_iter().partition(|c| !c.coeffs[var].is_zero());
        let mut next: Vec<Constraint> = without;
        let mut seen: HashSet<Constraint> = next.iter().cloned().collect();
        let pos: Vec<&Constraint> = with.iter().filter(|c| c.coeffs[var].is_positive()).collect();
        let neg: Vec<&Constraint> = with.iter().filter(|c| c.coeffs[var].is_negative()).collect();
        for p in &pos {
            for n in &neg {
                let a = p.coeffs[var].clone();
                let b = -n.coeffs[var].clone();
                // b*p + a*n cancels var
                let coeffs: Vec<BigRational> = p
                    .coeffs
                    .iter()
                    .zip(&n.coeffs)
                    .map(|(x, y)| &b * x + &a * y)
                    .collect();
                let constant = &b * &p.constant + &a * &n.constant;
                let rel = if p.rel == Rel::Gt || n.rel == Rel::Gt {
                    Rel::Gt
                } else {
                    Rel::Ge
                };
                let c = Constraint::new(coeffs, constant, rel).normalized();
                if seen.insert(c.clone()) {
                    next.push(c);
                }
            }
        }
        steps.push(Step::Eliminate {
            var,
            constraints: with,
        });
        cur = next;
    }

    // Only constant constraints remain.
    let zero = vec![BigRational::zero(); dim];
    if !cur.iter().all(|c| c.holds(&zero)) {
        return None;
    }

    let mut u = vec![BigRational::zero(); dim];
    for step in steps.iter().rev() {
        match step {
            Step::Eliminate { var, constraints } => {
                u[*var] = choose_value(*var, constraints, &u)?;
            }
            Step::Subst(s) => {
                u[s.var] = s
                    .coeffs
                    .iter()
                    .zip(&u)
                    .fold(s.constant.clone(), |acc, (a, x)| acc + a * x);
            }
        }
    }
    debug_assert!(constraints.iter().all(|c| c.holds(&u)));
    Some(u)
}

fn substitute(
    mut c: Constraint,
    var: usize,
    coeffs: &[BigRational],
    constant: &BigRational,
) -> Constraint {
    let a = std::mem::take(&mut c.coeffs[var]);
    if a.is_zero() {
        return c;
    }
    for (j, x) in coeffs.iter().enumerate() {
        c.coeffs[j] += &a * x;
    }
    c.constant += &a * constant;
    c
}

/// Picks a value for `var` given all later variables fixed in `u`.
fn choose_value(var: usize, constraints: &[Constraint], u: &[BigRational]) -> Option<BigRational> {
    let mut lo: Option<(BigRational, bool)> = None;
    let mut hi: Option<(BigRational, bool)> = None;
    for c in constraints {
        let a = &c.coeffs[var];
        let rest = c
            .coeffs
            .iter()
            .zip(u)
            .enumerate()
            .filter(|(j, _)| *j != var)
            .fold(c.constant.clone(), |acc, (_, (k, x))| acc + k * x);
        // a*x + rest (rel) 0  ->  x (rel') -rest/a
        let bound = -(&rest / a);
        let strict = c.rel == Rel::Gt;
        if a.is_positive() {
            let tighter = match &lo {
                None => true,
                Some((b, s)) => bound > *b || (bound == *b && strict && !s),
            };
            if tighter {
                lo = Some((bound, strict));
            }
        } else {
            let tighter = match &hi {
                None => true,
                Some((b, s)) => bound < *b || (bound == *b && strict && !s),
            };
            if tighter {
                hi = Some((bound, strict));
            }
        }
    }
    let two = BigRational::from_integer(2.into());
    match (lo, hi) {
        (None, None) => Some(BigRational::zero()),
        (Some((l, _)), None) => Some(l + BigRational::one()),
        (None, Some((h, _))) => Some(h - BigRational::one()),
        (Some((l, ls)), Some((h, hs))) => {
            if l < h {
                Some((l + h) / two)
            } else if l == h && !ls && !hs {
                Some(l)
            } else {
                None
            }
        }
    }
}
