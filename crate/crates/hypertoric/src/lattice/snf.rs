//! Smith and Hermite normal forms, integer kernels and unimodular completion.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::IntMatrix;

/// `A = U * D * V` with `U`, `V` unimodular and `D` diagonal, `d1 | d2 | ...`.
///
/// The inverses of both transforms are kept because the kernel and solving
/// routines need them and they are free to track during elimination.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub u_inv: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let k = self.d.rows().min(self.d.cols());
        (0..k).map(|i| self.d.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }

    /// True when every nonzero invariant factor is 1.
    pub fn all_units(&self) -> bool {
        self.diagonal()
            .iter()
            .filter(|x| !x.is_zero())
            .all(|x| x.is_one())
    }
}

struct Tracker {
    a: IntMatrix,
    // P A Q = D; P_inv, Q_inv tracked alongside.
    p: IntMatrix,
    p_inv: IntMatrix,
    q: IntMatrix,
    q_inv: IntMatrix,
}

impl Tracker {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        self.p.swap_rows(i, j);
        self.p_inv.swap_cols(i, j);
    }
    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        self.q.swap_cols(i, j);
        self.q_inv.swap_rows(i, j);
    }
    /// row[dst] += k row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.a.add_row_multiple(dst, src, k);
        self.p.add_row_multiple(dst, src, k);
        self.p_inv.add_col_multiple(src, dst, &-k);
    }
    /// col[dst] += k col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.a.add_col_multiple(dst, src, k);
        self.q.add_col_multiple(dst, src, k);
        self.q_inv.add_row_multiple(src, dst, &-k);
    }
    fn negate_row(&mut self, r: usize) {
        self.a.negate_row(r);
        self.p.negate_row(r);
        self.p_inv.negate_col(r);
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let (m, n) = (a.rows(), a.cols());
    let mut t = Tracker {
        a: a.clone(),
        p: IntMatrix::identity(m),
        p_inv: IntMatrix::identity(m),
        q: IntMatrix::identity(n),
        q_inv: IntMatrix::identity(n),
    };
    for s in 0..m.min(n) {
        // smallest nonzero pivot in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in s..m {
            for j in s..n {
                let v = t.a.get(i, j);
                if !v.is_zero() && best.map_or(true, |(bi, bj)| v.abs() < t.a.get(bi, bj).abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        t.swap_rows(s, pi);
        t.swap_cols(s, pj);
        loop {
            let mut dirty = false;
            for i in s + 1..m {
                if t.a.get(i, s).is_zero() {
                    continue;
                }
                let q = t.a.get(i, s).div_floor(t.a.get(s, s));
                t.add_row(i, s, &-q);
                if !t.a.get(i, s).is_zero() {
                    t.swap_rows(s, i);
                    dirty = true;
                }
            }
            for j in s + 1..n {
                if t.a.get(s, j).is_zero() {
                    continue;
                }
                let q = t.a.get(s, j).div_floor(t.a.get(s, s));
                t.add_col(j, s, &-q);
                if !t.a.get(s, j).is_zero() {
                    t.swap_cols(s, j);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let piv = t.a.get(s, s).clone();
            let bad = (s + 1..m).find(|&i| (s + 1..n).any(|j| !t.a.get(i, j).is_multiple_of(&piv)));
            match bad {
                Some(i) => t.add_row(s, i, &BigInt::one()),
                None => break,
            }
        }
        if t.a.get(s, s).is_negative() {
            t.negate_row(s);
        }
    }
    // A = P^-1 D Q^-1
    SmithForm {
        u: t.p_inv,
        d: t.a,
        v: t.q_inv,
        u_inv: t.p,
        v_inv: t.q,
    }
}

/// Row-style Hermite normal form: echelon, positive pivots, entries above each
/// pivot reduced into `[0, pivot)`. Zero rows are dropped.
pub fn row_hnf(a: &IntMatrix) -> IntMatrix {
    let mut h = a.clone();
    let (m, n) = (h.rows(), h.cols());
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        // Euclid on column c among rows r..m
        loop {
            let mut best: Option<usize> = None;
            for i in r..m {
                let v = h.get(i, c);
                if !v.is_zero() && best.map_or(true, |b| v.abs() < h.get(b, c).abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            h.swap_rows(r, b);
            let mut done = true;
            for i in r + 1..m {
                if h.get(i, c).is_zero() {
                    continue;
                }
                let q = h.get(i, c).div_floor(h.get(r, c));
                h.add_row_multiple(i, r, &-q);
                if !h.get(i, c).is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h.get(r, c).is_zero() {
            continue;
        }
        if h.get(r, c).is_negative() {
            h.negate_row(r);
        }
        let piv = h.get(r, c).clone();
        for i in 0..r {
            let q = h.get(i, c).div_floor(&piv);
            h.add_row_multiple(i, r, &-q);
        }
        r += 1;
    }
    h.select_rows(&(0..r).collect::<Vec<_>>())
}

/// A Z-basis of `{x in Z^cols : A x = 0}`, returned as the columns of a
/// `cols x k` matrix in canonical (Hermite-reduced) form.
pub fn integer_kernel(a: &IntMatrix) -> IntMatrix {
    let n = a.cols();
    let snf = smith_normal_form(a);
    let r = snf.rank();
    let basis: Vec<Vec<BigInt>> = (r..n).map(|j| snf.v_inv.col(j)).collect();
    if basis.is_empty() {
        return IntMatrix::zeros(n, 0);
    }
    let rows = IntMatrix::from_rows(n, basis);
    row_hnf(&rows).transpose()
}

/// Whether the rows of `a` extend to a Z-basis of `Z^cols`.
pub fn rows_extend_to_basis(a: &IntMatrix) -> bool {
    let snf = smith_normal_form(a);
    snf.rank() == a.rows() && snf.all_units()
}

/// Completes the rows of `a` (assumed to extend to a basis) to a unimodular
/// square matrix `[a; rest]`, returning `rest`.
pub fn unimodular_completion(a: &IntMatrix) -> Option<IntMatrix> {
    if !rows_extend_to_basis(a) {
        return None;
    }
    let c = a.rows();
    let n = a.cols();
    let snf = smith_normal_form(a);
    // a = U [I 0] V  ->  [a; V_{c..}] = diag(U, I) V
    Some(snf.v.select_rows(&(c..n).collect::<Vec<_>>()))
}

/// One rational solution of `A x = b`, or `None` when the system is
/// inconsistent. Free coordinates are set to zero in Smith coordinates, so the
/// answer is deterministic.
pub fn solve_rational(a: &IntMatrix, b: &[BigRational]) -> Option<Vec<BigRational>> {
    assert_eq!(a.rows(), b.len());
    let snf = smith_normal_form(a);
    // U D V x = b  ->  D y = U^-1 b, x = V^-1 y
    let ub: Vec<BigRational> = (0..a.rows())
        .map(|i| {
            (0..a.rows()).fold(BigRational::zero(), |acc, j| {
                acc + BigRational::from_integer(snf.u_inv.get(i, j).clone()) * &b[j]
            })
        })
        .collect();
    let diag = snf.diagonal();
    let mut y = vec![BigRational::zero(); a.cols()];
    for (i, rhs) in ub.iter().enumerate() {
        let d = diag.get(i).cloned().unwrap_or_else(BigInt::zero);
        if d.is_zero() {
            if !rhs.is_zero() {
                return None;
            }
        } else {
            y[i] = rhs / BigRational::from_integer(d);
        }
    }
    Some(
        (0..a.cols())
            .map(|i| {
                (0..a.cols()).fold(BigRational::zero(), |acc, j| {
                    acc + BigRational::from_integer(snf.v_inv.get(i, j).clone()) * &y[j]
                })
            })
            .collect(),
    )
}
