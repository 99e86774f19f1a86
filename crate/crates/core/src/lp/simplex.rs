//! Dense two-phase tableau simplex with Bland's rule, generic over the
//! scalar field so that the same pivoting runs on exact rationals and on
//! doubles.

use std::fmt::Debug;

use num_traits::{One, Signed, Zero};

use crate::numeric::{from_f64, to_f64, Rational};

pub(crate) trait Field: Clone + Debug {
    fn nil() -> Self;
    fn unit() -> Self;
    fn fadd(&self, o: &Self) -> Self;
    fn fsub(&self, o: &Self) -> Self;
    fn fmul(&self, o: &Self) -> Self;
    fn fdiv(&self, o: &Self) -> Self;
    fn is_neg(&self, eps: f64) -> bool;
    fn is_pos(&self, eps: f64) -> bool;
    fn from_rational(r: &Rational) -> Self;
    fn to_rational(&self) -> Rational;
}

impl Field for Rational {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn fadd(&self, o: &Self) -> Self {
        self + o
    }
    fn fsub(&self, o: &Self) -> Self {
        self - o
    }
    fn fmul(&self, o: &Self) -> Self {
        self * o
    }
    fn fdiv(&self, o: &Self) -> Self {
        self / o
    }
    fn is_neg(&self, _eps: f64) -> bool {
        Signed::is_negative(self)
    }
    fn is_pos(&self, _eps: f64) -> bool {
        Signed::is_positive(self)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
}

impl Field for f64 {
    fn nil() -> Self {
        0.0
    }
    fn unit() -> Self {
        1.0
    }
    fn fadd(&self, o: &Self) -> Self {
        self + o
    }
    fn fsub(&self, o: &Self) -> Self {
        self - o
    }
    fn fmul(&self, o: &Self) -> Self {
        self * o
    }
    fn fdiv(&self, o: &Self) -> Self {
        self / o
    }
    fn is_neg(&self, eps: f64) -> bool {
        *self < -eps
    }
    fn is_pos(&self, eps: f64) -> bool {
        *self > eps
    }
    fn from_rational(r: &Rational) -> Self {
        to_f64(r)
    }
    fn to_rational(&self) -> Rational {
        from_f64(*self).unwrap_or_else(<Rational as Zero>::zero)
    }
}

/// Standard form: minimise `c.x` subject to `A x = b`, `x >= 0`, `b >= 0`.
#[derive(Debug, Clone)]
pub(crate) struct StandardForm<F> {
    pub a: Vec<Vec<F>>,
    pub b: Vec<F>,
    pub c: Vec<F>,
}

#[derive(Debug, Clone)]
pub(crate) enum TableauResult<F> {
    Optimal { x: Vec<F>, y: Vec<F> },
    /// `y` with `A^T y <= 0` and `b.y > 0`.
    Infeasible { y: Vec<F> },
    /// `d >= 0` with `A d = 0` and `c.d < 0`.
    Unbounded { ray: Vec<F> },
}

struct Tableau<F> {
    /// m rows of `[structural | artificial | rhs]`.
    rows: Vec<Vec<F>>,
    basis: Vec<usize>,
    n: usize,
    m: usize,
    eps: f64,
}

impl<F: Field> Tableau<F> {
    fn rhs(&self) -> usize {
        self.n + self.m
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let width = self.rhs() + 1;
        let p = self.rows[r][col].clone();
        for k in 0..width {
            self.rows[r][k] = self.rows[r][k].fdiv(&p);
        }
        let pivot_row = self.rows[r].clone();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.rows[i][col].clone();
            if !f.is_neg(0.0) && !f.is_pos(0.0) {
                continue;
            }
            for (k, pk) in pivot_row.iter().enumerate().take(width) {
                self.rows[i][k] = self.rows[i][k].fsub(&f.fmul(pk));
            }
        }
        self.basis[r] = col;
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` over all columns.
    fn reduced_costs(&self, cost: &[F]) -> Vec<F> {
        (0..self.rhs())
            .map(|j| {
                let mut d = cost[j].clone();
                for i in 0..self.m {
                    d = d.fsub(&cost[self.basis[i]].fmul(&self.rows[i][j]));
                }
                d
            })
            .collect()
    }

    /// `c_B B^-1`, read from the artificial columns (initially the identity).
    fn duals(&self, cost: &[F]) -> Vec<F> {
        (0..self.m)
            .map(|k| {
                let mut y = F::nil();
                for i in 0..self.m {
                    y = y.fadd(&cost[self.basis[i]].fmul(&self.rows[i][self.n + k]));
                }
                y
            })
            .collect()
    }

    fn value(&self, cost: &[F]) -> F {
        let mut v = F::nil();
        for i in 0..self.m {
            v = v.fadd(&cost[self.basis[i]].fmul(&self.rows[i][self.rhs()]));
        }
        v
    }

    /// Runs Bland pivots on `cost` over columns `< allowed`. Returns the
    /// unbounded entering column, if any.
    fn optimise(&mut self, cost: &[F], allowed: usize) -> Option<usize> {
        loop {
            let d = self.reduced_costs(cost);
            let entering = (0..allowed).find(|&j| d[j].is_neg(self.eps));
            let col = entering?;
            let mut best: Option<(usize, F)> = None;
            for i in 0..self.m {
                let aij = &self.rows[i][col];
                if !aij.is_pos(self.eps * 1e-3) {
                    continue;
                }
                let ratio = self.rows[i][self.rhs()].fdiv(aij);
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let diff = ratio.fsub(&br);
                        if diff.is_neg(self.eps * 1e-3)
                            || (!diff.is_pos(self.eps * 1e-3) && self.basis[i] < self.basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                None => return Some(col),
                Some((r, _)) => self.pivot(r, col),
            }
        }
    }
}

pub(crate) fn solve_standard<F: Field>(sf: &StandardForm<F>, eps: f64) -> TableauResult<F> {
    let m = sf.a.len();
    let n = sf.c.len();
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = sf.a[i].clone();
        row.extend((0..m).map(|k| if k == i { F::unit() } else { F::nil() }));
        row.push(sf.b[i].clone());
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        n,
        m,
        eps,
    };

    // Phase one: minimise the sum of artificials.
    let phase1: Vec<F> = (0..n + m).map(|j| if j < n { F::nil() } else { F::unit() }).collect();
    t.optimise(&phase1, n);
    let infeasibility = t.value(&phase1);
    if infeasibility.is_pos(eps) {
        // Phase-one duals maximise b.y subject to A^T y <= 0, y <= 1.
        return TableauResult::Infeasible { y: t.duals(&phase1) };
    }

    // Drive zero-level artificials out of the basis where possible.
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| t.rows[r][j].is_pos(eps * 1e-3) || t.rows[r][j].is_neg(eps * 1e-3)) {
                t.pivot(r, col);
            }
        }
    }

    let phase2: Vec<F> = (0..n + m).map(|j| if j < n { sf.c[j].clone() } else { F::nil() }).collect();
    if let Some(col) = t.optimise(&phase2, n) {
        let mut ray = vec![F::nil(); n];
        ray[col] = F::unit();
        for i in 0..m {
            let b = t.basis[i];
            if b < n {
                ray[b] = F::nil().fsub(&t.rows[i][col]);
            }
        }
        return TableauResult::Unbounded { ray };
    }
    let mut x = vec![F::nil(); n];
    for i in 0..m {
        if t.basis[i] < n {
            x[t.basis[i]] = t.rows[i][t.rhs()].clone();
        }
    }
    TableauResult::Optimal {
        x,
        y: t.duals(&phase2),
    }
}
