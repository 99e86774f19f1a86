//! Exact row reduction over the rationals.

use num_traits::{One, Zero};

use crate::numeric::Rational;

/// Reduced row echelon form. Returns the pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= &f * pv;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(vectors: &[Vec<Rational>]) -> usize {
    let mut m = vectors.to_vec();
    rref(&mut m).len()
}

/// Whether `target` is a linear combination of `vectors`.
pub fn in_span(vectors: &[Vec<Rational>], target: &[Rational]) -> bool {
    if target.iter().all(Zero::is_zero) {
        return true;
    }
    let mut with = vectors.to_vec();
    with.push(target.to_vec());
    rank(vectors) == rank(&with)
}

/// Indices of a maximal linearly independent subfamily, greedily in order.
pub fn independent_subset(vectors: &[Vec<Rational>]) -> Vec<usize> {
    let mut chosen: Vec<Vec<Rational>> = Vec::new();
    let mut idx = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        chosen.push(v.clone());
        if rank(&chosen) == chosen.len() {
            idx.push(i);
        } else {
            chosen.pop();
        }
    }
    idx
}

/// Solves the square system `a x = b`; `None` if singular.
pub fn solve_square(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
        return None;
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::int;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn rank_and_span() {
        let vs = vec![v(&[1, 2, 3]), v(&[2, 4, 6]), v(&[0, 1, 1])];
        assert_eq!(rank(&vs), 2);
        assert!(in_span(&vs, &v(&[1, 3, 4])));
        assert!(!in_span(&vs, &v(&[0, 0, 1])));
        assert_eq!(independent_subset(&vs), vec![0, 2]);
    }

    #[test]
    fn square_solve() {
        let a = vec![v(&[2, 1]), v(&[1, 3])];
        assert_eq!(solve_square(&a, &v(&[3, 5])), Some(vec![int(4) / int(5), int(7) / int(5)]));
        assert_eq!(solve_square(&[v(&[1, 1]), v(&[2, 2])], &v(&[1, 2])), None);
    }
}
