//! Exact linear algebra over Q with integral row normalisation.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::Rational;

pub fn to_rationals(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect()
}

pub fn big_to_rationals(v: &[BigInt]) -> Vec<Rational> {
    v.iter().map(|x| Rational::from_integer(x.clone())).collect()
}

/// Clear denominators and content; the first nonzero entry is made positive.
pub fn primitive(v: &[Rational]) -> Vec<BigInt> {
    let mut l = BigInt::one();
    for x in v {
        l = l.lcm(x.denom());
    }
    let mut ints: Vec<BigInt> = v.iter().map(|x| (x * &l).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return ints;
    }
    let lead_neg = ints.iter().find(|x| !x.is_zero()).map(|x| x.is_negative()).unwrap_or(false);
    if lead_neg {
        g = -g;
    }
    for x in ints.iter_mut() {
        *x = &*x / &g;
    }
    ints
}

/// A subspace of Q^width held as an echelon list: row j has pivot at its
/// first nonzero coordinate, and every later row vanishes at that pivot.
/// Rows are primitive integer vectors with positive pivot entry.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSpace {
    pub width: usize,
    pub rows: Vec<Vec<Rational>>,
    pub pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(width: usize) -> Self {
        RowSpace { width, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn reduce(&self, v: &[Rational]) -> Vec<Rational> {
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let c = &v[p] / &row[p];
                for (x, r) in v.iter_mut().zip(row) {
                    *x -= &c * r;
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    /// Adds `v` if it is outside the span; returns the new row index.
    pub fn insert(&mut self, v: &[Rational]) -> Option<usize> {
        assert_eq!(v.len(), self.width, "row width");
        let r = self.reduce(v);
        let p = r.iter().position(|x| !x.is_zero())?;
        let row = big_to_rationals(&primitive(&r));
        self.rows.push(row);
        self.pivots.push(p);
        Some(self.rows.len() - 1)
    }

    /// Unique coefficients a with v = Σ a_j rows[j], solved in row order.
    pub fn coordinates(&self, v: &[Rational]) -> Option<Vec<Rational>> {
        let mut v = v.to_vec();
        let mut coef = Vec::with_capacity(self.rows.len());
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = &v[p] / &row[p];
            for (x, r) in v.iter_mut().zip(row) {
                *x -= &c * r;
            }
            coef.push(c);
        }
        if v.iter().all(|x| x.is_zero()) {
            Some(coef)
        } else {
            None
        }
    }
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let mut s = RowSpace::new(first.len());
    for r in rows {
        s.insert(r);
    }
    s.dim()
}

/// Determinant of a small integer matrix (fraction-free elimination).
pub fn det_i64(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(sw) = (k + 1..n).find(|&i| a[i][k] != 0) else { return 0 };
            a.swap(k, sw);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    if n == 0 {
        1
    } else {
        sign * a[n - 1][n - 1]
    }
}

/// Adjugate matrix, so that adj(m)·m = det(m)·I.
#[allow(clippy::needless_range_loop)]
pub fn adjugate_i64(m: &[Vec<i64>]) -> Vec<Vec<i128>> {
    let n = m.len();
    let mut adj = vec![vec![0i128; n]; n];
    if n == 1 {
        adj[0][0] = 1;
        return adj;
    }
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<i64>> = (0..n)
                .filter(|&r| r != i)
                .map(|r| (0..n).filter(|&c| c != j).map(|c| m[r][c]).collect())
                .collect();
            let s = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[j][i] = s * det_i64(&minor);
        }
    }
    adj
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn echelon_solves_triangularly() {
        let mut s = RowSpace::new(4);
        s.insert(&to_rationals(&[1, 1, 1, 1]));
        s.insert(&to_rationals(&[0, 1, 2, 3]));
        assert_eq!(s.insert(&to_rationals(&[2, 3, 4, 5])), None);
        let i = s.insert(&to_rationals(&[0, 1, 4, 9])).unwrap();
        assert_eq!(s.rows[i], to_rationals(&[0, 0, 1, 3]));
        let c = s.coordinates(&to_rationals(&[3, 4, 6, 9])).unwrap();
        assert_eq!(c, vec![rat(3, 1), rat(1, 1), rat(1, 1)]);
        assert!(!s.contains(&to_rationals(&[1, -3, 3, -1])));
    }

    #[test]
    fn primitive_clears_content_and_sign() {
        let v = vec![rat(0, 1), rat(-2, 3), rat(4, 3)];
        assert_eq!(primitive(&v), vec![BigInt::from(0), BigInt::from(1), BigInt::from(-2)]);
    }

    #[test]
    fn determinant_and_adjugate() {
        let m = vec![vec![2, 1], vec![0, 3]];
        assert_eq!(det_i64(&m), 6);
        let adj = adjugate_i64(&m);
        assert_eq!(adj, vec![vec![3, -1], vec![0, 2]]);
        let m3 = vec![vec![1, 2, 3], vec![0, 1, 4], vec![5, 6, 0]];
        assert_eq!(det_i64(&m3), 1);
    }
}
