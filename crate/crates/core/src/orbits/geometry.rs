//! Lattice cosets n₀ + Λ and convex bodies (boxes cut by half-spaces) in
//! dimension D ≤ 3.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{adjugate_i64, det_i64};

pub const MAX_LATTICE_POINTS: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCoset {
    pub n0: Vec<i64>,
    /// Rows generate Λ.
    pub basis: Vec<Vec<i64>>,
    det: i128,
    adj: Vec<Vec<i128>>,
}

impl LatticeCoset {
    pub fn new(n0: Vec<i64>, basis: Vec<Vec<i64>>) -> Result<Self> {
        let d = n0.len();
        if basis.len() != d || basis.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("lattice basis must be a D×D integer matrix".into()));
        }
        let det = det_i64(&basis);
        if det == 0 {
            return Err(Error::InvalidArgument("lattice basis is singular".into()));
        }
        let adj = adjugate_i64(&basis);
        Ok(LatticeCoset { n0, basis, det, adj })
    }

    pub fn full(d: usize) -> Self {
        let basis = (0..d).map(|i| (0..d).map(|j| (i == j) as i64).collect()).collect();
        Self::new(vec![0; d], basis).unwrap()
    }

    /// [Z^D : Λ]
    pub fn index(&self) -> u128 {
        self.det.unsigned_abs()
    }

    /// n − n₀ = c·L with c integral ⇔ (n − n₀)·adj(L) ≡ 0 mod det L.
    pub fn contains(&self, n: &[i64]) -> bool {
        let d = self.n0.len();
        (0..d).all(|j| {
            let s: i128 = (0..d).map(|i| (n[i] - self.n0[i]) as i128 * self.adj[i][j]).sum();
            s % self.det == 0
        })
    }
}

/// {x : lo ≤ x ≤ hi, a·x ≤ b for every cut}.
#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cuts: Vec<(Vec<f64>, f64)>,
}

impl Body {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 3 {
            return Err(Error::InvalidArgument("bodies live in dimension 1..=3".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidArgument("box bounds must be finite with lo <= hi".into()));
        }
        Ok(Body { lo, hi, cuts: Vec::new() })
    }

    /// [0, N]^D
    pub fn cube(d: usize, n: u64) -> Result<Self> {
        Self::boxed(vec![0.0; d], vec![n as f64; d])
    }

    pub fn with_cut(mut self, a: Vec<f64>, b: f64) -> Result<Self> {
        if a.len() != self.dim() {
            return Err(Error::InvalidArgument(format!("cut normal must have length {}", self.dim())));
        }
        self.cuts.push((a, b));
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        const TOL: f64 = 1e-9;
        x.iter().zip(&self.lo).zip(&self.hi).all(|((v, l), h)| *v >= l - TOL && *v <= h + TOL)
            && self.cuts.iter().all(|(a, b)| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() <= b + TOL)
    }

    /// Integer points of the body, in lexicographic order.
    pub fn lattice_points(&self) -> Result<Vec<Vec<i64>>> {
        let lo: Vec<i64> = self.lo.iter().map(|v| libm::ceil(*v - 1e-9) as i64).collect();
        let hi: Vec<i64> = self.hi.iter().map(|v| libm::floor(*v + 1e-9) as i64).collect();
        let total: u64 = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1).max(0) as u64).product();
        if total > MAX_LATTICE_POINTS {
            return Err(Error::Unsupported(format!("{total} candidate lattice points exceed the cap")));
        }
        let mut out = Vec::new();
        let mut cur = lo.clone();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Ok(out);
        }
        loop {
            let x: Vec<f64> = cur.iter().map(|&v| v as f64).collect();
            if self.contains(&x) {
                out.push(cur.clone());
            }
            let mut j = cur.len();
            loop {
                if j == 0 {
                    return Ok(out);
                }
                j -= 1;
                if cur[j] < hi[j] {
                    cur[j] += 1;
                    break;
                }
                cur[j] = lo[j];
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match self.dim() {
            1 => {
                let (mut l, mut h) = (self.lo[0], self.hi[0]);
                for (a, b) in &self.cuts {
                    if a[0] > 0.0 {
                        h = h.min(b / a[0]);
                    } else if a[0] < 0.0 {
                        l = l.max(b / a[0]);
                    } else if *b < 0.0 {
                        return 0.0;
                    }
                }
                (h - l).max(0.0)
            }
            2 => {
                let cuts: Vec<([f64; 2], f64)> = self.cuts.iter().map(|(a, b)| ([a[0], a[1]], *b)).collect();
                polygon_area(&clip_box(self.lo[0], self.hi[0], self.lo[1], self.hi[1], &cuts))
            }
            _ => {
                // midpoint rule in z over exact slice areas
                let slices = 4000;
                let h = (self.hi[2] - self.lo[2]) / slices as f64;
                if h == 0.0 {
                    return 0.0;
                }
                let mut acc = Vec::with_capacity(slices);
                for k in 0..slices {
                    let z = self.lo[2] + (k as f64 + 0.5) * h;
                    let cuts: Vec<([f64; 2], f64)> =
                        self.cuts.iter().map(|(a, b)| ([a[0], a[1]], b - a[2] * z)).collect();
                    acc.push(polygon_area(&clip_box(self.lo[0], self.hi[0], self.lo[1], self.hi[1], &cuts)) * h);
                }
                crate::sum::pairwise(&acc)
            }
        }
    }
}

fn clip_box(x0: f64, x1: f64, y0: f64, y1: f64, cuts: &[([f64; 2], f64)]) -> Vec<[f64; 2]> {
    let mut poly = vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
    for (a, b) in cuts {
        let side = |p: &[f64; 2]| a[0] * p[0] + a[1] * p[1] - b;
        let mut next = Vec::new();
        for i in 0..poly.len() {
            let p = poly[i];
            let q = poly[(i + 1) % poly.len()];
            let (sp, sq) = (side(&p), side(&q));
            if sp <= 0.0 {
                next.push(p);
            }
            if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
                let t = sp / (sp - sq);
                next.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        poly = next;
        if poly.is_empty() {
            break;
        }
    }
    poly
}

fn polygon_area(p: &[[f64; 2]]) -> f64 {
    if p.len() < 3 {
        return 0.0;
    }
    let s: f64 = (0..p.len()).map(|i| {
        let (a, b) = (p[i], p[(i + 1) % p.len()]);
        a[0] * b[1] - b[0] * a[1]
    }).sum();
    libm::fabs(s) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coset_membership() {
        let l = LatticeCoset::new(vec![1, 0], vec![vec![2, 0], vec![1, 3]]).unwrap();
        assert_eq!(l.index(), 6);
        let count = (0..6).flat_map(|x| (0..6).map(move |y| (x, y))).filter(|&(x, y)| l.contains(&[x, y])).count();
        assert_eq!(count, 36 / 6);
        assert!(l.contains(&[1, 0]) && l.contains(&[4, 3]) && !l.contains(&[2, 0]));
        assert!(LatticeCoset::new(vec![0, 0], vec![vec![1, 2], vec![2, 4]]).is_err());
    }

    #[test]
    fn volumes() {
        let sq = Body::cube(2, 10).unwrap();
        assert!((sq.volume() - 100.0).abs() < 1e-12);
        let tri = sq.clone().with_cut(vec![1.0, 1.0], 10.0).unwrap();
        assert!((tri.volume() - 50.0).abs() < 1e-9);
        assert_eq!(tri.lattice_points().unwrap().len(), 66);
        let simplex = Body::cube(3, 6).unwrap().with_cut(vec![1.0, 1.0, 1.0], 6.0).unwrap();
        assert!((simplex.volume() - 36.0).abs() < 1e-3);
        let seg = Body::cube(1, 8).unwrap().with_cut(vec![-2.0], -4.0).unwrap();
        assert!((seg.volume() - 6.0).abs() < 1e-12);
    }
}
