//! Filtered nilpotent groups of step ≤ 2 with an exact group law.
//!
//! Coordinates are the entries of the "reversed" Mal'cev product
//! g = exp(t_d X_d)…exp(t_1 X_1); for the Heisenberg group these are the
//! upper-triangular matrix entries (a, b, c). With integer structure
//! constants Γ is exactly the integer-coordinate set and the group law is
//!
//!   t'' = t + t' + B(t, t'),  B(t, t')_k = Σ_{a<b} c_ab^k t_a t'_b.
//!
//! Log coordinates are y = t − ½B(t, t).

mod characters;
mod sequence;

pub use characters::*;
pub use sequence::*;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// [X_a, X_b] = c X_k with a < b.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bracket {
    pub a: usize,
    pub b: usize,
    pub k: usize,
    pub c: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredGroup {
    dim: usize,
    /// dim G_(i) for i = 1..s; G_(0) = G_(1) = G.
    dims: Vec<usize>,
    weights: Vec<usize>,
    brackets: Vec<Bracket>,
    pub labels: Vec<String>,
    pub name: String,
}

impl FilteredGroup {
    /// `structure` lists (i, j, k, c) meaning [X_i, X_j] has X_k-component c.
    /// Entries with i > j are read through antisymmetry.
    pub fn new(dim: usize, filtration_dims: Vec<usize>, structure: &[(usize, usize, usize, i64)]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("group dimension must be >= 1".into()));
        }
        if filtration_dims.is_empty() {
            return Err(Error::InvalidArgument("filtration must have degree s >= 1".into()));
        }
        if filtration_dims[0] != dim {
            return Err(Error::InvalidArgument(format!(
                "dim G_(1) = {} but the group has dimension {dim}",
                filtration_dims[0]
            )));
        }
        if filtration_dims.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument("filtration dims must be nonincreasing".into()));
        }
        let s = filtration_dims.len();
        let weights: Vec<usize> = (0..dim)
            .map(|j| (1..=s).filter(|&i| j >= dim - filtration_dims[i - 1]).max().unwrap_or(1))
            .collect();
        let mut table: alloc::collections::BTreeMap<(usize, usize, usize), i64> = Default::default();
        for &(i, j, k, c) in structure {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::InvalidArgument(format!("structure constant index out of range: ({i},{j},{k})")));
            }
            if i == j {
                if c != 0 {
                    return Err(Error::InvalidArgument(format!("[X_{i},X_{i}] must vanish")));
                }
                continue;
            }
            let (a, b, c) = if i < j { (i, j, c) } else { (j, i, -c) };
            if let Some(&old) = table.get(&(a, b, k)) {
                if old != c {
                    return Err(Error::InvalidArgument(format!(
                        "structure constants for ({a},{b},{k}) are not antisymmetric"
                    )));
                }
            }
            table.insert((a, b, k), c);
        }
        let brackets: Vec<Bracket> = table
            .into_iter()
            .filter(|&(_, c)| c != 0)
            .map(|((a, b, k), c)| Bracket { a, b, k, c })
            .collect();
        for br in &brackets {
            let w = weights[br.a] + weights[br.b];
            if w > s || weights[br.k] < w {
                return Err(Error::InvalidArgument(format!(
                    "[X_{},X_{}] leaves G_({w}); the filtration condition fails",
                    br.a, br.b
                )));
            }
        }
        // Exact BCH needs the bracket image to be central.
        for br in &brackets {
            if brackets.iter().any(|o| o.a == br.k || o.b == br.k) {
                return Err(Error::Unsupported(
                    "nilpotency step above 2: exact group law is implemented for step <= 2 only".into(),
                ));
            }
        }
        let labels = (0..dim).map(|j| format!("x{}", j + 1)).collect();
        Ok(FilteredGroup { dim, dims: filtration_dims, weights, brackets, labels, name: "custom".into() })
    }

    pub fn circle() -> Self {
        Self::torus_with_degree(1, 1).unwrap().named("circle")
    }

    pub fn torus(m: usize) -> Result<Self> {
        Self::torus_with_degree(m, 1)
    }

    /// (R/Z)^m with the degree-s filtration G_(1) = … = G_(s).
    pub fn torus_with_degree(m: usize, s: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidArgument("degree must be >= 1".into()));
        }
        Ok(Self::new(m, vec![m; s], &[])?.named(&format!("torus({m})")))
    }

    /// Upper-triangular unipotent 3×3 matrices, lower central series.
    pub fn heisenberg() -> Self {
        let mut g = Self::new(3, vec![3, 1], &[(0, 1, 2, 1)]).unwrap().named("heisenberg");
        g.labels = vec!["a".into(), "b".into(), "c".into()];
        g
    }

    /// "circle", "torus(m)", "torus(m,s)" or "heisenberg".
    pub fn builtin(name: &str) -> Result<Self> {
        let n = name.trim();
        match n {
            "circle" => return Ok(Self::circle()),
            "heisenberg" => return Ok(Self::heisenberg()),
            _ => {}
        }
        if let Some(inner) = n.strip_prefix("torus(").and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            let num = |x: &str| x.parse::<usize>().map_err(|_| Error::UnknownIdentifier(n.to_string()));
            return match parts.as_slice() {
                [m] => Self::torus(num(m)?),
                [m, s] => Self::torus_with_degree(num(m)?, num(s)?),
                _ => Err(Error::UnknownIdentifier(n.to_string())),
            };
        }
        Err(Error::UnknownIdentifier(n.to_string()))
    }

    fn named(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Filtration degree s.
    pub fn step(&self) -> usize {
        self.dims.len()
    }

    pub fn filtration_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    pub fn brackets(&self) -> &[Bracket] {
        &self.brackets
    }

    pub fn is_abelian(&self) -> bool {
        self.brackets.is_empty()
    }

    /// dim G_(i), with G_(0) = G and G_(i) = {id} past the degree.
    pub fn subgroup_dim(&self, i: usize) -> usize {
        match i {
            0 => self.dim,
            i if i <= self.dims.len() => self.dims[i - 1],
            _ => 0,
        }
    }

    /// Coordinates spanning G_(i)/G_(i+1).
    pub fn block(&self, i: usize) -> core::ops::Range<usize> {
        (self.dim - self.subgroup_dim(i))..(self.dim - self.subgroup_dim(i + 1))
    }

    pub fn check_same(&self, other: &FilteredGroup) -> Result<()> {
        if self != other {
            return Err(Error::GroupMismatch(format!("{} vs {}", self.name, other.name)));
        }
        Ok(())
    }

    fn bilinear<S: Scalar>(&self, t: &[S], u: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim];
        for br in &self.brackets {
            let v = S::from_i64(br.c) * t[br.a].clone() * u[br.b].clone();
            out[br.k] = out[br.k].clone() + v;
        }
        out
    }

    pub fn identity<S: Scalar>(&self) -> GroupElement<S> {
        GroupElement { coords: vec![S::zero(); self.dim] }
    }

    pub fn element<S: Scalar>(&self, coords: Vec<S>) -> Result<GroupElement<S>> {
        if coords.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "element has {} coordinates, group has dimension {}",
                coords.len(),
                self.dim
            )));
        }
        Ok(GroupElement { coords })
    }

    /// exp(x X_j)
    pub fn basis_element<S: Scalar>(&self, j: usize, x: S) -> GroupElement<S> {
        let mut e = self.identity();
        e.coords[j] = x;
        e
    }

    fn check_len<S>(&self, g: &GroupElement<S>) -> Result<()> {
        if g.coords.len() != self.dim {
            return Err(Error::GroupMismatch(format!("element of dimension {} in a {}-dimensional group", g.coords.len(), self.dim)));
        }
        Ok(())
    }

    pub fn mul<S: Scalar>(&self, g: &GroupElement<S>, h: &GroupElement<S>) -> Result<GroupElement<S>> {
        self.check_len(g)?;
        self.check_len(h)?;
        Ok(self.mul_unchecked(g, h))
    }

    pub(crate) fn mul_unchecked<S: Scalar>(&self, g: &GroupElement<S>, h: &GroupElement<S>) -> GroupElement<S> {
        let b = self.bilinear(&g.coords, &h.coords);
        let coords = g
            .coords
            .iter()
            .zip(&h.coords)
            .zip(b)
            .map(|((x, y), z)| x.clone() + y.clone() + z)
            .collect();
        GroupElement { coords }
    }

    pub fn inv<S: Scalar>(&self, g: &GroupElement<S>) -> Result<GroupElement<S>> {
        self.check_len(g)?;
        Ok(self.inv_unchecked(g))
    }

    pub(crate) fn inv_unchecked<S: Scalar>(&self, g: &GroupElement<S>) -> GroupElement<S> {
        let b = self.bilinear(&g.coords, &g.coords);
        GroupElement { coords: g.coords.iter().zip(b).map(|(x, z)| z - x.clone()).collect() }
    }

    pub fn log<S: Scalar>(&self, g: &GroupElement<S>) -> Vec<S> {
        let b = self.bilinear(&g.coords, &g.coords);
        g.coords.iter().zip(b).map(|(x, z)| x.clone() - S::half() * z).collect()
    }

    pub fn exp<S: Scalar>(&self, y: &[S]) -> GroupElement<S> {
        let b = self.bilinear(y, y);
        GroupElement { coords: y.iter().zip(b).map(|(x, z)| x.clone() + S::half() * z).collect() }
    }

    /// g^x = exp(x log g)
    pub fn pow<S: Scalar>(&self, g: &GroupElement<S>, x: &S) -> GroupElement<S> {
        let y: Vec<S> = self.log(g).into_iter().map(|v| v * x.clone()).collect();
        self.exp(&y)
    }

    pub fn commutator<S: Scalar>(&self, g: &GroupElement<S>, h: &GroupElement<S>) -> GroupElement<S> {
        let gh = self.mul_unchecked(g, h);
        let hg = self.mul_unchecked(h, g);
        self.mul_unchecked(&gh, &self.inv_unchecked(&hg))
    }

    /// rep = g·γ with γ ∈ Γ and every coordinate of rep in [0, 1).
    ///
    /// Coordinates are cleared in ascending order; right multiplication by
    /// exp(k X_j) only changes coordinate j and bracket targets, which have
    /// larger index.
    pub fn reduce<S: Scalar>(&self, g: &GroupElement<S>) -> (GroupElement<S>, GroupElement<S>) {
        let rep = self.reduce_rep(g);
        let mut gamma = self.mul_unchecked(&self.inv_unchecked(g), &rep);
        for c in gamma.coords.iter_mut() {
            // Doubles carry rounding noise; Γ is the integer lattice.
            if !c.is_integral() {
                *c = (c.clone() + S::half()).floor_s();
            }
        }
        (rep, gamma)
    }

    pub fn reduce_rep<S: Scalar>(&self, g: &GroupElement<S>) -> GroupElement<S> {
        let mut t = g.clone();
        for j in 0..self.dim {
            let k = t.coords[j].floor_s();
            if !k.is_zero() {
                let step = self.basis_element(j, -k);
                t = self.mul_unchecked(&t, &step);
            }
            if t.coords[j] >= S::one() || t.coords[j] < S::zero() {
                // only reachable through f64 rounding
                t.coords[j] = S::zero();
            }
        }
        t
    }

    pub fn in_lattice<S: Scalar>(&self, g: &GroupElement<S>) -> bool {
        g.coords.iter().all(|c| c.is_integral())
    }

    /// g ∈ G_(i): coordinates before the G_(i) block vanish.
    pub fn in_subgroup<S: Scalar>(&self, g: &GroupElement<S>, i: usize) -> bool {
        let start = self.dim - self.subgroup_dim(i);
        g.coords[..start].iter().all(|c| c.is_zero())
    }

    /// d(g, h) = max_j |log(g⁻¹h)_j|.
    pub fn dist(&self, g: &GroupElement<f64>, h: &GroupElement<f64>) -> f64 {
        let d = self.mul_unchecked(&self.inv_unchecked(g), h);
        self.log(&d).iter().fold(0.0, |m, v| m.max(libm::fabs(*v)))
    }

    pub fn norm(&self, g: &GroupElement<f64>) -> f64 {
        self.log(g).iter().fold(0.0, |m, v| m.max(libm::fabs(*v)))
    }

    /// Distance on G/Γ: both points reduced, then the minimum over the
    /// 3^dim nearest lattice translates of the second.
    pub fn quotient_dist(&self, g: &GroupElement<f64>, h: &GroupElement<f64>) -> Result<f64> {
        if self.dim > 10 {
            return Err(Error::Unsupported("quotient distance needs dim <= 10".into()));
        }
        let x = self.reduce_rep(g);
        let y = self.reduce_rep(h);
        let mut best = f64::INFINITY;
        let total = 3usize.pow(self.dim as u32);
        for code in 0..total {
            let mut c = code;
            let coords = (0..self.dim)
                .map(|_| {
                    let v = (c % 3) as f64 - 1.0;
                    c /= 3;
                    v
                })
                .collect();
            let yg = self.mul_unchecked(&y, &GroupElement { coords });
            best = best.min(self.dist(&x, &yg));
        }
        Ok(best)
    }

    /// Eccentric ball B_r: |y_j| ≤ r^{s+1−w_j} on log coordinates.
    pub fn in_eccentric_ball(&self, g: &GroupElement<f64>, r: f64) -> bool {
        let s = self.step() as i32;
        self.log(g)
            .iter()
            .zip(&self.weights)
            .all(|(y, &w)| libm::fabs(*y) <= libm::pow(r, (s + 1 - w as i32) as f64) * (1.0 + 1e-12))
    }

    /// Random point of B_r, biased towards the boundary (a third of the
    /// coordinates are pushed to ±radius).
    pub fn sample_eccentric_ball<R: Rng>(&self, r: f64, rng: &mut R) -> GroupElement<f64> {
        let s = self.step() as i32;
        let y: Vec<f64> = self
            .weights
            .iter()
            .map(|&w| {
                let rad = libm::pow(r, (s + 1 - w as i32) as f64);
                let u: f64 = rng.random_range(-1.0..=1.0);
                if rng.random_range(0..3) == 0 {
                    rad * if u < 0.0 { -1.0 } else { 1.0 }
                } else {
                    rad * u
                }
            })
            .collect();
        self.exp(&y)
    }

    /// Sampled check of B_{(1−δ)r} ⊆ g B_r g⁻¹ ⊆ B_{(1+δ)r}.
    pub fn normality_probe<R: Rng>(
        &self,
        g: &GroupElement<f64>,
        r: f64,
        delta: f64,
        samples: usize,
        rng: &mut R,
    ) -> NormalityReport {
        let gi = self.inv_unchecked(g);
        let mut inner = true;
        let mut outer = true;
        for _ in 0..samples {
            // x ∈ B_{(1−δ)r} must satisfy g⁻¹ x g ∈ B_r
            let x = self.sample_eccentric_ball((1.0 - delta) * r, rng);
            let c = self.mul_unchecked(&self.mul_unchecked(&gi, &x), g);
            inner &= self.in_eccentric_ball(&c, r);
            let x = self.sample_eccentric_ball(r, rng);
            let c = self.mul_unchecked(&self.mul_unchecked(g, &x), &gi);
            outer &= self.in_eccentric_ball(&c, (1.0 + delta) * r);
        }
        NormalityReport { inner, outer }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalityReport {
    pub inner: bool,
    pub outer: bool,
}

impl NormalityReport {
    pub fn holds(&self) -> bool {
        self.inner && self.outer
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement<S> {
    pub coords: Vec<S>,
}

impl<S: Scalar> GroupElement<S> {
    pub fn to_f64(&self) -> GroupElement<f64> {
        GroupElement { coords: self.coords.iter().map(|c| c.value_f64()).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

impl GroupElement<Rational> {
    pub fn from_i64(coords: &[i64]) -> Self {
        GroupElement { coords: coords.iter().map(|&c| Rational::from_i64(c)).collect() }
    }
}

impl GroupElement<f64> {
    /// Round doubles to exact dyadic rationals.
    pub fn to_rational(&self) -> Result<GroupElement<Rational>> {
        self.coords
            .iter()
            .map(|&c| {
                Rational::from_float(c).ok_or_else(|| Error::InvalidArgument("non-finite coordinate".into()))
            })
            .collect::<Result<Vec<_>>>()
            .map(|coords| GroupElement { coords })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(v: &[(i64, i64)]) -> GroupElement<Rational> {
        GroupElement { coords: v.iter().map(|&(p, d)| rat(p, d)).collect() }
    }

    // 3×3 upper unitriangular product, entries (a, b, c) = (m12, m23, m13)
    fn matmul(x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        vec![&x[0] + &y[0], &x[1] + &y[1], &x[2] + &y[2] + &x[0] * &y[1]]
    }

    fn rand_q(rng: &mut ChaCha8Rng, dim: usize) -> GroupElement<Rational> {
        GroupElement { coords: (0..dim).map(|_| rat(rng.random_range(-40..40), rng.random_range(1..9))).collect() }
    }

    #[test]
    fn heisenberg_law_matches_matrices() {
        let h = FilteredGroup::heisenberg();
        let x = GroupElement::from_i64(&[1, 0, 0]);
        let y = GroupElement::from_i64(&[0, 1, 0]);
        assert_eq!(h.mul(&x, &y).unwrap(), GroupElement::from_i64(&[1, 1, 1]));
        assert_eq!(h.mul(&y, &x).unwrap(), GroupElement::from_i64(&[1, 1, 0]));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = rand_q(&mut rng, 3);
            let b = rand_q(&mut rng, 3);
            assert_eq!(h.mul(&a, &b).unwrap().coords, matmul(&a.coords, &b.coords));
            assert!(h.mul(&a, &h.inv(&a).unwrap()).unwrap().is_identity());
        }
    }

    #[test]
    fn powers_match_repeated_products() {
        let h = FilteredGroup::heisenberg();
        let g = q(&[(2, 3), (-5, 7), (0, 1)]);
        let mut acc = g.coords.clone();
        for n in 2..=6i64 {
            acc = matmul(&acc, &g.coords);
            assert_eq!(h.pow(&g, &int(n)).coords, acc);
            let (a, b) = (rat(2, 3), rat(-5, 7));
            assert_eq!(acc[2], a * b * int(n * (n - 1) / 2));
        }
        assert!(h.pow(&g, &int(0)).is_identity());
        assert_eq!(h.pow(&g, &int(1)), g);
        let x = rat(3, 5);
        let y = rat(-7, 2);
        assert_eq!(h.pow(&h.pow(&g, &x), &y), h.pow(&g, &(x.clone() * y.clone())));
    }

    #[test]
    fn reduction_examples() {
        let h = FilteredGroup::heisenberg();
        let (rep, gamma) = h.reduce(&q(&[(1, 2), (1, 2), (5, 4)]));
        assert_eq!(rep, q(&[(1, 2), (1, 2), (1, 4)]));
        assert_eq!(gamma, GroupElement::from_i64(&[0, 0, -1]));
        let (rep, gamma) = h.reduce(&q(&[(3, 2), (0, 1), (0, 1)]));
        assert_eq!(rep, q(&[(1, 2), (0, 1), (0, 1)]));
        assert_eq!(gamma, GroupElement::from_i64(&[-1, 0, 0]));
        let g = q(&[(1, 3), (2, 5), (1, 7)]);
        assert_eq!(h.reduce(&g), (g.clone(), h.identity()));
    }

    #[test]
    fn reduction_is_a_right_coset_invariant() {
        let h = FilteredGroup::heisenberg();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let g = rand_q(&mut rng, 3);
            let gamma = GroupElement::from_i64(&[
                rng.random_range(-5..5),
                rng.random_range(-5..5),
                rng.random_range(-5..5),
            ]);
            let (rep, c) = h.reduce(&g);
            assert!(h.in_lattice(&c));
            assert_eq!(h.mul(&g, &c).unwrap(), rep);
            assert_eq!(h.reduce(&h.mul(&g, &gamma).unwrap()).0, rep);
            assert!(rep.coords.iter().all(|x| *x >= int(0) && *x < int(1)));
        }
    }

    #[test]
    fn torus_is_coordinatewise() {
        let t = FilteredGroup::torus(2).unwrap();
        let a = q(&[(1, 2), (1, 3)]);
        let b = q(&[(1, 4), (2, 3)]);
        assert_eq!(t.mul(&a, &b).unwrap(), q(&[(3, 4), (1, 1)]));
        assert_eq!(t.reduce(&t.mul(&a, &b).unwrap()).0, q(&[(3, 4), (0, 1)]));
    }

    #[test]
    fn validation() {
        assert!(FilteredGroup::new(3, vec![3, 2, 1], &[(0, 1, 2, 1), (0, 1, 1, 1)]).is_err());
        assert!(FilteredGroup::new(3, vec![2], &[]).is_err());
        assert!(FilteredGroup::new(3, vec![3, 1], &[(0, 1, 2, 1), (1, 0, 2, 1)]).is_err());
        // step 3 algebra
        assert!(matches!(
            FilteredGroup::new(4, vec![4, 2, 1], &[(0, 1, 2, 1), (0, 2, 3, 1)]),
            Err(Error::Unsupported(_))
        ));
        let g = FilteredGroup::new(3, vec![3, 1], &[(1, 0, 2, -1)]).unwrap();
        assert_eq!(g, FilteredGroup::new(3, vec![3, 1], &[(0, 1, 2, 1)]).unwrap());
        assert_eq!(FilteredGroup::builtin("torus(2,3)").unwrap().step(), 3);
        assert!(FilteredGroup::builtin("sphere").is_err());
    }

    #[test]
    fn quotient_distance_sees_lattice_translates() {
        let h = FilteredGroup::heisenberg();
        let a = GroupElement { coords: vec![0.01, 0.5, 0.5] };
        let b = GroupElement { coords: vec![0.99, 0.5, 0.5] };
        assert!(h.dist(&a, &b) > 0.5);
        assert!(h.quotient_dist(&a, &b).unwrap() < 0.1);
    }

    #[test]
    fn eccentric_balls_are_approximately_normal() {
        let h = FilteredGroup::heisenberg();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for &r in &[0.05, 0.01] {
            for _ in 0..20 {
                let y: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..=2.0)).collect();
                let g = h.exp(&y);
                assert!(h.norm(&g) <= 2.0 + 1e-12);
                assert!(h.normality_probe(&g, r, 0.2, 500, &mut rng).holds(), "r = {r}");
            }
        }
    }
}
