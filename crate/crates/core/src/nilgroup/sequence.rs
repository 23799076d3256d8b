//! Polynomial sequences in Taylor form g(n) = g_0 g_1^{C(n,1)} … g_s^{C(n,s)}.

use alloc::format;
use alloc::vec::Vec;

use super::{FilteredGroup, GroupElement};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// C(n, k) for any integer n, in the scalar type.
pub fn binom_s<S: Scalar>(n: i64, k: usize) -> S {
    let mut v = S::one();
    for j in 0..k {
        v = v * S::from_i64(n - j as i64) / S::from_i64(j as i64 + 1);
    }
    v
}

fn near_integral<S: Scalar>(c: &S) -> bool {
    c.is_integral() || c.near(&(c.clone() + S::half()).floor_s())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolySequence<S = Rational> {
    group: FilteredGroup,
    taylor: Vec<GroupElement<S>>,
}

impl<S: Scalar> PolySequence<S> {
    /// Taylor coefficients g_0..g_k with k ≤ s and g_i ∈ G_(i).
    pub fn new(group: FilteredGroup, taylor: Vec<GroupElement<S>>) -> Result<Self> {
        if taylor.is_empty() {
            return Err(Error::InvalidArgument("a sequence needs at least g_0".into()));
        }
        for (i, g) in taylor.iter().enumerate() {
            if g.coords.len() != group.dim() {
                return Err(Error::GroupMismatch(format!("coefficient g_{i} has the wrong dimension")));
            }
            if !group.in_subgroup(g, i) {
                return Err(Error::InvalidArgument(format!("Taylor coefficient g_{i} does not lie in G_({i})")));
            }
        }
        Ok(PolySequence { group, taylor }.trimmed())
    }

    pub fn constant(group: FilteredGroup, g: GroupElement<S>) -> Result<Self> {
        Self::new(group, alloc::vec![g])
    }

    /// n ↦ g^n ... as the degree-1 sequence with g_1 = g.
    pub fn linear(group: FilteredGroup, g: GroupElement<S>) -> Result<Self> {
        let id = group.identity();
        Self::new(group, alloc::vec![id, g])
    }

    pub fn group(&self) -> &FilteredGroup {
        &self.group
    }

    pub fn taylor(&self) -> &[GroupElement<S>] {
        &self.taylor
    }

    /// g_i, identity past the stored length.
    pub fn coefficient(&self, i: usize) -> GroupElement<S> {
        self.taylor.get(i).cloned().unwrap_or_else(|| self.group.identity())
    }

    pub fn eval(&self, n: i64) -> GroupElement<S> {
        let g = &self.group;
        let mut acc = self.taylor[0].clone();
        for (i, c) in self.taylor.iter().enumerate().skip(1) {
            if c.is_identity() {
                continue;
            }
            acc = g.mul_unchecked(&acc, &g.pow(c, &binom_s(n, i)));
        }
        acc
    }

    /// Taylor form of an arbitrary map Z → G assumed polynomial: solved
    /// triangularly from the values at 0..s and checked at s+1 and s+2.
    pub fn interpolate(group: &FilteredGroup, f: impl Fn(i64) -> GroupElement<S>) -> Result<Self> {
        let s = group.step();
        let mut taylor: Vec<GroupElement<S>> = Vec::with_capacity(s + 1);
        for n in 0..=s as i64 {
            let prefix = PolySequence { group: group.clone(), taylor: taylor.clone() };
            let value = f(n);
            let gn = if taylor.is_empty() {
                value
            } else {
                group.mul_unchecked(&group.inv_unchecked(&prefix.eval(n)), &value)
            };
            taylor.push(gn);
        }
        for (i, g) in taylor.iter_mut().enumerate() {
            let start = group.dim() - group.subgroup_dim(i);
            for c in g.coords[..start].iter_mut() {
                if c.near(&S::zero()) {
                    *c = S::zero();
                } else {
                    return Err(Error::Interpolation(format!(
                        "coefficient {i} leaves G_({i}); the map is not polynomial for this filtration"
                    )));
                }
            }
        }
        let seq = PolySequence { group: group.clone(), taylor };
        for n in [s as i64 + 1, s as i64 + 2, -1] {
            let (a, b) = (seq.eval(n), f(n));
            if !a.coords.iter().zip(&b.coords).all(|(x, y)| x.near(y)) {
                return Err(Error::Interpolation(format!(
                    "value at n = {n} disagrees with the degree-{s} interpolant"
                )));
            }
        }
        Ok(seq.trimmed())
    }

    /// Trailing identity coefficients are dropped so equal sequences compare equal.
    fn trimmed(mut self) -> Self {
        while self.taylor.len() > 1 && self.taylor.last().is_some_and(|g| g.is_identity()) {
            self.taylor.pop();
        }
        self
    }

    /// n ↦ a(n)·b(n)
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.group.check_same(&other.group)?;
        let g = &self.group;
        Self::interpolate(g, |n| g.mul_unchecked(&self.eval(n), &other.eval(n)))
    }

    /// n ↦ a(n)⁻¹
    pub fn inverse(&self) -> Result<Self> {
        let g = &self.group;
        Self::interpolate(g, |n| g.inv_unchecked(&self.eval(n)))
    }

    /// ∂_h g(n) = g(n+h) g(n)⁻¹
    pub fn derivative(&self, h: i64) -> Result<Self> {
        let g = &self.group;
        Self::interpolate(g, |n| g.mul_unchecked(&self.eval(n + h), &g.inv_unchecked(&self.eval(n))))
    }

    /// Whether ∂_{h_1}…∂_{h_i} g takes values in G_(i) (checked on the
    /// Taylor coefficients of the derivative, which is exact).
    pub fn derivative_in_filtration(&self, hs: &[i64]) -> Result<bool> {
        let mut d = self.clone();
        for &h in hs {
            d = d.derivative(h)?;
        }
        Ok(d.taylor.iter().all(|c| self.group.in_subgroup(c, hs.len())))
    }

    /// n ↦ g(qn + r)
    pub fn scaled(&self, q: i64, r: i64) -> Result<Self> {
        if q < 1 {
            return Err(Error::InvalidArgument("scaling factor q must be >= 1".into()));
        }
        Self::interpolate(&self.group, |n| self.eval(q * n + r))
    }

    pub fn to_f64(&self) -> PolySequence<f64> {
        PolySequence { group: self.group.clone(), taylor: self.taylor.iter().map(|g| g.to_f64()).collect() }
    }

    /// Smooth / rational / periodic classification at scale (A, N).
    pub fn classify(&self, a: f64, n: u64, max_period: u64) -> Result<Classification> {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be >= 1".into()));
        }
        let g = &self.group;
        let f = self.to_f64();
        let mut smooth = true;
        let mut prev = f.eval(1);
        smooth &= g.norm(&prev) <= a;
        for k in 2..=n as i64 {
            let cur = f.eval(k);
            smooth &= g.norm(&cur) <= a && g.dist(&prev, &cur) <= a / n as f64;
            if !smooth {
                break;
            }
            prev = cur;
        }
        let qmax = libm::floor(a).max(0.0) as i64;
        let rational = self.taylor.iter().all(|c| {
            (1..=qmax).any(|q| g.pow(c, &S::from_i64(q)).coords.iter().all(near_integral))
        });
        let period = if rational { self.orbit_period(max_period) } else { None };
        Ok(Classification { smooth, rational, period })
    }

    /// Least p ≥ 1 with g(n+p)Γ = g(n)Γ for all n. The transition
    /// n ↦ g(n)⁻¹g(n+p) is polynomial, so it lies in Γ everywhere once it
    /// does at n = 0..s.
    pub fn orbit_period(&self, max_period: u64) -> Option<u64> {
        let g = &self.group;
        let s = g.step() as i64;
        let base: Vec<GroupElement<S>> = (0..=s).map(|n| g.inv_unchecked(&self.eval(n))).collect();
        (1..=max_period).find(|&p| {
            (0..=s).all(|n| {
                let t = g.mul_unchecked(&base[n as usize], &self.eval(n + p as i64));
                t.coords.iter().all(near_integral)
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub smooth: bool,
    pub rational: bool,
    pub period: Option<u64>,
}

/// Multi-parameter sequence n ↦ Π_i g_i^{C(n,i)} over Z^D, C(n,i) = Π_j C(n_j,i_j),
/// product taken in the stored order.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPolySequence<S = Rational> {
    group: FilteredGroup,
    d: usize,
    terms: Vec<(Vec<usize>, GroupElement<S>)>,
}

impl<S: Scalar> MultiPolySequence<S> {
    pub fn new(group: FilteredGroup, d: usize, terms: Vec<(Vec<usize>, GroupElement<S>)>) -> Result<Self> {
        for (idx, g) in &terms {
            if idx.len() != d || g.coords.len() != group.dim() {
                return Err(Error::InvalidArgument("term shape does not match D or the group".into()));
            }
            let deg: usize = idx.iter().sum();
            if !group.in_subgroup(g, deg) {
                return Err(Error::InvalidArgument(format!("coefficient {idx:?} does not lie in G_({deg})")));
            }
        }
        Ok(MultiPolySequence { group, d, terms })
    }

    pub fn eval(&self, n: &[i64]) -> Result<GroupElement<S>> {
        if n.len() != self.d {
            return Err(Error::InvalidArgument(format!("expected {} parameters", self.d)));
        }
        let g = &self.group;
        let mut acc = g.identity();
        for (idx, c) in &self.terms {
            let e = idx.iter().zip(n).fold(S::one(), |e, (&i, &x)| e * binom_s::<S>(x, i));
            acc = g.mul_unchecked(&acc, &g.pow(c, &e));
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(v: &[(i64, i64)]) -> GroupElement<Rational> {
        GroupElement { coords: v.iter().map(|&(p, d)| rat(p, d)).collect() }
    }

    fn random_heis(rng: &mut ChaCha8Rng) -> PolySequence {
        let h = FilteredGroup::heisenberg();
        let mut r = || rat(rng.random_range(-30..30), rng.random_range(1..7));
        let g0 = GroupElement { coords: vec![r(), r(), r()] };
        let g1 = GroupElement { coords: vec![r(), r(), r()] };
        let g2 = GroupElement { coords: vec![int(0), int(0), r()] };
        PolySequence::new(h, vec![g0, g1, g2]).unwrap()
    }

    #[test]
    fn taylor_evaluation_examples() {
        let h = FilteredGroup::heisenberg();
        let seq = PolySequence::new(
            h.clone(),
            vec![h.identity(), GroupElement::from_i64(&[1, 1, 0]), GroupElement::from_i64(&[0, 0, 1])],
        )
        .unwrap();
        assert_eq!(seq.eval(2), GroupElement::from_i64(&[2, 2, 2]));
        assert!(seq.eval(0).is_identity());
        let c = FilteredGroup::circle();
        let lin = PolySequence::linear(c.clone(), q(&[(1, 7)])).unwrap();
        assert_eq!(c.reduce(&lin.eval(3)).0, q(&[(3, 7)]));
        // g_2 outside G_(2)
        assert!(PolySequence::new(h.clone(), vec![h.identity(), h.identity(), GroupElement::from_i64(&[1, 0, 0])])
            .is_err());
    }

    #[test]
    fn interpolation_recovers_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let s = random_heis(&mut rng);
            let back = PolySequence::interpolate(s.group(), |n| s.eval(n)).unwrap();
            assert_eq!(back, s);
        }
        // n ↦ (n², 0, 0) is not polynomial for the lower central series
        let h = FilteredGroup::heisenberg();
        let r = PolySequence::interpolate(&h, |n| GroupElement::from_i64(&[n * n, 0, 0]));
        assert!(matches!(r, Err(Error::Interpolation(_))));
    }

    #[test]
    fn products_and_derivatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let a = random_heis(&mut rng);
            let b = random_heis(&mut rng);
            let p = a.product(&b).unwrap();
            let g = a.group();
            for n in -3..6 {
                assert_eq!(p.eval(n), g.mul(&a.eval(n), &b.eval(n)).unwrap());
            }
            for h1 in [-2, 1, 3] {
                assert!(p.derivative_in_filtration(&[h1]).unwrap());
                for h2 in [1, 4] {
                    assert!(p.derivative_in_filtration(&[h1, h2]).unwrap());
                    let third = p.derivative(h1).unwrap().derivative(h2).unwrap().derivative(2).unwrap();
                    assert!(third.taylor().iter().all(|c| c.is_identity()));
                }
            }
            let id = PolySequence::constant(g.clone(), g.identity()).unwrap();
            assert_eq!(a.product(&id).unwrap(), a);
            let inv = a.inverse().unwrap();
            assert!(a.product(&inv).unwrap().taylor().iter().all(|c| c.is_identity()));
        }
        let c = FilteredGroup::circle();
        let lin = PolySequence::linear(c, q(&[(2, 9)])).unwrap();
        assert_eq!(lin.derivative(4).unwrap().taylor(), &[q(&[(8, 9)])]);
    }

    #[test]
    fn scaling() {
        let c = FilteredGroup::circle();
        let lin = PolySequence::linear(c, q(&[(2, 9)])).unwrap();
        assert_eq!(lin.scaled(1, 0).unwrap(), lin);
        assert_eq!(lin.scaled(2, 1).unwrap().taylor(), &[q(&[(2, 9)]), q(&[(4, 9)])]);
        assert!(lin.scaled(0, 1).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_heis(&mut rng);
        let sc = a.scaled(3, 2).unwrap();
        assert!(sc.derivative_in_filtration(&[1, 1]).unwrap());
        for n in 0..4 {
            assert_eq!(sc.eval(n), a.eval(3 * n + 2));
        }
    }

    #[test]
    fn classification_examples() {
        let c = FilteredGroup::circle();
        let third = PolySequence::linear(c.clone(), q(&[(1, 3)])).unwrap();
        let cl = third.classify(3.0, 100, 1000).unwrap();
        assert!(cl.rational);
        assert_eq!(cl.period, Some(3));
        let k = PolySequence::constant(c.clone(), q(&[(1, 4)])).unwrap();
        let cl = k.classify(0.25, 50, 100).unwrap();
        assert!(cl.smooth && !cl.rational);
        assert!(k.classify(4.0, 50, 100).unwrap().rational);
        assert!(!k.classify(0.2, 50, 100).unwrap().smooth);
        let h = FilteredGroup::heisenberg();
        let half = PolySequence::linear(h, q(&[(1, 2), (0, 1), (0, 1)])).unwrap();
        assert_eq!(half.classify(2.0, 10, 100).unwrap().period, Some(2));
    }

    #[test]
    fn multi_parameter_evaluation() {
        let t = FilteredGroup::torus_with_degree(1, 2).unwrap();
        // α n₁ + β C(n₁,1)C(n₂,1)
        let m = MultiPolySequence::new(
            t,
            2,
            vec![(vec![1, 0], q(&[(1, 5)])), (vec![1, 1], q(&[(1, 7)]))],
        )
        .unwrap();
        assert_eq!(m.eval(&[3, 4]).unwrap(), q(&[(3 * 7 + 12 * 5, 35)]));
        assert!(m.eval(&[1]).is_err());
    }
}
