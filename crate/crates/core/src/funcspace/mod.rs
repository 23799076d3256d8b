//! Sampled complex functions on [N] and Z/NZ, plus an expression language
//! for synthesizing test functions.

mod expr;

pub use expr::{eval_expr, parse_expr, Cond, Dist, Expr, Poly};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum;

const BOUND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainSpec {
    /// [N] = {1, ..., N}
    Interval(usize),
    /// Z/NZ = {0, ..., N-1}
    Cyclic(usize),
}

impl DomainSpec {
    pub fn interval(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("domain size N must be >= 1".into()));
        }
        Ok(DomainSpec::Interval(n))
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("domain size N must be >= 1".into()));
        }
        Ok(DomainSpec::Cyclic(n))
    }

    pub fn size(&self) -> usize {
        match *self {
            DomainSpec::Interval(n) | DomainSpec::Cyclic(n) => n,
        }
    }

    pub fn is_cyclic(&self) -> bool {
        matches!(self, DomainSpec::Cyclic(_))
    }

    /// The integer represented by storage index `i`.
    pub fn point(&self, i: usize) -> i64 {
        match self {
            DomainSpec::Interval(_) => i as i64 + 1,
            DomainSpec::Cyclic(_) => i as i64,
        }
    }

    /// Storage index of integer `x`, if it lies in the domain (cyclic
    /// domains reduce mod N).
    pub fn index_of(&self, x: i64) -> Option<usize> {
        match *self {
            DomainSpec::Interval(n) => {
                if x >= 1 && x <= n as i64 {
                    Some((x - 1) as usize)
                } else {
                    None
                }
            }
            DomainSpec::Cyclic(n) => Some(x.rem_euclid(n as i64) as usize),
        }
    }
}

/// A complex function sampled on a domain, with a declared sup-norm bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    domain: DomainSpec,
    values: Vec<Complex64>,
    bound: f64,
}

impl SampledFunction {
    /// A function with the default bound 1.
    pub fn new(domain: DomainSpec, values: Vec<Complex64>) -> Result<Self> {
        Self::with_bound(domain, values, 1.0)
    }

    pub fn with_bound(domain: DomainSpec, values: Vec<Complex64>, bound: f64) -> Result<Self> {
        if domain.size() == 0 {
            return Err(Error::InvalidArgument("domain size N must be >= 1".into()));
        }
        if values.len() != domain.size() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                domain.size(),
                values.len()
            )));
        }
        if !(bound >= 0.0) || !bound.is_finite() {
            return Err(Error::InvalidArgument(format!("bad bound {bound}")));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite value at index {i}")));
            }
            if v.norm() > bound + BOUND_TOL {
                return Err(Error::BoundViolated(format!(
                    "|f| = {} exceeds bound {bound} at index {i}",
                    v.norm()
                )));
            }
        }
        Ok(SampledFunction { domain, values, bound })
    }

    /// Uses the smallest bound >= 1 that the values satisfy.
    pub fn with_auto_bound(domain: DomainSpec, values: Vec<Complex64>) -> Result<Self> {
        let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let bound = if sup <= 1.0 + BOUND_TOL { 1.0 } else { sup };
        Self::with_bound(domain, values, bound)
    }

    pub fn from_real(domain: DomainSpec, values: &[f64]) -> Result<Self> {
        Self::with_auto_bound(domain, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn constant(domain: DomainSpec, c: Complex64) -> Result<Self> {
        Self::with_auto_bound(domain, vec![c; domain.size()])
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Value at integer x; zero outside an interval domain, reduced mod N
    /// on a cyclic one.
    pub fn at(&self, x: i64) -> Complex64 {
        match self.domain.index_of(x) {
            Some(i) => self.values[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn require_bounded(&self, b: f64) -> Result<()> {
        let s = self.sup_norm();
        if s > b + BOUND_TOL {
            return Err(Error::BoundViolated(format!("sup |f| = {s} exceeds {b}")));
        }
        Ok(())
    }

    /// True if every value is real and lies in [0, 1].
    pub fn is_unit_interval_valued(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.im.abs() <= BOUND_TOL && v.re >= -BOUND_TOL && v.re <= 1.0 + BOUND_TOL)
    }

    /// True if every value is exactly 0 or 1.
    pub fn is_indicator(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.im == 0.0 && (v.re == 0.0 || v.re == 1.0))
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::with_auto_bound(self.domain, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(
        &self,
        other: &SampledFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        check_same_domain(self, other)?;
        Self::with_auto_bound(
            self.domain,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }
}

pub fn check_same_domain(f: &SampledFunction, g: &SampledFunction) -> Result<()> {
    if f.domain != g.domain {
        return Err(Error::DomainMismatch(format!("{:?} vs {:?}", f.domain, g.domain)));
    }
    Ok(())
}

/// Zero-extend a function on [N] to Z/ÑZ: f̃(x) = f(x) for x = 1..N, else 0.
pub fn embed_to_cyclic(f: &SampledFunction, k: u32, ntilde: usize) -> Result<SampledFunction> {
    let DomainSpec::Interval(n) = f.domain else {
        return Err(Error::DomainMismatch("embed_to_cyclic expects an interval domain".into()));
    };
    let min = n.checked_shl(k).filter(|m| m >> k == n).ok_or_else(|| {
        Error::InvalidArgument(format!("2^{k} * {n} overflows"))
    })?;
    if ntilde < min {
        return Err(Error::InvalidArgument(format!(
            "Ñ = {ntilde} is too small: need at least 2^{k}·N = {min}"
        )));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); ntilde];
    values[1..=n].copy_from_slice(&f.values);
    Ok(SampledFunction { domain: DomainSpec::Cyclic(ntilde), values, bound: f.bound })
}

/// (E_n |f(n)|²)^{1/2}
pub fn l2_norm(f: &SampledFunction) -> f64 {
    let sq: Vec<f64> = f.values.iter().map(|v| v.norm_sqr()).collect();
    libm::sqrt(sum::mean(&sq))
}

/// E_n f(n)·conj(g(n))
pub fn inner_product(f: &SampledFunction, g: &SampledFunction) -> Result<Complex64> {
    check_same_domain(f, g)?;
    let terms: Vec<Complex64> = f.values.iter().zip(&g.values).map(|(a, b)| a * b.conj()).collect();
    Ok(sum::mean_c(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn embedding_places_values_at_one_through_n() {
        let f = SampledFunction::new(DomainSpec::Interval(2), vec![c(1.0), c(1.0)]).unwrap();
        let g = embed_to_cyclic(&f, 2, 8).unwrap();
        let re: Vec<f64> = g.values().iter().map(|v| v.re).collect();
        assert_eq!(re, vec![0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(embed_to_cyclic(&f, 2, 7).is_err());

        let one = SampledFunction::new(DomainSpec::Interval(1), vec![c(0.5)]).unwrap();
        let e = embed_to_cyclic(&one, 1, 2).unwrap();
        assert_eq!(e.values(), &[c(0.0), c(0.5)]);
    }

    #[test]
    fn norms_and_inner_products() {
        let d = DomainSpec::Interval(4);
        let f = SampledFunction::new(d, vec![c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        assert_eq!(l2_norm(&f), 0.5);
        let ones = SampledFunction::constant(d, c(1.0)).unwrap();
        assert_eq!(l2_norm(&ones), 1.0);
        let ip = inner_product(&f, &f).unwrap();
        assert!((ip.re - l2_norm(&f) * l2_norm(&f)).abs() < 1e-15);
        let other = SampledFunction::constant(DomainSpec::Cyclic(4), c(1.0)).unwrap();
        assert!(matches!(inner_product(&f, &other), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn bound_is_enforced() {
        let d = DomainSpec::Cyclic(2);
        assert!(SampledFunction::new(d, vec![c(1.5), c(0.0)]).is_err());
        assert!(SampledFunction::new(d, vec![c(1.0)]).is_err());
        let g = SampledFunction::with_auto_bound(d, vec![c(1.5), c(0.0)]).unwrap();
        assert_eq!(g.bound(), 1.5);
        assert!(g.require_bounded(1.0).is_err());
    }

    #[test]
    fn interval_points_are_one_based() {
        let d = DomainSpec::Interval(3);
        assert_eq!(d.point(0), 1);
        assert_eq!(d.index_of(3), Some(2));
        assert_eq!(d.index_of(0), None);
        assert_eq!(DomainSpec::Cyclic(5).index_of(-1), Some(4));
    }
}
