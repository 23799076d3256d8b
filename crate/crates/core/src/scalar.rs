//! Exact rationals and the scalar abstraction used by the group calculus.

use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    match r.to_f64() {
        Some(v) => v,
        None => {
            // Huge numerator and denominator: scale both down first.
            let n = r.numer().to_f64().unwrap_or(f64::NAN);
            let d = r.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Fractional part in [0,1), computed exactly before rounding to f64.
pub fn frac_f64(r: &Rational) -> f64 {
    rat_to_f64(&(r - r.floor()))
}

/// Distance to the nearest integer, exactly.
pub fn dist_to_z(r: &Rational) -> Rational {
    let f = r - r.floor();
    let g = Rational::one() - &f;
    if f < g {
        f
    } else {
        g
    }
}

pub fn dist_to_z_f64(x: f64) -> f64 {
    let f = x - libm::floor(x);
    if f < 1.0 - f {
        f
    } else {
        1.0 - f
    }
}

/// Generalised binomial coefficient C(n, k) for any integer n.
pub fn binom(n: i64, k: usize) -> Rational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for j in 0..k {
        num *= BigInt::from(n - j as i64);
        den *= BigInt::from(j as i64 + 1);
    }
    Rational::new(num, den)
}

pub fn binom_f64(n: i64, k: usize) -> f64 {
    let mut v = 1.0;
    for j in 0..k {
        v = v * (n - j as i64) as f64 / (j + 1) as f64;
    }
    v
}

/// Best rational approximation p/q of `x` with q <= `max_den`
/// (continued fraction convergents and semiconvergents).
pub fn best_approximation(x: &Rational, max_den: u64) -> Rational {
    let max_den = BigInt::from(max_den.max(1));
    let (mut p0, mut q0, mut p1, mut q1) =
        (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut r = x.clone();
    loop {
        let a = r.floor().to_integer();
        let q2 = &q0 + &a * &q1;
        if q2 > max_den {
            // semiconvergent candidate
            let k = (&max_den - &q0).div_floor(&q1);
            let cand = Rational::new(&p0 + &k * &p1, &q0 + &k * &q1);
            let conv = Rational::new(p1.clone(), q1.clone());
            let dc = (&cand - x).abs();
            let dv = (&conv - x).abs();
            return if dc < dv { cand } else { conv };
        }
        let p2 = &p0 + &a * &p1;
        p0 = core::mem::replace(&mut p1, p2);
        q0 = core::mem::replace(&mut q1, q2);
        let f = &r - Rational::from_integer(a);
        if f.is_zero() {
            return Rational::new(p1, q1);
        }
        r = f.recip();
    }
}

/// Ring-like scalars the group law is generic over: exact rationals for
/// certificates, doubles for orbit statistics.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn floor_s(&self) -> Self;
    fn value_f64(&self) -> f64;
    fn is_integral(&self) -> bool;
    /// ‖x‖_{R/Z}, exact before the final rounding for rationals.
    fn dist_z_f64(&self) -> f64;
    /// Equality for rationals, relative tolerance 1e-9 for doubles.
    fn near(&self, other: &Self) -> bool;
    fn half() -> Self {
        Self::one() / Self::from_i64(2)
    }
}

impl Scalar for Rational {
    fn from_i64(v: i64) -> Self {
        int(v)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn floor_s(&self) -> Self {
        self.floor()
    }
    fn value_f64(&self) -> f64 {
        rat_to_f64(self)
    }
    fn is_integral(&self) -> bool {
        self.is_integer()
    }
    fn dist_z_f64(&self) -> f64 {
        rat_to_f64(&dist_to_z(self))
    }
    fn near(&self, other: &Self) -> bool {
        self == other
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        rat_to_f64(r)
    }
    fn floor_s(&self) -> Self {
        libm::floor(*self)
    }
    fn value_f64(&self) -> f64 {
        *self
    }
    fn is_integral(&self) -> bool {
        libm::floor(*self) == *self
    }
    fn dist_z_f64(&self) -> f64 {
        dist_to_z_f64(*self)
    }
    fn near(&self, other: &Self) -> bool {
        let scale = 1.0 + libm::fabs(*self).max(libm::fabs(*other));
        libm::fabs(self - other) <= 1e-9 * scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_extend_to_negative_arguments() {
        assert_eq!(binom(5, 2), int(10));
        assert_eq!(binom(-1, 2), int(1));
        assert_eq!(binom(3, 5), int(0));
        assert_eq!(binom_f64(6, 3), 20.0);
    }

    #[test]
    fn best_approximation_recovers_simple_fractions() {
        let x = rat(1, 3) + rat(1, 1_000_000);
        assert_eq!(best_approximation(&x, 5), rat(1, 3));
        assert_eq!(best_approximation(&rat(7, 10), 1), int(1));
        assert_eq!(best_approximation(&rat(2, 10), 1), int(0));
        assert_eq!(best_approximation(&rat(2, 10), 5), rat(1, 5));
    }

    #[test]
    fn distance_to_integers() {
        assert_eq!(dist_to_z(&rat(7, 4)), rat(1, 4));
        assert_eq!(dist_to_z(&rat(-1, 3)), rat(1, 3));
        assert!((dist_to_z_f64(-0.9) - 0.1).abs() < 1e-15);
    }
}
