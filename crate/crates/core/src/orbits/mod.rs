//! Orbit statistics on nilmanifolds: averages along polynomial orbits,
//! Monte Carlo Haar integrals, Leibman groups of form systems, the
//! counting-lemma residual and the vertical Fourier transform.

mod counting;
mod geometry;
mod leibman;
mod vertical;

pub use counting::*;
pub use geometry::*;
pub use leibman::*;
pub use vertical::*;

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nilgroup::{FilteredGroup, GroupElement, PolySequence};
use crate::sum::{map_indexed, pairwise, pairwise_c};

/// Local data of a virtual nilsequence: n mod q and n/N.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Local {
    pub residue: u64,
    pub y: f64,
}

pub type Evaluator = dyn Fn(&[f64], &Local) -> Complex64 + Send + Sync;

/// A function on (G/Γ)^t given on reduced coordinates, concatenated
/// point by point, with a declared Lipschitz constant.
#[derive(Clone)]
pub struct LipschitzFunction {
    eval: Arc<Evaluator>,
    pub lipschitz: f64,
    /// q for the n mod q factor; 1 when unused.
    pub modulus: u64,
    pub name: String,
}

impl core::fmt::Debug for LipschitzFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("LipschitzFunction")
            .field("name", &self.name)
            .field("lipschitz", &self.lipschitz)
            .field("modulus", &self.modulus)
            .finish()
    }
}

/// e(x) = exp(2πix)
pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

impl LipschitzFunction {
    pub fn new(name: &str, lipschitz: f64, f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        LipschitzFunction { eval: Arc::new(move |x, _| f(x)), lipschitz, modulus: 1, name: name.to_string() }
    }

    pub fn virtual_nilsequence(
        name: &str,
        lipschitz: f64,
        modulus: u64,
        f: impl Fn(&[f64], &Local) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidArgument("modulus must be >= 1".into()));
        }
        Ok(LipschitzFunction { eval: Arc::new(f), lipschitz, modulus, name: name.to_string() })
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new("constant", 0.0, move |_| c)
    }

    /// e(m·x) on the listed coordinates.
    pub fn character(m: Vec<i64>, coords: Vec<usize>) -> Self {
        let lip = 2.0 * PI * m.iter().map(|v| v.unsigned_abs() as f64).sum::<f64>();
        Self::new("character", lip, move |x| {
            e(m.iter().zip(&coords).map(|(&a, &j)| a as f64 * x[j]).sum())
        })
    }

    pub fn eval(&self, x: &[f64], local: &Local) -> Complex64 {
        (self.eval)(x, local)
    }

    pub fn at(&self, x: &[f64]) -> Complex64 {
        (self.eval)(x, &Local::default())
    }

    /// Largest observed |F(x) − F(y)| / d(xΓ, yΓ) over random nearby pairs
    /// on G/Γ (single-point functions); errors if it exceeds 1.5 L.
    pub fn check_lipschitz(&self, group: &FilteredGroup, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = random_point(group, &mut rng);
            let y: Vec<f64> = (0..group.dim()).map(|_| rng.random_range(-1e-3..1e-3)).collect();
            let xh = group.reduce_rep(&group.mul_unchecked(&x, &group.exp(&y)));
            let d = group.quotient_dist(&x, &xh)?;
            if d < 1e-12 {
                continue;
            }
            worst = worst.max((self.at(&x.coords) - self.at(&xh.coords)).norm() / d);
        }
        if worst > 1.5 * self.lipschitz + 1e-9 {
            return Err(Error::Contract(alloc::format!(
                "{}: observed Lipschitz ratio {worst:.3} exceeds declared {}",
                self.name,
                self.lipschitz
            )));
        }
        Ok(worst)
    }
}

/// Uniform point of [0,1)^dim, i.e. a Haar-random point of G/Γ in reduced
/// coordinates (the triangular coordinate map has unit Jacobian).
pub fn random_point<R: Rng>(group: &FilteredGroup, rng: &mut R) -> GroupElement<f64> {
    GroupElement { coords: (0..group.dim()).map(|_| rng.random::<f64>()).collect() }
}

/// (1/|S|) Σ_{n∈S} F(g(n)Γ, n mod q, n/N) over S = [N] ∩ (n₀ + qZ).
pub fn orbit_average(
    f: &LipschitzFunction,
    seq: &PolySequence<f64>,
    n: u64,
    coset: Option<(i64, u64)>,
) -> Result<Complex64> {
    let (n0, q) = coset.unwrap_or((0, 1));
    if q == 0 {
        return Err(Error::InvalidArgument("coset modulus must be >= 1".into()));
    }
    let g = seq.group();
    let pts: Vec<i64> = (1..=n as i64).filter(|m| (m - n0).rem_euclid(q as i64) == 0).collect();
    if pts.is_empty() {
        return Err(Error::Empty("no points of [N] in the coset".into()));
    }
    let vals = map_indexed(pts.len(), false, |i| {
        let m = pts[i];
        let x = g.reduce_rep(&seq.eval(m));
        let local = Local { residue: m.rem_euclid(f.modulus as i64) as u64, y: m as f64 / n as f64 };
        f.eval(&x.coords, &local)
    });
    Ok(pairwise_c(&vals) / pts.len() as f64)
}

const MC_CHUNK: usize = 4096;

/// Monte Carlo mean and standard error of `sample` draws; chunks use
/// independent ChaCha streams so the result does not depend on threading.
pub fn monte_carlo<F>(samples: usize, seed: u64, draw: F) -> Result<(Complex64, f64)>
where
    F: Fn(&mut ChaCha8Rng) -> Complex64 + Sync + Send,
{
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be >= 1".into()));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts = map_indexed(chunks, false, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let len = MC_CHUNK.min(samples - c * MC_CHUNK);
        let vals: Vec<Complex64> = (0..len).map(|_| draw(&mut rng)).collect();
        let sq: Vec<f64> = vals.iter().map(|v| v.norm_sqr()).collect();
        (pairwise_c(&vals), pairwise(&sq))
    });
    let sum: Vec<Complex64> = parts.iter().map(|p| p.0).collect();
    let sq: Vec<f64> = parts.iter().map(|p| p.1).collect();
    let n = samples as f64;
    let mean = pairwise_c(&sum) / n;
    let var = (pairwise(&sq) / n - mean.norm_sqr()).max(0.0);
    let stderr = if samples > 1 { libm::sqrt(var * n / (n - 1.0) / n) } else { 0.0 };
    Ok((mean, stderr))
}

/// ∫_{G/Γ} F dμ by Monte Carlo: (estimate, standard error).
pub fn haar_integral_mc(f: &LipschitzFunction, group: &FilteredGroup, samples: usize, seed: u64) -> Result<(Complex64, f64)> {
    monte_carlo(samples, seed, |rng| f.at(&random_point(group, rng).coords))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn golden() -> f64 {
        (libm::sqrt(5.0) - 1.0) / 2.0
    }

    #[test]
    fn orbit_averages() {
        let c = FilteredGroup::circle();
        let seq = PolySequence::linear(c.clone(), GroupElement { coords: vec![golden()] }).unwrap();
        let one = LipschitzFunction::constant(Complex64::new(1.0, 0.0));
        assert!((orbit_average(&one, &seq, 100, None).unwrap() - 1.0).norm() < 1e-15);
        let chi = LipschitzFunction::character(vec![1], vec![0]);
        let n = 10_000u64;
        let avg = orbit_average(&chi, &seq, n, None).unwrap();
        let bound = 1.0 / (2.0 * n as f64 * crate::scalar::dist_to_z_f64(golden()));
        assert!(avg.norm() <= bound, "{} > {bound}", avg.norm());
        // odd n only, against a direct filtered sum
        let odd = orbit_average(&chi, &seq, 99, Some((1, 2))).unwrap();
        let direct: Complex64 = (1..=99).filter(|m| m % 2 == 1).map(|m| e(m as f64 * golden())).sum::<Complex64>() / 50.0;
        assert!((odd - direct).norm() < 1e-12);
        assert!(orbit_average(&chi, &seq, 1, Some((0, 2))).is_err());
    }

    #[test]
    fn haar_estimates() {
        let h = FilteredGroup::heisenberg();
        let k = LipschitzFunction::constant(Complex64::new(0.3, 0.0));
        let (m, se) = haar_integral_mc(&k, &h, 1000, 1).unwrap();
        assert!((m.re - 0.3).abs() < 1e-14 && se < 1e-12);
        let c = FilteredGroup::circle();
        let chi = LipschitzFunction::character(vec![1], vec![0]);
        let (m, se) = haar_integral_mc(&chi, &c, 20_000, 2).unwrap();
        assert!(m.norm() < 4.0 * se);
        let vert = LipschitzFunction::character(vec![1], vec![2]);
        let (m, se) = haar_integral_mc(&vert, &h, 20_000, 3).unwrap();
        assert!(m.norm() < 4.0 * se);
    }

    fn bump() -> LipschitzFunction {
        LipschitzFunction::new("bump", 10.0, |x| {
            let s = libm::sin(PI * x[1]);
            Complex64::new(s * s * libm::cos(2.0 * PI * x[2]) + libm::cos(2.0 * PI * (x[0] + x[1])), 0.0)
        })
    }

    #[test]
    fn haar_translation_invariance() {
        let h = FilteredGroup::heisenberg();
        let g = GroupElement { coords: vec![0.37, -1.2, 0.55] };
        let (hh, f) = (h.clone(), bump());
        let shifted = LipschitzFunction::new("shift", 10.0, move |x| {
            let y = hh.reduce_rep(&hh.mul_unchecked(&g, &GroupElement { coords: x.to_vec() }));
            f.at(&y.coords)
        });
        let (a, sa) = haar_integral_mc(&bump(), &h, 50_000, 11).unwrap();
        let (b, sb) = haar_integral_mc(&shifted, &h, 50_000, 12).unwrap();
        assert!((a - b).norm() <= 3.0 * (sa + sb), "{a} vs {b}");
    }

    #[test]
    fn lipschitz_spot_check() {
        let h = FilteredGroup::heisenberg();
        let good = LipschitzFunction::new("sin2cos", 12.0, |x| {
            let s = libm::sin(PI * x[1]);
            Complex64::new(s * s * libm::cos(2.0 * PI * x[2]), 0.0)
        });
        assert!(good.check_lipschitz(&h, 2000, 4).is_ok());
        // e(c) is discontinuous across the a-wrap
        let bad = LipschitzFunction::new("e(c)", 7.0, |x| e(x[2]));
        assert!(bad.check_lipschitz(&h, 5000, 4).is_err());
    }
}
