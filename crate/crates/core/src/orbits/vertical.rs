//! Vertical Fourier analysis along a one-dimensional top torus G_(s).
//!
//! F̂(x, ξ) = ∫_{R/Z} e(−ξz) F(z·x) dz, with z acting through the central
//! coordinate; quadrature on a uniform power-of-two grid.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::{e, LipschitzFunction};
use crate::error::{Error, Result};
use crate::fft::fourier_coefficients;
use crate::nilgroup::{FilteredGroup, GroupElement};

/// The coordinate spanning the top filtration group, which must be a
/// central circle.
pub fn vertical_coordinate(group: &FilteredGroup) -> Result<usize> {
    let s = group.step();
    if group.subgroup_dim(s) != 1 || (s < 2 && !group.is_abelian()) {
        return Err(Error::Unsupported("vertical Fourier analysis needs a one-dimensional top torus".into()));
    }
    let k = group.dim() - 1;
    if group.brackets().iter().any(|b| b.a == k || b.b == k) {
        return Err(Error::Unsupported("top coordinate is not central".into()));
    }
    Ok(k)
}

fn check_resolution(res: usize) -> Result<()> {
    if res < 2 || !res.is_power_of_two() {
        return Err(Error::InvalidArgument("resolution must be a power of two >= 2".into()));
    }
    Ok(())
}

/// F(z·x) at z = k/res, k = 0..res.
pub fn fiber_samples(f: &LipschitzFunction, group: &FilteredGroup, x: &GroupElement<f64>, res: usize) -> Result<Vec<Complex64>> {
    check_resolution(res)?;
    let k = vertical_coordinate(group)?;
    let base = group.reduce_rep(x);
    Ok((0..res)
        .map(|j| {
            let mut p = base.clone();
            let z = p.coords[k] + j as f64 / res as f64;
            p.coords[k] = z - libm::floor(z);
            f.at(&p.coords)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberCoefficient {
    /// Estimate at twice the requested resolution.
    pub value: Complex64,
    /// |estimate(2·res) − estimate(res)|
    pub richardson: f64,
}

pub fn vertical_fourier(
    f: &LipschitzFunction,
    group: &FilteredGroup,
    x: &GroupElement<f64>,
    xi: i64,
    res: usize,
) -> Result<FiberCoefficient> {
    let coef = |r: usize| -> Result<Complex64> {
        let s = fiber_samples(f, group, x, r)?;
        let v: Complex64 = s.iter().enumerate().map(|(j, v)| v * e(-(xi as f64) * j as f64 / r as f64)).sum();
        Ok(v / r as f64)
    };
    let a = coef(res)?;
    let b = coef(2 * res)?;
    Ok(FiberCoefficient { value: b, richardson: (a - b).norm() })
}

/// (1/R³) Σ φ(z₀)φ(z₁)φ(z₂)φ(z₀ − 3z₁ + 3z₂) on the grid Z/R.
pub fn constrained_fiber_integral(phi: &[f64]) -> f64 {
    let r = phi.len();
    let mut acc = Vec::with_capacity(r);
    for z0 in 0..r {
        let mut s = 0.0;
        for z1 in 0..r {
            for z2 in 0..r {
                let z3 = (z0 + 3 * z2 + 3 * r - (3 * z1) % (3 * r)) % r;
                s += phi[z1] * phi[z2] * phi[z3];
            }
        }
        acc.push(phi[z0] * s);
    }
    crate::sum::pairwise(&acc) / (r * r * r) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    /// Σ_ξ |F̂(x,ξ)|² |F̂(x,3ξ)|² on the grid
    pub fourier_side: f64,
    /// the constrained fiber integral computed directly
    pub direct: f64,
    /// |F̂(x,0)|⁴
    pub lower_bound: f64,
    pub holds: bool,
}

/// Checks ∫_{z₀−3z₁+3z₂−z₃=0} Π F(z_j·x) = Σ_ξ |F̂(ξ)|²|F̂(3ξ)|² ≥ |F̂(0)|⁴
/// for real F at one base point.
pub fn fourier_positivity(f: &LipschitzFunction, group: &FilteredGroup, x: &GroupElement<f64>, res: usize) -> Result<PositivityReport> {
    let samples = fiber_samples(f, group, x, res)?;
    if samples.iter().any(|v| libm::fabs(v.im) > 1e-12) {
        return Err(Error::InvalidArgument("positivity check needs a real-valued F".into()));
    }
    let phi: Vec<f64> = samples.iter().map(|v| v.re).collect();
    let hat = fourier_coefficients(&samples);
    let r = res;
    let terms: Vec<f64> = (0..r).map(|k| hat[k].norm_sqr() * hat[(3 * k) % r].norm_sqr()).collect();
    let fourier_side = crate::sum::pairwise(&terms);
    let direct = constrained_fiber_integral(&phi);
    let lower_bound = hat[0].norm_sqr() * hat[0].norm_sqr();
    let tol = 1e-9 * (1.0 + fourier_side.abs());
    let holds = (direct - fourier_side).abs() <= tol && direct >= lower_bound - tol;
    Ok(PositivityReport { fourier_side, direct, lower_bound, holds })
}
