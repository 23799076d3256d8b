//! Counting-lemma residuals and equidistribution witnesses.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{e, flatten, monte_carlo, Body, LatticeCoset, LeibmanGroup, LipschitzFunction, MAX_LATTICE_POINTS};
use crate::error::{Error, Result};
use crate::nilgroup::{abelian_characters, character_along, cinf_norm, HorizontalCharacter, PolySequence};
use crate::scalar::Scalar;
use crate::sum::{map_indexed, pairwise_c};

/// (n₀ + Λ) ∩ P
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub body: Body,
    pub coset: LatticeCoset,
}

impl Region {
    pub fn new(body: Body, coset: Option<LatticeCoset>) -> Result<Self> {
        let coset = coset.unwrap_or_else(|| LatticeCoset::full(body.dim()));
        if coset.n0.len() != body.dim() {
            return Err(Error::InvalidArgument("coset and body dimensions differ".into()));
        }
        Ok(Region { body, coset })
    }

    /// [0, N]^D ∩ Z^D
    pub fn cube(d: usize, n: u64) -> Result<Self> {
        Self::new(Body::cube(d, n)?, None)
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    /// Σ f(n) over the region's points and their number, split into rows
    /// of the first coordinate for parallel, order-stable summation.
    pub fn sum<F>(&self, f: F) -> Result<(Complex64, u64)>
    where
        F: Fn(&[i64]) -> Complex64 + Sync + Send,
    {
        let d = self.dim();
        let lo: Vec<i64> = self.body.lo.iter().map(|v| libm::ceil(*v - 1e-9) as i64).collect();
        let hi: Vec<i64> = self.body.hi.iter().map(|v| libm::floor(*v + 1e-9) as i64).collect();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Ok((Complex64::new(0.0, 0.0), 0));
        }
        let total: u64 = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as u64).product();
        if total > MAX_LATTICE_POINTS {
            return Err(Error::Unsupported(format!("{total} candidate lattice points exceed the cap")));
        }
        let rows = (hi[0] - lo[0] + 1) as usize;
        let parts = map_indexed(rows, false, |r| {
            let mut n: Vec<i64> = lo.clone();
            n[0] = lo[0] + r as i64;
            let mut vals = Vec::new();
            loop {
                let x: Vec<f64> = n.iter().map(|&v| v as f64).collect();
                if self.body.contains(&x) && self.coset.contains(&n) {
                    vals.push(f(&n));
                }
                let mut j = d;
                let mut done = true;
                while j > 1 {
                    j -= 1;
                    if n[j] < hi[j] {
                        n[j] += 1;
                        done = false;
                        break;
                    }
                    n[j] = lo[j];
                }
                if done {
                    break;
                }
            }
            (pairwise_c(&vals), vals.len() as u64)
        });
        let sums: Vec<Complex64> = parts.iter().map(|p| p.0).collect();
        Ok((pairwise_c(&sums), parts.iter().map(|p| p.1).sum()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountingReport {
    /// Σ_{n ∈ (n₀+Λ)∩P} F(g^Ψ(n)Γ^t) / vol(P)
    pub empirical: Complex64,
    /// ∫ F over the coset g(0)^Δ G^Ψ, divided by [Z^D : Λ]
    pub haar: Complex64,
    pub stderr: f64,
    pub residual: f64,
    pub points: u64,
    pub volume: f64,
    pub index: u128,
}

/// Both sides of the counting lemma for a tuple function F on (G/Γ)^t.
pub fn counting_residual(
    f: &LipschitzFunction,
    seq: &PolySequence<f64>,
    lg: &LeibmanGroup,
    region: &Region,
    samples: usize,
    seed: u64,
) -> Result<CountingReport> {
    let psi = lg.psi();
    if region.dim() != psi.d() {
        return Err(Error::InvalidArgument(format!("region has dimension {}, forms need {}", region.dim(), psi.d())));
    }
    if psi.d() > 3 {
        return Err(Error::Unsupported("counting is limited to D <= 3".into()));
    }
    if seq.group() != lg.group() {
        return Err(Error::GroupMismatch("sequence and Leibman group use different groups".into()));
    }
    let g = seq.group();
    let coeffs = psi.coeffs();
    let (sum, points) = region.sum(|n| {
        let pt: Vec<f64> = coeffs
            .iter()
            .flat_map(|row| {
                let m: i64 = row.iter().zip(n).map(|(a, x)| a * x).sum();
                g.reduce_rep(&seq.eval(m)).coords
            })
            .collect();
        f.at(&pt)
    })?;
    let volume = region.body.volume();
    if volume <= 0.0 {
        return Err(Error::Empty("body has zero volume".into()));
    }
    let base = seq.eval(0);
    let (mc, stderr) = monte_carlo(samples, seed, |rng| f.at(&flatten(&lg.haar_sample(&base, rng))))?;
    let index = region.coset.index();
    let haar = mc / index as f64;
    let empirical = sum / volume;
    Ok(CountingReport {
        empirical,
        haar,
        stderr: stderr / index as f64,
        residual: (empirical - haar).norm(),
        points,
        volume,
        index,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub character: HorizontalCharacter,
    pub cinf_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquidistReport {
    /// max over the test family of |orbit average − Haar integral|
    pub discrepancy: f64,
    pub per_function: Vec<(String, f64)>,
    pub witness: Option<Witness>,
}

fn sign_normalized(chars: Vec<HorizontalCharacter>) -> Vec<HorizontalCharacter> {
    chars
        .into_iter()
        .filter(|c| c.m.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0))
        .collect()
}

/// Orbit discrepancy on [N] against characters of the horizontal torus
/// with |m|_1 ≤ 3 and the first two vertical characters; above `delta`,
/// the horizontal character η of complexity ≤ max_complexity minimizing
/// ‖η∘g‖_{C^∞[N]} is returned.
pub fn equidist_witness<S: Scalar>(
    seq: &PolySequence<S>,
    n: u64,
    delta: f64,
    max_complexity: u64,
) -> Result<EquidistReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    let g = seq.group();
    let mut family: Vec<(String, Vec<i64>, Vec<usize>)> = sign_normalized(abelian_characters(g, 3)?)
        .into_iter()
        .map(|c| (format!("e(m.x) m={:?}", c.m), c.m, c.coords))
        .collect();
    if !g.is_abelian() {
        for k in g.block(g.step()) {
            for xi in 1..=2 {
                family.push((format!("e({xi}*x{k})"), alloc::vec![xi], alloc::vec![k]));
            }
        }
    }
    let f64seq = seq.to_f64();
    let rows = map_indexed(n as usize, false, |i| {
        let x = g.reduce_rep(&f64seq.eval(i as i64 + 1));
        family
            .iter()
            .map(|(_, m, coords)| e(m.iter().zip(coords).map(|(&a, &j)| a as f64 * x.coords[j]).sum()))
            .collect::<Vec<Complex64>>()
    });
    let per_function: Vec<(String, f64)> = family
        .iter()
        .enumerate()
        .map(|(k, (label, _, _))| {
            let col: Vec<Complex64> = rows.iter().map(|r| r[k]).collect();
            (label.clone(), (pairwise_c(&col) / n as f64).norm())
        })
        .collect();
    let discrepancy = per_function.iter().map(|p| p.1).fold(0.0, f64::max);
    if discrepancy <= delta {
        return Ok(EquidistReport { discrepancy, per_function, witness: None });
    }
    let mut best: Option<Witness> = None;
    for chi in sign_normalized(abelian_characters(g, max_complexity)?) {
        let norm = cinf_norm(&character_along(seq, &chi), n)?;
        if best.as_ref().is_none_or(|b| norm < b.cinf_norm) {
            best = Some(Witness { character: chi, cinf_norm: norm });
        }
    }
    Ok(EquidistReport { discrepancy, per_function, witness: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::LinearFormSystem;
    use crate::nilgroup::{FilteredGroup, GroupElement};
    use crate::scalar::rat;
    use alloc::vec;

    #[test]
    fn constant_function_counts_points() {
        let c = FilteredGroup::circle();
        let seq = PolySequence::linear(c.clone(), GroupElement { coords: vec![0.1234] }).unwrap();
        let lg = LeibmanGroup::new(c, LinearFormSystem::arithmetic_progression(3).unwrap()).unwrap();
        let one = LipschitzFunction::constant(Complex64::new(1.0, 0.0));
        let n = 200;
        let r = counting_residual(&one, &seq, &lg, &Region::cube(2, n).unwrap(), 10, 1).unwrap();
        assert_eq!(r.points, 201 * 201);
        assert!(r.residual <= 3.0 / n as f64);
        // odd n and even d
        let coset = LatticeCoset::new(vec![1, 0], vec![vec![2, 0], vec![0, 2]]).unwrap();
        let reg = Region::new(Body::cube(2, n).unwrap(), Some(coset)).unwrap();
        let r = counting_residual(&one, &seq, &lg, &reg, 10, 1).unwrap();
        assert_eq!(r.index, 4);
        assert!(r.residual <= 3.0 / n as f64);
    }

    #[test]
    fn circle_three_ap_residuals() {
        let c = FilteredGroup::circle();
        let lg = LeibmanGroup::new(c.clone(), LinearFormSystem::arithmetic_progression(3).unwrap()).unwrap();
        // F = Π cos²(π x_j): Haar value 1/8 on the 3-AP subtorus
        let f = LipschitzFunction::new("cos2", 10.0, |x| {
            Complex64::new(x.iter().map(|v| libm::pow(libm::cos(core::f64::consts::PI * v), 2.0)).product(), 0.0)
        });
        let alpha = libm::sqrt(2.0) - 1.0;
        let seq = PolySequence::linear(c.clone(), GroupElement { coords: vec![alpha] }).unwrap();
        let r = counting_residual(&f, &seq, &lg, &Region::cube(2, 400).unwrap(), 100_000, 5).unwrap();
        assert!((r.haar.re - 0.125).abs() < 5.0 * r.stderr + 1e-3);
        assert!(r.residual <= 0.05, "{r:?}");
        // α = 1/2 would give 1/4 against 1/8; α = 0 sits on the peak
        let zero = PolySequence::linear(c, GroupElement { coords: vec![0.0] }).unwrap();
        let r = counting_residual(&f, &zero, &lg, &Region::cube(2, 400).unwrap(), 100_000, 5).unwrap();
        assert!(r.residual > 0.2);
    }

    #[test]
    fn witnesses() {
        let c = FilteredGroup::circle();
        let half = PolySequence::linear(c.clone(), GroupElement { coords: vec![rat(1, 2)] }).unwrap();
        let rep = equidist_witness(&half, 1000, 0.1, 5).unwrap();
        let w = rep.witness.unwrap();
        assert_eq!((w.character.m.clone(), w.cinf_norm), (vec![2], 0.0));
        let zero = PolySequence::constant(c.clone(), c.identity::<f64>()).unwrap();
        let w = equidist_witness(&zero, 100, 0.1, 5).unwrap().witness.unwrap();
        assert_eq!((w.character.m.clone(), w.cinf_norm), (vec![1], 0.0));
        let gold = PolySequence::linear(c, GroupElement { coords: vec![(libm::sqrt(5.0) - 1.0) / 2.0] }).unwrap();
        let rep = equidist_witness(&gold, 10_000, 0.1, 10).unwrap();
        assert!(rep.witness.is_none() && rep.discrepancy < 0.01);
    }
}
