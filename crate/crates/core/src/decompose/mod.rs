//! Energy-increment regularity: factors (partitions of the domain),
//! conditional expectations, oracle-driven refinement and the
//! f = f_nil + f_sml + f_unf decomposition.

mod oracle;

pub use oracle::*;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::funcspace::{l2_norm, SampledFunction};
use crate::gowers::gowers_norm;
use crate::sum::{pairwise, pairwise_c};

/// A partition of the domain indices into nonempty cells 0..m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    cells: Vec<u32>,
    count: usize,
    /// Oracle outputs whose level sets generate the factor.
    pub generators: Vec<String>,
}

impl Factor {
    pub fn trivial(n: usize) -> Self {
        Factor { cells: vec![0; n], count: (n > 0) as usize, generators: Vec::new() }
    }

    pub fn singletons(n: usize) -> Self {
        Factor { cells: (0..n as u32).collect(), count: n, generators: Vec::new() }
    }

    /// Arbitrary labels, renumbered by first appearance.
    pub fn from_labels<T: Ord + Clone>(labels: &[T]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("a factor needs at least one point".into()));
        }
        let mut map = alloc::collections::BTreeMap::new();
        let cells = labels
            .iter()
            .map(|l| {
                let next = map.len() as u32;
                *map.entry(l.clone()).or_insert(next)
            })
            .collect();
        Ok(Factor { cells, count: map.len(), generators: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn complexity(&self) -> usize {
        self.count
    }

    pub fn cell_of(&self, i: usize) -> u32 {
        self.cells[i]
    }

    /// Common refinement B ∨ (labels).
    pub fn refine_by(&self, labels: &[u64]) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::DomainMismatch("labels and factor have different lengths".into()));
        }
        let pairs: Vec<(u32, u64)> = self.cells.iter().copied().zip(labels.iter().copied()).collect();
        let mut f = Self::from_labels(&pairs)?;
        f.generators = self.generators.clone();
        Ok(f)
    }

    /// Every cell of `self` lies inside a cell of `coarser`.
    pub fn refines(&self, coarser: &Factor) -> bool {
        let mut parent = vec![u32::MAX; self.count];
        self.cells.iter().zip(&coarser.cells).all(|(&a, &b)| {
            if parent[a as usize] == u32::MAX {
                parent[a as usize] = b;
            }
            parent[a as usize] == b
        })
    }
}

/// E(f|B): cell means.
pub fn conditional_expectation(f: &SampledFunction, b: &Factor) -> Result<SampledFunction> {
    if b.len() != f.len() {
        return Err(Error::DomainMismatch(format!("factor covers {} points, function has {}", b.len(), f.len())));
    }
    let mut members: Vec<Vec<Complex64>> = vec![Vec::new(); b.complexity()];
    for (v, &c) in f.values().iter().zip(&b.cells) {
        members[c as usize].push(*v);
    }
    let means: Vec<Complex64> = members.iter().map(|m| pairwise_c(m) / m.len() as f64).collect();
    SampledFunction::with_bound(f.domain(), b.cells.iter().map(|&c| means[c as usize]).collect(), f.bound())
}

/// ‖E(f|B)‖²_{L²}
pub fn energy(f: &SampledFunction, b: &Factor) -> Result<f64> {
    let e = conditional_expectation(f, b)?;
    Ok({ let l = l2_norm(&e); l * l })
}

fn difference(f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    SampledFunction::with_auto_bound(f.domain(), f.values().iter().zip(g.values()).map(|(a, b)| a - b).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub oracle_label: String,
    pub correlation: f64,
    pub claimed: f64,
    /// Number of arcs the phase was cut into; 0 for exact level sets.
    pub arcs: usize,
    pub increment: f64,
    pub cells: usize,
}

/// One increment step: refine B by level sets of the oracle's phase for
/// g = f − E(f|B), cut into K arcs at a random offset (5 tries per K,
/// K doubling from ceil(2π/δ), where rounding the phase moves the oracle
/// character by at most δ) until the energy grows by (corr/2)².
/// Exact level sets of the phase are the fallback and always succeed.
pub fn energy_increment_step<O: CorrelationOracle + ?Sized, R: Rng>(
    f: &SampledFunction,
    b: &Factor,
    s: usize,
    delta: f64,
    oracle: &O,
    rng: &mut R,
) -> Result<(Factor, StepRecord)> {
    if oracle.degree() != s {
        return Err(Error::InvalidArgument(format!("oracle inverts degree {}, not {s}", oracle.degree())));
    }
    let base = conditional_expectation(f, b)?;
    let g = difference(f, &base)?;
    let Some(psi) = oracle.find(&g, delta)? else {
        return Err(Error::Contract(format!("{} returned no structured function", oracle.name())));
    };
    if psi.correlation + 1e-12 < psi.claimed {
        return Err(Error::Contract(format!(
            "{}: correlation {} below its claim {}",
            oracle.name(),
            psi.correlation,
            psi.claimed
        )));
    }
    let e0 = { let l = l2_norm(&base); l * l };
    let target = psi.correlation * psi.correlation / 4.0;
    let n = f.len();
    let attempt = |labels: &[u64], arcs: usize| -> Result<(Factor, StepRecord)> {
        let mut nb = b.refine_by(labels)?;
        nb.generators.push(psi.label.clone());
        let inc = energy(f, &nb)? - e0;
        let rec = StepRecord {
            oracle_label: psi.label.clone(),
            correlation: psi.correlation,
            claimed: psi.claimed,
            arcs,
            increment: inc,
            cells: nb.complexity(),
        };
        Ok((nb, rec))
    };
    let mut k = (libm::ceil(2.0 * core::f64::consts::PI / delta.max(1e-300)).min(1e18) as usize).clamp(2, n.max(2));
    loop {
        for _ in 0..5 {
            let offset: f64 = rng.random();
            let labels: Vec<u64> = psi
                .phase
                .iter()
                .map(|p| {
                    let x = p - offset / k as f64;
                    ((x - libm::floor(x)) * k as f64) as u64
                })
                .collect();
            let (nb, rec) = attempt(&labels, k)?;
            if rec.increment >= target {
                return Ok((nb, rec));
            }
        }
        if k >= n {
            break;
        }
        k = (2 * k).min(n);
    }
    let labels: Vec<u64> = psi.phase.iter().map(|p| p.to_bits()).collect();
    let (nb, rec) = attempt(&labels, 0)?;
    if rec.increment + 1e-12 < target {
        return Err(Error::Numerical(format!("level-set refinement gained only {}", rec.increment)));
    }
    Ok((nb, rec))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakOutcome {
    pub factor: Factor,
    pub steps: Vec<StepRecord>,
    /// ‖f − E(f|B)‖_{U^{s+1}} at exit.
    pub residual_norm: f64,
}

/// Refine b0 until ‖f − E(f|B)‖_{U^{s+1}} ≤ eps. Fails with Error::Contract
/// when the cell cap would be exceeded or the oracle breaks its promise.
pub fn weak_regularize<O: CorrelationOracle + ?Sized, R: Rng>(
    f: &SampledFunction,
    s: usize,
    eps: f64,
    oracle: &O,
    b0: Option<&Factor>,
    cap: usize,
    rng: &mut R,
) -> Result<WeakOutcome> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    f.require_bounded(1.0)?;
    let mut b = b0.cloned().unwrap_or_else(|| Factor::trivial(f.len()));
    let mut steps = Vec::new();
    loop {
        let g = difference(f, &conditional_expectation(f, &b)?)?;
        let u = if g.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
            0.0
        } else {
            gowers_norm(&g, s as u32 + 1)?.norm
        };
        if u <= eps {
            return Ok(WeakOutcome { factor: b, steps, residual_norm: u });
        }
        if b.complexity() >= f.len() {
            return Err(Error::Numerical(format!("singleton factor still leaves U^{} norm {u}", s + 1)));
        }
        let (nb, rec) = energy_increment_step(f, &b, s, eps, oracle, rng)?;
        steps.push(rec);
        if nb.complexity() > cap {
            return Err(Error::Contract(format!("factor complexity {} exceeds the cap {cap}", nb.complexity())));
        }
        b = nb;
    }
}

/// Named growth functions, saturating at 1e300.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    /// 10 M
    Linear,
    /// 10^M
    Exponential,
    /// 10↑↑M
    Tower,
}

pub const GROWTH_CEILING: f64 = 1e300;

impl Growth {
    pub fn apply(self, m: f64) -> f64 {
        let v = match self {
            Growth::Linear => 10.0 * m,
            Growth::Exponential => libm::pow(10.0, m),
            Growth::Tower => {
                let mut v: f64 = 1.0;
                let mut k = 0.0;
                while k < m && v < GROWTH_CEILING {
                    v = libm::pow(10.0, v);
                    k += 1.0;
                }
                v
            }
        };
        if v.is_finite() { v.min(GROWTH_CEILING) } else { GROWTH_CEILING }.max(m)
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(Growth::Linear),
            "exp" | "exponential" => Ok(Growth::Exponential),
            "tower" => Ok(Growth::Tower),
            other => Err(Error::UnknownIdentifier(other.into())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Growth::Linear => "linear",
            Growth::Exponential => "exp",
            Growth::Tower => "tower",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizeOptions {
    pub growth: Growth,
    /// Largest admissible number of cells.
    pub cap: usize,
    pub seed: u64,
}

impl Default for RegularizeOptions {
    fn default() -> Self {
        RegularizeOptions { growth: Growth::Exponential, cap: 10_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub m: f64,
    pub tolerance: f64,
    pub cells: usize,
    pub energy: f64,
    pub increment: f64,
    pub residual_norm: f64,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificates {
    /// max_n |f − f_nil − f_sml − f_unf|
    pub additivity_error: f64,
    pub nil_in_unit_interval: bool,
    pub nil_plus_sml_in_unit_interval: bool,
    pub sml_within_budget: bool,
    pub unf_within_budget: bool,
}

impl Certificates {
    pub fn all(&self) -> bool {
        self.additivity_error <= 1e-12
            && self.nil_in_unit_interval
            && self.nil_plus_sml_in_unit_interval
            && self.sml_within_budget
            && self.unf_within_budget
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub f_nil: SampledFunction,
    pub f_sml: SampledFunction,
    pub f_unf: SampledFunction,
    /// The selected M_i.
    pub m: f64,
    pub grow_m: f64,
    /// Cells of the factor behind f_nil.
    pub complexity: usize,
    pub l2_sml: f64,
    pub uk_unf: f64,
    pub eps: f64,
    pub s: usize,
    pub certificates: Certificates,
    pub rounds: Vec<RoundRecord>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecomposeError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("factor complexity exceeded the cap {cap}")]
    BudgetOverflow { partial: Box<DecompositionResult>, cap: usize },
}

fn in_unit(f: &SampledFunction) -> bool {
    f.values().iter().all(|v| v.re >= -1e-12 && v.re <= 1.0 + 1e-12 && v.im.abs() <= 1e-12)
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    f: &SampledFunction,
    bi: &Factor,
    bnext: &Factor,
    m: f64,
    grow_m: f64,
    eps: f64,
    s: usize,
    rounds: Vec<RoundRecord>,
) -> Result<DecompositionResult> {
    let f_nil = conditional_expectation(f, bi)?;
    let top = conditional_expectation(f, bnext)?;
    let f_sml = difference(&top, &f_nil)?;
    let f_unf = difference(f, &top)?;
    let additivity_error = (0..f.len())
        .map(|i| (f.values()[i] - f_nil.values()[i] - f_sml.values()[i] - f_unf.values()[i]).norm())
        .fold(0.0, f64::max);
    let l2_sml = l2_norm(&f_sml);
    let uk_unf = if f_unf.values().iter().all(|v| v.norm() == 0.0) { 0.0 } else { gowers_norm(&f_unf, s as u32 + 1)?.norm };
    let sum = SampledFunction::with_auto_bound(
        f.domain(),
        f_nil.values().iter().zip(f_sml.values()).map(|(a, b)| a + b).collect(),
    )?;
    let certificates = Certificates {
        additivity_error,
        nil_in_unit_interval: in_unit(&f_nil),
        nil_plus_sml_in_unit_interval: in_unit(&sum),
        sml_within_budget: l2_sml <= eps,
        unf_within_budget: uk_unf <= 1.0 / grow_m,
    };
    Ok(DecompositionResult {
        f_nil,
        f_sml,
        f_unf,
        m,
        grow_m,
        complexity: bi.complexity(),
        l2_sml,
        uk_unf,
        eps,
        s,
        certificates,
        rounds,
    })
}

/// f = f_nil + f_sml + f_unf with f_nil = E(f|B_i), f_sml = E(f|B_{i+1}) − f_nil
/// and f_unf = f − E(f|B_{i+1}), where B_{i+1} weakly regularizes f to
/// 1/Grow(M_i) and i is the first round whose energy gain is ≤ eps²/4.
pub fn regularize<O: CorrelationOracle + ?Sized>(
    f: &SampledFunction,
    s: usize,
    eps: f64,
    oracle: &O,
    opts: &RegularizeOptions,
) -> core::result::Result<DecompositionResult, DecomposeError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument("eps must lie in (0, 1]".into()).into());
    }
    if !in_unit(f) {
        return Err(Error::InvalidArgument("regularize expects values in [0, 1]".into()).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let max_rounds = libm::ceil(4.0 / (eps * eps)) as usize;
    let mut m = 1.0;
    let mut b = Factor::trivial(f.len());
    let mut e_prev = energy(f, &b)?;
    let mut rounds = Vec::new();
    for _ in 0..max_rounds.max(1) {
        let grow = opts.growth.apply(m);
        let tol = 1.0 / grow;
        let weak = match weak_regularize(f, s, tol, oracle, Some(&b), opts.cap, &mut rng) {
            Ok(w) => w,
            Err(Error::Contract(msg)) if msg.contains("exceeds the cap") => {
                let partial = assemble(f, &b, &b, m, grow, eps, s, rounds)?;
                return Err(DecomposeError::BudgetOverflow { partial: Box::new(partial), cap: opts.cap });
            }
            Err(e) => return Err(e.into()),
        };
        let e_next = energy(f, &weak.factor)?;
        let increment = e_next - e_prev;
        rounds.push(RoundRecord {
            m,
            tolerance: tol,
            cells: weak.factor.complexity(),
            energy: e_next,
            increment,
            residual_norm: weak.residual_norm,
            steps: weak.steps,
        });
        if increment <= eps * eps / 4.0 {
            return Ok(assemble(f, &b, &weak.factor, m, grow, eps, s, rounds)?);
        }
        b = weak.factor;
        e_prev = e_next;
        m = grow;
    }
    Err(Error::Contract(format!("no pigeonhole round within {max_rounds} rounds")).into())
}

/// Energies are nondecreasing along a refinement chain: E(B′) − E(B) =
/// ‖E(f|B′) − E(f|B)‖².
pub fn pythagoras_gap(f: &SampledFunction, coarse: &Factor, fine: &Factor) -> Result<f64> {
    let a = conditional_expectation(f, coarse)?;
    let b = conditional_expectation(f, fine)?;
    let d: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm_sqr()).collect();
    let lhs = energy(f, fine)? - energy(f, coarse)?;
    Ok((lhs - pairwise(&d) / d.len() as f64).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{eval_expr, parse_expr, DomainSpec};

    fn f(src: &str, d: DomainSpec) -> SampledFunction {
        eval_expr(&parse_expr(src).unwrap(), d).unwrap()
    }

    #[test]
    fn expectations_and_energy() {
        let g = f("random(unif, 2)", DomainSpec::Interval(50));
        let t = Factor::trivial(50);
        let mean = g.values().iter().sum::<Complex64>() / 50.0;
        assert!((energy(&g, &t).unwrap() - mean.norm_sqr()).abs() < 1e-12);
        let s = Factor::singletons(50);
        assert_eq!(conditional_expectation(&g, &s).unwrap().values(), g.values());
        let halves = Factor::from_labels(&(0..50).map(|i| i / 25).collect::<Vec<_>>()).unwrap();
        let quarters = halves.refine_by(&(0..50).map(|i| (i % 2) as u64).collect::<Vec<_>>()).unwrap();
        assert!(quarters.refines(&halves) && !halves.refines(&quarters));
        assert!(energy(&g, &quarters).unwrap() >= energy(&g, &halves).unwrap());
        assert!(pythagoras_gap(&g, &halves, &quarters).unwrap() < 1e-12);
        assert!(conditional_expectation(&g, &Factor::trivial(10)).is_err());
    }

    #[test]
    fn step_captures_a_bohr_set() {
        let g = f("indicator(bohr(0.3819660112501051; 0.2))", DomainSpec::Interval(400));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (b, rec) = energy_increment_step(&g, &Factor::trivial(400), 1, 0.2, &FourierOracle, &mut rng).unwrap();
        assert!(rec.increment >= (rec.correlation / 2.0).powi(2));
        assert!(b.complexity() >= 2);
    }

    #[test]
    fn weak_regularity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = f("1/3", DomainSpec::Interval(100));
        let w = weak_regularize(&c, 1, 0.1, &FourierOracle, None, 1000, &mut rng).unwrap();
        assert_eq!(w.factor.complexity(), 1);
        let phase = f("1/2 + 1/2*e(5/64*n)", DomainSpec::Cyclic(64));
        let re = SampledFunction::from_real(phase.domain(), &phase.values().iter().map(|v| v.re).collect::<Vec<_>>()).unwrap();
        let w = weak_regularize(&re, 1, 0.1, &FourierOracle, None, 1000, &mut rng).unwrap();
        assert!(w.residual_norm <= 0.1 && w.factor.complexity() <= 64);
        let noise = f("1/2 + 1/2*random(pm1, 9)", DomainSpec::Cyclic(256));
        let w = weak_regularize(&noise, 1, 0.3, &FourierOracle, None, 1000, &mut rng).unwrap();
        assert!(w.factor.complexity() <= 4, "{}", w.factor.complexity());
    }

    #[test]
    fn growth_presets() {
        assert_eq!(Growth::Linear.apply(3.0), 30.0);
        assert_eq!(Growth::Exponential.apply(2.0), 100.0);
        assert_eq!(Growth::Tower.apply(2.0), 1e10);
        assert_eq!(Growth::Tower.apply(3.0), GROWTH_CEILING);
        assert_eq!(Growth::Exponential.apply(1e5), GROWTH_CEILING);
    }

    #[test]
    fn constant_input_decomposes_trivially() {
        let c = f("0.4", DomainSpec::Interval(64));
        let r = regularize(&c, 1, 0.1, &FourierOracle, &RegularizeOptions::default()).unwrap();
        assert!(r.f_nil.values().iter().all(|v| (v.re - 0.4).abs() < 1e-15));
        assert!(r.f_sml.values().iter().all(|v| v.norm() < 1e-15));
        assert!(r.f_unf.values().iter().all(|v| v.norm() < 1e-15));
        assert!(r.certificates.all());
    }

    #[test]
    fn cap_overflow_returns_partial_result() {
        let g = f("indicator(bohr(0.3819660112501051; 0.2))", DomainSpec::Interval(300));
        let opts = RegularizeOptions { cap: 1, ..Default::default() };
        match regularize(&g, 1, 0.1, &FourierOracle, &opts) {
            Err(DecomposeError::BudgetOverflow { partial, cap }) => {
                assert_eq!(cap, 1);
                assert!(partial.certificates.additivity_error <= 1e-12);
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }
}
