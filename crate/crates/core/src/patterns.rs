//! Multilinear pattern averages, per-difference progression profiles,
//! generalized von Neumann checks and the Bergelson–Host–Kra pipeline on
//! synthetic sets.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forms::{cs_complexity, top_power_independence, LinearFormSystem};
use crate::funcspace::{DomainSpec, SampledFunction};
use crate::gowers::gowers_norm;
use crate::nilgroup::{FilteredGroup, GroupElement, PolySequence};
use crate::orbits::{e, fourier_positivity, LipschitzFunction, PositivityReport};
use crate::sum::{map_indexed, pairwise, pairwise_c};

/// Enumeration cap for multilinear averages.
pub const MAX_AVERAGE_POINTS: u128 = 1 << 31;

/// Where the variables of Λ_Ψ range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AverageDomain {
    /// n ∈ (Z/NZ)^D, forms reduced mod N.
    Cyclic,
    /// n in a box of inclusive ranges, functions zero outside [N].
    Interval { ranges: Vec<(i64, i64)> },
}

impl AverageDomain {
    /// [N]^D
    pub fn interval_box(d: usize, n: usize) -> Self {
        AverageDomain::Interval { ranges: vec![(1, n as i64); d] }
    }

    /// n ∈ [N], d ∈ [−N, N]: the progression convention.
    pub fn progression(n: usize) -> Self {
        let n = n as i64;
        AverageDomain::Interval { ranges: vec![(1, n), (-n, n)] }
    }
}

fn check_inputs(fs: &[SampledFunction], psi: &LinearFormSystem) -> Result<DomainSpec> {
    if fs.len() != psi.t() {
        return Err(Error::InvalidArgument(format!("{} functions for {} forms", fs.len(), psi.t())));
    }
    if psi.d() > 3 {
        return Err(Error::InvalidArgument("at most D = 3 variables are enumerated".into()));
    }
    let dom = fs[0].domain();
    if let Some(f) = fs.iter().find(|f| f.domain() != dom) {
        return Err(Error::DomainMismatch(format!("{:?} vs {:?}", dom, f.domain())));
    }
    Ok(dom)
}

/// Λ_Ψ(f_1,…,f_t) = E_n Π_i f_i(ψ_i(n)) by exact enumeration.
pub fn multilinear_average(fs: &[SampledFunction], psi: &LinearFormSystem, domain: &AverageDomain) -> Result<Complex64> {
    let dom = check_inputs(fs, psi)?;
    let d = psi.d();
    let ranges: Vec<(i64, i64)> = match domain {
        AverageDomain::Cyclic => {
            let DomainSpec::Cyclic(n) = dom else {
                return Err(Error::DomainMismatch("cyclic averages need cyclic functions".into()));
            };
            vec![(0, n as i64 - 1); d]
        }
        AverageDomain::Interval { ranges } => {
            if !matches!(dom, DomainSpec::Interval(_)) {
                return Err(Error::DomainMismatch("interval averages need interval functions".into()));
            }
            if ranges.len() != d {
                return Err(Error::InvalidArgument(format!("{} ranges for D = {d}", ranges.len())));
            }
            if ranges.iter().any(|r| r.0 > r.1) {
                return Err(Error::Empty("an index range is empty".into()));
            }
            ranges.clone()
        }
    };
    let total: u128 = ranges.iter().map(|r| (r.1 - r.0 + 1) as u128).product();
    if total > MAX_AVERAGE_POINTS {
        return Err(Error::InvalidArgument(format!("{total} points exceed the enumeration cap")));
    }
    let coeffs = psi.coeffs();
    let (first, rest) = ranges.split_first().unwrap();
    let rows = map_indexed((first.1 - first.0 + 1) as usize, false, |i| {
        let mut n = vec![0i64; d];
        n[0] = first.0 + i as i64;
        let mut terms = Vec::new();
        let mut idx: Vec<i64> = rest.iter().map(|r| r.0).collect();
        'outer: loop {
            n[1..].copy_from_slice(&idx);
            let mut prod = Complex64::new(1.0, 0.0);
            for (f, c) in fs.iter().zip(coeffs) {
                let x: i64 = c.iter().zip(&n).map(|(a, b)| a * b).sum();
                prod *= f.at(x);
                if prod.re == 0.0 && prod.im == 0.0 {
                    break;
                }
            }
            terms.push(prod);
            for j in (0..idx.len()).rev() {
                if idx[j] < rest[j].1 {
                    idx[j] += 1;
                    continue 'outer;
                }
                idx[j] = rest[j].0;
            }
            break;
        }
        pairwise_c(&terms)
    });
    Ok(pairwise_c(&rows) / total as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternReport {
    pub system: LinearFormSystem,
    pub value: Complex64,
    pub per_difference: Option<ApProfile>,
    /// min_i ‖f_i‖_{U^k} with k = s + 1.
    pub min_gowers: f64,
    pub k: u32,
    /// Π_i sup |f_i|
    pub sup_product: f64,
}

/// Λ_Ψ together with the Gowers side and, for progressions of 0/1 input,
/// the per-difference profile.
pub fn pattern_report(fs: &[SampledFunction], psi: &LinearFormSystem, domain: &AverageDomain) -> Result<PatternReport> {
    let value = multilinear_average(fs, psi, domain)?;
    let s = cs_complexity(psi)?;
    let k = s as u32 + 1;
    let mut min_gowers = f64::INFINITY;
    for f in fs {
        min_gowers = min_gowers.min(gowers_norm(f, k)?.norm);
    }
    let sup_product = fs.iter().map(|f| f.sup_norm()).product();
    let is_ap = *psi == LinearFormSystem::arithmetic_progression(psi.t())?;
    let same = fs.windows(2).all(|w| w[0] == w[1]);
    let per_difference = if is_ap && same && fs[0].is_indicator() { Some(ap_profile(&fs[0], psi.t())?) } else { None };
    Ok(PatternReport { system: psi.clone(), value, per_difference, min_gowers, k, sup_product })
}

/// Exact per-difference counts #{n : n, n+d, …, n+(k−1)d ∈ A}.
#[derive(Debug, Clone, PartialEq)]
pub struct ApProfile {
    pub domain: DomainSpec,
    pub k: usize,
    /// Smallest difference; counts[j] belongs to d = d_min + j.
    pub d_min: i64,
    pub counts: Vec<u64>,
}

impl ApProfile {
    pub fn differences(&self) -> core::ops::RangeInclusive<i64> {
        self.d_min..=self.d_min + self.counts.len() as i64 - 1
    }

    pub fn count(&self, d: i64) -> Option<u64> {
        usize::try_from(d - self.d_min).ok().and_then(|j| self.counts.get(j).copied())
    }

    /// E_n Π_i 1_A(n+id), normalized by N.
    pub fn value(&self, d: i64) -> Option<f64> {
        self.count(d).map(|c| c as f64 / self.domain.size() as f64)
    }

    /// (1/#d) Σ_d value(d), which is Λ_k(1_A,…,1_A).
    pub fn average(&self) -> f64 {
        let v: Vec<f64> = self.counts.iter().map(|&c| c as f64).collect();
        pairwise(&v) / (self.counts.len() as f64 * self.domain.size() as f64)
    }
}

/// Per-difference progression counts over d ∈ [−N, N] on [N] (truncated)
/// or d ∈ [0, N) on Z/NZ (wrapped).
pub fn ap_profile(a: &SampledFunction, k: usize) -> Result<ApProfile> {
    if !(1..=5).contains(&k) {
        return Err(Error::InvalidArgument("progression length must be in 1..=5".into()));
    }
    if !a.is_indicator() {
        return Err(Error::InvalidArgument("ap_profile expects a 0/1-valued function".into()));
    }
    let n = a.len();
    let bits: Vec<bool> = a.values().iter().map(|v| v.re == 1.0).collect();
    let (d_min, len) = match a.domain() {
        DomainSpec::Interval(_) => (-(n as i64), 2 * n + 1),
        DomainSpec::Cyclic(_) => (0, n),
    };
    let cyclic = a.domain().is_cyclic();
    let counts = map_indexed(len, false, |j| {
        let d = d_min + j as i64;
        let mut c = 0u64;
        for x in 0..n as i64 {
            let ok = (1..k as i64).all(|i| {
                let y = x + i * d;
                if cyclic {
                    bits[y.rem_euclid(n as i64) as usize]
                } else {
                    y >= 0 && y < n as i64 && bits[y as usize]
                }
            });
            c += (bits[x as usize] && ok) as u64;
        }
        c
    });
    Ok(ApProfile { domain: a.domain(), k, d_min, counts })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GvnReport {
    pub lhs: f64,
    pub rhs: f64,
    /// Cauchy–Schwarz complexity; the right side uses U^{s+1}.
    pub s: usize,
    /// lhs / rhs (infinite when rhs = 0 < lhs).
    pub ratio: f64,
    /// True on the cyclic progression path, where lhs ≤ rhs + 1e-6 is asserted.
    pub asserted: bool,
    /// lhs ≤ rhs + 1e-6 when asserted; always true otherwise.
    pub pass: bool,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// |Λ_Ψ| against min_i ‖f_i‖_{U^{s+1}}.
pub fn gvn_check(fs: &[SampledFunction], psi: &LinearFormSystem, domain: &AverageDomain) -> Result<GvnReport> {
    for f in fs {
        f.require_bounded(1.0)?;
    }
    let r = pattern_report(fs, psi, domain)?;
    let lhs = r.value.norm();
    let rhs = r.min_gowers;
    let is_ap = *psi == LinearFormSystem::arithmetic_progression(psi.t())?;
    let asserted = is_ap && *domain == AverageDomain::Cyclic;
    let pass = !asserted || lhs <= rhs + 1e-6;
    Ok(GvnReport { lhs, rhs, s: r.k as usize - 1, ratio: ratio(lhs, rhs), asserted, pass })
}

/// The weight F(g(d)Γ) of a twisted average, sampled on d ∈ [−N, N].
#[derive(Debug, Clone, PartialEq)]
pub enum TwistWeight {
    One,
    /// e(θd)
    Character(f64),
    /// values[j] at d = j − N
    Sampled(Vec<Complex64>),
}

impl TwistWeight {
    /// F(g(d)Γ) along a polynomial orbit.
    pub fn along_orbit(f: &LipschitzFunction, seq: &PolySequence<f64>, n: usize) -> Self {
        let g = seq.group();
        let n = n as i64;
        TwistWeight::Sampled((-n..=n).map(|d| f.at(&g.reduce_rep(&seq.eval(d)).coords)).collect())
    }

    fn at(&self, d: i64, n: i64) -> Complex64 {
        match self {
            TwistWeight::One => Complex64::new(1.0, 0.0),
            TwistWeight::Character(t) => e(t * d as f64),
            TwistWeight::Sampled(v) => v[(d + n) as usize],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwistedReport {
    pub lhs: f64,
    /// min_i ‖f_i‖_{U^{k−1}[N]}
    pub rhs: f64,
    pub ratio: f64,
    /// For a character weight: the largest change of a U^{k−1} norm under
    /// the modulation that absorbs the weight, and the gap between the
    /// twisted average and the untwisted average of the modulated tuple.
    pub invariance_error: Option<f64>,
    pub absorption_error: Option<f64>,
}

fn twisted_sum(fs: &[SampledFunction], c: &[i64], w: &TwistWeight) -> Complex64 {
    let n = fs[0].len() as i64;
    let rows = map_indexed(n as usize, false, |i| {
        let x = i as i64 + 1;
        let terms: Vec<Complex64> = (-n..=n)
            .map(|d| {
                let p: Complex64 = fs.iter().zip(c).map(|(f, &ci)| f.at(x + ci * d)).product();
                p * w.at(d, n)
            })
            .collect();
        pairwise_c(&terms)
    });
    pairwise_c(&rows) / (n * (2 * n + 1)) as f64
}

/// |E_{n∈[N], d∈[−N,N]} F(g(d)Γ) Π_i f_i(n + c_i d)| against
/// min_i ‖f_i‖_{U^{k−1}[N]}; the ratio is recorded, not bounded.
pub fn twisted_gvn_check(fs: &[SampledFunction], c: &[i64], weight: &TwistWeight) -> Result<TwistedReport> {
    let k = fs.len();
    if !(3..=4).contains(&k) || c.len() != k {
        return Err(Error::InvalidArgument("twisted checks take k ∈ {3, 4} functions and k shifts".into()));
    }
    let mut sorted = c.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("shifts c_i must be distinct".into()));
    }
    let DomainSpec::Interval(n) = fs[0].domain() else {
        return Err(Error::DomainMismatch("twisted averages live on [N]".into()));
    };
    if fs.iter().any(|f| f.domain() != fs[0].domain()) {
        return Err(Error::DomainMismatch("all functions must share [N]".into()));
    }
    for f in fs {
        f.require_bounded(1.0)?;
    }
    if let TwistWeight::Sampled(v) = weight {
        if v.len() != 2 * n + 1 {
            return Err(Error::InvalidArgument(format!("weight needs {} samples", 2 * n + 1)));
        }
    }
    let order = k as u32 - 1;
    let norms: Vec<f64> = fs.iter().map(|f| gowers_norm(f, order).map(|r| r.norm)).collect::<Result<_>>()?;
    let rhs = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let value = twisted_sum(fs, c, weight);
    let lhs = value.norm();
    let (mut invariance_error, mut absorption_error) = (None, None);
    if let TwistWeight::Character(theta) = *weight {
        // e(θd) = e(θ'(n + c_1 d)) e(−θ'(n + c_0 d)) with θ' = θ/(c_1 − c_0)
        let t = theta / (c[1] - c[0]) as f64;
        let mut g = fs.to_vec();
        let dom = fs[0].domain();
        g[0] = SampledFunction::with_auto_bound(
            dom,
            (0..n).map(|i| fs[0].values()[i] * e(-t * dom.point(i) as f64)).collect(),
        )?;
        g[1] = SampledFunction::with_auto_bound(
            dom,
            (0..n).map(|i| fs[1].values()[i] * e(t * dom.point(i) as f64)).collect(),
        )?;
        let plain = twisted_sum(&g, c, &TwistWeight::One);
        absorption_error = Some((plain - value).norm());
        let mut worst: f64 = 0.0;
        for j in 0..2 {
            worst = worst.max((gowers_norm(&g[j], order)?.norm - norms[j]).abs());
        }
        invariance_error = Some(worst);
    }
    Ok(TwistedReport { lhs, rhs, ratio: ratio(lhs, rhs), invariance_error, absorption_error })
}

/// Which Bergelson–Host–Kra weight to build.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// Bohr set of the frequency vector θ.
    K3Bohr { theta: Vec<f64> },
    /// Horizontal projection π(g_1)^d of a Heisenberg sequence.
    K4Nil { g1: GroupElement<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BhkWeight {
    pub n: usize,
    pub eps_prime: f64,
    /// Restrict to q | d (q = 1: no restriction).
    pub q: u64,
    /// μ(d) at d = j − N.
    pub values: Vec<f64>,
    pub c: f64,
    /// E_{d∈[−N,N]} μ(d)
    pub mean: f64,
    pub sup: f64,
    /// Fraction of d ∈ [−N, N] with μ(d) > 0.
    pub support_density: f64,
    /// |mean − 1| ≤ 0.1
    pub normalized: bool,
}

impl BhkWeight {
    pub fn at(&self, d: i64) -> f64 {
        self.values.get((d + self.n as i64) as usize).copied().unwrap_or(0.0)
    }
}

/// ψ(x) = clamp(2 − 2 dist_∞(x, 0)/ε′, 0, 1): 1 on the half-radius ball,
/// 0 outside the ε′ ball, with ∫ψ = ε′^m (2^{m+1} − 1)/(m + 1).
pub fn tent(x: &[f64], eps_prime: f64) -> f64 {
    let r = x.iter().map(|&v| crate::scalar::dist_to_z_f64(v)).fold(0.0, f64::max);
    (2.0 - 2.0 * r / eps_prime).clamp(0.0, 1.0)
}

pub fn tent_integral(m: usize, eps_prime: f64) -> f64 {
    libm::pow(eps_prime, m as f64) * ((1u64 << (m + 1)) - 1) as f64 / (m + 1) as f64
}

/// μ(d) = c 1_{|d| ≤ ε′N} 1_{q|d} ψ(θd), with c chosen so that E_d μ = 1
/// when θd equidistributes.
pub fn bhk_weight(kind: &WeightKind, n: usize, eps_prime: f64, q: u64) -> Result<BhkWeight> {
    if !(eps_prime > 0.0 && eps_prime <= 1.0) || n == 0 || q == 0 {
        return Err(Error::InvalidArgument("need N >= 1, q >= 1 and ε′ in (0, 1]".into()));
    }
    let theta: Vec<f64> = match kind {
        WeightKind::K3Bohr { theta } => theta.clone(),
        WeightKind::K4Nil { g1 } => {
            let h = FilteredGroup::heisenberg();
            if g1.coords.len() != h.dim() {
                return Err(Error::GroupMismatch("the nil weight expects a Heisenberg element".into()));
            }
            h.block(1).map(|j| g1.coords[j]).collect()
        }
    };
    let m = theta.len();
    let half = libm::floor(eps_prime * n as f64) as i64;
    let ni = n as i64;
    let window = (-half..=half).filter(|d| d.rem_euclid(q as i64) == 0).count();
    let fraction = window as f64 / (2 * n + 1) as f64;
    let c = 1.0 / (fraction * tent_integral(m, eps_prime));
    let values: Vec<f64> = (-ni..=ni)
        .map(|d| {
            if d.abs() > half || d.rem_euclid(q as i64) != 0 {
                return 0.0;
            }
            let x: Vec<f64> = theta.iter().map(|t| t * d as f64).collect();
            c * tent(&x, eps_prime)
        })
        .collect();
    let support = values.iter().enumerate().filter(|&(j, v)| *v > 0.0 && j as i64 != ni).count();
    if support == 0 {
        return Err(Error::Empty("the Bohr set has no nonzero difference; N is too small".into()));
    }
    let mean = pairwise(&values) / values.len() as f64;
    let sup = values.iter().copied().fold(0.0, f64::max);
    let support_density = values.iter().filter(|v| **v > 0.0).count() as f64 / values.len() as f64;
    Ok(BhkWeight { n, eps_prime, q, values, c, mean, sup, support_density, normalized: (mean - 1.0).abs() <= 0.1 })
}

/// Synthetic sets with known structure.
#[derive(Debug, Clone, PartialEq)]
pub enum Construction {
    /// A = [N]
    Full,
    /// A = {n : ‖αn‖ ≤ δ}
    Bohr { alpha: f64, delta: f64 },
    /// A = {n : F(g_1^n Γ) ≥ level} on the Heisenberg nilmanifold with
    /// g_1 = (√2−1, √3−1, 0) and F = ½ + ½ sin²(πb) cos(2πc).
    HeisenbergLevel { level: f64 },
}

impl Construction {
    pub fn heisenberg_g1() -> GroupElement<f64> {
        GroupElement { coords: vec![libm::sqrt(2.0) - 1.0, libm::sqrt(3.0) - 1.0, 0.0] }
    }

    /// The smooth function whose super-level set defines the Heisenberg set.
    pub fn heisenberg_profile(x: &[f64]) -> f64 {
        let s = libm::sin(core::f64::consts::PI * x[1]);
        0.5 + 0.5 * s * s * libm::cos(2.0 * core::f64::consts::PI * x[2])
    }

    pub fn indicator(&self, n: usize) -> Result<SampledFunction> {
        let dom = DomainSpec::interval(n)?;
        let bits: Vec<bool> = match *self {
            Construction::Full => vec![true; n],
            Construction::Bohr { alpha, delta } => {
                (1..=n).map(|m| crate::scalar::dist_to_z_f64(alpha * m as f64) <= delta).collect()
            }
            Construction::HeisenbergLevel { level } => {
                let h = FilteredGroup::heisenberg();
                let seq = PolySequence::linear(h.clone(), Self::heisenberg_g1())?;
                (1..=n as i64).map(|m| Self::heisenberg_profile(&h.reduce_rep(&seq.eval(m)).coords) >= level).collect()
            }
        };
        SampledFunction::from_real(dom, &bits.iter().map(|&b| b as u8 as f64).collect::<Vec<_>>())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BhkReport {
    pub k: usize,
    pub n: usize,
    pub eps: f64,
    /// Density of A in [N].
    pub alpha: f64,
    pub weight: BhkWeight,
    /// E_{n∈[N], d∈[−N,N]} Π 1_A(n+id) μ(d)
    pub weighted_count: f64,
    /// α^k − ε
    pub threshold: f64,
    /// Fraction of d ∈ [−N, N] whose count is at least (α^k − ε)N.
    pub good_difference_fraction: f64,
    /// The same with threshold α^k N.
    pub strict_good_fraction: f64,
    /// Vertical-Fourier positivity at sampled base points (k = 4 only).
    pub positivity: Vec<PositivityReport>,
}

impl BhkReport {
    pub fn positivity_holds(&self) -> bool {
        self.positivity.iter().all(|p| p.holds)
    }
}

/// Builds A, the weight μ and the weighted progression count.
/// ε′ defaults to ε^{1/m} for an m-dimensional cutoff torus.
pub fn bhk_verify_synthetic(
    k: usize,
    construction: &Construction,
    eps: f64,
    n: usize,
    eps_prime: Option<f64>,
) -> Result<BhkReport> {
    if k >= 5 {
        return Err(Error::Unsupported(
            "k >= 5 is excluded: the weighted lower bound is known to fail for progressions of length 5 or more".into(),
        ));
    }
    if !(3..=4).contains(&k) {
        return Err(Error::InvalidArgument("k must be 3 or 4".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument("eps must lie in (0, 1)".into()));
    }
    let kind = match (k, construction) {
        (3, Construction::Bohr { alpha, .. }) => WeightKind::K3Bohr { theta: vec![*alpha] },
        (3, Construction::Full) => WeightKind::K3Bohr { theta: vec![0.0] },
        (4, Construction::HeisenbergLevel { .. } | Construction::Full) => {
            WeightKind::K4Nil { g1: Construction::heisenberg_g1() }
        }
        _ => return Err(Error::Unsupported(format!("construction {construction:?} is not offered for k = {k}"))),
    };
    let m = match &kind {
        WeightKind::K3Bohr { theta } => theta.len(),
        WeightKind::K4Nil { .. } => 2,
    };
    let ep = eps_prime.unwrap_or_else(|| libm::pow(eps, 1.0 / m as f64));
    let a = construction.indicator(n)?;
    let alpha = a.values().iter().filter(|v| v.re == 1.0).count() as f64 / n as f64;
    let weight = bhk_weight(&kind, n, ep, 1)?;
    let profile = ap_profile(&a, k)?;
    let terms: Vec<f64> = profile.differences().map(|d| profile.value(d).unwrap() * weight.at(d)).collect();
    let weighted_count = pairwise(&terms) / terms.len() as f64;
    let ak = libm::pow(alpha, k as f64);
    let threshold = ak - eps;
    let frac = |t: f64| {
        profile.counts.iter().filter(|&&c| c as f64 >= t * n as f64).count() as f64 / profile.counts.len() as f64
    };
    let mut positivity = Vec::new();
    if let (4, Construction::HeisenbergLevel { level }) = (k, construction) {
        let level = *level;
        let h = FilteredGroup::heisenberg();
        let cutoff = LipschitzFunction::new("level set", f64::INFINITY, move |x| {
            Complex64::new((Construction::heisenberg_profile(x) >= level) as u8 as f64, 0.0)
        });
        for i in 0..4 {
            for j in 0..4 {
                let x = GroupElement { coords: vec![i as f64 / 4.0, j as f64 / 4.0 + 0.125, 0.0] };
                positivity.push(fourier_positivity(&cutoff, &h, &x, 64)?);
            }
        }
    }
    Ok(BhkReport {
        k,
        n,
        eps,
        alpha,
        weight,
        weighted_count,
        threshold,
        good_difference_fraction: frac(threshold),
        strict_good_fraction: frac(ak),
        positivity,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GwRow {
    pub rho: f64,
    pub uniformity: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GwReport {
    /// Why the check was not run, when the hypothesis fails.
    pub skipped: Option<String>,
    pub rows: Vec<GwRow>,
    /// Rank correlation between ‖f‖_{U^{s+1}} and |Λ|.
    pub spearman: f64,
    pub max_ratio: f64,
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        for &t in &idx[i..=j] {
            r[t] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation, ties averaged.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / libm::sqrt(vx * vy)
    }
}

/// Tabulates |E_{n∈[N]^D} Π f(ψ_i(n))| against ‖f‖_{U^{s+1}[N]} for
/// f_ρ = ρ + (1 − ρ) e(αn²), ρ ∈ rhos.
pub fn gw_statement_check(psi: &LinearFormSystem, s: usize, n: usize, alpha: f64, rhos: &[f64]) -> Result<GwReport> {
    if !top_power_independence(psi, s)? {
        return Ok(GwReport {
            skipped: Some(format!("the top powers of degree {} of the forms are linearly dependent", s + 1)),
            rows: Vec::new(),
            spearman: 0.0,
            max_ratio: 0.0,
        });
    }
    let dom = DomainSpec::interval(n)?;
    let mut rows = Vec::new();
    for &rho in rhos {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidArgument("ρ must lie in [0, 1]".into()));
        }
        let vals = (1..=n as i64)
            .map(|m| {
                let q = (m * m) as f64 * alpha;
                Complex64::new(rho, 0.0) + (1.0 - rho) * e(q - libm::floor(q))
            })
            .collect();
        let f = SampledFunction::with_auto_bound(dom, vals)?;
        let fs = vec![f.clone(); psi.t()];
        let lambda = multilinear_average(&fs, psi, &AverageDomain::interval_box(psi.d(), n))?.norm();
        let uniformity = gowers_norm(&f, s as u32 + 1)?.norm;
        rows.push(GwRow { rho, uniformity, lambda });
    }
    let u: Vec<f64> = rows.iter().map(|r| r.uniformity).collect();
    let l: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
    let max_ratio = rows.iter().map(|r| ratio(r.lambda, r.uniformity)).fold(0.0, f64::max);
    Ok(GwReport { skipped: None, spearman: spearman(&u, &l), rows, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{eval_expr, parse_expr};

    fn f(src: &str, d: DomainSpec) -> SampledFunction {
        eval_expr(&parse_expr(src).unwrap(), d).unwrap()
    }

    fn ap(k: usize) -> LinearFormSystem {
        LinearFormSystem::arithmetic_progression(k).unwrap()
    }

    #[test]
    fn average_examples() {
        let one = f("1", DomainSpec::Cyclic(9));
        let v = multilinear_average(&[one.clone(), one.clone(), one], &ap(3), &AverageDomain::Cyclic).unwrap();
        assert!((v.re - 1.0).abs() < 1e-15);
        // evens: n even and n+2d even force d even; direct count oracle
        for n in [8usize, 16] {
            let ev = f("indicator(n mod 2 == 0)", DomainSpec::Cyclic(n));
            let mut count = 0;
            for a in 0..n {
                for d in 0..n {
                    count += (a % 2 == 0 && (a + d) % 2 == 0 && (a + 2 * d) % 2 == 0) as usize;
                }
            }
            let v = multilinear_average(&[ev.clone(), ev.clone(), ev], &ap(3), &AverageDomain::Cyclic).unwrap();
            assert!((v.re - count as f64 / (n * n) as f64).abs() < 1e-15);
            assert!((v.re - 0.25).abs() < 1e-15);
        }
        let p = f("e(1/16*n)", DomainSpec::Cyclic(16));
        let m = f("e(-2/16*n)", DomainSpec::Cyclic(16));
        let v = multilinear_average(&[p.clone(), m, p], &ap(3), &AverageDomain::Cyclic).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn arity_and_domains_are_checked() {
        let one = f("1", DomainSpec::Cyclic(5));
        assert!(multilinear_average(core::slice::from_ref(&one), &ap(3), &AverageDomain::Cyclic).is_err());
        let iv = f("1", DomainSpec::Interval(5));
        assert!(multilinear_average(&[iv.clone(), iv.clone(), iv], &ap(3), &AverageDomain::Cyclic).is_err());
        assert!(multilinear_average(&[one.clone(), one.clone(), one], &ap(3), &AverageDomain::progression(5)).is_err());
    }

    #[test]
    fn profile_examples() {
        let n = 40;
        let all = f("1", DomainSpec::Interval(n));
        let p = ap_profile(&all, 3).unwrap();
        for d in 0..=(n as i64 / 2) {
            assert_eq!(p.value(d).unwrap(), (n as f64 - 2.0 * d as f64) / n as f64);
        }
        assert_eq!(p.value(n as i64).unwrap(), 0.0);
        let ev = f("indicator(n mod 2 == 0)", DomainSpec::Interval(100));
        let p = ap_profile(&ev, 3).unwrap();
        assert_eq!(p.value(0).unwrap(), 0.5);
        for d in 1..20 {
            let v = p.value(d).unwrap();
            if d % 2 == 1 {
                assert_eq!(v, 0.0);
            } else {
                // brute force count of even n with n + 2d ≤ 100
                let c = (1..=100).filter(|m| m % 2 == 0 && m + 2 * d <= 100).count();
                assert_eq!(v, c as f64 / 100.0);
            }
        }
        assert!(ap_profile(&f("0.5", DomainSpec::Interval(4)), 3).is_err());
    }

    #[test]
    fn profile_average_is_the_progression_average() {
        let a = f("indicator(bohr(0.3819660112501051; 0.2))", DomainSpec::Interval(60));
        let p = ap_profile(&a, 4).unwrap();
        let lam = multilinear_average(&vec![a; 4], &ap(4), &AverageDomain::progression(60)).unwrap();
        assert!((p.average() - lam.re).abs() < 1e-9);
    }

    #[test]
    fn constant_one_is_tight_and_random_tuples_obey_gvn() {
        let one = f("1", DomainSpec::Cyclic(16));
        let r = gvn_check(&vec![one; 3], &ap(3), &AverageDomain::Cyclic).unwrap();
        assert!(r.asserted && r.pass && (r.lhs - 1.0).abs() < 1e-12 && (r.rhs - 1.0).abs() < 1e-12);
        let fs: Vec<_> = (0..3).map(|i| f(&format!("random(pm1, {i})"), DomainSpec::Cyclic(64))).collect();
        let r = gvn_check(&fs, &ap(3), &AverageDomain::Cyclic).unwrap();
        assert!(r.pass, "{r:?}");
        let iv: Vec<_> = (0..3).map(|i| f(&format!("random(sym, {i})"), DomainSpec::Interval(20))).collect();
        assert!(!gvn_check(&iv, &ap(3), &AverageDomain::progression(20)).unwrap().asserted);
    }

    #[test]
    fn twisted_checks() {
        let d = DomainSpec::Interval(48);
        let fs: Vec<_> = (0..3).map(|i| f(&format!("random(sym, {})", 10 + i), d)).collect();
        let plain = twisted_gvn_check(&fs, &[0, 1, 2], &TwistWeight::One).unwrap();
        let lam = multilinear_average(&fs, &ap(3), &AverageDomain::progression(48)).unwrap();
        assert!((plain.lhs - lam.norm()).abs() < 1e-12);
        let tw = twisted_gvn_check(&fs, &[0, 1, 2], &TwistWeight::Character(0.3)).unwrap();
        assert!(tw.invariance_error.unwrap() < 1e-9);
        assert!(tw.absorption_error.unwrap() < 1e-9);
        assert!(tw.ratio <= 2.0, "{tw:?}");
        assert!(twisted_gvn_check(&fs, &[0, 1, 1], &TwistWeight::One).is_err());
    }

    #[test]
    fn weights() {
        let w = bhk_weight(&WeightKind::K3Bohr { theta: vec![0.0] }, 100, 0.1, 1).unwrap();
        let inside: Vec<f64> = (-10..=10).map(|d| w.at(d)).collect();
        assert!(inside.iter().all(|&v| v == inside[0] && v > 0.0));
        assert_eq!(w.at(11), 0.0);
        let golden = (libm::sqrt(5.0) - 1.0) / 2.0;
        let w = bhk_weight(&WeightKind::K3Bohr { theta: vec![golden] }, 5000, 0.05, 1).unwrap();
        assert!((0.9..=1.1).contains(&w.mean), "{}", w.mean);
        assert!(bhk_weight(&WeightKind::K3Bohr { theta: vec![0.5] }, 10, 0.05, 1).is_err());
        // k = 4: support density against the window fraction times the ball volume
        let g1 = Construction::heisenberg_g1();
        let w = bhk_weight(&WeightKind::K4Nil { g1 }, 20000, 0.2, 1).unwrap();
        let expect = (2.0 * 4000.0 + 1.0) / 40001.0 * 0.4 * 0.4;
        assert!((w.support_density / expect - 1.0).abs() < 0.1, "{} vs {expect}", w.support_density);
    }

    #[test]
    fn tent_integral_matches_quadrature() {
        for m in 1..=2 {
            let g = 200;
            let mut s = 0.0;
            for i in 0..g {
                for j in 0..(if m == 2 { g } else { 1 }) {
                    let x = [(i as f64 + 0.5) / g as f64, (j as f64 + 0.5) / g as f64];
                    s += tent(&x[..m], 0.3);
                }
            }
            let q = s / libm::pow(g as f64, m as f64);
            assert!((q - tent_integral(m, 0.3)).abs() < 1e-3, "{m}: {q}");
        }
    }

    #[test]
    fn bhk_full_set_and_rejections() {
        let r = bhk_verify_synthetic(3, &Construction::Full, 0.05, 200, None).unwrap();
        assert_eq!(r.alpha, 1.0);
        // count(d) = N − 2|d| is good exactly for |d| ≤ εN/2
        assert!((r.good_difference_fraction - 11.0 / 401.0).abs() < 1e-12, "{}", r.good_difference_fraction);
        assert!(bhk_verify_synthetic(5, &Construction::Full, 0.05, 100, None).is_err());
        assert!(bhk_verify_synthetic(4, &Construction::Bohr { alpha: 0.3, delta: 0.1 }, 0.05, 100, None).is_err());
    }

    #[test]
    fn gw_gate_and_trend() {
        let r = gw_statement_check(&ap(4), 1, 16, 0.1, &[0.5]).unwrap();
        assert!(r.skipped.is_some());
        let rhos = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        let r = gw_statement_check(&ap(3), 1, 64, libm::sqrt(2.0), &rhos).unwrap();
        assert!(r.skipped.is_none());
        assert!(r.spearman > 0.8, "{r:?}");
        let last = r.rows.last().unwrap();
        assert!((last.uniformity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
    }
}
