//! Correlation oracles: structured functions correlating with a
//! non-uniform input.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::fourier_coefficients;
use crate::funcspace::{embed_to_cyclic, DomainSpec, SampledFunction};
use crate::gowers::{cyclic_power, gowers_norm, GowersOptions};
use crate::sum::mean_c;

/// ψ(n) = e(phase(n)) on the domain of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Structured {
    /// In [0, 1), one per domain point.
    pub phase: Vec<f64>,
    pub label: String,
    /// Lower bound on |⟨g, ψ⟩| promised by the oracle.
    pub claimed: f64,
    /// |⟨g, ψ⟩| as measured.
    pub correlation: f64,
}

impl Structured {
    pub fn value(&self, i: usize) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * self.phase[i])
    }
}

pub trait CorrelationOracle {
    /// The s for which the oracle inverts U^{s+1}.
    fn degree(&self) -> usize;
    fn name(&self) -> String;
    /// A structured ψ with |⟨g, ψ⟩| ≥ claimed, or None if g is too uniform
    /// at threshold `delta` (or the search fails).
    fn find(&self, g: &SampledFunction, delta: f64) -> Result<Option<Structured>>;
}

fn frac(x: f64) -> f64 {
    x - libm::floor(x)
}

/// |E_n g(n) e(−phase(n))|
pub fn correlation(g: &SampledFunction, phase: &[f64]) -> f64 {
    let terms: Vec<Complex64> = g
        .values()
        .iter()
        .zip(phase)
        .map(|(v, p)| v * Complex64::from_polar(1.0, -2.0 * PI * p))
        .collect();
    mean_c(&terms).norm()
}

/// Linear phases via the largest Fourier coefficient of the cyclic
/// embedding; Ñ = N on Z/NZ and 4N on [N].
#[derive(Debug, Clone, Copy, Default)]
pub struct FourierOracle;

/// ‖1_[N]‖²_{U²(Z_Ñ)} (Ñ/N)^{3/2}: the guaranteed ratio corr/u² on
/// interval domains (1 on cyclic ones).
pub fn interval_constant(n: usize, ntilde: usize) -> f64 {
    let mut v = alloc::vec![Complex64::new(0.0, 0.0); ntilde];
    for x in v.iter_mut().skip(1).take(n) {
        *x = Complex64::new(1.0, 0.0);
    }
    let p = cyclic_power(&v, 2, &GowersOptions::default());
    libm::sqrt(p) * libm::pow(ntilde as f64 / n as f64, 1.5)
}

/// The s = 1 inverse theorem: if ‖g‖_{U²} = u ≥ delta, the top Fourier
/// coefficient gives |⟨g, e(ξ·/Ñ)⟩| ≥ κ u².
pub fn fourier_oracle_s1(g: &SampledFunction, delta: f64) -> Result<Option<Structured>> {
    let u = gowers_norm(g, 2)?.norm;
    if u < delta || u == 0.0 {
        return Ok(None);
    }
    let (ntilde, kappa, values) = match g.domain() {
        DomainSpec::Cyclic(n) => (n, 1.0, g.values().to_vec()),
        DomainSpec::Interval(n) => {
            let nt = 4 * n;
            (nt, interval_constant(n, nt), embed_to_cyclic(g, 2, nt)?.into_values())
        }
    };
    let hat = fourier_coefficients(&values);
    let (xi, _) = hat
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (k, c)| if c.norm() > best.1 { (k, c.norm()) } else { best });
    let dom = g.domain();
    let phase: Vec<f64> = (0..g.len()).map(|i| frac((xi as f64) * dom.point(i) as f64 / ntilde as f64)).collect();
    let corr = correlation(g, &phase);
    let claimed = kappa * u * u;
    if corr + 1e-12 < claimed {
        return Err(Error::Contract(format!("Fourier oracle: correlation {corr} below claimed {claimed}")));
    }
    Ok(Some(Structured { phase, label: format!("xi={xi}/{ntilde}"), claimed, correlation: corr }))
}

impl CorrelationOracle for FourierOracle {
    fn degree(&self) -> usize {
        1
    }
    fn name(&self) -> String {
        "fourier".into()
    }
    fn find(&self, g: &SampledFunction, delta: f64) -> Result<Option<Structured>> {
        fourier_oracle_s1(g, delta)
    }
}

/// Brute force over e((a n² + b n)/Q), Q ≤ max_q, for N ≤ 512. Exponential
/// in spirit: every denominator up to max_q is tried. Claims δ⁴.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticPhaseOracle {
    pub max_q: usize,
}

impl Default for QuadraticPhaseOracle {
    fn default() -> Self {
        QuadraticPhaseOracle { max_q: 64 }
    }
}

pub const QUADRATIC_ORACLE_MAX_N: usize = 512;

impl CorrelationOracle for QuadraticPhaseOracle {
    fn degree(&self) -> usize {
        2
    }
    fn name(&self) -> String {
        format!("quadratic(Q<={})", self.max_q)
    }
    fn find(&self, g: &SampledFunction, delta: f64) -> Result<Option<Structured>> {
        if g.len() > QUADRATIC_ORACLE_MAX_N {
            return Err(Error::Unsupported(format!(
                "the brute-force quadratic oracle handles N <= {QUADRATIC_ORACLE_MAX_N}"
            )));
        }
        if self.max_q == 0 || self.max_q > 64 {
            return Err(Error::InvalidArgument("max_q must be in 1..=64".into()));
        }
        if gowers_norm(g, 3)?.norm < delta {
            return Ok(None);
        }
        let dom = g.domain();
        let len = g.len() as f64;
        let mut best = (0.0, 1usize, 0usize, 0usize);
        for q in 1..=self.max_q {
            // G_r = Σ_{n ≡ r mod q} g(n)
            let mut fold = alloc::vec![Complex64::new(0.0, 0.0); q];
            for (i, v) in g.values().iter().enumerate() {
                fold[dom.point(i).rem_euclid(q as i64) as usize] += v;
            }
            for a in 0..q {
                for b in 0..q {
                    if q > 1 && num_integer::gcd(num_integer::gcd(a, b), q) != 1 {
                        continue;
                    }
                    let s: Complex64 = (0..q)
                        .map(|r| fold[r] * Complex64::from_polar(1.0, -2.0 * PI * ((a * r * r + b * r) % q) as f64 / q as f64))
                        .sum();
                    let c = s.norm() / len;
                    if c > best.0 + 1e-15 {
                        best = (c, q, a, b);
                    }
                }
            }
        }
        let (_, q, a, b) = best;
        let phase: Vec<f64> = (0..g.len())
            .map(|i| {
                let n = dom.point(i).rem_euclid(q as i64) as usize;
                ((a * n * n + b * n) % q) as f64 / q as f64
            })
            .collect();
        let corr = correlation(g, &phase);
        let claimed = libm::pow(delta, 4.0);
        if corr < claimed {
            return Ok(None);
        }
        Ok(Some(Structured { phase, label: format!("({a}n^2+{b}n)/{q}"), claimed, correlation: corr }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{eval_expr, parse_expr};

    fn f(src: &str, d: DomainSpec) -> SampledFunction {
        eval_expr(&parse_expr(src).unwrap(), d).unwrap()
    }

    #[test]
    fn exact_phase_is_found() {
        let g = f("e(5/64*n)", DomainSpec::Cyclic(64));
        let s = fourier_oracle_s1(&g, 0.5).unwrap().unwrap();
        assert_eq!(s.label, "xi=5/64");
        assert!((s.correlation - 1.0).abs() < 1e-12);
        let zero = SampledFunction::constant(DomainSpec::Cyclic(64), Complex64::new(0.0, 0.0)).unwrap();
        assert!(fourier_oracle_s1(&zero, 0.1).unwrap().is_none());
    }

    #[test]
    fn correlation_meets_u2_squared() {
        for (src, d) in [
            ("random(pm1, 3)", DomainSpec::Cyclic(128)),
            ("1/2*e(3/17*n) + 1/2*random(sym, 4)", DomainSpec::Cyclic(100)),
            ("1/2*e(1/7*n) + 1/2*random(sym, 5)", DomainSpec::Interval(90)),
            ("indicator(n mod 3 == 0)", DomainSpec::Interval(60)),
        ] {
            let g = f(src, d);
            let u = gowers_norm(&g, 2).unwrap().norm;
            let s = fourier_oracle_s1(&g, 0.0).unwrap().unwrap();
            let kappa = match d {
                DomainSpec::Cyclic(_) => 1.0,
                DomainSpec::Interval(n) => interval_constant(n, 4 * n),
            };
            assert!(s.correlation >= kappa * u * u - 1e-12, "{src}");
        }
        let k = interval_constant(1000, 4000);
        assert!(k > 0.7 && k < 0.9, "{k}");
    }

    #[test]
    fn quadratic_oracle_finds_quadratic_phase() {
        let g = f("e(3/16*n^2 + 1/16*n)", DomainSpec::Interval(200));
        let s = QuadraticPhaseOracle::default().find(&g, 0.5).unwrap().unwrap();
        assert!((s.correlation - 1.0).abs() < 1e-9, "{s:?}");
        let big = f("e(1/3*n^2)", DomainSpec::Interval(600));
        assert!(QuadraticPhaseOracle::default().find(&big, 0.5).is_err());
    }
}
