//! Gowers uniformity norms on Z/NZ and on intervals [N].
//!
//! ‖f‖_{U^k}^{2^k} is evaluated with the recursion
//! ‖f‖_{U^k}^{2^k} = E_h ‖Δ_h f‖_{U^{k−1}}^{2^{k−1}}, bottoming out at
//! ‖f‖_{U^1}^2 = |E f|^2 (direct) or at ‖f‖_{U^2}^4 = Σ|f̂|^4 (FFT base).
//! Interval norms embed into Z/ÑZ and divide by ‖1_[N]‖.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::funcspace::{embed_to_cyclic, DomainSpec, SampledFunction};
use crate::sum;

/// Powers in [−CLAMP_TOL, 0) are rounding noise and clamp to zero.
pub const CLAMP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GowersResult {
    pub norm: f64,
    /// The 2^k-th power before taking the root (normalized on intervals).
    pub power: f64,
    pub k: u32,
    pub domain: DomainSpec,
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Direct for small problems, FFT base otherwise.
    Auto,
    /// Recursion down to U^1: the literal 2^k-fold average.
    Direct,
    /// Recursion down to U^2, evaluated as Σ|f̂|^4.
    FftBase,
}

#[derive(Debug, Clone, Copy)]
pub struct GowersOptions {
    /// Cyclic size for interval norms; default 2^k·N.
    pub ntilde: Option<usize>,
    /// Serial evaluation. Results are bit-identical either way, since
    /// per-derivative terms are reduced with a fixed pairwise tree.
    pub deterministic: bool,
    pub method: Method,
    /// k > 4 costs O(N^k); refuse unless asked.
    pub allow_large_k: bool,
}

impl Default for GowersOptions {
    fn default() -> Self {
        GowersOptions { ntilde: None, deterministic: false, method: Method::Auto, allow_large_k: false }
    }
}

/// Δ_h f(x) = f(x+h)·conj(f(x)) on Z/NZ.
pub fn mult_derivative(f: &SampledFunction, h: i64) -> Result<SampledFunction> {
    let DomainSpec::Cyclic(_) = f.domain() else {
        return Err(Error::DomainMismatch(
            "multiplicative derivatives are defined on cyclic domains only".into(),
        ));
    };
    let v = derivative(f.values(), h);
    SampledFunction::with_auto_bound(f.domain(), v)
}

fn derivative(v: &[Complex64], h: i64) -> Vec<Complex64> {
    let n = v.len();
    let h = h.rem_euclid(n as i64) as usize;
    (0..n).map(|x| v[(x + h) % n] * v[x].conj()).collect()
}

fn power_direct(v: &[Complex64], k: u32) -> f64 {
    if k == 1 {
        return sum::mean_c(v).norm_sqr();
    }
    let terms: Vec<f64> = (0..v.len()).map(|h| power_direct(&derivative(v, h as i64), k - 1)).collect();
    sum::mean(&terms)
}

fn power_u2_fft(v: &[Complex64]) -> f64 {
    let c = fft::fourier_coefficients(v);
    let q: Vec<f64> = c.iter().map(|z| z.norm_sqr() * z.norm_sqr()).collect();
    sum::pairwise(&q)
}

fn power_fft_base(v: &[Complex64], k: u32) -> f64 {
    match k {
        1 => sum::mean_c(v).norm_sqr(),
        2 => power_u2_fft(v),
        _ => {
            let terms: Vec<f64> =
                (0..v.len()).map(|h| power_fft_base(&derivative(v, h as i64), k - 1)).collect();
            sum::mean(&terms)
        }
    }
}

fn resolve(method: Method, n: usize, k: u32) -> Method {
    match method {
        Method::Auto => {
            let cost = libm::pow(n as f64, k as f64);
            if k == 2 && n > 64 || k >= 3 && cost > 2e7 {
                Method::FftBase
            } else {
                Method::Direct
            }
        }
        m => m,
    }
}

/// Raw ‖f‖_{U^k(Z/NZ)}^{2^k} of the cyclic function with values `v`.
pub fn cyclic_power(v: &[Complex64], k: u32, opts: &GowersOptions) -> f64 {
    let method = resolve(opts.method, v.len(), k);
    if k == 1 {
        return sum::mean_c(v).norm_sqr();
    }
    if method == Method::FftBase && k == 2 {
        return power_u2_fft(v);
    }
    // outermost derivative index in parallel, reduced in fixed order
    let terms = sum::map_indexed(v.len(), opts.deterministic, |h| {
        let d = derivative(v, h as i64);
        match method {
            Method::FftBase => power_fft_base(&d, k - 1),
            _ => power_direct(&d, k - 1),
        }
    });
    sum::mean(&terms)
}

fn finish(power: f64, k: u32, domain: DomainSpec) -> Result<GowersResult> {
    if !power.is_finite() {
        return Err(Error::Numerical(format!("non-finite Gowers power {power}")));
    }
    let (p, clamped) = if power < 0.0 {
        if power < -CLAMP_TOL {
            return Err(Error::Numerical(format!("Gowers power {power} is negative beyond tolerance")));
        }
        (0.0, true)
    } else {
        (power, false)
    };
    let norm = libm::pow(p, 1.0 / (1u64 << k) as f64);
    Ok(GowersResult { norm, power: p, k, domain, clamped })
}

fn check_k(k: u32, opts: &GowersOptions) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidArgument("Gowers norm order k must be >= 1".into()));
    }
    if k > 4 && !opts.allow_large_k {
        return Err(Error::InvalidArgument(format!(
            "k = {k} > 4 costs O(N^k); enable allow_large_k to proceed"
        )));
    }
    if k > 20 {
        return Err(Error::InvalidArgument("k > 20 is not supported".into()));
    }
    Ok(())
}

pub fn gowers_norm(f: &SampledFunction, k: u32) -> Result<GowersResult> {
    gowers_norm_with(f, k, &GowersOptions::default())
}

pub fn gowers_norm_with(f: &SampledFunction, k: u32, opts: &GowersOptions) -> Result<GowersResult> {
    check_k(k, opts)?;
    match f.domain() {
        DomainSpec::Cyclic(_) => finish(cyclic_power(f.values(), k, opts), k, f.domain()),
        DomainSpec::Interval(n) => {
            let ntilde = opts.ntilde.unwrap_or(n << k);
            // Constant functions: the quotient cancels exactly.
            let first = f.values()[0];
            if f.values().iter().all(|&v| v == first) {
                let _ = embed_to_cyclic(f, k, ntilde)?;
                let c = first.norm();
                let power = libm::pow(c, (1u64 << k) as f64);
                return Ok(GowersResult { norm: c, power, k, domain: f.domain(), clamped: false });
            }
            let ft = embed_to_cyclic(f, k, ntilde)?;
            let one = SampledFunction::constant(f.domain(), Complex64::new(1.0, 0.0))?;
            let onet = embed_to_cyclic(&one, k, ntilde)?;
            let p = cyclic_power(ft.values(), k, opts);
            let p1 = cyclic_power(onet.values(), k, opts);
            finish(p / p1, k, f.domain())
        }
    }
}

/// ‖f‖_{U^2}^4 = Σ_ξ |f̂(ξ)|^4 in O(N log N).
pub fn u2_fft(f: &SampledFunction) -> Result<GowersResult> {
    let DomainSpec::Cyclic(_) = f.domain() else {
        return Err(Error::DomainMismatch("u2_fft expects a cyclic domain".into()));
    };
    finish(power_u2_fft(f.values()), 2, f.domain())
}
