//! Integer linear-form systems Ψ = (ψ_1, …, ψ_t) on Z^D: evaluation,
//! Cauchy–Schwarz complexity, the power flag Ψ^[1] ≤ … ≤ Ψ^[s] and
//! Leibman-group dimension counts.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{big_to_rationals, to_rationals, RowSpace};
use crate::scalar::Rational;

pub const MAX_FORMS_FOR_COMPLEXITY: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearFormSystem {
    d: usize,
    coeffs: Vec<Vec<i64>>,
    /// Variable names, one per coordinate of Z^D.
    pub vars: Vec<String>,
    /// Optional labels, one per form.
    pub names: Vec<String>,
}

impl LinearFormSystem {
    pub fn new(coeffs: Vec<Vec<i64>>) -> Result<Self> {
        let d = coeffs.first().map(|r| r.len()).unwrap_or(0);
        if coeffs.is_empty() || d == 0 {
            return Err(Error::InvalidArgument("a form system needs t >= 1 forms in D >= 1 variables".into()));
        }
        if coeffs.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("all forms must have D coefficients".into()));
        }
        if coeffs.iter().all(|r| r.iter().all(|&c| c == 0)) {
            return Err(Error::InvalidArgument("at least one form must be nonzero".into()));
        }
        if coeffs.iter().flatten().any(|c| c.unsigned_abs() > 1 << 20) {
            return Err(Error::InvalidArgument("coefficients above 2^20 are not supported".into()));
        }
        let vars = (0..d).map(|j| format!("x{}", j + 1)).collect();
        Ok(LinearFormSystem { d, coeffs, vars, names: Vec::new() })
    }

    /// k-term progression n, n+d, …, n+(k−1)d on Z².
    pub fn arithmetic_progression(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("progression length must be >= 1".into()));
        }
        let mut s = Self::new((0..k as i64).map(|i| vec![1, i]).collect())?;
        s.vars = vec!["n".into(), "d".into()];
        s.names = (0..k).map(|i| format!("n+{i}d")).collect();
        Ok(s)
    }

    /// The 2^k forms n + Σ_{i∈S} h_i, S ⊆ {1..k}, on Z^{k+1}; subsets are
    /// ordered by their bitmask.
    pub fn parallelepiped(k: usize) -> Result<Self> {
        if k == 0 || k > 10 {
            return Err(Error::InvalidArgument("parallelepiped dimension must be in 1..=10".into()));
        }
        let rows = (0..1usize << k)
            .map(|mask| {
                let mut r = vec![1i64];
                r.extend((0..k).map(|i| ((mask >> i) & 1) as i64));
                r
            })
            .collect();
        let mut s = Self::new(rows)?;
        s.vars = core::iter::once("n".to_string()).chain((1..=k).map(|i| format!("h{i}"))).collect();
        Ok(s)
    }

    /// Parse `"n; n+d; n+2d"`: forms separated by `;`, integer multiples of
    /// named variables; variables are numbered in order of first appearance.
    pub fn parse(text: &str) -> Result<Self> {
        let mut vars: Vec<String> = Vec::new();
        let mut rows: Vec<BTreeMap<usize, i64>> = Vec::new();
        let mut names = Vec::new();
        let mut base = 0usize;
        for part in text.split(';') {
            let form = part.trim();
            let off = base + part.len() - part.trim_start().len() + 1;
            base += part.len() + 1;
            if form.is_empty() {
                return Err(Error::Syntax { offset: off, msg: "empty form".into() });
            }
            rows.push(parse_form(form, off, &mut vars)?);
            names.push(form.to_string());
        }
        let d = vars.len();
        if d == 0 {
            return Err(Error::Syntax { offset: 1, msg: "no variables".into() });
        }
        let coeffs = rows
            .into_iter()
            .map(|m| (0..d).map(|j| *m.get(&j).unwrap_or(&0)).collect())
            .collect();
        let mut s = Self::new(coeffs)?;
        s.vars = vars;
        s.names = names;
        Ok(s)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn t(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Vec<i64>] {
        &self.coeffs
    }

    /// Human-readable form list in the mini-language.
    pub fn display(&self) -> String {
        let forms: Vec<String> = self
            .coeffs
            .iter()
            .map(|row| {
                let mut out = String::new();
                for (j, &c) in row.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let sign = if c < 0 { "-" } else { "+" };
                    if out.is_empty() {
                        if c < 0 {
                            out.push('-');
                        }
                    } else {
                        out.push_str(sign);
                    }
                    if c.abs() != 1 {
                        out.push_str(&c.abs().to_string());
                    }
                    out.push_str(&self.vars[j]);
                }
                if out.is_empty() {
                    out.push('0');
                }
                out
            })
            .collect();
        forms.join("; ")
    }
}

fn parse_form(form: &str, offset: usize, vars: &mut Vec<String>) -> Result<BTreeMap<usize, i64>> {
    let b = form.as_bytes();
    let mut i = 0;
    let mut out = BTreeMap::new();
    let mut first = true;
    let err = |i: usize, msg: &str| Error::Syntax { offset: offset + i, msg: msg.into() };
    while i < b.len() {
        while i < b.len() && b[i] == b' ' {
            i += 1;
        }
        let mut sign = 1i64;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            if b[i] == b'-' {
                sign = -1;
            }
            i += 1;
        } else if !first {
            return Err(err(i, "expected `+` or `-`"));
        }
        while i < b.len() && b[i] == b' ' {
            i += 1;
        }
        let start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        let coef: i64 = if i > start {
            form[start..i].parse().map_err(|_| err(start, "integer out of range"))?
        } else {
            1
        };
        while i < b.len() && b[i] == b' ' {
            i += 1;
        }
        if i < b.len() && b[i] == b'*' {
            i += 1;
            while i < b.len() && b[i] == b' ' {
                i += 1;
            }
        }
        let vs = i;
        while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
            if vs == i && b[i].is_ascii_digit() {
                break;
            }
            i += 1;
        }
        if i == vs {
            return Err(if i > start {
                err(start, "constant terms are not allowed: forms are homogeneous")
            } else {
                err(i, "expected a variable")
            });
        }
        let name = &form[vs..i];
        let idx = match vars.iter().position(|v| v == name) {
            Some(p) => p,
            None => {
                vars.push(name.to_string());
                vars.len() - 1
            }
        };
        *out.entry(idx).or_insert(0) += sign * coef;
        first = false;
        while i < b.len() && b[i] == b' ' {
            i += 1;
        }
    }
    Ok(out)
}

/// (ψ_1(n), …, ψ_t(n))
pub fn eval_forms(psi: &LinearFormSystem, n: &[i64]) -> Result<Vec<i64>> {
    if n.len() != psi.d {
        return Err(Error::InvalidArgument(format!("expected a vector of length {}, got {}", psi.d, n.len())));
    }
    Ok(psi.coeffs.iter().map(|row| row.iter().zip(n).map(|(a, x)| a * x).sum()).collect())
}

pub fn pairwise_independent(psi: &LinearFormSystem) -> bool {
    let rows: Vec<Vec<Rational>> = psi.coeffs.iter().map(|r| to_rationals(r)).collect();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let mut s = RowSpace::new(psi.d);
            s.insert(&rows[i]);
            s.insert(&rows[j]);
            if s.dim() < 2 {
                return false;
            }
        }
    }
    true
}

struct SpanOracle<'a> {
    rows: &'a [Vec<Rational>],
    target: usize,
    memo: Vec<Option<bool>>,
}

impl SpanOracle<'_> {
    /// Whether ψ_target lies outside the span of the forms in `mask`.
    fn avoids(&mut self, mask: usize) -> bool {
        if let Some(v) = self.memo[mask] {
            return v;
        }
        let mut s = RowSpace::new(self.rows[0].len());
        for (j, r) in self.rows.iter().enumerate() {
            if mask >> j & 1 == 1 {
                s.insert(r);
            }
        }
        let v = !s.contains(&self.rows[self.target]);
        self.memo[mask] = Some(v);
        v
    }
}

fn cover(o: &mut SpanOracle, others: &[usize], classes: &mut Vec<usize>, limit: usize) -> bool {
    let Some((&j, rest)) = others.split_first() else { return true };
    for c in 0..classes.len() {
        let m = classes[c] | 1 << j;
        if o.avoids(m) {
            let old = classes[c];
            classes[c] = m;
            if cover(o, rest, classes, limit) {
                return true;
            }
            classes[c] = old;
        }
    }
    if classes.len() < limit && o.avoids(1 << j) {
        classes.push(1 << j);
        if cover(o, rest, classes, limit) {
            return true;
        }
        classes.pop();
    }
    false
}

/// Smallest number of classes partitioning the forms other than `i` with
/// ψ_i outside the span of each class.
pub fn min_cover_classes(psi: &LinearFormSystem, i: usize) -> usize {
    let rows: Vec<Vec<Rational>> = psi.coeffs.iter().map(|r| to_rationals(r)).collect();
    let t = rows.len();
    let others: Vec<usize> = (0..t).filter(|&j| j != i).collect();
    if others.is_empty() {
        return 0;
    }
    let mut o = SpanOracle { rows: &rows, target: i, memo: vec![None; 1 << t] };
    for limit in 1..=others.len() {
        if cover(&mut o, &others, &mut Vec::new(), limit) {
            return limit;
        }
    }
    others.len()
}

/// Cauchy–Schwarz complexity s(Ψ): the least s such that for every i the
/// other forms split into at most s+1 classes avoiding ψ_i in their spans.
pub fn cs_complexity(psi: &LinearFormSystem) -> Result<usize> {
    if psi.t() > MAX_FORMS_FOR_COMPLEXITY {
        return Err(Error::InvalidArgument(format!(
            "complexity search supports at most {MAX_FORMS_FOR_COMPLEXITY} forms"
        )));
    }
    if !pairwise_independent(psi) {
        return Err(Error::NotPairwiseIndependent);
    }
    let worst = (0..psi.t()).map(|i| min_cover_classes(psi, i)).max().unwrap_or(0);
    Ok(worst.saturating_sub(1))
}

/// The flag Ψ^[1] ≤ … ≤ Ψ^[s] in integral row-echelon form.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlag {
    pub s: usize,
    pub t: usize,
    /// m_i = dim Ψ^[i], i = 1..s
    pub dims: Vec<usize>,
    pub basis: Vec<Vec<BigInt>>,
    pub degrees: Vec<usize>,
    /// First nonzero coordinate of each basis row; later rows vanish there.
    pub pivots: Vec<usize>,
}

impl PowerFlag {
    /// Ψ^[i] as an echelon subspace (i = 0 gives the zero space).
    pub fn level_space(&self, i: usize) -> RowSpace {
        let m = if i == 0 { 0 } else { self.dims[i.min(self.s) - 1] };
        RowSpace {
            width: self.t,
            rows: self.basis[..m].iter().map(|r| big_to_rationals(r)).collect(),
            pivots: self.pivots[..m].to_vec(),
        }
    }

    pub fn contains(&self, v: &[BigInt], level: usize) -> bool {
        self.level_space(level).contains(&big_to_rationals(v))
    }

    /// Unique coordinates of v in the basis of Ψ^[level].
    pub fn coordinates(&self, v: &[BigInt], level: usize) -> Option<Vec<Rational>> {
        self.level_space(level).coordinates(&big_to_rationals(v))
    }

    /// The degree-i part m_i − m_{i−1}.
    pub fn increment(&self, i: usize) -> usize {
        let prev = if i <= 1 { 0 } else { self.dims[i - 2] };
        self.dims[i - 1] - prev
    }
}

fn pow_vec(v: &[i64], j: u32) -> Vec<Rational> {
    v.iter()
        .map(|&x| Rational::from_integer(num_traits::pow(BigInt::from(x), j as usize)))
        .collect()
}

fn grid(d: usize, max: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![0i64; d]];
    for j in 0..d {
        let mut next = Vec::new();
        for p in &out {
            for x in 0..=max {
                let mut q = p.clone();
                q[j] = x;
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Ψ^[i] = span{Ψ(n)^j : n ∈ Z^D, 1 ≤ j ≤ i}, i = 1..s.
///
/// Spanning vectors are taken at unit vectors and then at the grid
/// {0..i}^D; saturation is verified at 20 random integer points.
pub fn power_flag(psi: &LinearFormSystem, s: usize) -> Result<PowerFlag> {
    if s < 1 {
        return Err(Error::InvalidArgument("flag depth s must be >= 1".into()));
    }
    if s > 12 {
        return Err(Error::InvalidArgument("flag depth s > 12 is not supported".into()));
    }
    let t = psi.t();
    let d = psi.d();
    let mut space = RowSpace::new(t);
    let mut degrees = Vec::new();
    let mut dims = Vec::new();
    let units: Vec<Vec<i64>> = (0..d)
        .map(|j| {
            let mut e = vec![0; d];
            e[j] = 1;
            e
        })
        .collect();
    for i in 1..=s {
        let mut cands = units.clone();
        if d <= 4 {
            cands.extend(grid(d, i as i64));
        }
        for j in 1..=i as u32 {
            for n in &cands {
                let v = eval_forms(psi, n)?;
                if space.insert(&pow_vec(&v, j)).is_some() {
                    degrees.push(i);
                }
            }
        }
        dims.push(space.dim());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_F1A6);
    for _ in 0..20 {
        let n: Vec<i64> = (0..d).map(|_| rng.random_range(-7..=7)).collect();
        let v = eval_forms(psi, &n)?;
        for i in 1..=s {
            let level = RowSpace {
                width: t,
                rows: space.rows[..dims[i - 1]].to_vec(),
                pivots: space.pivots[..dims[i - 1]].to_vec(),
            };
            for j in 1..=i as u32 {
                if !level.contains(&pow_vec(&v, j)) {
                    return Err(Error::Contract(format!(
                        "spanning grid not saturated at level {i} (point {n:?})"
                    )));
                }
            }
        }
    }
    let basis = space.rows.iter().map(|r| r.iter().map(|x| x.to_integer()).collect()).collect();
    Ok(PowerFlag { s, t, dims, basis, degrees, pivots: space.pivots })
}

/// Checks that every pointwise product Ψ(n_1)·…·Ψ(n_j) lies in Ψ^[i].
pub fn depolarisation_check(psi: &LinearFormSystem, i: usize, samples: &[Vec<Vec<i64>>]) -> Result<bool> {
    let flag = power_flag(psi, i)?;
    let space = flag.level_space(i);
    for tuple in samples {
        if tuple.is_empty() || tuple.len() > i {
            return Err(Error::InvalidArgument(format!(
                "each sample needs between 1 and {i} points, got {}",
                tuple.len()
            )));
        }
        let mut prod = vec![BigInt::one(); psi.t()];
        for n in tuple {
            for (p, v) in prod.iter_mut().zip(eval_forms(psi, n)?) {
                *p *= BigInt::from(v);
            }
        }
        if !space.contains(&big_to_rationals(&prod)) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn compositions(d: usize, total: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for a in 0..=total {
        for mut rest in compositions(d - 1, total - a) {
            rest.insert(0, a);
            out.push(rest);
        }
    }
    out
}

/// Whether ψ_1^{s+1}, …, ψ_t^{s+1} are linearly independent polynomials.
pub fn top_power_independence(psi: &LinearFormSystem, s: usize) -> Result<bool> {
    let deg = s + 1;
    if deg > 16 {
        return Err(Error::InvalidArgument("s too large".into()));
    }
    let monos = compositions(psi.d(), deg);
    let fact = |k: usize| (1..=k).fold(BigInt::one(), |a, x| a * BigInt::from(x));
    let rows: Vec<Vec<Rational>> = psi
        .coeffs()
        .iter()
        .map(|a| {
            monos
                .iter()
                .map(|alpha| {
                    let mut c = fact(deg);
                    for (&e, &ak) in alpha.iter().zip(a) {
                        c /= fact(e);
                        c *= num_traits::pow(BigInt::from(ak), e);
                    }
                    Rational::from_integer(c)
                })
                .collect()
        })
        .collect();
    Ok(crate::linalg::rank(&rows) == psi.t())
}

/// dim G^Ψ = Σ_i d_i (m_i − m_{i−1}) with m_0 = 0.
pub fn leibman_dim(flag_dims: &[usize], group_dims: &[usize]) -> Result<usize> {
    if flag_dims.len() != group_dims.len() {
        return Err(Error::InvalidArgument(format!(
            "flag has {} levels but the group filtration has {}",
            flag_dims.len(),
            group_dims.len()
        )));
    }
    let mut total = 0;
    let mut prev = 0;
    for (&m, &d) in flag_dims.iter().zip(group_dims) {
        if m < prev {
            return Err(Error::InvalidArgument("flag dims must be nondecreasing".into()));
        }
        total += d * (m - prev);
        prev = m;
    }
    Ok(total)
}

/// Pointwise product of two integer vectors.
pub fn pointwise(u: &[BigInt], v: &[BigInt]) -> Vec<BigInt> {
    u.iter().zip(v).map(|(a, b)| a * b).collect()
}

pub fn is_zero_vec(v: &[BigInt]) -> bool {
    v.iter().all(|x| x.is_zero())
}
