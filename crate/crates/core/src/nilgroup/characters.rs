//! Horizontal characters, irrationality, coefficient factorisation and the
//! C^∞([N]^D) norm of binomial-basis polynomials.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::{FilteredGroup, GroupElement, PolySequence};
use crate::error::{Error, Result};
use crate::scalar::{best_approximation, binom, int, Rational, Scalar};

/// Hard cap on enumerated characters per call.
pub const MAX_CHARACTERS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HorizontalCharacter {
    pub level: usize,
    /// Coefficients on the coordinates listed in `coords`.
    pub m: Vec<i64>,
    pub coords: Vec<usize>,
}

impl HorizontalCharacter {
    pub fn complexity(&self) -> u64 {
        self.m.iter().map(|x| x.unsigned_abs()).sum()
    }

    /// ξ(g) = m·ψ(g) as a real number (not reduced mod 1).
    pub fn eval<S: Scalar>(&self, g: &GroupElement<S>) -> S {
        self.m
            .iter()
            .zip(&self.coords)
            .fold(S::zero(), |acc, (&m, &j)| acc + S::from_i64(m) * g.coords[j].clone())
    }
}

/// Integer vectors of length `b` with 0 < |m|_1 ≤ max, by |m|_1 then lex.
pub fn integer_vectors(b: usize, max: u64) -> Result<Vec<Vec<i64>>> {
    fn rec(b: usize, rem: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>, cap: usize) -> bool {
        if cur.len() == b {
            if rem == 0 {
                out.push(cur.clone());
            }
            return out.len() <= cap;
        }
        if cur.len() + 1 == b {
            for v in [-rem, rem] {
                cur.push(v);
                let ok = rec(b, 0, cur, out, cap);
                cur.pop();
                if !ok {
                    return false;
                }
                if rem == 0 {
                    break;
                }
            }
            return true;
        }
        for v in -rem..=rem {
            cur.push(v);
            let ok = rec(b, rem - v.abs(), cur, out, cap);
            cur.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    let mut out = Vec::new();
    if b == 0 {
        return Ok(out);
    }
    for c in 1..=max as i64 {
        if !rec(b, c, &mut Vec::with_capacity(b), &mut out, MAX_CHARACTERS) {
            return Err(Error::Unsupported(format!("more than {MAX_CHARACTERS} characters requested")));
        }
    }
    Ok(out)
}

/// i-horizontal characters of complexity ≤ max: integer m on the
/// G_(i)/G_(i+1) block annihilating the weight-i part of every
/// [G_(j), G_(i−j)], 1 ≤ j < i.
pub fn horizontal_characters(group: &FilteredGroup, level: usize, max: u64) -> Result<Vec<HorizontalCharacter>> {
    if level == 0 || level > group.step() {
        return Err(Error::InvalidArgument(format!("level must be in 1..={}", group.step())));
    }
    let block: Vec<usize> = group.block(level).collect();
    let w = group.weights();
    let mut constraints: BTreeMap<(usize, usize), Vec<i64>> = BTreeMap::new();
    if level >= 2 {
        for br in group.brackets() {
            if w[br.a] + w[br.b] >= level && w[br.k] == level {
                let row = constraints.entry((br.a, br.b)).or_insert_with(|| vec![0; block.len()]);
                row[br.k - block[0]] += br.c;
            }
        }
    }
    Ok(integer_vectors(block.len(), max)?
        .into_iter()
        .filter(|m| constraints.values().all(|row| row.iter().zip(m).map(|(a, b)| a * b).sum::<i64>() == 0))
        .map(|m| HorizontalCharacter { level, m, coords: block.clone() })
        .collect())
}

/// Characters of the horizontal torus G/[G,G]Γ: integer m on the
/// coordinates that are not bracket targets.
pub fn abelian_characters(group: &FilteredGroup, max: u64) -> Result<Vec<HorizontalCharacter>> {
    let coords: Vec<usize> =
        (0..group.dim()).filter(|&j| !group.brackets().iter().any(|br| br.k == j)).collect();
    Ok(integer_vectors(coords.len(), max)?
        .into_iter()
        .map(|m| HorizontalCharacter { level: 1, m, coords: coords.clone() })
        .collect())
}

/// Binomial-basis coefficients of n ↦ η(g(n)) for an abelian character η.
pub fn character_along<S: Scalar>(seq: &PolySequence<S>, chi: &HorizontalCharacter) -> Vec<(Vec<usize>, S)> {
    seq.taylor().iter().enumerate().map(|(i, g)| (vec![i], chi.eval(g))).collect()
}

/// Largest A ≤ min(maxA, N) with ‖ξ_i(g_i)‖ ≥ A/N^i for every level i and
/// every i-horizontal character of complexity ≤ A; 0 if A = 1 fails.
pub fn irrationality_score<S: Scalar>(seq: &PolySequence<S>, n: u64, max_a: u64) -> Result<u64> {
    if max_a < 1 || n < 1 {
        return Err(Error::InvalidArgument("maxA and N must be >= 1".into()));
    }
    let cap = max_a.min(n);
    let mut score = cap;
    for level in 1..=seq.group().step() {
        let gi = seq.coefficient(level);
        let scale = libm::pow(n as f64, level as f64);
        for chi in horizontal_characters(seq.group(), level, cap)? {
            // This character rules out every A ≥ its complexity with A > ‖ξ‖ N^i.
            let d = chi.eval(&gi).dist_z_f64() * scale;
            let kill = chi.complexity().max(libm::floor(d) as u64 + 1);
            score = score.min(kill - 1);
        }
    }
    Ok(score)
}

/// g_i = β·g′·γ with β small along m, γ rational and ξ(g′) = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorisation {
    pub beta: GroupElement<Rational>,
    pub gprime: GroupElement<Rational>,
    pub gamma: GroupElement<Rational>,
    pub t: Vec<Rational>,
    pub u: Vec<Rational>,
    pub v: Vec<Rational>,
    /// ξ(g_i) − p/q
    pub epsilon: Rational,
    /// p/q
    pub nearest: Rational,
}

/// Splits the block coordinates x of g_i as x = t + u + v with
/// t = ε m/|m|², v = (p/q) m/|m|² and m·u = 0, where p/q is the best
/// approximation of ξ(g_i) with q ≤ max_denominator.
pub fn factor_coefficient(
    group: &FilteredGroup,
    level: usize,
    gi: &GroupElement<Rational>,
    chi: &HorizontalCharacter,
    max_denominator: u64,
) -> Result<Factorisation> {
    if chi.m.iter().all(|&x| x == 0) {
        return Err(Error::Infeasible("trivial character".into()));
    }
    if chi.level != level || gi.coords.len() != group.dim() {
        return Err(Error::InvalidArgument("character level or element dimension mismatch".into()));
    }
    if !group.in_subgroup(gi, level) {
        return Err(Error::InvalidArgument(format!("g_i does not lie in G_({level})")));
    }
    let xi = chi.eval(gi);
    let nearest = best_approximation(&xi, max_denominator.max(1));
    let epsilon = &xi - &nearest;
    let norm2 = int(chi.m.iter().map(|x| x * x).sum());
    let dir: Vec<Rational> = chi.m.iter().map(|&x| int(x) / &norm2).collect();
    let t: Vec<Rational> = dir.iter().map(|d| d * &epsilon).collect();
    let v: Vec<Rational> = dir.iter().map(|d| d * &nearest).collect();
    let x: Vec<Rational> = chi.coords.iter().map(|&j| gi.coords[j].clone()).collect();
    let u: Vec<Rational> = x.iter().zip(&t).zip(&v).map(|((x, t), v)| x - t - v).collect();
    let lift = |w: &[Rational]| {
        let mut e = group.identity::<Rational>();
        for (&j, c) in chi.coords.iter().zip(w) {
            e.coords[j] = c.clone();
        }
        e
    };
    let beta = lift(&t);
    let gamma = lift(&v);
    let gprime = group.mul_unchecked(&group.mul_unchecked(&group.inv_unchecked(&beta), gi), &group.inv_unchecked(&gamma));
    Ok(Factorisation { beta, gprime, gamma, t, u, v, epsilon, nearest })
}

/// sup over |i| ≥ 1 of N^{|i|}·‖c_i‖_{R/Z} for a binomial-basis polynomial.
pub fn cinf_norm<S: Scalar>(poly: &[(Vec<usize>, S)], n: u64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    Ok(poly
        .iter()
        .filter(|(i, _)| i.iter().sum::<usize>() >= 1)
        .map(|(i, c)| libm::pow(n as f64, i.iter().sum::<usize>() as f64) * c.dist_z_f64())
        .fold(0.0, f64::max))
}

fn stirling2(k: usize, j: usize) -> Rational {
    // S(k, j) = (1/j!) Σ_l (−1)^l C(j,l) (j−l)^k
    let mut acc = Rational::zero();
    for l in 0..=j {
        let term = binom(j as i64, l) * num_traits::pow(int((j - l) as i64), k);
        acc = if l % 2 == 0 { acc + term } else { acc - term };
    }
    let fact = (1..=j as i64).fold(Rational::one(), |a, x| a * int(x));
    acc / fact
}

/// Converts monomial coefficients {x^α: c} to binomial coefficients
/// {C(x, i): c} using x^k = Σ_j S(k,j) j! C(x,j).
pub fn monomial_to_binomial(poly: &[(Vec<usize>, Rational)]) -> Vec<(Vec<usize>, Rational)> {
    let mut out: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    for (alpha, c) in poly {
        let mut partial: Vec<(Vec<usize>, Rational)> = vec![(Vec::new(), c.clone())];
        for &k in alpha {
            let mut next = Vec::new();
            for (idx, coef) in &partial {
                for j in 0..=k {
                    let f = stirling2(k, j) * (1..=j as i64).fold(Rational::one(), |a, x| a * int(x));
                    if f.is_zero() {
                        continue;
                    }
                    let mut i2 = idx.clone();
                    i2.push(j);
                    next.push((i2, coef * &f));
                }
            }
            partial = next;
        }
        for (idx, v) in partial {
            let e = out.entry(idx).or_insert_with(Rational::zero);
            *e += v;
        }
    }
    out.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

/// Rational numbers with |x| small relative to 1/N^i, as used by the
/// factorisation: max_j |t_j|·N^i.
pub fn scaled_size(t: &[Rational], n: u64, level: usize) -> Rational {
    let scale = num_traits::pow(int(n as i64), level);
    t.iter().map(|x| x.abs() * &scale).fold(Rational::zero(), |a, b| if b > a { b } else { a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn ms(v: &[HorizontalCharacter]) -> Vec<Vec<i64>> {
        v.iter().map(|c| c.m.clone()).collect()
    }

    #[test]
    fn character_enumeration() {
        let c = FilteredGroup::circle();
        assert_eq!(ms(&horizontal_characters(&c, 1, 2).unwrap()), vec![vec![-1], vec![1], vec![-2], vec![2]]);
        let h = FilteredGroup::heisenberg();
        assert!(horizontal_characters(&h, 2, 5).unwrap().is_empty());
        assert_eq!(
            ms(&horizontal_characters(&h, 1, 1).unwrap()),
            vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]
        );
        assert_eq!(integer_vectors(2, 3).unwrap().len(), 4 + 8 + 12);
        // a non-LCS filtration where level-2 characters survive
        let t = FilteredGroup::torus_with_degree(1, 2).unwrap();
        assert!(horizontal_characters(&t, 1, 3).unwrap().is_empty());
        assert_eq!(horizontal_characters(&t, 2, 1).unwrap().len(), 2);
    }

    #[test]
    fn irrationality_examples() {
        let c = FilteredGroup::circle();
        let half = PolySequence::linear(c.clone(), GroupElement { coords: vec![rat(1, 2)] }).unwrap();
        assert_eq!(irrationality_score(&half, 100, 10).unwrap(), 1);
        let zero = PolySequence::constant(c.clone(), c.identity::<Rational>()).unwrap();
        assert_eq!(irrationality_score(&zero, 100, 10).unwrap(), 0);
        let phi = (libm::sqrt(5.0) - 1.0) / 2.0;
        let gold = PolySequence::linear(c, GroupElement { coords: vec![phi] }).unwrap();
        // independent oracle: min over m ≤ 20 of ‖mφ‖ from the continued fraction
        let min_dist = (1..=20).map(|m| crate::scalar::dist_to_z_f64(m as f64 * phi)).fold(1.0, f64::min);
        assert!(min_dist >= 20.0 / 1e4);
        assert_eq!(irrationality_score(&gold, 10_000, 20).unwrap(), 20);
    }

    #[test]
    fn factorisation_examples() {
        let c = FilteredGroup::circle();
        let delta = rat(1, 1_000_000);
        let g = GroupElement { coords: vec![rat(1, 3) + &delta] };
        let chi = HorizontalCharacter { level: 1, m: vec![3], coords: vec![0] };
        let f = factor_coefficient(&c, 1, &g, &chi, 1).unwrap();
        assert_eq!(f.t, vec![delta.clone()]);
        assert_eq!(f.u, vec![rat(0, 1)]);
        assert_eq!(f.v, vec![rat(1, 3)]);
        assert!(chi.eval(&f.gprime).is_integer());

        let g = GroupElement { coords: vec![rat(5, 7)] };
        let chi7 = HorizontalCharacter { level: 1, m: vec![7], coords: vec![0] };
        let f = factor_coefficient(&c, 1, &g, &chi7, 1).unwrap();
        assert_eq!((f.t[0].clone(), f.u[0].clone(), f.v[0].clone()), (rat(0, 1), rat(0, 1), rat(5, 7)));

        let t2 = FilteredGroup::torus(2).unwrap();
        let x = rat(3, 11);
        let g = GroupElement { coords: vec![rat(1, 5) + &delta, x.clone()] };
        let chi = HorizontalCharacter { level: 1, m: vec![1, 0], coords: vec![0, 1] };
        let f = factor_coefficient(&t2, 1, &g, &chi, 5).unwrap();
        assert_eq!(f.t, vec![delta.clone(), rat(0, 1)]);
        assert_eq!(f.v, vec![rat(1, 5), rat(0, 1)]);
        assert_eq!(f.u, vec![rat(0, 1), x]);
        let back = t2.mul(&t2.mul(&f.beta, &f.gprime).unwrap(), &f.gamma).unwrap();
        assert_eq!(back, g);

        let zero = HorizontalCharacter { level: 1, m: vec![0, 0], coords: vec![0, 1] };
        assert!(matches!(factor_coefficient(&t2, 1, &g, &zero, 1), Err(Error::Infeasible(_))));
    }

    #[test]
    fn heisenberg_factorisation_recombines() {
        let h = FilteredGroup::heisenberg();
        let g = GroupElement { coords: vec![rat(1, 2) + rat(1, 1000), rat(2, 7), rat(3, 5)] };
        let chi = HorizontalCharacter { level: 1, m: vec![2, 0], coords: vec![0, 1] };
        let f = factor_coefficient(&h, 1, &g, &chi, 1).unwrap();
        let back = h.mul(&h.mul(&f.beta, &f.gprime).unwrap(), &f.gamma).unwrap();
        assert_eq!(back, g);
        assert!(chi.eval(&f.gprime).is_integer());
        assert_eq!(scaled_size(&f.t, 1000, 1), rat(1, 1));
    }

    #[test]
    fn cinf_examples() {
        let n = 1000u64;
        assert_eq!(cinf_norm(&[(vec![1], rat(1, 1000))], n).unwrap(), 1.0);
        assert_eq!(cinf_norm(&[(vec![0], rat(1, 3)), (vec![1], rat(5, 1)), (vec![2], rat(-2, 1))], n).unwrap(), 0.0);
        let v = cinf_norm(&[(vec![2], rat(3, 1_000_000))], n).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn monomial_conversion() {
        // n² = 2 C(n,2) + C(n,1)
        let b = monomial_to_binomial(&[(vec![2], rat(1, 1))]);
        assert_eq!(b, vec![(vec![1], rat(1, 1)), (vec![2], rat(2, 1))]);
        let b = monomial_to_binomial(&[(vec![1, 2], rat(3, 1))]);
        for n1 in -2..4i64 {
            for n2 in -2..4i64 {
                let val: Rational = b
                    .iter()
                    .map(|(i, c)| c * binom(n1, i[0]) * binom(n2, i[1]))
                    .fold(Rational::zero(), |a, x| a + x);
                assert_eq!(val, int(3 * n1 * n2 * n2));
            }
        }
    }
}
