//! Acceptance criteria, each checked against an independent oracle
//! (direct sums, explicit unitriangular matrices, brute-force partitions).

use std::f64::consts::PI;
use std::time::Instant;

use hofa_core::decompose::{regularize, FourierOracle, Growth, RegularizeOptions};
use hofa_core::forms::{cs_complexity, leibman_dim, power_flag, LinearFormSystem};
use hofa_core::funcspace::{eval_expr, l2_norm, parse_expr, DomainSpec, SampledFunction};
use hofa_core::gowers::{gowers_norm, gowers_norm_with, u2_fft, GowersOptions};
use hofa_core::linalg::rank;
use hofa_core::nilgroup::{FilteredGroup, GroupElement, PolySequence};
use hofa_core::orbits::{counting_residual, equidist_witness, LeibmanGroup, Region};
use hofa_core::patterns::{bhk_verify_synthetic, gvn_check, AverageDomain, Construction};
use hofa_core::scalar::{int, rat};
use hofa_core::{Complex64, Rational};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cli::count_lemma_function;

pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!("criterion {}: {} [{}] {}", self.id, if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

type Check = fn() -> Result<(bool, String), String>;

const CRITERIA: [(u32, &str, Check); 11] = [
    (1, "u2 fft matches the quadruple sum", c1_u2_identity),
    (2, "quadratic phase U2 value", c2_gauss),
    (3, "interval norms independent of the embedding", c3_embedding),
    (4, "Cauchy-Schwarz complexity", c4_complexity),
    (5, "power flag and Leibman group", c5_flag_leibman),
    (6, "polynomial sequences closed under products", c6_products),
    (7, "counting lemma on the Heisenberg nilmanifold", c7_counting),
    (8, "von Neumann bound for cyclic progressions", c8_gvn),
    (9, "regularity decomposition", c9_regularize),
    (10, "weighted progression counts", c10_bhk),
    (11, "eccentric ball normality", c11_normality),
];

/// Runs the listed criteria (all when `only` is empty).
pub fn run(only: &[u32]) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .filter(|(id, _, _)| only.is_empty() || only.contains(id))
        .map(|&(id, name, check)| {
            let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
            CriterionResult { id, name, pass, detail }
        })
        .collect()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::from_polar(rng.random::<f64>(), 2.0 * PI * rng.random::<f64>())).collect()
}

/// Σ_{x,h1,h2} f(x) f̄(x+h1) f̄(x+h2) f(x+h1+h2) / N³, literally.
fn u2_power_direct(v: &[Complex64]) -> f64 {
    let n = v.len();
    let mut total = Complex64::new(0.0, 0.0);
    for x in 0..n {
        for h1 in 0..n {
            let a = v[x] * v[(x + h1) % n].conj();
            let mut row = Complex64::new(0.0, 0.0);
            for h2 in 0..n {
                row += v[(x + h2) % n].conj() * v[(x + h1 + h2) % n];
            }
            total += a * row;
        }
    }
    total.re / (n * n * n) as f64
}

fn c1_u2_identity() -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut fft_time = 0.0;
    for _ in 0..100 {
        let f = SampledFunction::new(DomainSpec::Cyclic(128), random_unit(&mut rng, 128)).map_err(err)?;
        let t = Instant::now();
        let u = u2_fft(&f).map_err(err)?.norm;
        fft_time += t.elapsed().as_secs_f64();
        let direct = u2_power_direct(f.values()).max(0.0).powf(0.25);
        worst = worst.max((u - direct).abs());
    }
    Ok((worst <= 1e-9 && fft_time < 2.0, format!("max |diff| = {worst:.2e}, u2_fft total {fft_time:.3} s")))
}

fn c2_gauss() -> Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    let mut worst_coeff: f64 = 0.0;
    for n in [101usize, 257] {
        let vals: Vec<Complex64> =
            (0..n).map(|x| Complex64::from_polar(1.0, 2.0 * PI * ((x * x) % n) as f64 / n as f64)).collect();
        // |f̂(ξ)| = N^{-1/2} for every ξ, so Σ|f̂|^4 = N^{-1}.
        for xi in 0..n {
            let c: Complex64 = vals
                .iter()
                .enumerate()
                .map(|(x, v)| v * Complex64::from_polar(1.0, -2.0 * PI * ((x * xi) % n) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64;
            worst_coeff = worst_coeff.max((c.norm() - (n as f64).powf(-0.5)).abs());
        }
        let f = SampledFunction::new(DomainSpec::Cyclic(n), vals).map_err(err)?;
        let expected = (n as f64).powf(-0.25);
        for u in [u2_fft(&f).map_err(err)?.norm, gowers_norm(&f, 2).map_err(err)?.norm] {
            worst = worst.max((u - expected).abs());
        }
    }
    Ok((worst <= 1e-9 && worst_coeff <= 1e-9, format!("max |U2 - N^(-1/4)| = {worst:.2e}, max ||f^|-N^(-1/2)| = {worst_coeff:.2e}")))
}

fn c3_embedding() -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 24;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = SampledFunction::new(DomainSpec::Interval(n), random_unit(&mut rng, n)).map_err(err)?;
        for k in 1..=3u32 {
            let base = n << k;
            let a = gowers_norm_with(&f, k, &GowersOptions { ntilde: Some(base), ..Default::default() }).map_err(err)?;
            let b =
                gowers_norm_with(&f, k, &GowersOptions { ntilde: Some(base + 7), ..Default::default() }).map_err(err)?;
            worst = worst.max((a.norm - b.norm).abs());
        }
    }
    let mut exact = true;
    for c in [0.0, 0.3, 1.0, 0.8125] {
        let f = SampledFunction::constant(DomainSpec::Interval(n), Complex64::new(c, 0.0)).map_err(err)?;
        for k in 1..=3u32 {
            for nt in [n << k, (n << k) + 7] {
                let r = gowers_norm_with(&f, k, &GowersOptions { ntilde: Some(nt), ..Default::default() })
                    .map_err(err)?;
                exact &= r.norm == c;
            }
        }
    }
    Ok((worst <= 1e-9 && exact, format!("max |diff| over Ntilde = {worst:.2e}, constants exact: {exact}")))
}

/// Least s such that, for each i, the other forms can be assigned to
/// s+1 classes none of whose spans contains ψ_i (all assignments tried).
fn complexity_brute_force(psi: &LinearFormSystem) -> usize {
    let rows: Vec<Vec<Rational>> = psi.coeffs().iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
    let t = rows.len();
    let in_span = |class: &[usize], target: usize| {
        let mut m: Vec<Vec<Rational>> = class.iter().map(|&j| rows[j].clone()).collect();
        let r0 = rank(&m);
        m.push(rows[target].clone());
        rank(&m) == r0
    };
    let classes_needed = |i: usize| {
        let others: Vec<usize> = (0..t).filter(|&j| j != i).collect();
        for c in 1..=others.len() {
            let total = c.pow(others.len() as u32);
            for code in 0..total {
                let mut groups = vec![Vec::new(); c];
                let mut x = code;
                for &j in &others {
                    groups[x % c].push(j);
                    x /= c;
                }
                if groups.iter().all(|g| !in_span(g, i)) {
                    return c;
                }
            }
        }
        others.len()
    };
    (0..t).map(classes_needed).max().unwrap_or(1).saturating_sub(1)
}

fn c4_complexity() -> Result<(bool, String), String> {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in 3..=5 {
        let psi = LinearFormSystem::arithmetic_progression(k).map_err(err)?;
        let s = cs_complexity(&psi).map_err(err)?;
        let oracle = complexity_brute_force(&psi);
        ok &= s == k - 2 && oracle == s;
        parts.push(format!("AP{k}: {s} (oracle {oracle})"));
    }
    let par = LinearFormSystem::parallelepiped(2).map_err(err)?;
    let s = cs_complexity(&par).map_err(err)?;
    let oracle = complexity_brute_force(&par);
    ok &= s == 1 && oracle == 1;
    parts.push(format!("parallelepiped(2): {s} (oracle {oracle})"));
    Ok((ok, parts.join(", ")))
}

/// Heisenberg element (a, b, c) as the matrix [[1, a, c], [0, 1, b], [0, 0, 1]].
type Mat = [[Rational; 3]; 3];

fn mat(g: &GroupElement<Rational>) -> Mat {
    let (o, z) = (int(1), int(0));
    let c = &g.coords;
    [[o.clone(), c[0].clone(), c[2].clone()], [z.clone(), o.clone(), c[1].clone()], [z.clone(), z, o]]
}

fn mat_mul(x: &Mat, y: &Mat) -> Mat {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).fold(int(0), |acc, k| acc + &x[i][k] * &y[k][j])))
}

fn mat_inv(x: &Mat) -> Mat {
    let (a, b, c) = (&x[0][1], &x[1][2], &x[0][2]);
    let r = [[int(1), -a.clone(), a * b - c], [int(0), int(1), -b.clone()], [int(0), int(0), int(1)]];
    debug_assert_eq!(mat_mul(x, &r), mat(&GroupElement { coords: vec![int(0), int(0), int(0)] }));
    r
}

fn mat_pow(x: &Mat, m: i64) -> Mat {
    let base = if m < 0 { mat_inv(x) } else { x.clone() };
    let mut r = mat(&GroupElement { coords: vec![int(0), int(0), int(0)] });
    for _ in 0..m.unsigned_abs() {
        r = mat_mul(&r, &base);
    }
    r
}

fn coords(m: &Mat) -> [Rational; 3] {
    [m[0][1].clone(), m[1][2].clone(), m[0][2].clone()]
}

/// g(n) = g_0 g_1^n g_2^{C(n,2)} by repeated matrix multiplication.
fn eval_by_matrices(taylor: &[GroupElement<Rational>], n: i64) -> Mat {
    let mut r = mat(&taylor[0]);
    r = mat_mul(&r, &mat_pow(&mat(&taylor[1]), n));
    if let Some(g2) = taylor.get(2) {
        r = mat_mul(&r, &mat_pow(&mat(g2), n * (n - 1) / 2));
    }
    r
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.random_range(-9..=9), rng.random_range(1..=6))
}

fn random_heisenberg_sequence(rng: &mut ChaCha8Rng) -> Vec<GroupElement<Rational>> {
    let mut el = |central: bool| GroupElement {
        coords: if central {
            vec![int(0), int(0), random_rational(rng)]
        } else {
            vec![random_rational(rng), random_rational(rng), random_rational(rng)]
        },
    };
    vec![el(false), el(false), el(true)]
}

#[allow(clippy::needless_range_loop)]
fn c5_flag_leibman() -> Result<(bool, String), String> {
    let ap4 = LinearFormSystem::arithmetic_progression(4).map_err(err)?;
    let flag = power_flag(&ap4, 3).map_err(err)?;
    let explicit: Vec<Vec<i64>> = vec![vec![1, 1, 1, 1], vec![0, 1, 2, 3], vec![0, 0, 1, 3], vec![0, 0, 0, 1]];
    let powers: Vec<Vec<i64>> = (0..4u32).map(|p| (0..4i64).map(|j| j.pow(p)).collect()).collect();
    let mut flag_ok = flag.dims == vec![2, 3, 4];
    flag_ok &= flag.basis.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()
        == explicit.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>();
    for level in 1..=3usize {
        let m = flag.dims[level - 1];
        // Ψ^[level] = span of the coordinatewise powers j^p, p ≤ level.
        let spanning: Vec<Vec<Rational>> =
            powers[..=level].iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        let mut both = spanning.clone();
        both.extend(explicit[..m].iter().map(|r| r.iter().map(|&x| int(x)).collect()));
        flag_ok &= rank(&spanning) == m && rank(&both) == m;
        for p in &powers[..=level] {
            let v: Vec<BigInt> = p.iter().map(|&x| BigInt::from(x)).collect();
            flag_ok &= flag.contains(&v, level);
        }
    }

    let h = FilteredGroup::heisenberg();
    let lg = LeibmanGroup::new(h.clone(), ap4.clone()).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut member_ok, mut constraint_ok, mut reject_ok) = (true, true, true);
    for _ in 0..100 {
        let taylor = random_heisenberg_sequence(&mut rng);
        let seq = PolySequence::new(h.clone(), taylor.clone()).map_err(err)?;
        let n = rng.random_range(-10..=10);
        let d = rng.random_range(-5..=5);
        let tuple: Vec<GroupElement<Rational>> = (0..4).map(|j| seq.eval(n + j * d)).collect();
        let oracle: Vec<[Rational; 3]> = (0..4).map(|j| coords(&eval_by_matrices(&taylor, n + j * d))).collect();
        member_ok &= tuple.iter().zip(&oracle).all(|(g, o)| g.coords.as_slice() == o.as_slice());
        // Horizontal parts are linear in j, the top coordinate quadratic.
        for c in 0..3 {
            let alt = oracle[0][c].clone() - int(3) * &oracle[1][c] + int(3) * &oracle[2][c] - &oracle[3][c];
            constraint_ok &= alt == int(0);
        }
        for c in 0..2 {
            constraint_ok &= oracle[0][c].clone() - int(2) * &oracle[1][c] + &oracle[2][c] == int(0);
        }
        member_ok &= lg.contains(&tuple).map_err(err)?;
        let mut bad = tuple.clone();
        bad[3].coords[2] = bad[3].coords[2].clone() + rat(1, 3);
        reject_ok &= !lg.contains(&bad).map_err(err)?;
    }

    // Lie algebra of G^Ψ: X_j ⊗ v for X_j of weight ≥ i and v ∈ Ψ^[i],
    // closed under [X_a ⊗ v, X_b ⊗ w] = c X_k ⊗ (v·w).
    let lflag = lg.flag();
    let level_vectors = |i: usize| -> Vec<Vec<Rational>> {
        let m = lflag.dims[i.min(lflag.s) - 1];
        lflag.basis[..m].iter().map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect()
    };
    let t = ap4.t();
    let mut gens: Vec<(usize, Vec<Rational>)> = Vec::new();
    for (j, &w) in h.weights().iter().enumerate() {
        for i in 1..=w {
            for v in level_vectors(i) {
                gens.push((j, v));
            }
        }
    }
    let mut all = gens.clone();
    for (a, v) in &gens {
        for (b, w) in &gens {
            for br in h.brackets() {
                if br.a == *a && br.b == *b {
                    let prod: Vec<Rational> = v.iter().zip(w).map(|(x, y)| int(br.c) * x * y).collect();
                    all.push((br.k, prod));
                }
            }
        }
    }
    let rows: Vec<Vec<Rational>> = all
        .iter()
        .map(|(j, v)| {
            let mut r = vec![int(0); 3 * t];
            for (comp, x) in v.iter().enumerate() {
                r[3 * comp + j] = x.clone();
            }
            r
        })
        .collect();
    let oracle_dim = rank(&rows);
    let ldim = leibman_dim(&lflag.dims, h.filtration_dims()).map_err(err)?;
    let dim_ok = ldim == 7 && oracle_dim == 7 && lg.dim() == 7;
    Ok((
        flag_ok && member_ok && constraint_ok && reject_ok && dim_ok,
        format!(
            "flag dims {:?}, 100 tuples members {member_ok}, (1,-3,3,-1) {constraint_ok}, perturbed rejected {reject_ok}, leibman_dim {ldim} (oracle {oracle_dim})",
            flag.dims
        ),
    ))
}

fn c6_products() -> Result<(bool, String), String> {
    let h = FilteredGroup::heisenberg();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut eval_ok, mut filt_ok, mut manual_ok) = (true, true, true);
    let is_central = |m: &Mat| m[0][1] == int(0) && m[1][2] == int(0);
    let is_id = |m: &Mat| is_central(m) && m[0][2] == int(0);
    for _ in 0..50 {
        let (tp, tq) = (random_heisenberg_sequence(&mut rng), random_heisenberg_sequence(&mut rng));
        let p = PolySequence::new(h.clone(), tp.clone()).map_err(err)?;
        let q = PolySequence::new(h.clone(), tq.clone()).map_err(err)?;
        let pq = p.product(&q).map_err(err)?;
        let g = |n: i64| mat_mul(&eval_by_matrices(&tp, n), &eval_by_matrices(&tq, n));
        for n in -4..=4 {
            eval_ok &= pq.eval(n).coords.as_slice() == coords(&g(n)).as_slice();
        }
        let hs: Vec<i64> = (0..3).map(|_| rng.random_range(-4..=4)).collect();
        for len in 1..=3 {
            filt_ok &= pq.derivative_in_filtration(&hs[..len]).map_err(err)?;
        }
        // ∂_h g(n) = g(n+h) g(n)^{-1}, iterated on the matrices.
        let d1 = |n: i64| mat_mul(&g(n + hs[0]), &mat_inv(&g(n)));
        let d2 = |n: i64| mat_mul(&d1(n + hs[1]), &mat_inv(&d1(n)));
        let d3 = |n: i64| mat_mul(&d2(n + hs[2]), &mat_inv(&d2(n)));
        let n = rng.random_range(-6..=6);
        manual_ok &= is_central(&d2(n)) && is_id(&d3(n));
    }
    Ok((
        eval_ok && filt_ok && manual_ok,
        format!("50 products: values match {eval_ok}, filtration test {filt_ok}, matrix derivatives {manual_ok}"),
    ))
}

fn c7_counting() -> Result<(bool, String), String> {
    let h = FilteredGroup::heisenberg();
    let ap3 = LinearFormSystem::arithmetic_progression(3).map_err(err)?;
    let f = count_lemma_function("cos2-vertical", &h, 3).map_err(err)?;
    let lg = LeibmanGroup::new(h.clone(), ap3).map_err(err)?;
    let region = Region::cube(2, 2000).map_err(err)?;
    let linear = |a: f64, b: f64| PolySequence::linear(h.clone(), GroupElement { coords: vec![a, b, 0.0] });
    let irr = linear(2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0).map_err(err)?;
    let r = counting_residual(&f, &irr, &lg, &region, 1_000_000, 7).map_err(err)?;
    // The coset integral of this F over an irrational 3-AP orbit is 1/8.
    let haar_ok = (r.haar.re - 0.125).abs() <= 5.0 * r.stderr + 1e-3;
    let ctrl = counting_residual(&f, &linear(0.5, 0.5).map_err(err)?, &lg, &region, 1_000_000, 7).map_err(err)?;
    let exact = PolySequence::linear(h.clone(), GroupElement { coords: vec![rat(1, 2), rat(1, 2), int(0)] }).map_err(err)?;
    let w = equidist_witness(&exact, 2000, 0.1, 4).map_err(err)?;
    let cinf = w.witness.as_ref().map(|x| x.cinf_norm);
    let pass = r.residual <= 0.05 && haar_ok && ctrl.residual >= 0.2 && cinf.is_some_and(|c| c <= 1.0);
    Ok((
        pass,
        format!(
            "irrational residual {:.4} (haar {:.4} ± {:.4}), rational residual {:.4}, witness cinf {:?}",
            r.residual, r.haar.re, r.stderr, ctrl.residual, cinf
        ),
    ))
}

/// E_{x,d ∈ Z_N} Π_i f_i(x + i d) by a double loop.
fn ap_average_direct(fs: &[SampledFunction]) -> Complex64 {
    let n = fs[0].len();
    let mut total = Complex64::new(0.0, 0.0);
    for x in 0..n {
        for d in 0..n {
            let mut p = Complex64::new(1.0, 0.0);
            for (i, f) in fs.iter().enumerate() {
                p *= f.values()[(x + i * d) % n];
            }
            total += p;
        }
    }
    total / (n * n) as f64
}

fn c8_gvn() -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst_margin, mut worst_lhs_diff) = (f64::NEG_INFINITY, 0.0f64);
    let mut failures = 0;
    for k in [3usize, 4] {
        let psi = LinearFormSystem::arithmetic_progression(k).map_err(err)?;
        for n in [32usize, 64] {
            for _ in 0..200 {
                let fs: Vec<SampledFunction> = (0..k)
                    .map(|_| SampledFunction::new(DomainSpec::Cyclic(n), random_unit(&mut rng, n)))
                    .collect::<Result<_, _>>()
                    .map_err(err)?;
                let g = gvn_check(&fs, &psi, &AverageDomain::Cyclic).map_err(err)?;
                let lhs = ap_average_direct(&fs).norm();
                worst_lhs_diff = worst_lhs_diff.max((lhs - g.lhs).abs());
                worst_margin = worst_margin.max(lhs - g.rhs);
                if lhs > g.rhs + 1e-6 || !g.pass {
                    failures += 1;
                }
            }
        }
    }
    Ok((
        failures == 0 && worst_lhs_diff <= 1e-9,
        format!("800 tuples, {failures} violations, max |Λ| - min‖f‖ = {worst_margin:.3}, |Λ| vs direct {worst_lhs_diff:.1e}"),
    ))
}

fn c9_regularize() -> Result<(bool, String), String> {
    let expr = parse_expr("clamp01(1/2 + 1/2*e(0.6180339887498949*n) + 0.05*random(sym, 1))").map_err(err)?;
    let f = eval_expr(&expr, DomainSpec::Interval(512)).map_err(err)?;
    let eps = 0.1;
    let opts = RegularizeOptions { growth: Growth::Exponential, ..Default::default() };
    let r = regularize(&f, 1, eps, &FourierOracle, &opts).map_err(err)?;
    let add = (0..f.len())
        .map(|i| (f.values()[i] - r.f_nil.values()[i] - r.f_sml.values()[i] - r.f_unf.values()[i]).norm())
        .fold(0.0, f64::max);
    let l2 = l2_norm(&r.f_sml);
    let direct_l2 = (r.f_sml.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / f.len() as f64).sqrt();
    let u2 = gowers_norm(&r.f_unf, 2).map_err(err)?.norm;
    let in01 = |v: Complex64| v.im.abs() <= 1e-12 && v.re >= -1e-12 && v.re <= 1.0 + 1e-12;
    let nonneg = r.f_nil.values().iter().all(|&v| in01(v))
        && r.f_nil.values().iter().zip(r.f_sml.values()).all(|(&a, &b)| in01(a + b));
    let max_rounds = (4.0 / (eps * eps)).ceil() as usize;
    let pass = add <= 1e-12
        && direct_l2 <= eps
        && (l2 - direct_l2).abs() <= 1e-12
        && u2 <= 1.0 / r.grow_m + 1e-12
        && nonneg
        && r.certificates.all()
        && r.rounds.len() <= max_rounds;
    Ok((
        pass,
        format!(
            "M = {}, cells {}, ‖f_sml‖₂ = {direct_l2:.4}, ‖f_unf‖_U2 = {u2:.2e} (budget {:.1e}), additivity {add:.1e}, rounds {}",
            r.m,
            r.complexity,
            1.0 / r.grow_m,
            r.rounds.len()
        ),
    ))
}

/// E_{n ∈ [N], d ∈ [−N, N]} Π_{i<k} 1_A(n + i d) μ(d), looping over the
/// support of μ only.
fn weighted_count_direct(a: &SampledFunction, k: usize, weight: impl Fn(i64) -> f64) -> f64 {
    let n = a.len() as i64;
    let member = |x: i64| x >= 1 && x <= n && a.values()[(x - 1) as usize].re == 1.0;
    let mut total = 0.0;
    for d in -n..=n {
        let w = weight(d);
        if w == 0.0 {
            continue;
        }
        let count = (1..=n).filter(|&x| (0..k as i64).all(|i| member(x + i * d))).count();
        total += w * count as f64 / n as f64;
    }
    total / (2 * n + 1) as f64
}

fn c10_bhk() -> Result<(bool, String), String> {
    let bohr = Construction::Bohr { alpha: 0.618, delta: 0.15 };
    let r3 = bhk_verify_synthetic(3, &bohr, 0.05, 5000, None).map_err(err)?;
    let a3 = bohr.indicator(5000).map_err(err)?;
    let direct3 = weighted_count_direct(&a3, 3, |d| r3.weight.at(d));
    let ok3 = r3.weighted_count >= 0.3f64.powi(3) - 0.05
        && r3.good_difference_fraction >= 0.01
        && (direct3 - r3.weighted_count).abs() <= 1e-9
        && r3.weight.normalized;

    let heis = Construction::HeisenbergLevel { level: 0.4 };
    let r4 = bhk_verify_synthetic(4, &heis, 0.05, 3000, None).map_err(err)?;
    let a4 = heis.indicator(3000).map_err(err)?;
    let direct4 = weighted_count_direct(&a4, 4, |d| r4.weight.at(d));
    let ok4 = r4.weighted_count >= r4.alpha.powi(4) - 0.1
        && (direct4 - r4.weighted_count).abs() <= 1e-9
        && !r4.positivity.is_empty()
        && r4.positivity_holds();
    Ok((
        ok3 && ok4,
        format!(
            "k=3: α {:.3}, count {:.3} (direct {:.3}), good {:.3}; k=4: α {:.3}, count {:.3} ≥ {:.3}, positivity {}/{}",
            r3.alpha,
            r3.weighted_count,
            direct3,
            r3.good_difference_fraction,
            r4.alpha,
            r4.weighted_count,
            r4.alpha.powi(4) - 0.1,
            r4.positivity.iter().filter(|p| p.holds).count(),
            r4.positivity.len()
        ),
    ))
}

/// Heisenberg product on f64 coordinates via the matrix entries.
fn heis_mul(x: &[f64], y: &[f64]) -> Vec<f64> {
    vec![x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1]]
}

fn heis_inv(x: &[f64]) -> Vec<f64> {
    vec![-x[0], -x[1], x[0] * x[1] - x[2]]
}

fn c11_normality() -> Result<(bool, String), String> {
    let h = FilteredGroup::heisenberg();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (r, delta) = (0.01, 0.2);
    let mut failures = 0;
    let mut probes = 0;
    while probes < 10_000 {
        let g = GroupElement { coords: (0..3).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>() };
        if h.dist(&g, &h.identity()) > 2.0 {
            continue;
        }
        let gi = heis_inv(&g.coords);
        for _ in 0..50 {
            let x = h.sample_eccentric_ball((1.0 - delta) * r, &mut rng);
            let inner = GroupElement { coords: heis_mul(&heis_mul(&gi, &x.coords), &g.coords) };
            let y = h.sample_eccentric_ball(r, &mut rng);
            let outer = GroupElement { coords: heis_mul(&heis_mul(&g.coords, &y.coords), &gi) };
            if !h.in_eccentric_ball(&inner, r) {
                failures += 1;
            }
            if !h.in_eccentric_ball(&outer, (1.0 + delta) * r) {
                failures += 1;
            }
            probes += 2;
        }
    }
    Ok((failures == 0, format!("{failures} containment failures in {probes} probes")))
}
