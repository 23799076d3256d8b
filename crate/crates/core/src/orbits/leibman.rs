//! The Leibman group G^Ψ ≤ G^t of a form system.
//!
//! Normal form: x = Q_1 Q_2 … Q_s with Q_i = Π_{j < m_i} h_{ij}^{v_j}, where
//! v_j is the j-th power-flag basis row and h_{ij} has coordinates only on
//! the G_(i)/G_(i+1) block. A tuple lies in G^Ψ exactly when, level by
//! level, its weight-i coordinate vectors lie in Ψ^[i].

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::forms::{eval_forms, leibman_dim, power_flag, LinearFormSystem, PowerFlag};
use crate::nilgroup::{FilteredGroup, GroupElement, PolySequence};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone)]
pub struct LeibmanGroup {
    group: FilteredGroup,
    psi: LinearFormSystem,
    flag: PowerFlag,
    basis: Vec<Vec<Rational>>,
}

/// Coefficients of w in the echelon rows (first-nonzero pivots), or None.
fn solve_echelon<S: Scalar>(rows: &[Vec<S>], pivots: &[usize], w: &[S]) -> Option<Vec<S>> {
    let mut r = w.to_vec();
    let mut coef = Vec::with_capacity(rows.len());
    for (row, &p) in rows.iter().zip(pivots) {
        let a = r[p].clone() / row[p].clone();
        for (x, y) in r.iter_mut().zip(row) {
            *x = x.clone() - a.clone() * y.clone();
        }
        coef.push(a);
    }
    r.iter().all(|x| x.near(&S::zero())).then_some(coef)
}

impl LeibmanGroup {
    pub fn new(group: FilteredGroup, psi: LinearFormSystem) -> Result<Self> {
        if group.step() > 2 && !group.is_abelian() {
            return Err(Error::Unsupported("Leibman groups need a step <= 2 filtration or a torus".into()));
        }
        let flag = power_flag(&psi, group.step())?;
        let basis = flag.basis.iter().map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect();
        Ok(LeibmanGroup { group, psi, flag, basis })
    }

    pub fn group(&self) -> &FilteredGroup {
        &self.group
    }

    pub fn psi(&self) -> &LinearFormSystem {
        &self.psi
    }

    pub fn flag(&self) -> &PowerFlag {
        &self.flag
    }

    pub fn dim(&self) -> usize {
        leibman_dim(&self.flag.dims, self.group.filtration_dims()).expect("flag depth equals the group degree")
    }

    /// Parameter slots (level, flag row, group coordinate) of the normal form.
    pub fn slots(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 1..=self.group.step() {
            for j in 0..self.flag.dims[i - 1] {
                for c in self.group.block(i) {
                    out.push((i, j, c));
                }
            }
        }
        out
    }

    fn rows<S: Scalar>(&self, m: usize) -> Vec<Vec<S>> {
        self.basis[..m].iter().map(|r| r.iter().map(S::from_rational).collect()).collect()
    }

    fn tuple_mul<S: Scalar>(&self, x: &[GroupElement<S>], y: &[GroupElement<S>]) -> Vec<GroupElement<S>> {
        x.iter().zip(y).map(|(a, b)| self.group.mul_unchecked(a, b)).collect()
    }

    /// Q_i from its block coefficients, indexed [row][block coordinate].
    fn level_factor<S: Scalar>(&self, level: usize, coefs: &[Vec<S>]) -> Vec<GroupElement<S>> {
        let g = &self.group;
        let block: Vec<usize> = g.block(level).collect();
        let rows = self.rows::<S>(coefs.len());
        let mut acc: Vec<GroupElement<S>> = (0..self.psi.t()).map(|_| g.identity()).collect();
        for (row, cs) in rows.iter().zip(coefs) {
            let mut h = g.identity::<S>();
            for (&c, v) in block.iter().zip(cs) {
                h.coords[c] = v.clone();
            }
            let hv: Vec<GroupElement<S>> = row.iter().map(|e| g.pow(&h, e)).collect();
            acc = self.tuple_mul(&acc, &hv);
        }
        acc
    }

    /// Tuple with the given normal-form parameters (in `slots` order).
    pub fn compose<S: Scalar>(&self, params: &[S]) -> Result<Vec<GroupElement<S>>> {
        if params.len() != self.dim() {
            return Err(Error::InvalidArgument(format!("expected {} parameters, got {}", self.dim(), params.len())));
        }
        let g = &self.group;
        let mut acc: Vec<GroupElement<S>> = (0..self.psi.t()).map(|_| g.identity()).collect();
        let mut k = 0;
        for i in 1..=g.step() {
            let bw = g.block(i).len();
            let m = self.flag.dims[i - 1];
            let coefs: Vec<Vec<S>> = (0..m).map(|j| params[k + j * bw..k + (j + 1) * bw].to_vec()).collect();
            k += m * bw;
            acc = self.tuple_mul(&acc, &self.level_factor(i, &coefs));
        }
        Ok(acc)
    }

    /// Normal-form parameters of a tuple, or None if it is not in G^Ψ.
    pub fn decompose<S: Scalar>(&self, tuple: &[GroupElement<S>]) -> Result<Option<Vec<S>>> {
        let g = &self.group;
        if tuple.len() != self.psi.t() || tuple.iter().any(|x| x.coords.len() != g.dim()) {
            return Err(Error::InvalidArgument(format!("expected {} elements of G", self.psi.t())));
        }
        let mut r = tuple.to_vec();
        let mut params = Vec::with_capacity(self.dim());
        for i in 1..=g.step() {
            let m = self.flag.dims[i - 1];
            let rows = self.rows::<S>(m);
            let pivots = &self.flag.pivots[..m];
            let block: Vec<usize> = g.block(i).collect();
            let mut coefs: Vec<Vec<S>> = (0..m).map(|_| Vec::with_capacity(block.len())).collect();
            for &c in &block {
                let w: Vec<S> = r.iter().map(|x| x.coords[c].clone()).collect();
                let Some(a) = solve_echelon(&rows, pivots, &w) else { return Ok(None) };
                for (j, v) in a.into_iter().enumerate() {
                    coefs[j].push(v);
                }
            }
            let q = self.level_factor(i, &coefs);
            let qi: Vec<GroupElement<S>> = q.iter().map(|x| g.inv_unchecked(x)).collect();
            r = self.tuple_mul(&qi, &r);
            for c in coefs {
                params.extend(c);
            }
        }
        let done = r.iter().all(|x| x.coords.iter().all(|c| c.near(&S::zero())));
        Ok(done.then_some(params))
    }

    pub fn contains<S: Scalar>(&self, tuple: &[GroupElement<S>]) -> Result<bool> {
        Ok(self.decompose(tuple)?.is_some())
    }

    /// Haar-random point of base^Δ·G^Ψ Γ^t/Γ^t: uniform parameters in
    /// [0,1), left translation by the diagonal base, componentwise reduction.
    pub fn haar_sample<R: Rng>(&self, base: &GroupElement<f64>, rng: &mut R) -> Vec<GroupElement<f64>> {
        let params: Vec<f64> = (0..self.dim()).map(|_| rng.random::<f64>()).collect();
        let x = self.compose(&params).expect("parameter count matches");
        x.iter()
            .map(|p| self.group.reduce_rep(&self.group.mul_unchecked(base, p)))
            .collect()
    }
}

/// g^Ψ(n) = (g(ψ_1(n)), …, g(ψ_t(n)))
pub fn leibman_orbit_point<S: Scalar>(
    seq: &PolySequence<S>,
    psi: &LinearFormSystem,
    n: &[i64],
) -> Result<Vec<GroupElement<S>>> {
    Ok(eval_forms(psi, n)?.into_iter().map(|m| seq.eval(m)).collect())
}

/// Flattened reduced coordinates of a tuple, the input format of
/// tuple functions.
pub fn flatten(tuple: &[GroupElement<f64>]) -> Vec<f64> {
    tuple.iter().flat_map(|x| x.coords.iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rq(rng: &mut ChaCha8Rng) -> Rational {
        rat(rng.random_range(-20..20), rng.random_range(1..6))
    }

    #[test]
    fn four_ap_on_heisenberg() {
        let h = FilteredGroup::heisenberg();
        let lg = LeibmanGroup::new(h.clone(), LinearFormSystem::arithmetic_progression(4).unwrap()).unwrap();
        assert_eq!(lg.dim(), 7);
        assert_eq!(lg.slots().len(), 7);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let g0 = GroupElement { coords: vec![rq(&mut rng), rq(&mut rng), rq(&mut rng)] };
            let g1 = GroupElement { coords: vec![rq(&mut rng), rq(&mut rng), rq(&mut rng)] };
            let g2 = GroupElement { coords: vec![int(0), int(0), rq(&mut rng)] };
            let m = |a: &GroupElement<Rational>, b: &GroupElement<Rational>| h.mul(a, b).unwrap();
            let p = |a: &GroupElement<Rational>, k: i64| h.pow(a, &int(k));
            let tuple = vec![
                g0.clone(),
                m(&g0, &g1),
                m(&m(&g0, &p(&g1, 2)), &g2),
                m(&m(&g0, &p(&g1, 3)), &p(&g2, 3)),
            ];
            let params = lg.decompose(&tuple).unwrap().expect("Hall–Petresco tuple");
            assert_eq!(lg.compose(&params).unwrap(), tuple);
            // perturbing the last vertical coordinate breaks (1,−3,3,−1)
            let mut bad = tuple.clone();
            bad[3].coords[2] += rat(1, 7);
            assert!(!lg.contains(&bad).unwrap());
        }
    }

    #[test]
    fn abelian_membership_is_linear() {
        let t = FilteredGroup::torus(2).unwrap();
        let lg = LeibmanGroup::new(t, LinearFormSystem::arithmetic_progression(3).unwrap()).unwrap();
        assert_eq!(lg.dim(), 4);
        let ok = vec![GroupElement::from_i64(&[1, 2]), GroupElement::from_i64(&[3, 5]), GroupElement::from_i64(&[5, 8])];
        assert!(lg.contains(&ok).unwrap());
        let bad = vec![GroupElement::from_i64(&[1, 2]), GroupElement::from_i64(&[3, 5]), GroupElement::from_i64(&[5, 9])];
        assert!(!lg.contains(&bad).unwrap());
    }

    #[test]
    fn three_ap_samples_lie_on_the_subtorus() {
        let c = FilteredGroup::circle();
        let lg = LeibmanGroup::new(c.clone(), LinearFormSystem::arithmetic_progression(3).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let base = GroupElement { coords: vec![0.3] };
        for _ in 0..200 {
            let x = lg.haar_sample(&base, &mut rng);
            let v = x[0].coords[0] - 2.0 * x[1].coords[0] + x[2].coords[0];
            assert!(crate::scalar::dist_to_z_f64(v) < 1e-12);
        }
        let single = LeibmanGroup::new(c, LinearFormSystem::new(vec![vec![1]]).unwrap()).unwrap();
        assert_eq!(single.dim(), 1);
    }
}
