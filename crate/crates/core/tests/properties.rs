use hofa_core::decompose::{conditional_expectation, energy, Factor};
use hofa_core::forms::LinearFormSystem;
use hofa_core::funcspace::{DomainSpec, SampledFunction};
use hofa_core::gowers::gowers_norm;
use hofa_core::nilgroup::{FilteredGroup, GroupElement};
use hofa_core::patterns::{ap_profile, multilinear_average, AverageDomain};
use hofa_core::scalar::rat;
use hofa_core::Complex64;
use proptest::prelude::*;

fn cyclic(values: &[(f64, f64)]) -> SampledFunction {
    let v = values.iter().map(|&(r, t)| Complex64::from_polar(r, t)).collect();
    SampledFunction::new(DomainSpec::Cyclic(values.len()), v).unwrap()
}

fn unit_values(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..=1.0f64, 0.0..6.3f64), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn average_is_bounded_by_sup_norms(a in unit_values(12), b in unit_values(12), c in unit_values(12)) {
        let fs = [cyclic(&a), cyclic(&b), cyclic(&c)];
        let psi = LinearFormSystem::arithmetic_progression(3).unwrap();
        let v = multilinear_average(&fs, &psi, &AverageDomain::Cyclic).unwrap();
        let sup: f64 = fs.iter().map(|f| f.sup_norm()).product();
        prop_assert!(v.norm() <= sup + 1e-12);
    }

    #[test]
    fn linear_phases_leave_u2_and_u3_unchanged(a in unit_values(15), m in 0i64..15) {
        let f = cyclic(&a);
        let twisted = SampledFunction::new(
            f.domain(),
            f.values().iter().enumerate().map(|(i, v)| v * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (m * i as i64) as f64 / 15.0)).collect(),
        ).unwrap();
        for k in 2..=3 {
            let d = (gowers_norm(&f, k).unwrap().norm - gowers_norm(&twisted, k).unwrap().norm).abs();
            prop_assert!(d < 1e-9);
        }
    }

    #[test]
    fn gowers_norms_increase_with_k(a in unit_values(10)) {
        let f = cyclic(&a);
        let u: Vec<f64> = (1..=3).map(|k| gowers_norm(&f, k).unwrap().norm).collect();
        prop_assert!(u[0] <= u[1] + 1e-9 && u[1] <= u[2] + 1e-9);
    }

    #[test]
    fn energy_grows_under_refinement(vals in prop::collection::vec(0.0..=1.0f64, 30), l1 in prop::collection::vec(0u64..3, 30), l2 in prop::collection::vec(0u64..3, 30)) {
        let f = SampledFunction::from_real(DomainSpec::Interval(30), &vals).unwrap();
        let b = Factor::trivial(30).refine_by(&l1).unwrap();
        let fine = b.refine_by(&l2).unwrap();
        prop_assert!(fine.refines(&b));
        prop_assert!(energy(&f, &fine).unwrap() >= energy(&f, &b).unwrap() - 1e-12);
        // E(E(f|B')|B) = E(f|B)
        let inner = conditional_expectation(&f, &fine).unwrap();
        let outer = conditional_expectation(&inner, &b).unwrap();
        let direct = conditional_expectation(&f, &b).unwrap();
        for (x, y) in outer.values().iter().zip(direct.values()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn heisenberg_law_is_associative_and_log_inverts_exp(
        x in prop::collection::vec((-20i64..20, 1i64..6), 9)
    ) {
        let h = FilteredGroup::heisenberg();
        let el = |k: usize| GroupElement { coords: (0..3).map(|j| rat(x[3 * k + j].0, x[3 * k + j].1)).collect() };
        let (a, b, c) = (el(0), el(1), el(2));
        let left = h.mul(&h.mul(&a, &b).unwrap(), &c).unwrap();
        let right = h.mul(&a, &h.mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(h.exp(&h.log(&a)), a.clone());
        prop_assert!(h.mul(&a, &h.inv(&a).unwrap()).unwrap().is_identity());
        let (rep, gamma) = h.reduce(&a);
        prop_assert!(h.in_lattice(&gamma));
        prop_assert_eq!(h.mul(&a, &gamma).unwrap(), rep.clone());
        prop_assert!(rep.coords.iter().all(|t| *t >= rat(0, 1) && *t < rat(1, 1)));
    }

    #[test]
    fn profile_sums_to_the_progression_average(bits in prop::collection::vec(any::<bool>(), 1..25), k in 1usize..5) {
        let n = bits.len();
        let a = SampledFunction::from_real(DomainSpec::Interval(n), &bits.iter().map(|&b| b as u8 as f64).collect::<Vec<_>>()).unwrap();
        let p = ap_profile(&a, k).unwrap();
        let psi = LinearFormSystem::arithmetic_progression(k).unwrap();
        let lam = multilinear_average(&vec![a; k], &psi, &AverageDomain::progression(n)).unwrap().re;
        prop_assert!((p.average() - lam).abs() < 1e-9);
    }
}
