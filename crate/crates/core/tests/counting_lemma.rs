use std::f64::consts::PI;

use hofa_core::forms::LinearFormSystem;
use hofa_core::nilgroup::{FilteredGroup, GroupElement, PolySequence};
use hofa_core::orbits::{counting_residual, equidist_witness, LeibmanGroup, LipschitzFunction, Region};
use hofa_core::{Complex64, Rational};

/// Π_j cos²(π(a_j + b_j)) · (1 + ½ sin²(πb_1) cos(2πc_1)) on (G/Γ)³.
fn test_function() -> LipschitzFunction {
    LipschitzFunction::new("cos2-tuple", 40.0, |x| {
        let mut v = 1.0;
        for j in 0..3 {
            let c = (PI * (x[3 * j] + x[3 * j + 1])).cos();
            v *= c * c;
        }
        let s = (PI * x[4]).sin();
        v *= 1.0 + 0.5 * s * s * (2.0 * PI * x[5]).cos();
        Complex64::new(v, 0.0)
    })
}

fn heis_linear(a: f64, b: f64) -> PolySequence<f64> {
    PolySequence::linear(FilteredGroup::heisenberg(), GroupElement { coords: vec![a, b, 0.0] }).unwrap()
}

#[test]
fn irrational_heisenberg_orbit_matches_haar() {
    let h = FilteredGroup::heisenberg();
    let lg = LeibmanGroup::new(h, LinearFormSystem::arithmetic_progression(3).unwrap()).unwrap();
    let seq = heis_linear(2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0);
    let r = counting_residual(&test_function(), &seq, &lg, &Region::cube(2, 600).unwrap(), 200_000, 7).unwrap();
    assert!((r.haar.re - 0.125).abs() < 5.0 * r.stderr + 1e-3, "{r:?}");
    assert!(r.residual <= 0.05, "{r:?}");
}

#[test]
fn rational_control_is_detected() {
    let h = FilteredGroup::heisenberg();
    let lg = LeibmanGroup::new(h.clone(), LinearFormSystem::arithmetic_progression(3).unwrap()).unwrap();
    let r = counting_residual(&test_function(), &heis_linear(0.5, 0.5), &lg, &Region::cube(2, 300).unwrap(), 50_000, 7)
        .unwrap();
    assert!(r.residual >= 0.2, "{r:?}");
    let half = Rational::new(1.into(), 2.into());
    let exact = PolySequence::linear(
        h,
        GroupElement { coords: vec![half.clone(), half, Rational::from_integer(0.into())] },
    )
    .unwrap();
    let rep = equidist_witness(&exact, 300, 0.1, 4).unwrap();
    let w = rep.witness.expect("non-equidistributed orbit");
    assert!(w.cinf_norm <= 1.0);
}
