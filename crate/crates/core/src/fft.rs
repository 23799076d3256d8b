//! Discrete Fourier transforms of arbitrary length: iterative radix-2 for
//! powers of two, Bluestein's chirp-z reduction otherwise.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

fn expi(theta: f64) -> Complex64 {
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

fn radix2(a: &mut [Complex64], inverse: bool) {
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        // Twiddles computed directly (not by repeated multiplication) to
        // keep the error at O(eps log n).
        let tw: Vec<Complex64> = (0..half)
            .map(|k| expi(sign * 2.0 * PI * k as f64 / len as f64))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let u = a[start + k];
                let v = a[start + k + half] * tw[k];
                a[start + k] = u + v;
                a[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
}

/// Unnormalized transform: X[k] = Σ_x a[x] e(∓xk/n), minus sign forward.
pub fn transform(a: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = a.len();
    if n <= 1 {
        return a.to_vec();
    }
    if n.is_power_of_two() {
        let mut out = a.to_vec();
        radix2(&mut out, inverse);
        return out;
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    // chirp w[k] = e(sign k^2 / 2n), with k^2 reduced mod 2n to keep the
    // angle small
    let two_n = 2 * n as u128;
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let kk = ((k as u128 * k as u128) % two_n) as f64;
            expi(sign * PI * kk / n as f64)
        })
        .collect();
    let m = (2 * n - 1).next_power_of_two();
    let mut x = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..n {
        x[k] = a[k] * chirp[k];
    }
    let mut y = vec![Complex64::new(0.0, 0.0); m];
    y[0] = chirp[0].conj();
    for k in 1..n {
        y[k] = chirp[k].conj();
        y[m - k] = chirp[k].conj();
    }
    radix2(&mut x, false);
    radix2(&mut y, false);
    for i in 0..m {
        x[i] *= y[i];
    }
    radix2(&mut x, true);
    let scale = 1.0 / m as f64;
    (0..n).map(|k| x[k] * scale * chirp[k]).collect()
}

/// Normalized Fourier coefficients f̂(ξ) = E_x f(x) e(−xξ/N).
pub fn fourier_coefficients(f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len() as f64;
    transform(f, false).into_iter().map(|z| z / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let n = a.len();
        let sign = if inverse { 1.0 } else { -1.0 };
        (0..n)
            .map(|k| {
                let mut s = Complex64::new(0.0, 0.0);
                for (x, &v) in a.iter().enumerate() {
                    let e = ((x * k) % n) as f64 / n as f64;
                    s += v * expi(sign * 2.0 * PI * e);
                }
                s
            })
            .collect()
    }

    #[test]
    fn matches_direct_dft_for_many_lengths() {
        for n in [1usize, 2, 3, 5, 8, 12, 17, 64, 101, 135] {
            let a: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(libm::sin(i as f64 * 1.3), libm::cos(i as f64 * 0.7)))
                .collect();
            for inv in [false, true] {
                let fast = transform(&a, inv);
                let slow = naive(&a, inv);
                for (p, q) in fast.iter().zip(&slow) {
                    assert!((p - q).norm() < 1e-9 * (n as f64 + 1.0), "n={n}");
                }
            }
        }
    }

    #[test]
    fn delta_has_flat_spectrum() {
        let mut a = vec![Complex64::new(0.0, 0.0); 7];
        a[0] = Complex64::new(7.0, 0.0);
        for c in fourier_coefficients(&a) {
            assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }
}
