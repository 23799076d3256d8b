//! Pairwise summation with a fixed reduction tree, so results do not depend
//! on how the terms were produced (serially or in parallel).

use num_complex::Complex64;

const LEAF: usize = 32;

pub fn pairwise(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise(&xs[..mid]) + pairwise(&xs[mid..])
}

pub fn pairwise_c(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= LEAF {
        let mut s = Complex64::new(0.0, 0.0);
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_c(&xs[..mid]) + pairwise_c(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        pairwise(xs) / xs.len() as f64
    }
}

pub fn mean_c(xs: &[Complex64]) -> Complex64 {
    if xs.is_empty() {
        Complex64::new(0.0, 0.0)
    } else {
        pairwise_c(xs) / xs.len() as f64
    }
}

/// Map `f` over `0..n` and collect in index order; runs on the rayon pool
/// when the `parallel` feature is enabled and `serial` is false.
pub fn map_indexed<T, F>(n: usize, serial: bool, f: F) -> alloc::vec::Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !serial && n > 1 {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = serial;
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise(&xs), 499_500.0);
        assert_eq!(mean(&[]), 0.0);
    }

    #[test]
    fn map_indexed_keeps_order() {
        let v = map_indexed(100, false, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
