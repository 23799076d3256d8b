//! Computational higher-order Fourier analysis.
//!
//! Gowers uniformity norms, multilinear pattern averages, polynomial
//! sequences on step-2 filtered nilmanifolds, Leibman groups of linear-form
//! systems, and energy-increment regularity decompositions.
//!
//! The crate is `no_std` with `alloc`; file formats and the command line
//! front end live in the `hofa` crate.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod decompose;
pub mod error;
pub mod fft;
pub mod forms;
pub mod funcspace;
pub mod gowers;
pub mod linalg;
pub mod nilgroup;
pub mod orbits;
pub mod patterns;
pub mod scalar;
pub mod sum;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use scalar::{Rational, Scalar};
