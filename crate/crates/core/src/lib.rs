//! Numerical machinery for block-method limit theorems on by-row associated
//! triangular arrays.
//!
//! The crate builds associated arrays from a latent Gaussian vector with
//! non-negative correlations pushed through coordinatewise non-decreasing
//! inverse-cdf maps. On top of that it provides the data-regrouping (block)
//! decomposition, Newman-type characteristic-function gap bounds computed
//! exactly from covariance matrices, the negligibility / moment functionals on
//! grouped and ungrouped data, Kolmogorov canonical measures, and a
//! counter-based Monte Carlo engine.
//!
//! Association of the generated rows rests on one external lemma: a Gaussian
//! vector whose correlations are all non-negative is associated (Pitt, 1982).
//! Non-decreasing transforms of associated variables stay associated.
//!
//! Everything here is `no_std` + `alloc`. IO, configuration files, threads and
//! the command line live in the `gclt` crate.

#![no_std]
// Whenever std is linked (tests, dev-dependencies) its inherent float methods
// shadow `num_traits::Float`, leaving those imports unused.
#![allow(unused_imports)]
// `!(x > 0.0)` is the NaN-rejecting form used by every validator.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assoc_gen;
pub mod blocks;
pub mod cov;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod kolmogorov;
pub mod math;
pub mod montecarlo;
pub mod newman;

pub use error::{Error, Result};
pub use num_complex::Complex64;
