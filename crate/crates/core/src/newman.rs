//! Characteristic-function gap bounds for associated rows, computed from the
//! exact covariance matrix.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::blocks::BlockScheme;
use crate::cov::CovMatrix;
use crate::error::{Error, Result};

fn check(sigma: &CovMatrix, scheme: &BlockScheme) -> Result<()> {
    if sigma.dim() == scheme.k {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: scheme.k,
            actual: sigma.dim(),
        })
    }
}

/// `Σ_{i ≠ j} Cov(Y_i, Y_j)` over distinct blocks.
pub fn cross_block_cov(sigma: &CovMatrix, scheme: &BlockScheme) -> Result<f64> {
    check(sigma, scheme)?;
    let end = scheme.main_len();
    let upper: f64 = (0..scheme.m)
        .map(|j| {
            let b = scheme.block(j);
            sigma.range_sum(b.clone(), b.end..end)
        })
        .sum();
    Ok(2.0 * upper)
}

/// `R_{m,ℓ}(u) = (u²/2) Σ_{i ≠ j} Cov(Y_i, Y_j)`: bounds
/// `|E e^{iu S_{mℓ}} - Π_j E e^{iu Y_j}|`.
pub fn newman_bound(sigma: &CovMatrix, scheme: &BlockScheme, u: f64) -> Result<f64> {
    Ok(0.5 * u * u * cross_block_cov(sigma, scheme)?)
}

/// `sup_j Σ_{r ≠ s ∈ block j} Σ_rs`.
pub fn max_within_block_cov(sigma: &CovMatrix, scheme: &BlockScheme) -> Result<f64> {
    check(sigma, scheme)?;
    if sigma.is_stationary() {
        return Ok(sigma.offdiag_sum(scheme.block(0)).max(0.0));
    }
    Ok((0..scheme.m)
        .map(|j| sigma.offdiag_sum(scheme.block(j)))
        .fold(0.0, f64::max))
}

/// `(u²/2) · m · sup_j Σ_{r ≠ s ∈ block j} Cov(X_r, X_s)`: bounds the gap
/// between the block-sum cfs and the products of cell cfs.
pub fn block_product_bound(sigma: &CovMatrix, scheme: &BlockScheme, u: f64) -> Result<f64> {
    Ok(0.5 * u * u * scheme.m as f64 * max_within_block_cov(sigma, scheme)?)
}

/// Both sides of `|Π x_i - Π y_i| <= Σ |x_i - y_i|` for points of the closed
/// unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductGap {
    pub gap: f64,
    pub bound: f64,
}

pub fn complex_product_gap(x: &[Complex64], y: &[Complex64]) -> Result<ProductGap> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    for (index, z) in x.iter().chain(y.iter()).enumerate() {
        let modulus = z.norm();
        if modulus > 1.0 + 1e-12 {
            return Err(Error::ModulusViolation { index, modulus });
        }
    }
    let px: Complex64 = x.iter().product();
    let py: Complex64 = y.iter().product();
    let bound = x.iter().zip(y).map(|(a, b)| (a - b).norm()).sum();
    Ok(ProductGap {
        gap: (px - py).norm(),
        bound,
    })
}

/// Within-block pair sum for a stationary matrix written out lag by lag:
/// `2 Σ_{h=1}^{ℓ-1} (ℓ - h) c_h`.
pub fn stationary_within_block(lags: &[f64], l: usize) -> f64 {
    2.0 * (1..l)
        .map(|h| (l - h) as f64 * lags.get(h).copied().unwrap_or(0.0))
        .sum::<f64>()
}

/// Lag-by-lag list of covariances `Cov(X_1, X_h)`, `h = 2..=ℓ`.
pub fn block_lag_covs(sigma: &CovMatrix, l: usize) -> Vec<f64> {
    (1..l).map(|h| sigma.get(0, h)).collect()
}
