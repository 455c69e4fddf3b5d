//! Regrouping a row into `m` blocks of length `ℓ` plus a remainder of `r` cells.

use core::ops::Range;

use num_traits::Float;

use crate::cov::CovMatrix;
use crate::error::{invalid, Error, Result};

/// `k = m ℓ + r`, `0 <= r < ℓ`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockScheme {
    pub alpha: f64,
    pub k: usize,
    pub m: usize,
    pub l: usize,
    pub r: usize,
}

impl BlockScheme {
    /// `ℓ = max(1, ⌊k^α⌋)`; falls back to singletons when `k < 2ℓ`.
    pub fn new(k: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(invalid("alpha", "must lie in (0, 1/2)"));
        }
        if k < 2 {
            return Err(invalid("k", "must be at least 2"));
        }
        // The nudge keeps exact powers (e.g. 100^0.5) from flooring one short.
        let mut l = ((k as f64).powf(alpha) * (1.0 + 1e-12)).floor() as usize;
        l = l.max(1);
        if k < 2 * l {
            l = 1;
        }
        Ok(Self::from_parts(alpha, k, l))
    }

    /// Scheme with a prescribed block length.
    pub fn with_block_len(k: usize, l: usize) -> Result<Self> {
        if l == 0 || l > k {
            return Err(invalid("l", "must lie in [1, k]"));
        }
        Ok(Self::from_parts(f64::NAN, k, l))
    }

    fn from_parts(alpha: f64, k: usize, l: usize) -> Self {
        let m = k / l;
        Self { alpha, k, m, l, r: k - m * l }
    }

    /// Number of cells covered by the blocks.
    pub fn main_len(&self) -> usize {
        self.m * self.l
    }

    /// Cell indices of block `j` (0-based).
    pub fn block(&self, j: usize) -> Range<usize> {
        j * self.l..(j + 1) * self.l
    }

    pub fn main(&self) -> Range<usize> {
        0..self.main_len()
    }

    pub fn remainder(&self) -> Range<usize> {
        self.main_len()..self.k
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len == self.k {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.k,
                actual: len,
            })
        }
    }

    /// Writes the `m` block sums into `y` and returns the remainder sum.
    pub fn block_sums_into(&self, row: &[f64], y: &mut [f64]) -> Result<f64> {
        self.check_dim(row.len())?;
        self.check_dim_blocks(y.len())?;
        for (j, out) in y.iter_mut().enumerate() {
            *out = row[self.block(j)].iter().sum();
        }
        Ok(row[self.remainder()].iter().sum())
    }

    fn check_dim_blocks(&self, len: usize) -> Result<()> {
        if len == self.m {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.m,
                actual: len,
            })
        }
    }

    /// `(Y_1, ..., Y_m)` and `Y*`.
    pub fn block_sums(&self, row: &[f64]) -> Result<(alloc::vec::Vec<f64>, f64)> {
        let mut y = alloc::vec![0.0; self.m];
        let rem = self.block_sums_into(row, &mut y)?;
        Ok((y, rem))
    }
}

/// Shares of `Var(S_k)` carried by the blocks, the remainder and their
/// cross term.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VarianceDecomposition {
    pub total: f64,
    pub main: f64,
    pub remainder: f64,
    pub cross: f64,
}

impl VarianceDecomposition {
    pub fn ratio_main(&self) -> f64 {
        self.main / self.total
    }
    pub fn ratio_rem(&self) -> f64 {
        self.remainder / self.total
    }
    pub fn ratio_cross(&self) -> f64 {
        self.cross / self.total
    }
    pub fn ratios(&self) -> (f64, f64, f64) {
        (self.ratio_main(), self.ratio_rem(), self.ratio_cross())
    }
}

/// `Var(S_k) = Var(S_{mℓ}) + Var(Y*) + 2 Cov(S_{mℓ}, Y*)`.
pub fn variance_decomposition(sigma: &CovMatrix, scheme: &BlockScheme) -> Result<VarianceDecomposition> {
    scheme.check_dim(sigma.dim())?;
    let main = sigma.quad(scheme.main());
    let remainder = sigma.quad(scheme.remainder());
    let cross = 2.0 * sigma.range_sum(scheme.main(), scheme.remainder());
    // Assemble the total from the same pieces so the ratios are consistent.
    let total = main + remainder + cross;
    if !(total > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(VarianceDecomposition {
        total,
        main,
        remainder,
        cross,
    })
}

/// `Var(Y*)`.
pub fn remainder_variance(sigma: &CovMatrix, scheme: &BlockScheme) -> Result<f64> {
    scheme.check_dim(sigma.dim())?;
    Ok(sigma.quad(scheme.remainder()).max(0.0))
}
