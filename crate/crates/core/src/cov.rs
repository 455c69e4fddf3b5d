//! Covariance matrices of array rows.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// Symmetric covariance matrix of one row.
#[derive(Debug, Clone, PartialEq)]
pub enum CovMatrix {
    /// `Σ_rs = lags[|r - s|]`, zero for lags beyond the vector.
    Toeplitz { k: usize, lags: Vec<f64> },
    /// Row-major `k × k`.
    Dense { k: usize, data: Vec<f64> },
}

/// Number of `r ∈ a`, `s ∈ b` with `s - r = d`.
fn pair_count(a: &Range<usize>, b: &Range<usize>, d: i64) -> i64 {
    let lo = (a.start as i64).max(b.start as i64 - d);
    let hi = (a.end as i64).min(b.end as i64 - d);
    (hi - lo).max(0)
}

impl CovMatrix {
    pub fn identity(k: usize) -> Self {
        CovMatrix::Toeplitz { k, lags: vec![1.0] }
    }

    pub fn dense(k: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != k * k {
            return Err(Error::DimensionMismatch {
                expected: k * k,
                actual: data.len(),
            });
        }
        Ok(CovMatrix::Dense { k, data })
    }

    pub fn dim(&self) -> usize {
        match self {
            CovMatrix::Toeplitz { k, .. } | CovMatrix::Dense { k, .. } => *k,
        }
    }

    pub fn get(&self, r: usize, s: usize) -> f64 {
        match self {
            CovMatrix::Toeplitz { lags, .. } => lags.get(r.abs_diff(s)).copied().unwrap_or(0.0),
            CovMatrix::Dense { k, data } => data[r * k + s],
        }
    }

    pub fn is_stationary(&self) -> bool {
        matches!(self, CovMatrix::Toeplitz { .. })
    }

    /// `Σ_{r ∈ a, s ∈ b} Σ_rs`. Stationary matrices cost `O(lags)`.
    pub fn range_sum(&self, a: Range<usize>, b: Range<usize>) -> f64 {
        if a.is_empty() || b.is_empty() {
            return 0.0;
        }
        match self {
            CovMatrix::Toeplitz { lags, .. } => {
                let dmin = b.start as i64 - (a.end as i64 - 1);
                let dmax = (b.end as i64 - 1) - a.start as i64;
                let reach = lags.len() as i64 - 1;
                let mut acc = 0.0;
                for d in dmin.max(-reach)..=dmax.min(reach) {
                    let c = lags[d.unsigned_abs() as usize];
                    if c != 0.0 {
                        acc += c * pair_count(&a, &b, d) as f64;
                    }
                }
                acc
            }
            CovMatrix::Dense { k, data } => a
                .map(|r| data[r * k + b.start..r * k + b.end].iter().sum::<f64>())
                .sum(),
        }
    }

    /// `Var(Σ_{r ∈ a} X_r)`.
    pub fn quad(&self, a: Range<usize>) -> f64 {
        self.range_sum(a.clone(), a)
    }

    /// `Σ_{r ≠ s ∈ a} Σ_rs`.
    pub fn offdiag_sum(&self, a: Range<usize>) -> f64 {
        match self {
            CovMatrix::Toeplitz { lags, .. } => {
                let len = a.len();
                2.0 * (1..len.min(lags.len()))
                    .map(|h| (len - h) as f64 * lags[h])
                    .sum::<f64>()
            }
            CovMatrix::Dense { k, data } => a
                .clone()
                .map(|r| {
                    a.clone()
                        .filter(|&s| s != r)
                        .map(|s| data[r * k + s])
                        .sum::<f64>()
                })
                .sum(),
        }
    }

    /// `sup_{r ≠ s} Σ_rs`, or 0 for `k < 2`.
    pub fn max_offdiag(&self) -> f64 {
        let k = self.dim();
        if k < 2 {
            return 0.0;
        }
        match self {
            CovMatrix::Toeplitz { lags, .. } => lags
                .iter()
                .take(k)
                .skip(1)
                .copied()
                .fold(0.0, f64::max),
            CovMatrix::Dense { data, .. } => {
                let mut m = f64::NEG_INFINITY;
                for r in 0..k {
                    for s in 0..k {
                        if r != s {
                            m = m.max(data[r * k + s]);
                        }
                    }
                }
                m
            }
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let k = self.dim();
        let mut out = vec![0.0; k * k];
        for r in 0..k {
            for s in 0..k {
                out[r * k + s] = self.get(r, s);
            }
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(c: &CovMatrix, a: Range<usize>, b: Range<usize>) -> f64 {
        let mut acc = 0.0;
        for r in a {
            for s in b.clone() {
                acc += c.get(r, s);
            }
        }
        acc
    }

    #[test]
    fn toeplitz_entries() {
        let c = CovMatrix::Toeplitz { k: 4, lags: vec![1.0, 0.5, 0.25] };
        assert_eq!(c.get(0, 2), 0.25);
        assert_eq!(c.get(3, 0), 0.0);
        assert_eq!(c.max_offdiag(), 0.5);
        assert_eq!(CovMatrix::identity(1).max_offdiag(), 0.0);
    }

    proptest! {
        #[test]
        fn toeplitz_range_sum_matches_brute_force(
            lags in proptest::collection::vec(0.0..1.0f64, 1..12),
            k in 1usize..40,
            a0 in 0usize..40, a1 in 0usize..40, b0 in 0usize..40, b1 in 0usize..40,
        ) {
            let c = CovMatrix::Toeplitz { k, lags };
            let a = a0.min(k)..a1.min(k).max(a0.min(k));
            let b = b0.min(k)..b1.min(k).max(b0.min(k));
            let fast = c.range_sum(a.clone(), b.clone());
            let slow = brute(&c, a.clone(), b.clone());
            prop_assert!((fast - slow).abs() < 1e-12);
            let d = CovMatrix::dense(k, c.to_dense()).unwrap();
            prop_assert!((d.range_sum(a.clone(), b.clone()) - slow).abs() < 1e-12);
        }
    }
}
