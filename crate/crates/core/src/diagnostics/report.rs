//! Condition schedules over an `n`-grid and their finite-grid verdicts.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;

use crate::blocks::BlockScheme;
use crate::error::{Error, Result};

/// Minimum number of grid points for a trend verdict.
pub const MIN_GRID: usize = 4;

/// Slack on the monotone-trend test as a fraction of the tolerance band.
/// Schedules such as `r(n) p_n` jitter with `k mod ℓ` at a level far below
/// the band.
pub const TREND_SLACK: f64 = 1e-2;

/// What a schedule is expected to do as `n` grows.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Expectation {
    /// Tends to `limit`: final value within `tol` (relative unless the
    /// limit is 0) and `|v - limit|` non-increasing over the final half.
    Tends { limit: f64 },
    /// Settles: relative spread over the final half at most `tol`.
    Converges,
    /// Strictly increasing along the grid.
    Increasing,
    /// Every value is 1 (a structural flag).
    Holds,
}

impl Expectation {
    pub fn judge(&self, values: &[f64], tol: f64) -> bool {
        if values.is_empty() || values.iter().any(|v| v.is_nan()) {
            return false;
        }
        let half = &values[(values.len() - 1) / 2..];
        match *self {
            Expectation::Tends { limit } => {
                let last = *values.last().unwrap();
                let scale = if limit == 0.0 { 1.0 } else { limit.abs() };
                let close = (last - limit).abs() <= tol * scale;
                let dev: Vec<f64> = half.iter().map(|v| (v - limit).abs()).collect();
                let slack = TREND_SLACK * tol * scale + 1e-12 * scale;
                let trend = dev.windows(2).all(|w| w[1] <= w[0] + slack);
                close && trend
            }
            Expectation::Converges => {
                let last = *values.last().unwrap();
                let scale = last.abs().max(f64::MIN_POSITIVE);
                half.iter().all(|v| (v - last).abs() <= tol * scale)
            }
            Expectation::Increasing => values.windows(2).all(|w| w[1] > w[0]),
            Expectation::Holds => values.iter().all(|&v| v == 1.0),
        }
    }
}

/// One named condition with its schedule.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionSeries {
    pub name: String,
    pub description: String,
    pub expectation: Expectation,
    pub tol: f64,
    pub values: Vec<f64>,
    /// Whether the overall verdict depends on this condition.
    pub required: bool,
    pub pass: bool,
}

impl ConditionSeries {
    pub fn new(
        name: &str,
        description: &str,
        expectation: Expectation,
        tol: f64,
        values: Vec<f64>,
        required: bool,
    ) -> Self {
        let pass = expectation.judge(&values, tol);
        Self {
            name: name.into(),
            description: description.into(),
            expectation,
            tol,
            values,
            required,
            pass,
        }
    }
}

/// Per-`n` diagnostics common to every theorem.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RowDiagnostics {
    pub n: u64,
    pub k: usize,
    pub scheme: BlockScheme,
    /// `Var(S_n[X])`.
    pub var_sum: f64,
    /// `U(n, ε, X)`.
    pub uan: f64,
    /// `B_n[X]`.
    pub var_sup: f64,
    /// `A_n[X](δ)`.
    pub lyapounov: f64,
    /// `L_n[X](ε)`.
    pub lindeberg: f64,
    /// `Var(Y*)`.
    pub remainder_var: f64,
    /// `R_{m,ℓ}(u*)`.
    pub newman: f64,
}

/// Schedules and verdicts for one theorem over one grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionReport {
    pub theorem: String,
    pub grid: Vec<u64>,
    pub rows: Vec<RowDiagnostics>,
    pub conditions: Vec<ConditionSeries>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl ConditionReport {
    pub fn new(
        theorem: &str,
        grid: Vec<u64>,
        rows: Vec<RowDiagnostics>,
        conditions: Vec<ConditionSeries>,
        notes: Vec<String>,
    ) -> Self {
        let passed = conditions.iter().filter(|c| c.required).all(|c| c.pass);
        Self {
            theorem: theorem.into(),
            grid,
            rows,
            conditions,
            notes,
            passed,
        }
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionSeries> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionSeries> {
        self.conditions.iter().filter(|c| c.required && !c.pass)
    }
}

/// Grids must be strictly increasing with at least [`MIN_GRID`] points.
pub fn check_grid(grid: &[u64]) -> Result<()> {
    if grid.len() < MIN_GRID {
        return Err(Error::GridTooShort {
            len: grid.len(),
            min: MIN_GRID,
        });
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(crate::error::invalid("grid", "must be strictly increasing"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn tends_needs_level_and_trend() {
        let t = Expectation::Tends { limit: 0.0 };
        assert!(t.judge(&[1.0, 0.5, 0.1, 0.01], 0.05));
        assert!(!t.judge(&[1.0, 0.5, 0.1, 0.06], 0.05));
        assert!(!t.judge(&[1.0, 0.01, 0.03, 0.02], 0.05));
        assert!(t.judge(&[1.0, 0.01, 0.002, 0.002_000_1], 0.05));
        let t = Expectation::Tends { limit: 2.0 };
        assert!(t.judge(&[1.0, 1.5, 1.9, 1.95], 0.05));
        assert!(t.judge(&[2.0; 4], 0.05));
        assert!(!t.judge(&[1.0, 1.5, 1.8, 1.85], 0.05));
    }

    #[test]
    fn other_expectations() {
        assert!(Expectation::Converges.judge(&[5.0, 2.05, 2.01, 2.0], 0.05));
        assert!(!Expectation::Converges.judge(&[1.0, 2.0, 4.0, 8.0], 0.05));
        assert!(Expectation::Increasing.judge(&[1.0, 2.0, 3.0], 0.0));
        assert!(!Expectation::Increasing.judge(&[1.0, 1.0, 3.0], 0.0));
        assert!(Expectation::Holds.judge(&[1.0, 1.0], 0.0));
        assert!(!Expectation::Holds.judge(&[1.0, 0.0], 0.0));
        assert!(!Expectation::Converges.judge(&[f64::NAN; 4], 0.05));
    }

    #[test]
    fn grid_validation() {
        assert_eq!(check_grid(&[1, 2, 3]), Err(Error::GridTooShort { len: 3, min: 4 }));
        assert!(check_grid(&[1, 2, 2, 3]).is_err());
        assert!(check_grid(&[10, 20, 40, 80]).is_ok());
    }

    #[test]
    fn report_passes_on_required_only() {
        let ok = ConditionSeries::new("a", "", Expectation::Holds, 0.0, vec![1.0], true);
        let bad = ConditionSeries::new("b", "", Expectation::Holds, 0.0, vec![0.0], false);
        let r = ConditionReport::new("t", vec![], vec![], vec![ok.clone(), bad.clone()], vec![]);
        assert!(r.passed);
        let mut req = bad;
        req.required = true;
        let r = ConditionReport::new("t", vec![], vec![], vec![ok, req], vec![]);
        assert!(!r.passed && r.failures().count() == 1);
    }
}
