//! Hypothesis diagnostics for the limit theorems.

pub mod functionals;
pub mod grouped;
pub mod report;
pub mod theorems;

pub use functionals::{cell_laws, lindeberg_statistic, lyapounov_statistic, uan_statistic, CenteredLaw, Functionals, LawSet};
pub use grouped::{block_laws, comparison_inequalities, grouped_statistics, Comparison, ComparisonSet};
pub use report::{ConditionReport, ConditionSeries, Expectation, RowDiagnostics};
pub use theorems::{check_theorem_hypotheses, stationary_variance_expansion, variance_of_sum, CheckOptions, TheoremId};
