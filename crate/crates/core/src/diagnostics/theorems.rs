//! Hypothesis schedules for the block-method limit theorems.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::functionals::{cell_laws, cell_scale};
use super::grouped::grouped_statistics;
use super::report::{check_grid, ConditionReport, ConditionSeries, Expectation, RowDiagnostics};
use crate::assoc_gen::{analytic_row_covariance, ArraySpec, Family, Normalization};
use crate::blocks::BlockScheme;
use crate::cov::CovMatrix;
use crate::distributions::MarginalLaw;
use crate::error::{Error, Result};
use crate::newman::{block_product_bound, max_within_block_cov, newman_bound};

/// Which theorem's hypotheses to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TheoremId {
    /// General theorem, centered cells.
    T1,
    /// General theorem, non-centered cells.
    T2,
    StationaryArray,
    BernPois,
    GeomPois,
    BernPoisGen,
    GeomPoisGen,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] = [
        TheoremId::T1,
        TheoremId::T2,
        TheoremId::StationaryArray,
        TheoremId::BernPois,
        TheoremId::GeomPois,
        TheoremId::BernPoisGen,
        TheoremId::GeomPoisGen,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TheoremId::T1 => "t1",
            TheoremId::T2 => "t2",
            TheoremId::StationaryArray => "stationary-array",
            TheoremId::BernPois => "bern-pois",
            TheoremId::GeomPois => "geom-pois",
            TheoremId::BernPoisGen => "bern-pois-gen",
            TheoremId::GeomPoisGen => "geom-pois-gen",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

/// Tuning of the hypothesis checks.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CheckOptions {
    /// Block exponent: `ℓ = ⌊k^α⌋`.
    pub alpha: f64,
    /// Threshold `ε` of the negligibility functionals.
    pub eps: f64,
    /// Lyapounov exponent `δ`.
    pub delta: f64,
    /// Frequency at which the Newman bound is tracked.
    pub u_star: f64,
    /// Verdict tolerance.
    pub tol: f64,
    /// Target Poisson parameter; `None` only asks the schedule to settle.
    pub lambda: Option<f64>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            eps: 0.5,
            delta: 1.0,
            u_star: 1.0,
            tol: 0.05,
            lambda: None,
        }
    }
}

/// `Var(Σ X_r)`.
pub fn variance_of_sum(sigma: &CovMatrix) -> f64 {
    sigma.quad(0..sigma.dim())
}

/// Splits the variance of a stationary row into `k σ²` and
/// `2 Σ_{j=2}^{k} (k - j + 1) Cov(X_1, X_j)`; `cov_lags[h - 1]` is the lag-`h`
/// covariance.
pub fn stationary_variance_expansion(sigma2: f64, cov_lags: &[f64], k: usize) -> (f64, f64) {
    let cross: f64 = cov_lags
        .iter()
        .take(k.saturating_sub(1))
        .enumerate()
        .map(|(i, c)| (k - 1 - i) as f64 * c)
        .sum();
    (k as f64 * sigma2, 2.0 * cross)
}

/// Everything computed for one grid point; all covariance quantities are in
/// the units the diagnostics see (scaled by `c²` under normalization).
struct Row {
    diag: RowDiagnostics,
    laws: Vec<MarginalLaw>,
    sigma: CovMatrix,
    c2: f64,
    grouped_uan: Option<f64>,
    corollary_uan: f64,
    corollary_lindeberg: f64,
    block_var_sum: f64,
    block_product: f64,
}

fn row(spec: &ArraySpec, n: u64, opts: &CheckOptions) -> Result<Row> {
    let k = spec.k(n);
    let scheme = BlockScheme::new(k, opts.alpha)?;
    let c = cell_scale(spec, k);
    let c2 = c * c;
    let sigma = analytic_row_covariance(spec, n)?;
    let cells = cell_laws(spec, n)?;
    let l = scheme.l as f64;
    let grouped_uan = match grouped_statistics(spec, n, &scheme, opts.delta, opts.eps) {
        Ok(g) => Some(g.uan),
        Err(Error::EnumerationUnsupported(_) | Error::EnumerationBudget { .. }) => None,
        Err(e) => return Err(e),
    };
    let block_var_sum = c2
        * if sigma.is_stationary() {
            scheme.m as f64 * sigma.quad(scheme.block(0))
        } else {
            (0..scheme.m).map(|j| sigma.quad(scheme.block(j))).sum()
        };
    let diag = RowDiagnostics {
        n,
        k,
        scheme,
        var_sum: c2 * variance_of_sum(&sigma),
        uan: cells.uan(opts.eps),
        var_sup: cells.var_sup(),
        lyapounov: cells.lyapounov(opts.delta),
        lindeberg: cells.lindeberg(opts.eps),
        remainder_var: c2 * sigma.quad(scheme.remainder()),
        newman: c2 * newman_bound(&sigma, &scheme, opts.u_star)?,
    };
    Ok(Row {
        block_product: c2 * block_product_bound(&sigma, &scheme, opts.u_star)?,
        corollary_uan: l * cells.uan(opts.eps / l),
        corollary_lindeberg: l * l * cells.lindeberg(opts.eps / l),
        laws: spec.row_laws(n)?,
        sigma,
        c2,
        grouped_uan,
        block_var_sum,
        diag,
    })
}

/// Cell parameter driving the Poisson theorems: `p` for Bernoulli cells,
/// `q = P(X >= 1)` for corrected geometric cells.
fn small_param(law: &MarginalLaw) -> f64 {
    match *law {
        MarginalLaw::Bernoulli { p } => p,
        MarginalLaw::CorrectedGeometric { p } => 1.0 - p,
        MarginalLaw::Gaussian { .. } => f64::NAN,
    }
}

struct Builder<'a> {
    rows: &'a [Row],
    tol: f64,
    out: Vec<ConditionSeries>,
}

impl Builder<'_> {
    fn push(&mut self, name: &str, desc: &str, exp: Expectation, required: bool, f: impl Fn(&Row) -> f64) {
        let values = self.rows.iter().map(f).collect();
        let tol = if matches!(exp, Expectation::Holds | Expectation::Increasing) {
            0.0
        } else {
            self.tol
        };
        self.out.push(ConditionSeries::new(name, desc, exp, tol, values, required));
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

const ZERO: Expectation = Expectation::Tends { limit: 0.0 };

fn target(opts: &CheckOptions) -> Expectation {
    match opts.lambda {
        Some(limit) => Expectation::Tends { limit },
        None => Expectation::Converges,
    }
}

/// Schedules and verdicts of `theorem`'s hypotheses along `grid`.
pub fn check_theorem_hypotheses(
    spec: &ArraySpec,
    grid: &[u64],
    theorem: TheoremId,
    opts: &CheckOptions,
) -> Result<ConditionReport> {
    check_grid(grid)?;
    spec.validate()?;
    let rows = grid.iter().map(|&n| row(spec, n, opts)).collect::<Result<Vec<_>>>()?;
    let mut notes: Vec<String> = Vec::new();
    let mut b = Builder {
        rows: &rows,
        tol: opts.tol,
        out: Vec::new(),
    };
    b.push("c0", "k(n) increases to infinity", Expectation::Increasing, true, |r| r.diag.k as f64);

    match theorem {
        TheoremId::T1 | TheoremId::T2 => {
            general(&mut b, &mut notes, theorem == TheoremId::T2, spec);
        }
        TheoremId::StationaryArray => stationary_array(&mut b, &mut notes, spec),
        TheoremId::BernPois | TheoremId::GeomPois => {
            let fam = if theorem == TheoremId::BernPois {
                Family::Bernoulli
            } else {
                Family::CorrectedGeometric
            };
            let stationary = spec.is_stationary() && spec.family == fam;
            let sym = if fam == Family::Bernoulli { "p" } else { "q" };
            b.push(
                "stationary_family",
                "rows are stationary with the theorem's marginal family",
                Expectation::Holds,
                true,
                |_| flag(stationary),
            );
            if spec.normalization != Normalization::Raw {
                notes.push("Poisson theorems concern raw cells; normalization ignored for parameter schedules".into());
            }
            b.push(&format!("{sym}_n"), "cell parameter tends to 0", ZERO, true, |r| small_param(&r.laws[0]));
            b.push(
                &format!("k_{sym}_n"),
                "k(n) times the cell parameter tends to lambda_1",
                target(opts),
                true,
                |r| r.diag.k as f64 * small_param(&r.laws[0]),
            );
            b.push("cv_2", "2 sum (k-j+1) Cov(X_1, X_j) tends to 0", ZERO, true, |r| {
                r.diag.var_sum - r.diag.k as f64 * r.c2 * r.sigma.get(0, 0)
            });
            b.push("pc1", "m l^2 sup Cov(X_1, X_j) tends to 0", ZERO, true, |r| {
                let s = &r.diag.scheme;
                (s.m * s.l * s.l) as f64 * r.c2 * r.sigma.max_offdiag()
            });
            push_block_conditions(&mut b);
            b.push("r3", "block-product bound at u*", ZERO, false, |r| r.block_product);
        }
        TheoremId::BernPoisGen | TheoremId::GeomPoisGen => {
            let bern = theorem == TheoremId::BernPoisGen;
            let fam = if bern { Family::Bernoulli } else { Family::CorrectedGeometric };
            let sym = if bern { "p" } else { "q" };
            b.push("family", "cells have the theorem's marginal family", Expectation::Holds, true, |_| {
                flag(spec.family == fam)
            });
            let sup = |r: &Row| r.laws.iter().map(small_param).fold(0.0, f64::max);
            let total = |r: &Row| r.laws.iter().map(small_param).sum::<f64>();
            let (a, bb, c, d) = if bern { ("2a", "2b", "2c", "2d") } else { ("2a", "3a", "2b", "3c") };
            b.push(a, &format!("sup {sym} tends to 0"), ZERO, true, sup);
            b.push(bb, &format!("sum of {sym} tends to lambda"), target(opts), true, total);
            b.push(c, &format!("k sup {sym}^2 tends to 0"), ZERO, true, move |r| {
                r.diag.k as f64 * sup(r) * sup(r)
            });
            b.push(d, "k^2 sup Cov(X_r, X_s) tends to 0", ZERO, true, |r| {
                (r.diag.k * r.diag.k) as f64 * r.c2 * r.sigma.max_offdiag()
            });
            let rem = if bern { "3" } else { "3b" };
            b.push(rem, &format!("remainder sum of {sym} tends to 0"), ZERO, true, |r| {
                r.laws[r.diag.scheme.remainder()].iter().map(small_param).sum()
            });
            b.push("4a", "m sup_j within-block covariance sum tends to 0", ZERO, true, |r| {
                let s = &r.diag.scheme;
                r.c2 * s.m as f64 * max_within_block_cov(&r.sigma, s).unwrap_or(f64::NAN)
            });
            b.push("4b", "remainder covariance sum tends to 0", ZERO, true, |r| {
                r.c2 * r.sigma.offdiag_sum(r.diag.scheme.remainder())
            });
            push_block_conditions(&mut b);
        }
    }

    let conditions = b.out;
    Ok(ConditionReport::new(theorem.name(), grid.to_vec(), rows.into_iter().map(|r| r.diag).collect(), conditions, notes))
}

fn push_block_conditions(b: &mut Builder<'_>) {
    b.push("c1", "remainder variance tends to 0", ZERO, true, |r| r.diag.remainder_var);
    b.push("c2", "Newman bound at u* tends to 0", ZERO, true, |r| r.diag.newman);
}

fn general(b: &mut Builder<'_>, notes: &mut Vec<String>, non_centered: bool, spec: &ArraySpec) {
    push_block_conditions(b);
    if b.rows.iter().any(|r| r.grouped_uan.is_none()) {
        notes.push(
            "block laws not enumerable at some n; uan_t uses the upper bound l U(n, eps/l, X) there".into(),
        );
    }
    b.push("uan_t", "sup_j P(|T_j - b_j| >= eps) tends to 0", ZERO, true, |r| {
        r.grouped_uan.unwrap_or(r.corollary_uan)
    });
    b.push("cvh_t", "sum of block variances converges", Expectation::Converges, true, |r| r.block_var_sum);
    b.push("corollary_uan", "l U(n, eps/l, X) tends to 0", ZERO, false, |r| r.corollary_uan);
    b.push("corollary_lindeberg", "l^2 L_n[X](eps/l) tends to 0", ZERO, false, |r| r.corollary_lindeberg);
    if non_centered {
        let centered = spec.normalization == Normalization::CenteredSqrtK;
        let mean = move |law: &MarginalLaw| if centered { 0.0 } else { law.mean() };
        b.push("a_n", "sum of cell means converges", Expectation::Converges, true, move |r| {
            r.laws.iter().map(mean).sum()
        });
        b.push("a_star_n", "sum of block-covered means converges", Expectation::Converges, true, move |r| {
            r.laws[r.diag.scheme.main()].iter().map(mean).sum()
        });
        b.push("b_star_n", "remainder mean sum tends to 0", ZERO, true, move |r| {
            r.laws[r.diag.scheme.remainder()].iter().map(mean).sum()
        });
    }
}

fn stationary_array(b: &mut Builder<'_>, notes: &mut Vec<String>, spec: &ArraySpec) {
    b.push("stationary", "rows are stationary", Expectation::Holds, true, |_| flag(spec.is_stationary()));
    let sigma2 = |r: &Row| r.c2 * r.sigma.get(0, 0);
    let cv2 = move |r: &Row| r.diag.var_sum - r.diag.k as f64 * sigma2(r);
    let gc = |r: &Row| r.c2 * r.diag.scheme.m as f64 * r.sigma.offdiag_sum(r.diag.scheme.block(0));
    b.push("cv_1", "k sigma_1^2 converges to lambda_1 > 0", Expectation::Converges, true, move |r| {
        r.diag.k as f64 * sigma2(r)
    });
    b.push("cv_2", "2 sum (k-j+1) Cov(X_1, X_j) converges to lambda_2", Expectation::Converges, true, cv2);
    b.push("gc", "2 m sum (l-j+1) Cov(X_1, X_j), distance to cv_2 tends to 0", ZERO, true, move |r| {
        (gc(r) - cv2(r)).abs()
    });
    b.push("pc1", "m l^2 sup Cov(X_1, X_j) tends to 0", ZERO, false, |r| {
        let s = &r.diag.scheme;
        (s.m * s.l * s.l) as f64 * r.c2 * r.sigma.max_offdiag()
    });
    b.push("pc2", "sup_j |m l^2 Cov(X_1, X_j) - lambda_2| tends to 0", ZERO, false, move |r| {
        let s = &r.diag.scheme;
        let l2 = cv2(r);
        (1..s.l)
            .map(|h| ((s.m * s.l * s.l) as f64 * r.c2 * r.sigma.get(0, h) - l2).abs())
            .fold(0.0, f64::max)
    });
    notes.push("pc1 and pc2 are sufficient for gc; the verdict requires gc".into());
    push_block_conditions(b);
}
