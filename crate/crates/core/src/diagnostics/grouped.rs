//! Exact laws of block sums `Y_j` (equivalently of the independent copies
//! `T_j`) and the functionals of the regrouped row.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::functionals::{cell_laws, cell_scale, CenteredLaw, Functionals, LawSet};
use crate::assoc_gen::{ArraySpec, Family, Latent};
use crate::blocks::BlockScheme;
use crate::distributions::{IntPmf, MarginalLaw, TAIL_TOL};
use crate::error::{Error, Result};
use crate::math::{integrate_vec, norm_quantile, norm_sf, GaussLegendre};

/// Largest Bernoulli block enumerated by the copula integral. Independent
/// and comonotone blocks have no cap.
pub const BERNOULLI_BLOCK_CAP: usize = 20;
/// Largest corrected-geometric block enumerated by the copula integral.
pub const GEOMETRIC_BLOCK_CAP: usize = 8;

/// Mixing-variable range for the one-factor integral; the omitted normal
/// mass is below 3e-19.
const W_RANGE: f64 = 9.0;
const W_TAIL: f64 = 2.3e-19;

/// Upper bound on `Σ_{y >= cut} (1 + |y - b|)^4 P(Y = y)` for a sum `Y` of
/// `l` cells each with `P(X >= a) <= big_q^a`, using
/// `P(Y >= y) <= min(1, l · big_q^⌈y/l⌉)` and summation by parts.
fn geometric_block_tail(l: usize, big_q: f64, b: f64, cut: usize) -> f64 {
    let w = |y: f64| {
        let d = 1.0 + (y - b).abs();
        let d2 = d * d;
        d2 * d2
    };
    let surv = |y: usize| (l as f64 * big_q.powi(y.div_ceil(l) as i32)).min(1.0);
    let mut acc = w(cut as f64) * surv(cut);
    let mut y = cut + 1;
    loop {
        let inc = (w(y as f64) - w(y as f64 - 1.0)).max(0.0) * surv(y);
        acc += inc;
        if (y > cut + 4 * l && inc < 1e-30) || y > cut + 1_000_000 {
            break;
        }
        y += 1;
    }
    acc
}

fn geometric_cut(l: usize, big_q: f64, b: f64, tol: f64) -> Result<usize> {
    let mut cut = l + 1;
    while geometric_block_tail(l, big_q, b, cut) >= tol {
        cut = cut + cut / 2 + 1;
        if cut > 1 << 20 {
            return Err(Error::TailBound {
                bound: geometric_block_tail(l, big_q, b, cut),
                target: tol,
                terms: cut,
            });
        }
    }
    Ok(cut)
}

/// Survival thresholds of a cell under the latent map: `X >= a` iff
/// `z > t_a`, for `a = 1, 2, ...` until `P(X >= a) < floor`.
fn thresholds(law: &MarginalLaw, floor: f64, max: usize) -> Vec<f64> {
    match *law {
        MarginalLaw::Bernoulli { p } => vec![-norm_quantile(p)],
        MarginalLaw::CorrectedGeometric { p } => {
            let q = 1.0 - p;
            let mut out = Vec::new();
            let mut qa = q;
            while qa >= floor && out.len() < max {
                out.push(-norm_quantile(qa));
                qa *= q;
            }
            out
        }
        MarginalLaw::Gaussian { .. } => Vec::new(),
    }
}

/// Law of the block sum of cells with laws `laws` whose latent correlations
/// are all equal to `rho` (0 gives independence, 1 comonotonicity).
pub fn exchangeable_block_law(laws: &[MarginalLaw], rho: f64) -> Result<IntPmf> {
    let l = laws.len();
    let family_cap = match laws[0] {
        MarginalLaw::Bernoulli { .. } => BERNOULLI_BLOCK_CAP,
        MarginalLaw::CorrectedGeometric { .. } => GEOMETRIC_BLOCK_CAP,
        MarginalLaw::Gaussian { .. } => {
            return Err(Error::EnumerationUnsupported("continuous cells".into()));
        }
    };
    if rho == 0.0 {
        let mut acc = IntPmf::point(0);
        for law in laws {
            acc = acc.convolve(&law.count_law().expect("discrete").table(TAIL_TOL / l as f64)?);
        }
        return Ok(acc);
    }

    let b: f64 = laws.iter().map(MarginalLaw::mean).sum();
    let (cut, cut_tail) = match laws[0] {
        MarginalLaw::CorrectedGeometric { .. } => {
            let big_q = laws
                .iter()
                .map(|x| match x {
                    MarginalLaw::CorrectedGeometric { p } => 1.0 - p,
                    _ => 0.0,
                })
                .fold(0.0, f64::max);
            let cut = geometric_cut(l, big_q, b, TAIL_TOL)?;
            (cut, geometric_block_tail(l, big_q, b, cut))
        }
        _ => (l + 1, 0.0),
    };
    let ts: Vec<Vec<f64>> = laws.iter().map(|law| thresholds(law, 0.0, cut - 1)).collect();

    if rho >= 1.0 {
        return Ok(comonotone(&ts, cut, cut_tail));
    }
    if l > family_cap {
        return Err(Error::EnumerationBudget { len: l, cap: family_cap });
    }

    let a = rho.sqrt();
    let s = (1.0 - rho).sqrt();
    let rule = GaussLegendre::new(10);
    let mut cell = vec![0.0; cut];
    let mut conv = vec![0.0; cut];
    let integrand = |w: f64, out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[0] = 1.0;
        let mut len = 1usize;
        for t in &ts {
            // Conditional pmf of the cell, truncated at `cut`.
            let mut prev = 1.0;
            let cl = (t.len() + 1).min(cut);
            for v in 0..cl {
                let next = if v < t.len() { norm_sf((t[v] - a * w) / s) } else { 0.0 };
                cell[v] = prev - next;
                prev = next;
            }
            let new_len = (len + cl - 1).min(cut);
            conv[..new_len].iter_mut().for_each(|v| *v = 0.0);
            for i in 0..len {
                if out[i] == 0.0 {
                    continue;
                }
                for j in 0..cl.min(new_len - i) {
                    conv[i + j] += out[i] * cell[j];
                }
            }
            out[..new_len].copy_from_slice(&conv[..new_len]);
            len = new_len;
        }
        let dens = crate::math::norm_pdf(w);
        out.iter_mut().for_each(|v| *v *= dens);
    };
    let probs = integrate_vec(&rule, integrand, cut, -W_RANGE, W_RANGE, 1e-16)?;
    Ok(IntPmf {
        start: 0,
        probs,
        tail: cut_tail + W_TAIL,
    }
    .trim())
}

/// All latent coordinates equal: `Y = Σ_i g_i(Z)` is a step function of `Z`
/// whose jumps are the pooled thresholds.
fn comonotone(ts: &[Vec<f64>], cut: usize, cut_tail: f64) -> IntPmf {
    let mut pooled: Vec<f64> = ts.iter().flatten().copied().collect();
    pooled.sort_by(f64::total_cmp);
    let mut probs = vec![0.0; cut];
    let mut upper = 1.0;
    for (v, &t) in pooled.iter().enumerate() {
        if v >= cut {
            break;
        }
        let next = norm_sf(t);
        probs[v] += upper - next;
        upper = next;
    }
    if pooled.len() < cut {
        probs[pooled.len()] += upper;
    }
    IntPmf {
        start: 0,
        probs,
        tail: cut_tail,
    }
    .trim()
}

/// Common latent correlation within a block of `l` cells, if all lags
/// `1..l` agree.
fn block_rho(latent: &Latent, l: usize) -> Option<f64> {
    let rho = latent.lag(1);
    (2..l).all(|h| latent.lag(h) == rho).then_some(rho)
}

/// Centered (and scaled) laws of the `m` block sums of row `n`.
pub fn block_laws(spec: &ArraySpec, n: u64, scheme: &BlockScheme) -> Result<LawSet> {
    let k = spec.k(n);
    if scheme.k != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: scheme.k,
        });
    }
    if scheme.l == 1 {
        let mut cells = cell_laws(spec, n)?;
        let m = scheme.m;
        if spec.is_stationary() {
            cells.laws[0].1 = m;
        } else {
            cells.laws.truncate(m);
        }
        return Ok(cells);
    }
    let c = cell_scale(spec, k);
    let latent = spec.latent(n)?;
    let l = scheme.l;
    let laws = spec.row_laws(n)?;

    if spec.family == Family::Gaussian {
        let build = |j: usize| {
            let idx = scheme.block(j);
            let mut var = 0.0;
            for r in idx.clone() {
                for s in idx.clone() {
                    let (sr, ss) = (laws[r].variance().sqrt(), laws[s].variance().sqrt());
                    var += sr * ss * latent.lag(r.abs_diff(s));
                }
            }
            CenteredLaw::Normal { sd: c * var.sqrt() }
        };
        return Ok(collect_blocks(spec, scheme, build));
    }

    let rho = block_rho(&latent, l).ok_or_else(|| {
        Error::EnumerationUnsupported(format!(
            "latent correlations within a block of {l} cells are not all equal"
        ))
    })?;
    let mut out = Vec::new();
    let blocks = if spec.is_stationary() { 1 } else { scheme.m };
    for j in 0..blocks {
        let block = &laws[scheme.block(j)];
        let pmf = exchangeable_block_law(block, rho)?;
        let mean = block.iter().map(MarginalLaw::mean).sum();
        let count = if spec.is_stationary() { scheme.m } else { 1 };
        out.push((CenteredLaw::Discrete { pmf, mean, scale: c }, count));
    }
    Ok(LawSet { laws: out })
}

fn collect_blocks<F: Fn(usize) -> CenteredLaw>(spec: &ArraySpec, scheme: &BlockScheme, build: F) -> LawSet {
    if spec.is_stationary() {
        LawSet {
            laws: vec![(build(0), scheme.m)],
        }
    } else {
        LawSet {
            laws: (0..scheme.m).map(|j| (build(j), 1)).collect(),
        }
    }
}

/// `U(m, ε, T)`, `B_m[T]`, `A_m[T](δ)`, `L_m[T](ε)`.
pub fn grouped_statistics(
    spec: &ArraySpec,
    n: u64,
    scheme: &BlockScheme,
    delta: f64,
    eps: f64,
) -> Result<Functionals> {
    Ok(block_laws(spec, n, scheme)?.functionals(eps, delta))
}

/// One comparison inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Relative and absolute slack for rounding in the comparisons: equality is
/// attained exactly in some cases (`ℓ = 1`, comonotone blocks).
pub const COMPARISON_REL_SLACK: f64 = 1e-10;
pub const COMPARISON_ABS_SLACK: f64 = 1e-14;

impl Comparison {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let holds = lhs <= rhs * (1.0 + COMPARISON_REL_SLACK) + COMPARISON_ABS_SLACK;
        Self { lhs, rhs, holds }
    }
}

/// The four grouped-vs-ungrouped comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonSet {
    /// `U(m, ε, T) <= ℓ U(n, ε/ℓ, X)`.
    pub uan: Comparison,
    /// `B_m[T] <= ℓ² B_n[X]`.
    pub variance: Comparison,
    /// `A_m[T](δ) <= ℓ^{1+δ} A_n[X](δ)`.
    pub lyapounov: Comparison,
    /// `L_m[T](ε) <= ℓ² L_n[X](ε/ℓ)`.
    pub lindeberg: Comparison,
}

impl ComparisonSet {
    pub fn all_hold(&self) -> bool {
        self.uan.holds && self.variance.holds && self.lyapounov.holds && self.lindeberg.holds
    }
}

pub fn comparison_inequalities(
    spec: &ArraySpec,
    n: u64,
    scheme: &BlockScheme,
    delta: f64,
    eps: f64,
) -> Result<ComparisonSet> {
    let grouped = grouped_statistics(spec, n, scheme, delta, eps)?;
    let cells = cell_laws(spec, n)?;
    let l = scheme.l as f64;
    Ok(ComparisonSet {
        uan: Comparison::new(grouped.uan, l * cells.uan(eps / l)),
        variance: Comparison::new(grouped.var_sup, l * l * cells.var_sup()),
        lyapounov: Comparison::new(grouped.lyapounov, l.powf(1.0 + delta) * cells.lyapounov(delta)),
        lindeberg: Comparison::new(grouped.lindeberg, l * l * cells.lindeberg(eps / l)),
    })
}
