//! Negligibility and moment functionals of centered, scaled cell laws.

use alloc::vec::Vec;

use num_traits::Float;

use crate::assoc_gen::{ArraySpec, Normalization};
use crate::distributions::{IntPmf, MarginalLaw, TAIL_TOL};
use crate::error::Result;
use crate::math::{normal_abs_moment, normal_truncated_second_moment, norm_sf};

/// Law of `c (V - E V)` for a cell or block sum `V`.
#[derive(Debug, Clone, PartialEq)]
pub enum CenteredLaw {
    /// Integer-valued `V` with pmf table, mean and scale `c`.
    Discrete { pmf: IntPmf, mean: f64, scale: f64 },
    /// Centered normal with standard deviation `sd` (already scaled).
    Normal { sd: f64 },
}

impl CenteredLaw {
    pub fn from_marginal(law: &MarginalLaw, scale: f64) -> Result<Self> {
        Ok(match law.count_law() {
            Some(c) => CenteredLaw::Discrete {
                pmf: c.table(TAIL_TOL)?,
                mean: law.mean(),
                scale,
            },
            None => CenteredLaw::Normal {
                sd: scale * law.variance().sqrt(),
            },
        })
    }

    /// Atoms `(c (j - mean), P(V = j))`.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (pmf, mean, scale) = match self {
            CenteredLaw::Discrete { pmf, mean, scale } => (Some(pmf), *mean, *scale),
            CenteredLaw::Normal { .. } => (None, 0.0, 0.0),
        };
        pmf.into_iter()
            .flat_map(move |t| t.iter().map(move |(j, p)| (scale * (j as f64 - mean), p)))
    }

    /// Certified bound on the mass (moment-weighted) missing from the atoms.
    pub fn tail(&self) -> f64 {
        match self {
            CenteredLaw::Discrete { pmf, .. } => pmf.tail,
            CenteredLaw::Normal { .. } => 0.0,
        }
    }

    /// `P(|Y| >= eps)`.
    pub fn tail_prob(&self, eps: f64) -> f64 {
        match self {
            CenteredLaw::Normal { sd } => {
                if *sd == 0.0 {
                    0.0
                } else {
                    2.0 * norm_sf(eps / sd)
                }
            }
            _ => self.atoms().filter(|(x, _)| x.abs() >= eps).map(|(_, p)| p).sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            CenteredLaw::Normal { sd } => sd * sd,
            _ => self.atoms().map(|(x, p)| x * x * p).sum(),
        }
    }

    /// `E|Y|^s`.
    pub fn abs_moment(&self, s: f64) -> f64 {
        match self {
            CenteredLaw::Normal { sd } => normal_abs_moment(*sd, s),
            _ => self.atoms().map(|(x, p)| x.abs().powf(s) * p).sum(),
        }
    }

    /// `E[Y² 1{|Y| >= eps}]`.
    pub fn trunc_second(&self, eps: f64) -> f64 {
        match self {
            CenteredLaw::Normal { sd } => normal_truncated_second_moment(*sd, eps),
            _ => self
                .atoms()
                .filter(|(x, _)| x.abs() >= eps)
                .map(|(x, p)| x * x * p)
                .sum(),
        }
    }
}

/// Distinct laws with multiplicities: the cells of a row, or the blocks of a
/// regrouped row.
#[derive(Debug, Clone, PartialEq)]
pub struct LawSet {
    pub laws: Vec<(CenteredLaw, usize)>,
}

/// The four functionals `U(ε)`, `B`, `A(δ)`, `L(ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Functionals {
    /// `sup P(|Y| >= ε)`.
    pub uan: f64,
    /// `sup Var(Y)`.
    pub var_sup: f64,
    /// `Σ E|Y|^{2+δ}`.
    pub lyapounov: f64,
    /// `Σ E[Y² 1{|Y| >= ε}]`.
    pub lindeberg: f64,
}

impl LawSet {
    pub fn count(&self) -> usize {
        self.laws.iter().map(|(_, c)| c).sum()
    }

    pub fn uan(&self, eps: f64) -> f64 {
        self.laws.iter().map(|(l, _)| l.tail_prob(eps)).fold(0.0, f64::max)
    }

    pub fn var_sup(&self) -> f64 {
        self.laws.iter().map(|(l, _)| l.variance()).fold(0.0, f64::max)
    }

    pub fn lyapounov(&self, delta: f64) -> f64 {
        self.laws
            .iter()
            .map(|(l, c)| *c as f64 * l.abs_moment(2.0 + delta))
            .sum()
    }

    pub fn lindeberg(&self, eps: f64) -> f64 {
        self.laws.iter().map(|(l, c)| *c as f64 * l.trunc_second(eps)).sum()
    }

    pub fn functionals(&self, eps: f64, delta: f64) -> Functionals {
        Functionals {
            uan: self.uan(eps),
            var_sup: self.var_sup(),
            lyapounov: self.lyapounov(delta),
            lindeberg: self.lindeberg(eps),
        }
    }
}

/// Scale `c` applied to centered cells: 1, or `1/√k`.
pub fn cell_scale(spec: &ArraySpec, k: usize) -> f64 {
    match spec.normalization {
        Normalization::Raw => 1.0,
        Normalization::CenteredSqrtK => 1.0 / (k as f64).sqrt(),
    }
}

/// Centered (and scaled) cell laws of row `n`.
pub fn cell_laws(spec: &ArraySpec, n: u64) -> Result<LawSet> {
    let k = spec.k(n);
    let c = cell_scale(spec, k);
    if spec.is_stationary() {
        let law = CenteredLaw::from_marginal(&spec.cell_law_at(k, 0)?, c)?;
        return Ok(LawSet { laws: alloc::vec![(law, k)] });
    }
    let laws = spec
        .row_laws(n)?
        .iter()
        .map(|l| Ok((CenteredLaw::from_marginal(l, c)?, 1)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LawSet { laws })
}

/// `U(n, ε, X)`.
pub fn uan_statistic(spec: &ArraySpec, n: u64, eps: f64) -> Result<f64> {
    Ok(cell_laws(spec, n)?.uan(eps))
}

/// `A_n[X](δ)`.
pub fn lyapounov_statistic(spec: &ArraySpec, n: u64, delta: f64) -> Result<f64> {
    Ok(cell_laws(spec, n)?.lyapounov(delta))
}

/// `L_n[X](ε)`.
pub fn lindeberg_statistic(spec: &ArraySpec, n: u64, eps: f64) -> Result<f64> {
    Ok(cell_laws(spec, n)?.lindeberg(eps))
}
