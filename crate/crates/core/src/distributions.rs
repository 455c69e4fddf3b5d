//! Marginal and limit laws: exact pmfs, characteristic functions, moments.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::math::{cis_minus_one, ln_choose, normal_abs_moment};

/// Default certified bound on the moment-weighted mass dropped by [`IntPmf`]
/// tables.
pub const TAIL_TOL: f64 = 1e-14;

/// Law of a single array cell.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case"))]
pub enum MarginalLaw {
    /// `P(X = 1) = p`.
    Bernoulli { p: f64 },
    /// Failures before the first success: `P(X = j) = p q^j`, `j >= 0`.
    CorrectedGeometric { p: f64 },
    /// `s · Z` with `Z` standard normal.
    Gaussian { scale: f64 },
}

/// Limit targets.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "law", rename_all = "snake_case"))]
pub enum LimitLaw {
    Poisson { lambda: f64 },
    Gaussian { mean: f64, variance: f64 },
}

/// Integer-valued laws with exact pmfs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountLaw {
    Bernoulli { p: f64 },
    CorrectedGeometric { p: f64 },
    Binomial { n: u64, p: f64 },
    /// Number of failures before the `k`-th success: support `{0, 1, ...}`,
    /// `pmf(j) = C(j+k-1, j) p^k q^j`.
    ShiftedNegBinomial { k: u64, p: f64 },
    Poisson { lambda: f64 },
}

fn check_unit_open(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid(name, alloc::format!("{p} not in (0, 1)")))
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, alloc::format!("{v} must be positive and finite")))
    }
}

/// `ln(1 + w)` for complex `w`, accurate when `w` is small.
pub(crate) fn cln1p(w: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p();
    let im = w.im.atan2(1.0 + w.re);
    Complex64::new(re, im)
}

impl MarginalLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MarginalLaw::Bernoulli { p } | MarginalLaw::CorrectedGeometric { p } => {
                check_unit_open("p", p)
            }
            MarginalLaw::Gaussian { scale } => check_positive("scale", scale),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            MarginalLaw::Bernoulli { p } => p,
            MarginalLaw::CorrectedGeometric { p } => (1.0 - p) / p,
            MarginalLaw::Gaussian { .. } => 0.0,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            MarginalLaw::Bernoulli { p } => p * (1.0 - p),
            MarginalLaw::CorrectedGeometric { p } => (1.0 - p) / (p * p),
            MarginalLaw::Gaussian { scale } => scale * scale,
        }
    }

    pub fn cf(&self, u: f64) -> Complex64 {
        match *self {
            MarginalLaw::Bernoulli { p } => CountLaw::Bernoulli { p }.cf(u),
            MarginalLaw::CorrectedGeometric { p } => CountLaw::CorrectedGeometric { p }.cf(u),
            MarginalLaw::Gaussian { scale } => Complex64::new((-0.5 * scale * scale * u * u).exp(), 0.0),
        }
    }

    /// The integer-valued law, if any.
    pub fn count_law(&self) -> Option<CountLaw> {
        match *self {
            MarginalLaw::Bernoulli { p } => Some(CountLaw::Bernoulli { p }),
            MarginalLaw::CorrectedGeometric { p } => Some(CountLaw::CorrectedGeometric { p }),
            MarginalLaw::Gaussian { .. } => None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.count_law().is_some()
    }

    /// `(mean, variance, E|X - mean|^{2+δ})`.
    pub fn moments(&self, delta: f64) -> Result<(f64, f64, f64)> {
        let s = 2.0 + delta;
        let abs = match self.count_law() {
            Some(law) => {
                let mu = self.mean();
                let table = law.table(TAIL_TOL)?;
                table.expect(|j| (j as f64 - mu).abs().powf(s))
            }
            None => normal_abs_moment(self.variance().sqrt(), s),
        };
        Ok((self.mean(), self.variance(), abs))
    }
}

impl LimitLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LimitLaw::Poisson { lambda } => check_positive("lambda", lambda),
            LimitLaw::Gaussian { mean, variance } => {
                if !mean.is_finite() {
                    return Err(invalid("mean", "must be finite"));
                }
                check_positive("variance", variance)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            LimitLaw::Poisson { lambda } => lambda,
            LimitLaw::Gaussian { mean, .. } => mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            LimitLaw::Poisson { lambda } => lambda,
            LimitLaw::Gaussian { variance, .. } => variance,
        }
    }

    pub fn cf(&self, u: f64) -> Complex64 {
        match *self {
            LimitLaw::Poisson { lambda } => CountLaw::Poisson { lambda }.cf(u),
            LimitLaw::Gaussian { mean, variance } => {
                Complex64::from_polar((-0.5 * variance * u * u).exp(), mean * u)
            }
        }
    }
}

impl CountLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CountLaw::Bernoulli { p } | CountLaw::CorrectedGeometric { p } => check_unit_open("p", p),
            CountLaw::Binomial { n, p } => {
                if n == 0 {
                    return Err(invalid("n", "must be at least 1"));
                }
                check_unit_open("p", p)
            }
            CountLaw::ShiftedNegBinomial { k, p } => {
                if k == 0 {
                    return Err(invalid("k", "must be at least 1"));
                }
                check_unit_open("p", p)
            }
            CountLaw::Poisson { lambda } => check_positive("lambda", lambda),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            CountLaw::Bernoulli { p } => p,
            CountLaw::CorrectedGeometric { p } => (1.0 - p) / p,
            CountLaw::Binomial { n, p } => n as f64 * p,
            CountLaw::ShiftedNegBinomial { k, p } => k as f64 * (1.0 - p) / p,
            CountLaw::Poisson { lambda } => lambda,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            CountLaw::Bernoulli { p } => p * (1.0 - p),
            CountLaw::CorrectedGeometric { p } => (1.0 - p) / (p * p),
            CountLaw::Binomial { n, p } => n as f64 * p * (1.0 - p),
            CountLaw::ShiftedNegBinomial { k, p } => k as f64 * (1.0 - p) / (p * p),
            CountLaw::Poisson { lambda } => lambda,
        }
    }

    fn upper(&self) -> Option<i64> {
        match *self {
            CountLaw::Bernoulli { .. } => Some(1),
            CountLaw::Binomial { n, .. } => Some(n as i64),
            _ => None,
        }
    }

    fn mode(&self) -> i64 {
        match *self {
            CountLaw::Bernoulli { p } => i64::from(p > 0.5),
            CountLaw::CorrectedGeometric { .. } => 0,
            CountLaw::Binomial { n, p } => (((n + 1) as f64 * p).floor() as i64).min(n as i64),
            CountLaw::ShiftedNegBinomial { k, p } => {
                if k <= 1 {
                    0
                } else {
                    ((k - 1) as f64 * (1.0 - p) / p).floor() as i64
                }
            }
            CountLaw::Poisson { lambda } => lambda.floor() as i64,
        }
    }

    /// `ln pmf(j)`; `-∞` outside the support.
    pub fn ln_pmf(&self, j: i64) -> f64 {
        if j < 0 || self.upper().is_some_and(|u| j > u) {
            return f64::NEG_INFINITY;
        }
        let jf = j as f64;
        match *self {
            CountLaw::Bernoulli { p } => {
                if j == 1 {
                    p.ln()
                } else {
                    (-p).ln_1p()
                }
            }
            CountLaw::CorrectedGeometric { p } => p.ln() + jf * (-p).ln_1p(),
            CountLaw::Binomial { n, p } => {
                ln_choose(n, j as u64) + jf * p.ln() + (n as f64 - jf) * (-p).ln_1p()
            }
            CountLaw::ShiftedNegBinomial { k, p } => {
                ln_choose(j as u64 + k - 1, j as u64) + k as f64 * p.ln() + jf * (-p).ln_1p()
            }
            CountLaw::Poisson { lambda } => {
                jf * lambda.ln() - lambda - ln_factorial(j as u64)
            }
        }
    }

    pub fn pmf(&self, j: i64) -> f64 {
        self.ln_pmf(j).exp()
    }

    pub fn cf(&self, u: f64) -> Complex64 {
        let e = cis_minus_one(u);
        match *self {
            CountLaw::Bernoulli { p } => Complex64::new(1.0, 0.0) + e * p,
            CountLaw::CorrectedGeometric { p } => {
                Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - e * ((1.0 - p) / p))
            }
            CountLaw::Binomial { n, p } => (cln1p(e * p) * n as f64).exp(),
            CountLaw::ShiftedNegBinomial { k, p } => {
                (-cln1p(-e * ((1.0 - p) / p)) * k as f64).exp()
            }
            CountLaw::Poisson { lambda } => (e * lambda).exp(),
        }
    }

    /// pmf table whose omitted mass, weighted by `(1 + |j - mean|)^4`, is
    /// certified below `tol`.
    pub fn table(&self, tol: f64) -> Result<IntPmf> {
        self.validate()?;
        IntPmf::from_log_concave(|j| self.ln_pmf(j), self.mode(), self.mean(), self.upper(), tol)
    }
}

fn ln_factorial(n: u64) -> f64 {
    if n <= 256 {
        (2..=n).map(|t| (t as f64).ln()).sum()
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// A pmf on consecutive integers `start, start + 1, ...` together with a
/// certified bound on the dropped mass.
///
/// `tail` bounds `Σ_{j omitted} (1 + |j - mean|)^4 pmf(j)`, so it also bounds
/// the omitted probability and the omitted part of any moment of order ≤ 4
/// about the mean.
#[derive(Debug, Clone, PartialEq)]
pub struct IntPmf {
    pub start: i64,
    pub probs: Vec<f64>,
    pub tail: f64,
}

const MAX_TABLE: usize = 1 << 24;

fn weight(j: i64, mean: f64) -> f64 {
    let d = 1.0 + (j as f64 - mean).abs();
    let d2 = d * d;
    d2 * d2
}

impl IntPmf {
    pub fn point(x: i64) -> Self {
        Self {
            start: x,
            probs: alloc::vec![1.0],
            tail: 0.0,
        }
    }

    /// Tabulate a log-concave pmf on `{0, ..., upper}` by walking out from
    /// the mode. Log-concavity makes the weighted term ratios monotone beyond
    /// the mean, which turns the first ratio below one into a geometric tail
    /// bound.
    pub fn from_log_concave<F: Fn(i64) -> f64>(
        ln_pmf: F,
        mode: i64,
        mean: f64,
        upper: Option<i64>,
        tol: f64,
    ) -> Result<Self> {
        let term = |j: i64| weight(j, mean) * ln_pmf(j).exp();
        let half_tol = 0.5 * tol;

        let mut right = Vec::new();
        let mut right_tail = 0.0;
        let mut j = mode;
        loop {
            right.push(ln_pmf(j).exp());
            if upper.is_some_and(|u| j >= u) {
                break;
            }
            if right.len() > MAX_TABLE {
                return Err(Error::TailBound {
                    bound: f64::INFINITY,
                    target: tol,
                    terms: right.len(),
                });
            }
            if j as f64 >= mean {
                let (t0, t1) = (term(j), term(j + 1));
                let rho = if t0 > 0.0 { t1 / t0 } else { 0.0 };
                if rho < 1.0 {
                    let bound = t1 / (1.0 - rho);
                    if bound < half_tol || t1 == 0.0 {
                        right_tail = bound;
                        break;
                    }
                }
            }
            j += 1;
        }

        let mut left = Vec::new();
        let mut left_tail = 0.0;
        let mut j = mode;
        while j > 0 {
            if (j as f64) <= mean {
                let (t0, t1) = (term(j), term(j - 1));
                let rho = if t0 > 0.0 { t1 / t0 } else { 0.0 };
                if rho < 1.0 {
                    let bound = t1 / (1.0 - rho);
                    if bound < half_tol || t1 == 0.0 {
                        left_tail = bound;
                        break;
                    }
                }
            }
            j -= 1;
            left.push(ln_pmf(j).exp());
        }
        let start = mode - left.len() as i64;
        left.reverse();
        left.extend(right);
        Ok(Self {
            start,
            probs: left,
            tail: left_tail + right_tail,
        })
    }

    pub fn end(&self) -> i64 {
        self.start + self.probs.len() as i64
    }

    pub fn get(&self, j: i64) -> f64 {
        if j < self.start || j >= self.end() {
            0.0
        } else {
            self.probs[(j - self.start) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(i, &p)| (self.start + i as i64, p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `Σ_j f(j) pmf(j)` over the table.
    pub fn expect<F: Fn(i64) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(j, p)| f(j) * p).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|j| j as f64)
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.expect(|j| (j as f64 - mu) * (j as f64 - mu))
    }

    /// Law of the sum of independent variables.
    pub fn convolve(&self, other: &IntPmf) -> IntPmf {
        let mut probs = alloc::vec![0.0; self.probs.len() + other.probs.len() - 1];
        for (i, &a) in self.probs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.probs.iter().enumerate() {
                probs[i + j] += a * b;
            }
        }
        // Tail terms: a crude but valid union bound.
        IntPmf {
            start: self.start + other.start,
            probs,
            tail: self.tail + other.tail,
        }
    }

    /// Drop (near-)zero entries at both ends.
    pub fn trim(mut self) -> Self {
        let lead = self.probs.iter().take_while(|&&p| p == 0.0).count();
        if lead == self.probs.len() {
            return self;
        }
        let trail = self.probs.iter().rev().take_while(|&&p| p == 0.0).count();
        self.probs.truncate(self.probs.len() - trail);
        self.probs.drain(..lead);
        self.start += lead as i64;
        self
    }
}

/// Total variation distance `½ Σ |a_j - b_j|`, with both tables' omitted
/// mass added (so the value is an upper bound within `½(tail_a + tail_b)`).
pub fn tv_distance(a: &IntPmf, b: &IntPmf) -> f64 {
    let lo = a.start.min(b.start);
    let hi = a.end().max(b.end());
    let body: f64 = (lo..hi).map(|j| (a.get(j) - b.get(j)).abs()).sum();
    (0.5 * (body + a.tail + b.tail)).min(1.0)
}
