//! Associated arrays: latent Gaussian rows with non-negative correlations
//! pushed through non-decreasing inverse-cdf maps.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_traits::Float;
use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::cov::CovMatrix;
use crate::distributions::MarginalLaw;
use crate::error::{invalid, Error, Result};
use crate::math::{gaussian_orthant_excess, norm_quantile, norm_sf, GaussLegendre};

/// Latent correlation structure of a row.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum CorrelationModel {
    Independent,
    /// Every pair has latent correlation `rho`.
    Exchangeable { rho: f64 },
    /// Lag `j` has latent correlation `rho0 · rate^(j-1)` for `1 <= j <= horizon`
    /// and zero beyond.
    StationaryDecay { rho0: f64, rate: f64, horizon: usize },
}

/// Multiplier applied to every off-diagonal latent correlation:
/// `scale(n) = k(n)^(-beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Scaling {
    pub beta: f64,
}

impl Scaling {
    pub fn factor(&self, k: usize) -> f64 {
        if self.beta == 0.0 {
            1.0
        } else {
            (k as f64).powf(-self.beta)
        }
    }
}

/// Marginal family of the cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Family {
    Bernoulli,
    CorrectedGeometric,
    Gaussian,
}

/// How the cell parameter depends on the row size `k`.
///
/// For Bernoulli cells the parameter is `p`; for corrected geometric cells
/// it is the failure probability `q = 1 - p`; for Gaussian cells it is the
/// variance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum Parameter {
    /// The same value in every row.
    Fixed { value: f64 },
    /// `lambda / k` in every cell.
    Rate { lambda: f64 },
    /// `lambda / k · w_i` with weights rising linearly from `1 - spread` to
    /// `1 + spread` across the row (mean weight 1).
    Ramp { lambda: f64, spread: f64 },
}

/// Row size as a function of the array index: `k(n) = max(2, round(coef · n^power))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct RowSize {
    pub coef: f64,
    pub power: f64,
}

impl Default for RowSize {
    fn default() -> Self {
        Self { coef: 1.0, power: 1.0 }
    }
}

impl RowSize {
    pub fn k(&self, n: u64) -> usize {
        ((self.coef * (n as f64).powf(self.power)).round() as usize).max(2)
    }
}

/// Whether the diagnostics see raw cells or `(X - a) / √k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Normalization {
    #[default]
    Raw,
    CenteredSqrtK,
}

/// Full description of a by-row array.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ArraySpec {
    pub family: Family,
    #[cfg_attr(feature = "serde", serde(default))]
    pub rows: RowSize,
    pub param: Parameter,
    pub dependence: CorrelationModel,
    #[cfg_attr(feature = "serde", serde(default))]
    pub scaling: Scaling,
    #[cfg_attr(feature = "serde", serde(default))]
    pub normalization: Normalization,
}

impl ArraySpec {
    pub fn new(family: Family, param: Parameter, dependence: CorrelationModel) -> Self {
        Self {
            family,
            rows: RowSize::default(),
            param,
            dependence,
            scaling: Scaling::default(),
            normalization: Normalization::Raw,
        }
    }

    pub fn with_scaling(mut self, beta: f64) -> Self {
        self.scaling = Scaling { beta };
        self
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn k(&self, n: u64) -> usize {
        self.rows.k(n)
    }

    /// Checks that do not depend on `n`.
    pub fn validate(&self) -> Result<()> {
        if !(self.rows.coef > 0.0 && self.rows.power > 0.0) {
            return Err(invalid("rows", "coef and power must be positive"));
        }
        if !(self.scaling.beta >= 0.0) {
            return Err(invalid("scaling.beta", "must be non-negative"));
        }
        match self.dependence {
            CorrelationModel::Independent => {}
            CorrelationModel::Exchangeable { rho } => {
                if !(0.0..=1.0).contains(&rho) {
                    return Err(invalid("rho", format!("{rho} not in [0, 1]")));
                }
            }
            CorrelationModel::StationaryDecay { rho0, rate, horizon } => {
                if !(0.0..=1.0).contains(&rho0) || !(0.0..=1.0).contains(&rate) {
                    return Err(invalid("rho0/rate", "must lie in [0, 1]"));
                }
                if horizon == 0 {
                    return Err(invalid("horizon", "must be at least 1"));
                }
            }
        }
        match self.param {
            Parameter::Fixed { value } => {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(invalid("param.value", "must be positive"));
                }
            }
            Parameter::Rate { lambda } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(invalid("param.lambda", "must be positive"));
                }
            }
            Parameter::Ramp { lambda, spread } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(invalid("param.lambda", "must be positive"));
                }
                if !(0.0..1.0).contains(&spread) {
                    return Err(invalid("param.spread", "must lie in [0, 1)"));
                }
            }
        }
        Ok(())
    }

    /// All cells share one law.
    pub fn is_stationary(&self) -> bool {
        !matches!(self.param, Parameter::Ramp { spread, .. } if spread != 0.0)
    }

    fn raw_param(&self, k: usize, i: usize) -> f64 {
        match self.param {
            Parameter::Fixed { value } => value,
            Parameter::Rate { lambda } => lambda / k as f64,
            Parameter::Ramp { lambda, spread } => {
                let t = if k > 1 { i as f64 / (k - 1) as f64 } else { 0.5 };
                lambda / k as f64 * (1.0 - spread + 2.0 * spread * t)
            }
        }
    }

    /// Law of cell `i` (0-based) in a row of `k` cells.
    pub fn cell_law_at(&self, k: usize, i: usize) -> Result<MarginalLaw> {
        let v = self.raw_param(k, i);
        let law = match self.family {
            Family::Bernoulli => MarginalLaw::Bernoulli { p: v },
            Family::CorrectedGeometric => MarginalLaw::CorrectedGeometric { p: 1.0 - v },
            Family::Gaussian => MarginalLaw::Gaussian { scale: v.sqrt() },
        };
        law.validate()?;
        Ok(law)
    }

    pub fn cell_law(&self, n: u64, i: usize) -> Result<MarginalLaw> {
        self.cell_law_at(self.k(n), i)
    }

    /// Laws of all cells of row `n`.
    pub fn row_laws(&self, n: u64) -> Result<Vec<MarginalLaw>> {
        let k = self.k(n);
        (0..k).map(|i| self.cell_law_at(k, i)).collect()
    }

    /// Latent correlation at lag `h >= 1` in a row of `k` cells.
    pub fn latent_lag(&self, k: usize, h: usize) -> f64 {
        if h == 0 {
            return 1.0;
        }
        let s = self.scaling.factor(k);
        match self.dependence {
            CorrelationModel::Independent => 0.0,
            CorrelationModel::Exchangeable { rho } => rho * s,
            CorrelationModel::StationaryDecay { rho0, rate, horizon } => {
                if h <= horizon {
                    rho0 * rate.powi(h as i32 - 1) * s
                } else {
                    0.0
                }
            }
        }
    }

    /// Checked latent correlation structure of row `n`.
    pub fn latent(&self, n: u64) -> Result<Latent> {
        self.validate()?;
        Latent::new(self, self.k(n))
    }

    /// Latent correlation matrix of row `n` as a [`CovMatrix`].
    pub fn latent_matrix(&self, n: u64) -> Result<CovMatrix> {
        let latent = self.latent(n)?;
        Ok(latent.matrix())
    }
}

/// Latent correlation structure with the factorization used for sampling.
#[derive(Debug, Clone)]
pub struct Latent {
    k: usize,
    kind: LatentKind,
}

#[derive(Debug, Clone)]
enum LatentKind {
    Independent,
    /// `z_i = √ρ W + √(1-ρ) E_i`.
    OneFactor { rho: f64 },
    /// Banded lower Cholesky factor; row `i` holds `L[i][i-h..=i]`, left-padded
    /// with zeros.
    Banded { lags: Vec<f64>, factor: Vec<f64> },
}

/// Pivots below this are treated as a failed leading minor.
const PSD_TOL: f64 = 1e-10;

impl Latent {
    fn new(spec: &ArraySpec, k: usize) -> Result<Self> {
        let kind = match spec.dependence {
            CorrelationModel::Independent => LatentKind::Independent,
            CorrelationModel::Exchangeable { .. } => {
                let rho = spec.latent_lag(k, 1);
                if rho == 0.0 {
                    LatentKind::Independent
                } else {
                    LatentKind::OneFactor { rho }
                }
            }
            CorrelationModel::StationaryDecay { horizon, .. } => {
                let h = horizon.min(k - 1);
                let lags: Vec<f64> = (0..=h).map(|j| spec.latent_lag(k, j)).collect();
                if lags[1..].iter().all(|&c| c == 0.0) {
                    LatentKind::Independent
                } else {
                    let factor = banded_cholesky(&lags, k)?;
                    LatentKind::Banded { lags, factor }
                }
            }
        };
        Ok(Self { k, kind })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn lag(&self, h: usize) -> f64 {
        if h == 0 {
            return 1.0;
        }
        match &self.kind {
            LatentKind::Independent => 0.0,
            LatentKind::OneFactor { rho } => *rho,
            LatentKind::Banded { lags, .. } => lags.get(h).copied().unwrap_or(0.0),
        }
    }

    /// Largest lag with non-zero correlation.
    pub fn reach(&self) -> usize {
        match &self.kind {
            LatentKind::Independent => 0,
            LatentKind::OneFactor { .. } => self.k - 1,
            LatentKind::Banded { lags, .. } => lags.len() - 1,
        }
    }

    pub fn is_independent(&self) -> bool {
        matches!(self.kind, LatentKind::Independent)
    }

    pub fn matrix(&self) -> CovMatrix {
        let lags = (0..=self.reach()).map(|h| self.lag(h)).collect();
        CovMatrix::Toeplitz { k: self.k, lags }
    }

    /// Fill `out` with the first `out.len()` coordinates of a latent row.
    ///
    /// The latent structure is stationary, so this is also the law of any
    /// contiguous stretch of that length.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let len = out.len();
        debug_assert!(len <= self.k);
        match &self.kind {
            LatentKind::Independent => {
                for z in out.iter_mut() {
                    *z = StandardNormal.sample(rng);
                }
            }
            LatentKind::OneFactor { rho } => {
                let w: f64 = StandardNormal.sample(rng);
                let a = rho.sqrt() * w;
                let b = (1.0 - rho).sqrt();
                for z in out.iter_mut() {
                    let e: f64 = StandardNormal.sample(rng);
                    *z = a + b * e;
                }
            }
            LatentKind::Banded { lags, factor } => {
                let h = lags.len() - 1;
                let w = h + 1;
                // Ring buffer of the last h+1 innovations.
                let mut stack = [0.0f64; 32];
                let mut heap = Vec::new();
                let ring: &mut [f64] = if w <= stack.len() {
                    &mut stack[..w]
                } else {
                    heap.resize(w, 0.0);
                    &mut heap
                };
                for i in 0..len {
                    let e: f64 = StandardNormal.sample(rng);
                    ring[i % w] = e;
                    let row = &factor[i * w..(i + 1) * w];
                    let mut acc = 0.0;
                    // row[t] multiplies innovation i - h + t.
                    for (t, &l) in row.iter().enumerate() {
                        let idx = i + t;
                        if idx >= h && l != 0.0 {
                            acc += l * ring[(idx - h) % w];
                        }
                    }
                    out[i] = acc;
                }
            }
        }
    }
}

/// Semidefinite-tolerant Cholesky factor of the `k × k` banded Toeplitz
/// matrix with first row `lags` (bandwidth `lags.len() - 1`).
fn banded_cholesky(lags: &[f64], k: usize) -> Result<Vec<f64>> {
    let h = lags.len() - 1;
    let w = h + 1;
    let mut l = vec![0.0f64; k * w];
    // L[i][j] lives at l[i*w + (j + h - i)].
    let at = |i: usize, j: usize| i * w + (j + h - i);
    for i in 0..k {
        let j0 = i.saturating_sub(h);
        for j in j0..=i {
            let mut s = lags[i - j];
            let t0 = j0.max(j.saturating_sub(h));
            for t in t0..j {
                s -= l[at(i, t)] * l[at(j, t)];
            }
            if i == j {
                if s < -PSD_TOL {
                    return Err(Error::NotPositiveSemidefinite { minor: i + 1 });
                }
                l[at(i, i)] = s.max(0.0).sqrt();
            } else {
                let d = l[at(j, j)];
                if d > 1e-12 {
                    l[at(i, j)] = s / d;
                } else if s.abs() > 1e-8 {
                    return Err(Error::NotPositiveSemidefinite { minor: i + 1 });
                }
            }
        }
    }
    Ok(l)
}

/// Non-decreasing map from a latent standard normal to a cell value.
#[derive(Debug, Clone)]
pub enum CellTransform {
    /// `1{z > t}`.
    Threshold(f64),
    /// `#{a : z > t_a}` over increasing thresholds, with a log-formula fallback
    /// past the last one.
    Staircase { thresholds: Vec<f64>, ln_q: f64 },
    /// `s · z`.
    Scale(f64),
}

impl CellTransform {
    pub fn new(law: &MarginalLaw) -> Self {
        match *law {
            MarginalLaw::Bernoulli { p } => CellTransform::Threshold(-norm_quantile(p)),
            MarginalLaw::CorrectedGeometric { p } => {
                let ln_q = (-p).ln_1p();
                // X >= a iff Φc(z) < q^a iff z > -Φ⁻¹(q^a).
                let mut thresholds = Vec::new();
                let mut a = 1.0;
                loop {
                    let ln_qa = a * ln_q;
                    if ln_qa < -700.0 {
                        break;
                    }
                    thresholds.push(-norm_quantile(ln_qa.exp()));
                    a += 1.0;
                }
                CellTransform::Staircase { thresholds, ln_q }
            }
            MarginalLaw::Gaussian { scale } => CellTransform::Scale(scale),
        }
    }

    #[inline]
    pub fn apply(&self, z: f64) -> f64 {
        match self {
            CellTransform::Threshold(t) => f64::from(u8::from(z > *t)),
            CellTransform::Staircase { thresholds, ln_q } => {
                if thresholds.first().is_none_or(|&t| z <= t) {
                    return 0.0;
                }
                let count = thresholds.partition_point(|&t| t < z);
                if count < thresholds.len() {
                    count as f64
                } else {
                    (ln_norm_sf(z) / ln_q).floor().max(count as f64)
                }
            }
            CellTransform::Scale(s) => s * z,
        }
    }
}

/// `ln Φc(z)`, with the Mills-ratio asymptotic once `Φc` underflows.
fn ln_norm_sf(z: f64) -> f64 {
    let v = norm_sf(z);
    if v > 0.0 {
        v.ln()
    } else {
        -0.5 * z * z - (z * (2.0 * core::f64::consts::PI).sqrt()).ln() + (-1.0 / (z * z)).ln_1p()
    }
}

/// Sampler for the rows of a fixed `n`.
#[derive(Debug, Clone)]
pub struct RowSampler {
    latent: Latent,
    transforms: Transforms,
}

#[derive(Debug, Clone)]
enum Transforms {
    Shared(CellTransform),
    PerCell(Vec<CellTransform>),
}

impl RowSampler {
    pub fn new(spec: &ArraySpec, n: u64) -> Result<Self> {
        let latent = spec.latent(n)?;
        let laws = spec.row_laws(n)?;
        let transforms = if spec.is_stationary() {
            Transforms::Shared(CellTransform::new(&laws[0]))
        } else {
            Transforms::PerCell(laws.iter().map(CellTransform::new).collect())
        };
        Ok(Self { latent, transforms })
    }

    pub fn k(&self) -> usize {
        self.latent.dim()
    }

    pub fn latent(&self) -> &Latent {
        &self.latent
    }

    /// Sample the cells with indices `range` as they would appear when the
    /// latent vector is restricted to that stretch. `latent_buf` and `out`
    /// must have length `range.len()`.
    pub fn sample_range<R: RngCore + ?Sized>(
        &self,
        rng: &mut R,
        range: Range<usize>,
        latent_buf: &mut [f64],
        out: &mut [f64],
    ) {
        self.latent.sample(rng, latent_buf);
        match &self.transforms {
            Transforms::Shared(t) => {
                for (o, &z) in out.iter_mut().zip(latent_buf.iter()) {
                    *o = t.apply(z);
                }
            }
            Transforms::PerCell(ts) => {
                for ((o, &z), t) in out.iter_mut().zip(latent_buf.iter()).zip(&ts[range]) {
                    *o = t.apply(z);
                }
            }
        }
    }

    /// Fill `out` (length `k`) with one full row.
    pub fn sample_row<R: RngCore + ?Sized>(&self, rng: &mut R, latent_buf: &mut [f64], out: &mut [f64]) {
        let k = self.k();
        self.sample_range(rng, 0..k, &mut latent_buf[..k], &mut out[..k]);
    }
}

/// Covariance engine for the latent-Gaussian construction.
#[derive(Debug, Clone)]
pub struct PairCov {
    rule: GaussLegendre,
}

impl Default for PairCov {
    fn default() -> Self {
        Self {
            rule: GaussLegendre::new(10),
        }
    }
}

/// Stop summing the geometric Hoeffding series once the remaining terms are
/// certified below this.
pub const GEOM_TAIL_TOL: f64 = 1e-14;
const GEOM_MAX_TERMS: usize = 4000;

impl PairCov {
    /// `Cov(X, Y)` for cells with laws `a`, `b` and latent correlation `rho`.
    pub fn cov(&self, a: &MarginalLaw, b: &MarginalLaw, rho: f64) -> Result<f64> {
        if rho == 0.0 {
            return Ok(0.0);
        }
        match (*a, *b) {
            (MarginalLaw::Bernoulli { p: pa }, MarginalLaw::Bernoulli { p: pb }) => {
                gaussian_orthant_excess(&self.rule, norm_quantile(pa), norm_quantile(pb), rho)
            }
            (MarginalLaw::CorrectedGeometric { p: pa }, MarginalLaw::CorrectedGeometric { p: pb }) => {
                self.geometric(1.0 - pa, 1.0 - pb, rho)
            }
            (MarginalLaw::Gaussian { scale: sa }, MarginalLaw::Gaussian { scale: sb }) => {
                Ok(sa * sb * rho)
            }
            _ => Err(invalid("family", "mixed marginal families are not supported")),
        }
    }

    /// Hoeffding: `Cov(X, Y) = Σ_{a,b >= 1} [P(X>=a, Y>=b) - P(X>=a)P(Y>=b)]`,
    /// where each term is a Gaussian orthant excess at thresholds
    /// `Φ⁻¹(q^a)`, `Φ⁻¹(q^b)`. Terms with `max(a, b) = M` are bounded by
    /// `(2M - 1) Q^M`, `Q = max(qa, qb)`.
    fn geometric(&self, qa: f64, qb: f64, rho: f64) -> Result<f64> {
        let big_q = qa.max(qb);
        let tail_after = |m: f64| {
            let qm1 = big_q.powf(m + 1.0);
            let om = 1.0 - big_q;
            2.0 * qm1 * ((m + 1.0) - m * big_q) / (om * om) - qm1 / om
        };
        let xa = |a: usize| norm_quantile(qa.powi(a as i32));
        let xb = |b: usize| norm_quantile(qb.powi(b as i32));
        let mut sum = 0.0;
        let mut xs_a = Vec::new();
        let mut xs_b = Vec::new();
        for m in 1..=GEOM_MAX_TERMS {
            xs_a.push(xa(m));
            xs_b.push(xb(m));
            // New terms: (m, 1..=m) and (1..m, m).
            for b in 1..=m {
                sum += gaussian_orthant_excess(&self.rule, xs_a[m - 1], xs_b[b - 1], rho)?;
            }
            for a in 1..m {
                sum += gaussian_orthant_excess(&self.rule, xs_a[a - 1], xs_b[m - 1], rho)?;
            }
            let bound = tail_after(m as f64);
            if bound < GEOM_TAIL_TOL {
                return Ok(sum);
            }
        }
        Err(Error::TailBound {
            bound: tail_after(GEOM_MAX_TERMS as f64),
            target: GEOM_TAIL_TOL,
            terms: GEOM_MAX_TERMS,
        })
    }
}

/// Exact Bernoulli pair covariance `P(Z_i > t, Z_j > t) - p²`, `t = Φ⁻¹(1-p)`.
pub fn thresholded_bernoulli_cov(p: f64, rho: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", "must lie in (0, 1)"));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(invalid("rho", "must lie in [0, 1]"));
    }
    let law = MarginalLaw::Bernoulli { p };
    PairCov::default().cov(&law, &law, rho)
}

/// Exact `Cov(X_{r,n}, X_{s,n})` for row `n`.
///
/// Stationary specs give a Toeplitz matrix (one pair covariance per lag);
/// otherwise every pair is evaluated.
pub fn analytic_row_covariance(spec: &ArraySpec, n: u64) -> Result<CovMatrix> {
    let latent = spec.latent(n)?;
    let k = latent.dim();
    let engine = PairCov::default();
    if spec.is_stationary() {
        let law = spec.cell_law_at(k, 0)?;
        let mut lags = vec![law.variance()];
        let reach = latent.reach();
        if let CorrelationModel::Exchangeable { .. } = spec.dependence {
            if reach > 0 {
                let c = engine.cov(&law, &law, latent.lag(1))?;
                lags.resize(k, c);
            }
        } else {
            for h in 1..=reach {
                lags.push(engine.cov(&law, &law, latent.lag(h))?);
            }
        }
        return Ok(CovMatrix::Toeplitz { k, lags });
    }
    let laws = spec.row_laws(n)?;
    let mut data = vec![0.0; k * k];
    for r in 0..k {
        data[r * k + r] = laws[r].variance();
        for s in r + 1..k {
            let rho = latent.lag(s - r);
            let c = engine.cov(&laws[r], &laws[s], rho)?;
            data[r * k + s] = c;
            data[s * k + r] = c;
        }
    }
    CovMatrix::dense(k, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{integrate, norm_cdf, norm_pdf};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bern(p: f64, dep: CorrelationModel) -> ArraySpec {
        ArraySpec::new(Family::Bernoulli, Parameter::Fixed { value: p }, dep)
    }

    #[test]
    fn latent_matrix_examples() {
        let m = bern(0.1, CorrelationModel::Independent).latent_matrix(3).unwrap();
        assert_eq!(m.to_dense(), vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let m = bern(0.1, CorrelationModel::Exchangeable { rho: 0.2 }).latent_matrix(2).unwrap();
        assert_eq!(m.to_dense(), vec![1.0, 0.2, 0.2, 1.0]);
        let dep = CorrelationModel::StationaryDecay { rho0: 0.5, rate: 0.5, horizon: 3 };
        let m = bern(0.1, dep).latent_matrix(4).unwrap();
        assert_eq!((0..4).map(|s| m.get(0, s)).collect::<Vec<_>>(), vec![1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn latent_matrix_is_psd_by_eigenvalues() {
        let dep = CorrelationModel::StationaryDecay { rho0: 0.5, rate: 0.5, horizon: 3 };
        let m = bern(0.1, dep).latent_matrix(12).unwrap();
        let a = nalgebra::DMatrix::from_row_slice(12, 12, &m.to_dense());
        let min = a.symmetric_eigenvalues().min();
        assert!(min > 0.0);
    }

    #[test]
    fn non_psd_model_names_minor() {
        let dep = CorrelationModel::StationaryDecay { rho0: 0.9, rate: 1.0, horizon: 1 };
        let err = bern(0.1, dep).latent_matrix(10).unwrap_err();
        assert_eq!(err, Error::NotPositiveSemidefinite { minor: 3 });
        // The oracle agrees: the 3 × 3 leading block has a negative eigenvalue.
        let a = nalgebra::DMatrix::from_row_slice(3, 3, &[1.0, 0.9, 0.0, 0.9, 1.0, 0.9, 0.0, 0.9, 1.0]);
        assert!(a.symmetric_eigenvalues().min() < 0.0);
        let b = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.9, 0.9, 1.0]);
        assert!(b.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn banded_factor_reproduces_matrix() {
        let lags = [1.0, 0.4, 0.2, 0.1];
        let k = 9;
        let l = banded_cholesky(&lags, k).unwrap();
        let w = lags.len();
        let h = w - 1;
        let get = |i: usize, j: usize| {
            if j > i || i - j > h { 0.0 } else { l[i * w + (j + h - i)] }
        };
        for i in 0..k {
            for j in 0..k {
                let v: f64 = (0..k).map(|t| get(i, t) * get(j, t)).sum();
                let want = lags.get(i.abs_diff(j)).copied().unwrap_or(0.0);
                assert!((v - want).abs() < 1e-14);
            }
        }
    }

    /// Independent oracle: `P(Z_1 > t, Z_2 > t) = ∫_t^∞ φ(x) Φc((t - ρx)/√(1-ρ²)) dx`.
    fn bivariate_upper_oracle(t: f64, rho: f64) -> f64 {
        let rule = GaussLegendre::new(20);
        let s = (1.0 - rho * rho).sqrt();
        integrate(&rule, |x| norm_pdf(x) * norm_sf((t - rho * x) / s), t, 40.0, 1e-17, 1e-14).unwrap()
    }

    #[test]
    fn bernoulli_cov_examples() {
        assert_eq!(thresholded_bernoulli_cov(0.1, 0.0).unwrap(), 0.0);
        assert!((thresholded_bernoulli_cov(0.1, 1.0).unwrap() - 0.09).abs() < 1e-14);
        let t = -norm_quantile(0.1);
        let oracle = bivariate_upper_oracle(t, 0.5) - 0.01;
        let got = thresholded_bernoulli_cov(0.1, 0.5).unwrap();
        assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
        assert!(norm_cdf(t) > 0.89);
    }

    /// Oracle for the geometric covariance: sum over the joint pmf on a grid
    /// of copula cells, each cell's probability from bivariate-normal
    /// rectangle masses.
    fn geometric_cov_oracle(p: f64, rho: f64, cells: usize) -> f64 {
        let q = 1.0 - p;
        let x: Vec<f64> = (1..=cells).map(|a| -norm_quantile(q.powi(a as i32))).collect();
        // Upper-orthant probabilities U(a, b) = P(Z1 > x_a, Z2 > x_b); index 0 ↔ -∞.
        let upper = |a: usize, b: usize| -> f64 {
            let xa = if a == 0 { f64::NEG_INFINITY } else { x[a - 1] };
            let xb = if b == 0 { f64::NEG_INFINITY } else { x[b - 1] };
            if a == 0 && b == 0 {
                return 1.0;
            }
            if a == 0 {
                return norm_sf(xb);
            }
            if b == 0 {
                return norm_sf(xa);
            }
            let s = (1.0 - rho * rho).sqrt();
            let rule = GaussLegendre::new(20);
            integrate(&rule, |z| norm_pdf(z) * norm_sf((xb - rho * z) / s), xa, 40.0, 1e-18, 1e-13).unwrap()
        };
        let mut u = vec![vec![0.0; cells + 1]; cells + 1];
        for a in 0..=cells {
            for b in 0..=cells {
                u[a][b] = upper(a, b);
            }
        }
        let mean = q / p;
        let mut cov = 0.0;
        for a in 0..cells {
            for b in 0..cells {
                let pab = u[a][b] - u[a + 1][b] - u[a][b + 1] + u[a + 1][b + 1];
                cov += (a as f64 - mean) * (b as f64 - mean) * pab;
            }
        }
        cov
    }

    #[test]
    fn geometric_cov_matches_joint_pmf_oracle() {
        let engine = PairCov::default();
        let law = MarginalLaw::CorrectedGeometric { p: 0.6 };
        let got = engine.cov(&law, &law, 0.4).unwrap();
        let oracle = geometric_cov_oracle(0.6, 0.4, 45);
        assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
        let full = engine.cov(&law, &law, 1.0).unwrap();
        assert!((full - law.variance()).abs() < 1e-10);
    }

    #[test]
    fn staircase_transform_is_inverse_cdf() {
        let law = MarginalLaw::CorrectedGeometric { p: 0.3 };
        let t = CellTransform::new(&law);
        let q: f64 = 0.7;
        for a in 1..20 {
            // Just above the a-th threshold the value is a, just below a-1.
            let z = -norm_quantile(q.powi(a));
            assert_eq!(t.apply(z + 1e-9), a as f64);
            assert_eq!(t.apply(z - 1e-9), (a - 1) as f64);
        }
        assert!(t.apply(60.0) > 1000.0);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..2000 {
            let z = -10.0 + i as f64 * 0.01;
            let v = t.apply(z);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn independent_bernoulli_mean_within_band() {
        let p = 0.3;
        let spec = bern(p, CorrelationModel::Independent);
        let sampler = RowSampler::new(&spec, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut z = vec![0.0; 10];
        let mut x = vec![0.0; 10];
        let rows = 100_000;
        let mut total = 0.0;
        for _ in 0..rows {
            sampler.sample_row(&mut rng, &mut z, &mut x);
            total += x.iter().sum::<f64>();
        }
        let draws = (rows * 10) as f64;
        let mean = total / draws;
        assert!((mean - p).abs() < 4.0 * (p * (1.0 - p) / draws).sqrt());
    }

    #[test]
    fn comonotone_rows_are_constant() {
        let spec = bern(0.4, CorrelationModel::Exchangeable { rho: 1.0 });
        let sampler = RowSampler::new(&spec, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut z = vec![0.0; 8];
        let mut x = vec![0.0; 8];
        for _ in 0..1000 {
            sampler.sample_row(&mut rng, &mut z, &mut x);
            assert!(x.iter().all(|&v| v == x[0]));
        }
    }

    #[test]
    fn geometric_pmf_at_zero_within_band() {
        let p = 0.4;
        let spec = ArraySpec::new(
            Family::CorrectedGeometric,
            Parameter::Fixed { value: 1.0 - p },
            CorrelationModel::StationaryDecay { rho0: 0.3, rate: 0.5, horizon: 2 },
        );
        let sampler = RowSampler::new(&spec, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut z = vec![0.0; 5];
        let mut x = vec![0.0; 5];
        let rows = 200_000;
        let mut zeros = 0usize;
        for _ in 0..rows {
            sampler.sample_row(&mut rng, &mut z, &mut x);
            zeros += usize::from(x[2] == 0.0);
        }
        let f = zeros as f64 / rows as f64;
        assert!((f - p).abs() < 5.0 * (p * (1.0 - p) / rows as f64).sqrt());
    }

    #[test]
    fn sample_covariance_matches_analytic() {
        let spec = ArraySpec::new(
            Family::Bernoulli,
            Parameter::Fixed { value: 0.3 },
            CorrelationModel::StationaryDecay { rho0: 0.6, rate: 0.5, horizon: 2 },
        );
        let k = 4;
        let sigma = analytic_row_covariance(&spec, k as u64).unwrap();
        let sampler = RowSampler::new(&spec, k as u64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows = 400_000;
        let mut z = vec![0.0; k];
        let mut x = vec![0.0; k];
        let mut s1 = vec![0.0; k];
        let mut s2 = vec![0.0; k * k];
        for _ in 0..rows {
            sampler.sample_row(&mut rng, &mut z, &mut x);
            for r in 0..k {
                s1[r] += x[r];
                for s in 0..k {
                    s2[r * k + s] += x[r] * x[s];
                }
            }
        }
        let nr = rows as f64;
        for r in 0..k {
            for s in 0..k {
                let c = s2[r * k + s] / nr - s1[r] / nr * s1[s] / nr;
                // se of a product-moment estimate is at most sd(X_r X_s)/√R <= 0.5/√R.
                assert!((c - sigma.get(r, s)).abs() < 5.0 * 0.5 / nr.sqrt(), "({r},{s})");
            }
        }
    }

    #[test]
    fn covariance_entries_monotone_in_latent_correlation() {
        let mk = |rho0| {
            ArraySpec::new(
                Family::CorrectedGeometric,
                Parameter::Fixed { value: 0.5 },
                CorrelationModel::StationaryDecay { rho0, rate: 0.5, horizon: 3 },
            )
        };
        let lo = analytic_row_covariance(&mk(0.2), 6).unwrap();
        let hi = analytic_row_covariance(&mk(0.4), 6).unwrap();
        for r in 0..6 {
            for s in 0..6 {
                assert!(hi.get(r, s) >= lo.get(r, s));
                assert!(lo.get(r, s) >= 0.0);
            }
        }
    }

    #[test]
    fn ramp_marginals_average_to_rate() {
        let spec = ArraySpec::new(
            Family::Bernoulli,
            Parameter::Ramp { lambda: 2.0, spread: 0.5 },
            CorrelationModel::Independent,
        );
        let laws = spec.row_laws(50).unwrap();
        let total: f64 = laws.iter().map(|l| l.mean()).sum();
        assert!((total - 2.0).abs() < 1e-12);
        assert!(!spec.is_stationary());
    }

    #[test]
    fn scaling_is_non_increasing() {
        let s = Scaling { beta: 0.25 };
        assert!(s.factor(100) >= s.factor(1000));
        assert_eq!(Scaling::default().factor(10), 1.0);
    }
}
