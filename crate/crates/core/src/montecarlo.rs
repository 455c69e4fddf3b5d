//! Monte Carlo engine: seeded row sums, empirical characteristic functions,
//! distances to limit laws, and convergence studies.
//!
//! Every replicate owns a ChaCha8 stream keyed by `(seed, n, tag)` and
//! selected by the replicate index, so results do not depend on how
//! replicates are split across workers.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;
use num_traits::Float;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::assoc_gen::{analytic_row_covariance, ArraySpec, RowSampler};
use crate::blocks::BlockScheme;
use crate::distributions::{tv_distance, CountLaw, IntPmf, LimitLaw, MarginalLaw, TAIL_TOL};
use crate::error::{invalid, Error, Result};
use crate::math::norm_cdf;
use crate::newman::{block_product_bound, newman_bound};

const TAG_ROW: u64 = 0x524f_5753;
const TAG_SURROGATE: u64 = 0x5355_5252;

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for one replicate of row `n`.
pub fn replicate_rng(seed: u64, n: u64, tag: u64, replicate: u64) -> ChaCha8Rng {
    let mut state = seed;
    let a = splitmix(&mut state) ^ n;
    let mut state = a;
    let b = splitmix(&mut state) ^ tag;
    let mut state = b;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(replicate);
    rng
}

/// Runs `f` over a partition of `0..len` and concatenates the pieces in
/// index order.
pub trait Executor {
    fn map_range<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<usize>) -> Vec<T> + Sync;
}

/// Single-threaded executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_range<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<usize>) -> Vec<T> + Sync,
    {
        f(0..len)
    }
}

/// One replicate: `S_n`, `S_{mℓ}` and the independent-block surrogate
/// `S_m[T]` (NaN unless requested).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDraw {
    pub total: f64,
    pub main: f64,
    pub surrogate: f64,
}

/// `replicates` draws of `S_n[X]` for row `n`.
pub fn simulate_sums<E: Executor>(spec: &ArraySpec, n: u64, replicates: usize, seed: u64, exec: &E) -> Result<Vec<f64>> {
    let sampler = RowSampler::new(spec, n)?;
    let k = sampler.k();
    Ok(exec.map_range(replicates, |range| {
        let mut z = vec![0.0; k];
        let mut x = vec![0.0; k];
        range
            .map(|i| {
                let mut rng = replicate_rng(seed, n, TAG_ROW, i as u64);
                sampler.sample_row(&mut rng, &mut z, &mut x);
                x.iter().sum()
            })
            .collect()
    }))
}

/// Draws of `S_n`, `S_{mℓ}` and, with `surrogate`, `S_m[T]` where each
/// block of the surrogate comes from its own independent copy of the row.
pub fn simulate_split<E: Executor>(
    spec: &ArraySpec,
    n: u64,
    scheme: &BlockScheme,
    replicates: usize,
    seed: u64,
    surrogate: bool,
    exec: &E,
) -> Result<Vec<SplitDraw>> {
    let sampler = RowSampler::new(spec, n)?;
    let k = sampler.k();
    if scheme.k != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: scheme.k,
        });
    }
    let main_len = scheme.main_len();
    Ok(exec.map_range(replicates, |range| {
        let mut z = vec![0.0; k];
        let mut x = vec![0.0; k];
        range
            .map(|i| {
                let mut rng = replicate_rng(seed, n, TAG_ROW, i as u64);
                sampler.sample_row(&mut rng, &mut z, &mut x);
                let main: f64 = x[..main_len].iter().sum();
                let total = main + x[main_len..].iter().sum::<f64>();
                let surrogate = if surrogate {
                    let mut rng = replicate_rng(seed, n, TAG_SURROGATE, i as u64);
                    let l = scheme.l;
                    let mut acc = 0.0;
                    for j in 0..scheme.m {
                        sampler.sample_range(&mut rng, scheme.block(j), &mut z[..l], &mut x[..l]);
                        acc += x[..l].iter().sum::<f64>();
                    }
                    acc
                } else {
                    f64::NAN
                };
                SplitDraw { total, main, surrogate }
            })
            .collect()
    }))
}

/// Distinct sample values with counts, in increasing order.
fn histogram(samples: &[f64]) -> Vec<(f64, usize)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for v in sorted {
        match out.last_mut() {
            Some((x, c)) if *x == v => *c += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Sample average of `e^{iuS}` over a u-grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EmpiricalCF {
    pub u: Vec<f64>,
    pub values: Vec<Complex64>,
    pub replicates: usize,
    /// `1/√R`, the modulus-scale standard error at each point.
    pub se: f64,
}

impl EmpiricalCF {
    pub fn sup_gap<F: Fn(f64) -> Complex64>(&self, target: F) -> f64 {
        self.u
            .iter()
            .zip(&self.values)
            .map(|(&u, v)| (v - target(u)).norm())
            .fold(0.0, f64::max)
    }

    pub fn gaps(&self, other: &EmpiricalCF) -> Vec<f64> {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).collect()
    }
}

pub fn empirical_cf(samples: &[f64], u_grid: &[f64]) -> Result<EmpiricalCF> {
    empirical_cf_affine(samples, 0.0, 1.0, u_grid)
}

/// Empirical cf of `(S - shift) / scale`.
pub fn empirical_cf_affine(samples: &[f64], shift: f64, scale: f64, u_grid: &[f64]) -> Result<EmpiricalCF> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    let hist = histogram(samples);
    let r = samples.len() as f64;
    let values = u_grid
        .iter()
        .map(|&u| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(v, c) in &hist {
                let (s, co) = (u * (v - shift) / scale).sin_cos();
                acc += Complex64::new(co, s) * c as f64;
            }
            acc / r
        })
        .collect();
    Ok(EmpiricalCF {
        u: u_grid.to_vec(),
        values,
        replicates: samples.len(),
        se: 1.0 / r.sqrt(),
    })
}

/// Empirical pmf of integer-valued samples.
pub fn empirical_pmf(samples: &[f64]) -> Result<IntPmf> {
    let hist = histogram(samples);
    let (first, last) = match (hist.first(), hist.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(Error::Empty),
    };
    if hist.iter().any(|(v, _)| v.fract() != 0.0) {
        return Err(invalid("samples", "not integer-valued"));
    }
    let start = first as i64;
    let mut probs = vec![0.0; (last - first) as usize + 1];
    let r = samples.len() as f64;
    for (v, c) in hist {
        probs[(v as i64 - start) as usize] = c as f64 / r;
    }
    Ok(IntPmf { start, probs, tail: 0.0 })
}

/// `sup_x |F_R(x) - F(x)|` for a continuous cdf `F`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    let hist = histogram(samples);
    let r = samples.len() as f64;
    let mut below = 0usize;
    let mut d = 0.0f64;
    for (v, c) in hist {
        let f = cdf(v);
        d = d.max((f - below as f64 / r).abs());
        below += c;
        d = d.max((below as f64 / r - f).abs());
    }
    Ok(d)
}

/// Study settings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    pub seed: u64,
    pub replicates: usize,
    pub grid: Vec<u64>,
    pub u_grid: Vec<f64>,
    /// Block exponent for the scheme at each `n`.
    pub alpha: f64,
    /// Simulate the independent-block surrogate.
    pub surrogate: bool,
    /// Keep this many raw sums per row.
    pub dump: usize,
}

/// `u_i = -4 + 0.2 i`, `i = 0..=40`.
pub fn default_u_grid() -> Vec<f64> {
    (0..41).map(|i| -4.0 + 0.2 * i as f64).collect()
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(invalid("replicates", "must be at least 1"));
        }
        if self.grid.is_empty() || self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid", "must be non-empty and strictly increasing"));
        }
        if self.u_grid.is_empty() || self.u_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("u_grid", "must be non-empty and strictly increasing"));
        }
        Ok(())
    }
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudyRow {
    pub n: u64,
    pub k: usize,
    pub m: usize,
    pub l: usize,
    pub r: usize,
    /// `"tv"` for Poisson targets, `"ks"` for Gaussian ones.
    pub metric: String,
    /// TV to `Poisson(λ̂)` or KS of the standardized sum to `N(0, 1)`.
    pub distance: f64,
    /// TV to the configured Poisson target (NaN for Gaussian targets).
    pub tv_target: f64,
    /// `λ̂ = Σ E X + Σ_{r≠s} Cov(X_r, X_s)` (NaN for Gaussian targets).
    pub lambda_hat: f64,
    /// `sup_u |ecf(S_n) - target cf|`.
    pub cf_gap: f64,
    /// Largest C1 bound `min(2, |u| √E[Y*²])` over the u-grid.
    pub c1_bound: f64,
    /// `√Var(Y*)`.
    pub sd_remainder: f64,
    /// Largest Newman bound over the u-grid.
    pub newman: f64,
    /// Largest block-product bound over the u-grid.
    pub block_product: f64,
    /// `sup_u |Π cell cf - target cf|` over the block-covered cells.
    pub r4: f64,
    pub se: f64,
    /// Empirical cf gap within `C1 + R2 + R3 + R4 + 6 se` at every u.
    pub cf_bound_ok: bool,
    /// `sup_u |ecf(S_n) - ecf(S_{mℓ})|`.
    pub c1_gap: f64,
    pub c1_ok: bool,
    /// `sup_u |ecf(S_{mℓ}) - ecf(S_m[T])|` (NaN without surrogate).
    pub c2_gap: f64,
    pub c2_ok: bool,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Vec::is_empty", default))]
    pub samples: Vec<f64>,
}

impl StudyRow {
    pub fn bounds_ok(&self) -> bool {
        self.cf_bound_ok && self.c1_ok && self.c2_ok
    }
}

/// Standard-error multiple used by every Monte Carlo comparison.
pub const MC_SIGMAS: f64 = 6.0;

/// One study row at `n`.
pub fn study_row<E: Executor>(spec: &ArraySpec, n: u64, cfg: &SimConfig, target: &LimitLaw, exec: &E) -> Result<StudyRow> {
    target.validate()?;
    let k = spec.k(n);
    let scheme = BlockScheme::new(k, cfg.alpha)?;
    let laws = spec.row_laws(n)?;
    let sigma = analytic_row_covariance(spec, n)?;
    let draws = simulate_split(spec, n, &scheme, cfg.replicates, cfg.seed, cfg.surrogate, exec)?;
    let totals: Vec<f64> = draws.iter().map(|d| d.total).collect();

    let mean_all: f64 = laws.iter().map(MarginalLaw::mean).sum();
    let mean_main: f64 = laws[scheme.main()].iter().map(MarginalLaw::mean).sum();
    let mean_rem = mean_all - mean_main;
    let var_all = sigma.quad(0..k);
    let var_rem = sigma.quad(scheme.remainder());
    let gaussian = matches!(target, LimitLaw::Gaussian { .. });
    // Diagnostics run on (S - shift) / scale.
    let (shift, scale, shift_main) = if gaussian {
        if var_all <= 0.0 {
            return Err(Error::ZeroVariance);
        }
        (mean_all, var_all.sqrt(), mean_main)
    } else {
        if laws.iter().any(|l| !l.is_discrete()) {
            return Err(invalid("target", "Poisson targets need integer-valued cells"));
        }
        (0.0, 1.0, 0.0)
    };
    let target_cf = |u: f64| match *target {
        LimitLaw::Gaussian { .. } => Complex64::new(-0.5 * u * u, 0.0).exp(),
        _ => target.cf(u),
    };

    let ecf = empirical_cf_affine(&totals, shift, scale, &cfg.u_grid)?;
    let cf_gaps: Vec<f64> = cfg.u_grid.iter().zip(&ecf.values).map(|(&u, v)| (v - target_cf(u)).norm()).collect();
    let se = ecf.se;

    let rem_second = var_rem + (mean_rem - (shift - shift_main)).powi(2);
    let mut c1 = Vec::with_capacity(cfg.u_grid.len());
    let mut r2 = Vec::with_capacity(cfg.u_grid.len());
    let mut r3 = Vec::with_capacity(cfg.u_grid.len());
    let mut r4 = Vec::with_capacity(cfg.u_grid.len());
    let stationary = spec.is_stationary();
    for &u in &cfg.u_grid {
        let v = u / scale;
        c1.push((v.abs() * rem_second.sqrt()).min(2.0));
        r2.push(newman_bound(&sigma, &scheme, v)?);
        r3.push(block_product_bound(&sigma, &scheme, v)?);
        let prod = if stationary {
            laws[0].cf(v).powu(scheme.main_len() as u32)
        } else {
            laws[scheme.main()].iter().map(|l| l.cf(v)).product()
        };
        let prod = prod * Complex64::new(0.0, -v * shift_main).exp();
        r4.push((prod - target_cf(u)).norm());
    }
    let cf_bound_ok = (0..cfg.u_grid.len()).all(|i| cf_gaps[i] <= c1[i] + r2[i] + r3[i] + r4[i] + MC_SIGMAS * se);

    let mains: Vec<f64> = draws.iter().map(|d| d.main).collect();
    let ecf_main = empirical_cf_affine(&mains, shift_main, scale, &cfg.u_grid)?;
    let c1_gaps = ecf.gaps(&ecf_main);
    let c1_ok = c1_gaps.iter().zip(&c1).all(|(g, b)| *g <= b + MC_SIGMAS * se);
    let (c2_gap, c2_ok) = if cfg.surrogate {
        let surr: Vec<f64> = draws.iter().map(|d| d.surrogate).collect();
        let ecf_t = empirical_cf_affine(&surr, shift_main, scale, &cfg.u_grid)?;
        let gaps = ecf_main.gaps(&ecf_t);
        let band = MC_SIGMAS * (2.0 / cfg.replicates as f64).sqrt();
        let ok = gaps.iter().zip(&r2).all(|(g, b)| *g <= b + band);
        (gaps.into_iter().fold(0.0, f64::max), ok)
    } else {
        (f64::NAN, true)
    };

    let (metric, distance, tv_target, lambda_hat) = match *target {
        LimitLaw::Poisson { lambda } => {
            let pmf = empirical_pmf(&totals)?;
            let off: f64 = var_all - sigma.diagonal().iter().sum::<f64>();
            let lambda_hat = mean_all + off;
            let hat = CountLaw::Poisson { lambda: lambda_hat }.table(TAIL_TOL)?;
            let tgt = CountLaw::Poisson { lambda }.table(TAIL_TOL)?;
            ("tv", tv_distance(&pmf, &hat), tv_distance(&pmf, &tgt), lambda_hat)
        }
        LimitLaw::Gaussian { .. } => {
            let z: Vec<f64> = totals.iter().map(|s| (s - shift) / scale).collect();
            ("ks", ks_distance(&z, norm_cdf)?, f64::NAN, f64::NAN)
        }
    };

    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Ok(StudyRow {
        n,
        k,
        m: scheme.m,
        l: scheme.l,
        r: scheme.r,
        metric: metric.into(),
        distance,
        tv_target,
        lambda_hat,
        cf_gap: max(&cf_gaps),
        c1_bound: max(&c1),
        sd_remainder: var_rem.sqrt(),
        newman: max(&r2),
        block_product: max(&r3),
        r4: max(&r4),
        se,
        cf_bound_ok,
        c1_gap: max(&c1_gaps),
        c1_ok,
        c2_gap,
        c2_ok,
        samples: totals.iter().take(cfg.dump).copied().collect(),
    })
}

/// One [`StudyRow`] per grid point.
pub fn convergence_study<E: Executor>(spec: &ArraySpec, cfg: &SimConfig, target: &LimitLaw, exec: &E) -> Result<Vec<StudyRow>> {
    cfg.validate()?;
    spec.validate()?;
    cfg.grid.iter().map(|&n| study_row(spec, n, cfg, target, exec)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assoc_gen::{CorrelationModel, Family, Parameter};
    use rand_chacha::rand_core::RngCore;
    use rand_distr::{Distribution, Poisson};

    /// Chunks of 7, to exercise partitioned execution.
    struct Chunked;

    impl Executor for Chunked {
        fn map_range<T, F>(&self, len: usize, f: F) -> Vec<T>
        where
            T: Send,
            F: Fn(Range<usize>) -> Vec<T> + Sync,
        {
            let mut out = Vec::new();
            let mut s = 0;
            while s < len {
                out.extend(f(s..(s + 7).min(len)));
                s += 7;
            }
            out
        }
    }

    fn bern(p: f64, dep: CorrelationModel) -> ArraySpec {
        ArraySpec::new(Family::Bernoulli, Parameter::Fixed { value: p }, dep)
    }

    #[test]
    fn rng_streams_are_distinct_and_reproducible() {
        let mut a = replicate_rng(1, 10, TAG_ROW, 0);
        let mut b = replicate_rng(1, 10, TAG_ROW, 0);
        assert_eq!(a.next_u64(), b.next_u64());
        let firsts: Vec<u64> = [(1, 10, 0), (1, 10, 1), (1, 11, 0), (2, 10, 0)]
            .iter()
            .map(|&(s, n, i)| replicate_rng(s, n, TAG_ROW, i).next_u64())
            .collect();
        for i in 0..firsts.len() {
            for j in i + 1..firsts.len() {
                assert_ne!(firsts[i], firsts[j]);
            }
        }
        assert_ne!(replicate_rng(1, 10, TAG_SURROGATE, 0).next_u64(), firsts[0]);
    }

    #[test]
    fn partitioning_does_not_change_samples() {
        let spec = bern(0.3, CorrelationModel::StationaryDecay { rho0: 0.4, rate: 0.5, horizon: 3 });
        let a = simulate_sums(&spec, 30, 100, 9, &Sequential).unwrap();
        let b = simulate_sums(&spec, 30, 100, 9, &Chunked).unwrap();
        assert_eq!(a, b);
        let scheme = BlockScheme::new(30, 0.4).unwrap();
        let a = simulate_split(&spec, 30, &scheme, 50, 9, true, &Sequential).unwrap();
        let b = simulate_split(&spec, 30, &scheme, 50, 9, true, &Chunked).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|d| d.total >= d.main && d.main >= 0.0 && d.surrogate >= 0.0));
    }

    #[test]
    fn iid_sum_mean_within_clt_band() {
        let (p, k, r) = (0.2, 50u64, 200_000usize);
        let s = simulate_sums(&bern(p, CorrelationModel::Independent), k, r, 3, &Sequential).unwrap();
        let mean = s.iter().sum::<f64>() / r as f64;
        let band = 4.0 * (k as f64 * p * (1.0 - p) / r as f64).sqrt();
        assert!((mean - k as f64 * p).abs() < band, "{mean}");
    }

    #[test]
    fn comonotone_sums_are_extreme() {
        let s = simulate_sums(&bern(0.4, CorrelationModel::Exchangeable { rho: 1.0 }), 12, 500, 1, &Sequential).unwrap();
        assert!(s.iter().all(|&v| v == 0.0 || v == 12.0));
        assert!(s.contains(&12.0));
    }

    #[test]
    fn empirical_cf_examples() {
        let u = default_u_grid();
        let zero = empirical_cf(&[0.0; 5], &u).unwrap();
        assert!(zero.values.iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        let one = empirical_cf(&[1.0; 5], &u).unwrap();
        for (&t, v) in u.iter().zip(&one.values) {
            assert!((v - Complex64::new(0.0, t).exp()).norm() < 1e-15);
        }
        assert_eq!(empirical_cf(&[], &u), Err(Error::Empty));
    }

    #[test]
    fn poisson_draws_match_cf() {
        let mut rng = replicate_rng(5, 0, 0, 0);
        let pois = Poisson::new(2.0).unwrap();
        let s: Vec<f64> = (0..1_000_000).map(|_| pois.sample(&mut rng)).collect();
        let ecf = empirical_cf(&s, &default_u_grid()).unwrap();
        let law = LimitLaw::Poisson { lambda: 2.0 };
        assert!(ecf.sup_gap(|u| law.cf(u)) <= 5.0 * ecf.se);
    }

    #[test]
    fn distance_examples() {
        let pmf = empirical_pmf(&[0.0, 1.0, 1.0, 3.0]).unwrap();
        assert_eq!((pmf.start, pmf.probs.clone()), (0, vec![0.25, 0.5, 0.0, 0.25]));
        assert!(empirical_pmf(&[0.5]).is_err());
        let ks = ks_distance(&[0.0], |x| if x < 0.0 { 0.0 } else { 0.5 }).unwrap();
        assert_eq!(ks, 0.5);
        let many: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let ks = ks_distance(&many, |x: f64| x.clamp(0.0, 1.0)).unwrap();
        assert!((ks - 0.0005).abs() < 1e-12);
    }

    #[test]
    fn independent_study_has_zero_newman_columns() {
        let spec = ArraySpec::new(Family::Bernoulli, Parameter::Rate { lambda: 2.0 }, CorrelationModel::Independent);
        let cfg = SimConfig {
            seed: 4,
            replicates: 2000,
            grid: vec![50, 100],
            u_grid: default_u_grid(),
            alpha: 0.3,
            surrogate: true,
            dump: 3,
        };
        let rows = convergence_study(&spec, &cfg, &LimitLaw::Poisson { lambda: 2.0 }, &Sequential).unwrap();
        for row in &rows {
            assert_eq!((row.newman, row.block_product), (0.0, 0.0));
            assert!(row.bounds_ok(), "{row:?}");
            assert_eq!(row.samples.len(), 3);
        }
        let again = convergence_study(&spec, &cfg, &LimitLaw::Poisson { lambda: 2.0 }, &Chunked).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn gaussian_study_standardizes() {
        let spec = bern(0.5, CorrelationModel::StationaryDecay { rho0: 0.5, rate: 0.5, horizon: 4 });
        let cfg = SimConfig {
            seed: 1,
            replicates: 4000,
            grid: vec![400],
            u_grid: default_u_grid(),
            alpha: 0.45,
            surrogate: true,
            dump: 0,
        };
        let row = study_row(&spec, 400, &cfg, &LimitLaw::Gaussian { mean: 0.0, variance: 1.0 }, &Sequential).unwrap();
        assert_eq!(row.metric, "ks");
        assert!(row.distance < 0.05, "{row:?}");
        assert!(row.bounds_ok(), "{row:?}");
    }
}
