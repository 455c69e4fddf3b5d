//! Special functions and quadrature shared by the rest of the crate.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal cdf, accurate in the lower tail.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal survival function `1 - Φ(x)`, accurate in the upper tail.
#[inline]
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Inverse of the standard normal cdf (Wichura's AS 241, refined by one
/// Halley step). Returns `±∞` at 0 and 1.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = as241(p);
    // One Halley step against the erfc-based cdf.
    let err = if x < 0.0 {
        norm_cdf(x) - p
    } else {
        (1.0 - p) - norm_sf(x)
    };
    let u = err * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    if u.is_finite() {
        x - u / (1.0 + 0.5 * x * u)
    } else {
        x
    }
}

fn horner(coefs: &[f64], x: f64) -> f64 {
    coefs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

// AS 241 (PPND16) coefficients, lowest degree first.
const A: [f64; 8] = [
    3.387_132_872_796_366_5,
    133.141_667_891_784_38,
    1_971.590_950_306_551_3,
    13_731.693_765_509_46,
    45_921.953_931_549_87,
    67_265.770_927_008_7,
    33_430.575_583_588_13,
    2_509.080_928_730_122_7,
];
const B: [f64; 8] = [
    1.0,
    42.313_330_701_600_91,
    687.187_007_492_057_9,
    5_394.196_021_424_751,
    21_213.794_301_586_597,
    39_307.895_800_092_71,
    28_729.085_735_721_943,
    5_226.495_278_852_546,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_545,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    0.241_780_725_177_450_6,
    0.022_723_844_989_269_184,
    7.745_450_142_783_414e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    0.689_767_334_985_1,
    0.148_103_976_427_480_08,
    0.015_198_666_563_616_457,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_9e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    0.296_560_571_828_504_9,
    0.026_532_189_526_576_124,
    0.001_242_660_947_388_078_4,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288e-7,
];
const F: [f64; 8] = [
    1.0,
    0.599_832_206_555_888,
    0.136_929_880_922_735_8,
    0.014_875_361_290_850_615,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];

fn as241(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * horner(&A, r) / horner(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        horner(&C, r - 1.6) / horner(&D, r - 1.6)
    } else {
        horner(&E, r - 5.0) / horner(&F, r - 5.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// `ln C(n, j)` for integers `0 <= j <= n`. Exact log-sum when the smaller
/// side is short, `lgamma` otherwise.
pub fn ln_choose(n: u64, j: u64) -> f64 {
    debug_assert!(j <= n);
    let j = j.min(n - j);
    if j <= 256 {
        let base = (n - j) as f64;
        (1..=j).map(|t| ((base + t as f64) / t as f64).ln()).sum()
    } else {
        libm::lgamma(n as f64 + 1.0) - libm::lgamma(j as f64 + 1.0) - libm::lgamma((n - j) as f64 + 1.0)
    }
}

/// `e^{it} - 1 - it`, free of cancellation for small `t`.
pub fn cis_minus_one_minus_i(t: f64) -> Complex64 {
    let h = (0.5 * t).sin();
    let re = -2.0 * h * h;
    let im = if t.abs() < 0.5 {
        // sin t - t = Σ_{j>=1} (-1)^j t^(2j+1) / (2j+1)!
        let t2 = t * t;
        let mut term = -t * t2 / 6.0;
        let mut acc = 0.0;
        for j in 1..=8 {
            acc += term;
            let a = (2 * j + 2) as f64;
            term *= -t2 / (a * (a + 1.0));
        }
        acc
    } else {
        t.sin() - t
    };
    Complex64::new(re, im)
}

/// `e^{it} - 1` without cancellation in the real part.
pub fn cis_minus_one(t: f64) -> Complex64 {
    let h = (0.5 * t).sin();
    Complex64::new(-2.0 * h * h, t.sin())
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p1, mut p2) = (1.0, 0.0);
                for j in 1..=order {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
                }
                dp = n * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / dp;
                if (z - z1).abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[order - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Single-panel rule on `[a, b]`.
    pub fn apply<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Composite rule with `panels` equal panels.
    pub fn composite<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + h * i as f64;
                self.apply(&mut f, lo, lo + h)
            })
            .sum()
    }

    fn apply_vec<F: FnMut(f64, &mut [f64])>(
        &self,
        f: &mut F,
        a: f64,
        b: f64,
        scratch: &mut [f64],
        out: &mut [f64],
    ) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            f(mid + half * x, scratch);
            for (o, s) in out.iter_mut().zip(scratch.iter()) {
                *o += w * half * s;
            }
        }
    }
}

const MAX_DEPTH: u32 = 48;

/// Adaptive bisection on a fixed Gauss–Legendre panel rule.
///
/// The accepted error on `[a, b]` is `max(abs_tol, rel_tol * |coarse estimate|)`,
/// split between halves as the recursion descends.
pub fn integrate<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = rule.apply(&mut f, a, b);
    let tol = abs_tol.max(rel_tol * whole.abs());
    let mut worst = 0.0f64;
    let value = refine(rule, &mut f, a, b, whole, tol, 0, &mut worst);
    if worst > 0.0 {
        return Err(Error::Quadrature {
            estimate: value,
            error: worst,
        });
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    worst: &mut f64,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = rule.apply(&mut *f, a, mid);
    let right = rule.apply(&mut *f, mid, b);
    let err = (left + right - whole).abs();
    if err <= tol {
        return left + right;
    }
    if depth >= MAX_DEPTH {
        *worst = worst.max(err);
        return left + right;
    }
    let sub = tol * FRAC_1_SQRT_2;
    refine(rule, f, a, mid, left, sub, depth + 1, worst)
        + refine(rule, f, mid, b, right, sub, depth + 1, worst)
}

/// Vector-valued version of [`integrate`]; the error test uses the max norm
/// over components. `f(x, out)` must overwrite all of `out`.
pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(
    rule: &GaussLegendre,
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<Vec<f64>> {
    let mut scratch = vec![0.0; dim];
    let mut whole = vec![0.0; dim];
    rule.apply_vec(&mut f, a, b, &mut scratch, &mut whole);
    let mut out = vec![0.0; dim];
    let mut worst = 0.0f64;
    refine_vec(
        rule,
        &mut f,
        a,
        b,
        &whole,
        abs_tol,
        0,
        &mut scratch,
        &mut out,
        &mut worst,
    );
    if worst > 0.0 {
        return Err(Error::Quadrature {
            estimate: out.iter().sum(),
            error: worst,
        });
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn refine_vec<F: FnMut(f64, &mut [f64])>(
    rule: &GaussLegendre,
    f: &mut F,
    a: f64,
    b: f64,
    whole: &[f64],
    tol: f64,
    depth: u32,
    scratch: &mut [f64],
    acc: &mut [f64],
    worst: &mut f64,
) {
    let dim = whole.len();
    let mid = 0.5 * (a + b);
    let mut left = vec![0.0; dim];
    let mut right = vec![0.0; dim];
    rule.apply_vec(f, a, mid, scratch, &mut left);
    rule.apply_vec(f, mid, b, scratch, &mut right);
    let err = whole
        .iter()
        .zip(left.iter().zip(&right))
        .map(|(w, (l, r))| (l + r - w).abs())
        .fold(0.0, f64::max);
    if err <= tol || depth >= MAX_DEPTH {
        if err > tol {
            *worst = worst.max(err);
        }
        for (o, (l, r)) in acc.iter_mut().zip(left.iter().zip(&right)) {
            *o += l + r;
        }
        return;
    }
    let sub = tol * FRAC_1_SQRT_2;
    refine_vec(rule, f, a, mid, &left, sub, depth + 1, scratch, acc, worst);
    refine_vec(rule, f, mid, b, &right, sub, depth + 1, scratch, acc, worst);
}

/// `Φ₂(x, y; ρ) − Φ(x)Φ(y)` for a standard bivariate normal with correlation
/// `rho ∈ [-1, 1]`.
///
/// Uses `∂Φ₂/∂ρ = φ₂` integrated from 0 to `rho`, with `r = sin θ` removing
/// the square-root singularity at `|r| = 1`.
pub fn gaussian_orthant_excess(rule: &GaussLegendre, x: f64, y: f64, rho: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(crate::error::invalid("rho", "must lie in [-1, 1]"));
    }
    if rho == 0.0 || !x.is_finite() || !y.is_finite() {
        return Ok(0.0);
    }
    let theta_max = rho.asin();
    let d2 = (x - y) * (x - y);
    let xy = x * y;
    let integrand = |theta: f64| {
        let s = theta.sin();
        let c2 = {
            let c = theta.cos();
            c * c
        };
        let e = if d2 == 0.0 { xy / (1.0 + s) } else { d2 / (2.0 * c2) + xy / (1.0 + s) };
        (-e).exp()
    };
    let v = integrate(rule, integrand, 0.0, theta_max, 1e-300, 1e-13)?;
    Ok(v / (2.0 * PI))
}

/// Absolute moment of a centered normal: `E|σZ|^s`.
pub fn normal_abs_moment(sd: f64, s: f64) -> f64 {
    sd.powf(s) * 2f64.powf(0.5 * s) * libm::tgamma(0.5 * (s + 1.0)) / PI.sqrt()
}

/// `E[(σZ)² 1{|σZ| ≥ ε}]`.
pub fn normal_truncated_second_moment(sd: f64, eps: f64) -> f64 {
    if sd == 0.0 {
        return 0.0;
    }
    let c = eps / sd;
    2.0 * sd * sd * (c * norm_pdf(c) + norm_sf(c))
}
