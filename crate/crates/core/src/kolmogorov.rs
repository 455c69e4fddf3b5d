//! Canonical (Kolmogorov) measures of finite-variance infinitely divisible
//! laws: construction from block-sum laws, the exponent `ψ[K]`, and the Lévy
//! distance between measures.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::assoc_gen::ArraySpec;
use crate::blocks::BlockScheme;
use crate::diagnostics::functionals::{cell_laws, CenteredLaw, LawSet};
use crate::diagnostics::grouped::block_laws;
use crate::error::{Error, Result};
use crate::math::cis_minus_one_minus_i;

/// Finite measure with finitely many atoms, stored as strictly increasing
/// points and non-negative masses.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepMeasure {
    points: Vec<f64>,
    masses: Vec<f64>,
}

impl StepMeasure {
    /// Sorts the atoms and merges coincident points; zero masses are dropped.
    pub fn from_atoms<I: IntoIterator<Item = (f64, f64)>>(atoms: I) -> Result<Self> {
        let mut v: Vec<(f64, f64)> = Vec::new();
        for (x, w) in atoms {
            if !x.is_finite() || !(w >= 0.0) || !w.is_finite() {
                return Err(crate::error::invalid("atom", "points must be finite and masses non-negative"));
            }
            if w > 0.0 {
                v.push((x, w));
            }
        }
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points: Vec<f64> = Vec::with_capacity(v.len());
        let mut masses: Vec<f64> = Vec::with_capacity(v.len());
        for (x, w) in v {
            if points.last() == Some(&x) {
                *masses.last_mut().unwrap() += w;
            } else {
                points.push(x);
                masses.push(w);
            }
        }
        Ok(Self { points, masses })
    }

    pub fn point_mass(x: f64, w: f64) -> Result<Self> {
        Self::from_atoms([(x, w)])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.masses.iter().copied())
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `K(x) = K((-∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let i = self.points.partition_point(|&p| p <= x);
        self.masses[..i].iter().sum()
    }

    /// `K((-∞, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let i = self.points.partition_point(|&p| p < x);
        self.masses[..i].iter().sum()
    }

    /// Mass in `[a, b]`.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        self.atoms().filter(|&(x, _)| x >= a && x <= b).map(|(_, w)| w).sum()
    }
}

fn law_atoms(laws: &LawSet, centered: bool) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (law, count) in &laws.laws {
        let CenteredLaw::Discrete { pmf, mean, scale } = law else {
            return Err(Error::EnumerationUnsupported("continuous laws have no step canonical measure".into()));
        };
        let shift = if centered { *mean } else { 0.0 };
        for (j, p) in pmf.iter() {
            let x = scale * (j as f64 - shift);
            out.push((x, *count as f64 * x * x * p));
        }
    }
    Ok(out)
}

/// `K_n` over the `m` block sums (`Σ_j ∫_{-∞}^{∘} y² dG_j(y)`); with
/// `centered` the block laws are shifted by their means `b_j`, giving `K*_n`.
pub fn canonical_measure(spec: &ArraySpec, n: u64, scheme: &BlockScheme, centered: bool) -> Result<StepMeasure> {
    StepMeasure::from_atoms(law_atoms(&block_laws(spec, n, scheme)?, centered)?)
}

/// `K_n` over all `k` cells (no regrouping, no remainder dropped).
pub fn cell_measure(spec: &ArraySpec, n: u64, centered: bool) -> Result<StepMeasure> {
    StepMeasure::from_atoms(law_atoms(&cell_laws(spec, n)?, centered)?)
}

/// `ψ[K](u) = ∫ (e^{iux} - 1 - iux) / x² dK(x)`, with `-u²/2` per unit mass
/// at the origin.
pub fn psi_of_k(k: &StepMeasure, u: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in k.atoms() {
        if x == 0.0 {
            acc.re -= 0.5 * u * u * w;
        } else {
            acc += cis_minus_one_minus_i(u * x) * (w / (x * x));
        }
    }
    acc
}

/// `exp(iua + ψ[K](u))`.
pub fn limit_cf(k: &StepMeasure, drift: f64, u: f64) -> Complex64 {
    (Complex64::new(0.0, u * drift) + psi_of_k(k, u)).exp()
}

/// Canonical measure and drift of `Poisson(λ)`.
pub fn poisson_target(lambda: f64) -> Result<(StepMeasure, f64)> {
    Ok((StepMeasure::point_mass(1.0, lambda)?, lambda))
}

/// Canonical measure of `N(0, σ²)`.
pub fn gaussian_target(variance: f64) -> Result<StepMeasure> {
    StepMeasure::point_mass(0.0, variance)
}

/// `sup_x [F(x) - G(x + h)]` for step functions.
fn excess(f: &StepMeasure, g: &StepMeasure, h: f64) -> f64 {
    let mut best = 0.0f64;
    // F jumps up at its atoms; G(x + h) jumps up at g_j - h, so the left
    // limit there is the other candidate.
    for &x in &f.points {
        best = best.max(f.cdf(x) - g.cdf(x + h));
    }
    for &y in &g.points {
        let x = y - h;
        best = best.max(f.cdf_left(x) - g.cdf_left(y));
    }
    best.max(f.total() - g.total())
}

/// Lévy distance between the distribution functions of two finite
/// measures: the least `h` with `G(x - h) - h <= F(x) <= G(x + h) + h`.
pub fn levy_distance(a: &StepMeasure, b: &StepMeasure) -> f64 {
    let ok = |h: f64| excess(a, b, h) <= h && excess(b, a, h) <= h;
    if ok(0.0) {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = a.total().max(b.total());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assoc_gen::{CorrelationModel, Family, Parameter};
    use alloc::vec;
    use proptest::prelude::*;

    fn iid_bern(lambda: f64) -> ArraySpec {
        ArraySpec::new(Family::Bernoulli, Parameter::Rate { lambda }, CorrelationModel::Independent)
    }

    fn u_grid() -> Vec<f64> {
        (0..41).map(|i| -4.0 + 0.2 * i as f64).collect()
    }

    #[test]
    fn single_bernoulli_atoms() {
        let spec = ArraySpec::new(Family::Bernoulli, Parameter::Fixed { value: 0.3 }, CorrelationModel::Independent);
        let scheme = BlockScheme::with_block_len(2, 1).unwrap();
        let k = canonical_measure(&spec, 2, &scheme, true).unwrap();
        let (p, q) = (0.3, 0.7);
        assert_eq!(k.points().len(), 2);
        assert!((k.points()[0] + p).abs() < 1e-15 && (k.points()[1] - q).abs() < 1e-15);
        assert!((k.masses()[0] - 2.0 * p * p * q).abs() < 1e-15);
        assert!((k.masses()[1] - 2.0 * q * q * p).abs() < 1e-15);
    }

    #[test]
    fn singleton_grouping_is_ungrouped() {
        let spec = ArraySpec::new(
            Family::CorrectedGeometric,
            Parameter::Fixed { value: 0.2 },
            CorrelationModel::Exchangeable { rho: 0.3 },
        );
        let scheme = BlockScheme::with_block_len(10, 1).unwrap();
        assert_eq!(canonical_measure(&spec, 10, &scheme, true).unwrap(), cell_measure(&spec, 10, true).unwrap());
    }

    #[test]
    fn total_mass_is_block_variance_sum() {
        use crate::assoc_gen::analytic_row_covariance;
        let spec = ArraySpec::new(
            Family::Bernoulli,
            Parameter::Rate { lambda: 2.0 },
            CorrelationModel::Exchangeable { rho: 0.4 },
        );
        let scheme = BlockScheme::new(40, 0.45).unwrap();
        let k = canonical_measure(&spec, 40, &scheme, true).unwrap();
        let sigma = analytic_row_covariance(&spec, 40).unwrap();
        let want: f64 = (0..scheme.m).map(|j| sigma.quad(scheme.block(j))).sum();
        assert!((k.total() - want).abs() < 1e-12, "{} {}", k.total(), want);
    }

    #[test]
    fn psi_examples() {
        let one = StepMeasure::point_mass(1.0, 2.0).unwrap();
        assert_eq!(psi_of_k(&one, 0.0), Complex64::new(0.0, 0.0));
        for u in [0.3, 1.0, -2.5] {
            let want = (Complex64::new(0.0, u).exp() - 1.0 - Complex64::new(0.0, u)) * 2.0;
            assert!((psi_of_k(&one, u) - want).norm() < 1e-14);
            let pois = limit_cf(&one, 2.0, u);
            let target = ((Complex64::new(0.0, u).exp() - 1.0) * 2.0).exp();
            assert!((pois - target).norm() < 1e-14);
        }
        let zero = gaussian_target(1.5).unwrap();
        assert_eq!(psi_of_k(&zero, 2.0), Complex64::new(-3.0, 0.0));
        let empty = StepMeasure::default();
        assert!((limit_cf(&empty, 0.7, 2.0) - Complex64::new(0.0, 1.4).exp()).norm() < 1e-15);
    }

    #[test]
    fn reconstruction_within_kp2_of_poisson() {
        for k in [1000u64, 10_000] {
            let spec = iid_bern(2.0);
            let kstar = cell_measure(&spec, k, true).unwrap();
            let a_n = 2.0;
            let p = 2.0 / k as f64;
            let tol = 10.0 * k as f64 * p * p;
            let worst = u_grid()
                .into_iter()
                .map(|u| {
                    let target = ((Complex64::new(0.0, u).exp() - 1.0) * 2.0).exp();
                    (limit_cf(&kstar, a_n, u) - target).norm()
                })
                .fold(0.0, f64::max);
            assert!(worst <= tol, "k={k}: {worst} > {tol}");
        }
    }

    #[test]
    fn levy_examples() {
        let a = StepMeasure::point_mass(0.0, 1.0).unwrap();
        assert_eq!(levy_distance(&a, &a), 0.0);
        for eps in [0.01, 0.3, 2.0] {
            let b = StepMeasure::point_mass(eps, 1.0).unwrap();
            let d = levy_distance(&a, &b);
            assert!(d <= eps + 1e-12 && d > 0.0, "{eps} {d}");
        }
        let c = StepMeasure::point_mass(0.0, 0.5).unwrap();
        assert!((levy_distance(&a, &c) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn levy_schedule_for_bernoulli_array() {
        let (target, _) = poisson_target(2.0).unwrap();
        let d: Vec<f64> = [100u64, 1000, 10_000]
            .iter()
            .map(|&k| levy_distance(&cell_measure(&iid_bern(2.0), k, true).unwrap(), &target))
            .collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
        assert!(d[2] < 0.02);
    }

    proptest! {
        #[test]
        fn psi_is_conjugate_symmetric(
            atoms in proptest::collection::vec((-3.0..3.0f64, 0.0..2.0f64), 1..8),
            u in -5.0..5.0f64,
        ) {
            let k = StepMeasure::from_atoms(atoms).unwrap();
            let (a, b) = (psi_of_k(&k, u), psi_of_k(&k, -u));
            prop_assert!((a - b.conj()).norm() < 1e-12);
            prop_assert!(limit_cf(&k, 0.3, u).norm() <= 1.0 + 1e-12);
        }

        #[test]
        fn levy_is_a_symmetric_bounded_distance(
            a in proptest::collection::vec((-3.0..3.0f64, 0.0..1.0f64), 1..6),
            b in proptest::collection::vec((-3.0..3.0f64, 0.0..1.0f64), 1..6),
        ) {
            let (a, b) = (StepMeasure::from_atoms(a).unwrap(), StepMeasure::from_atoms(b).unwrap());
            let d = levy_distance(&a, &b);
            prop_assert!((d - levy_distance(&b, &a)).abs() < 1e-9);
            prop_assert!(d <= a.total().max(b.total()) + 1e-12);
            prop_assert_eq!(levy_distance(&a, &a), 0.0);
        }
    }

    #[test]
    fn merging_atoms() {
        let k = StepMeasure::from_atoms(vec![(1.0, 0.5), (0.0, 0.0), (1.0, 0.25), (-1.0, 1.0)]).unwrap();
        assert_eq!(k.points(), &[-1.0, 1.0]);
        assert_eq!(k.masses(), &[1.0, 0.75]);
        assert_eq!(k.cdf(0.0), 1.0);
        assert_eq!(k.cdf_left(1.0), 1.0);
        assert_eq!(k.mass_in(0.5, 2.0), 0.75);
    }
}
