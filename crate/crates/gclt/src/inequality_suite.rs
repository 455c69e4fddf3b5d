//! Randomized checks of the grouped-vs-ungrouped comparison inequalities on
//! small arrays whose block laws are computed exactly.

use gclt_core::assoc_gen::{ArraySpec, CorrelationModel, Family, Normalization, Parameter};
use gclt_core::blocks::BlockScheme;
use gclt_core::diagnostics::{comparison_inequalities, ComparisonSet};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::output::num;

pub const MAX_K: usize = 24;
pub const MAX_L: usize = 6;

#[derive(Debug, Clone, Serialize)]
pub struct Instance {
    pub index: usize,
    pub spec: ArraySpec,
    pub k: usize,
    pub l: usize,
    pub eps: f64,
    pub delta: f64,
    pub comparisons: ComparisonSet,
}

impl Instance {
    pub fn holds(&self) -> bool {
        self.comparisons.all_hold()
    }
}

fn random_spec(rng: &mut StdRng, k: usize) -> ArraySpec {
    let family = if rng.random_bool(0.5) {
        Family::Bernoulli
    } else {
        Family::CorrectedGeometric
    };
    let param = match rng.random_range(0..3) {
        0 => Parameter::Fixed {
            value: rng.random_range(0.02..0.7),
        },
        1 => Parameter::Rate {
            lambda: rng.random_range(0.2..0.6) * k as f64,
        },
        _ => Parameter::Ramp {
            lambda: rng.random_range(0.2..0.5) * k as f64,
            spread: rng.random_range(0.0..0.9),
        },
    };
    let dependence = match rng.random_range(0..3) {
        0 => CorrelationModel::Independent,
        1 => CorrelationModel::Exchangeable { rho: 1.0 },
        _ => CorrelationModel::Exchangeable {
            rho: rng.random_range(0.05..0.95),
        },
    };
    let mut spec = ArraySpec::new(family, param, dependence);
    if rng.random_bool(0.3) {
        spec.normalization = Normalization::CenteredSqrtK;
    }
    spec
}

/// `instances` random arrays with `k <= 24` and `ℓ <= 6`, Bernoulli or
/// geometric cells, independent, comonotone or Gaussian-copula rows.
pub fn run_suite(seed: u64, instances: usize) -> gclt_core::Result<Vec<Instance>> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..instances)
        .map(|index| {
            let k = rng.random_range(2..=MAX_K);
            let l = rng.random_range(1..=MAX_L.min(k));
            let spec = random_spec(&mut rng, k);
            let eps = rng.random_range(0.05..2.0);
            let delta = rng.random_range(0.1..2.0);
            let scheme = BlockScheme::with_block_len(k, l)?;
            let comparisons = comparison_inequalities(&spec, k as u64, &scheme, delta, eps)?;
            Ok(Instance {
                index,
                spec,
                k,
                l,
                eps,
                delta,
                comparisons,
            })
        })
        .collect()
}

pub const CSV_HEADER: [&str; 20] = [
    "index",
    "family",
    "dependence",
    "normalization",
    "k",
    "l",
    "eps",
    "delta",
    "uan_lhs",
    "uan_rhs",
    "uan_holds",
    "variance_lhs",
    "variance_rhs",
    "variance_holds",
    "lyapounov_lhs",
    "lyapounov_rhs",
    "lyapounov_holds",
    "lindeberg_lhs",
    "lindeberg_rhs",
    "lindeberg_holds",
];

pub fn csv_row(i: &Instance) -> Vec<String> {
    let dep = match i.spec.dependence {
        CorrelationModel::Independent => "independent".to_string(),
        CorrelationModel::Exchangeable { rho: 1.0 } => "comonotone".to_string(),
        CorrelationModel::Exchangeable { rho } => format!("copula:{rho}"),
        CorrelationModel::StationaryDecay { rho0, rate, horizon } => format!("decay:{rho0}:{rate}:{horizon}"),
    };
    let c = &i.comparisons;
    let mut row = vec![
        i.index.to_string(),
        format!("{:?}", i.spec.family),
        dep,
        format!("{:?}", i.spec.normalization),
        i.k.to_string(),
        i.l.to_string(),
        num(i.eps),
        num(i.delta),
    ];
    for cmp in [c.uan, c.variance, c.lyapounov, c.lindeberg] {
        row.extend([num(cmp.lhs), num(cmp.rhs), cmp.holds.to_string()]);
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_reproducible_and_covers_all_kinds() {
        let a = run_suite(3, 60).unwrap();
        let b = run_suite(3, 60).unwrap();
        assert_eq!(a.len(), 60);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.comparisons, y.comparisons);
        }
        assert!(a.iter().all(|i| i.k <= MAX_K && i.l <= MAX_L.min(i.k)));
        let kinds: std::collections::BTreeSet<String> = a.iter().map(|i| csv_row(i)[2].split(':').next().unwrap().to_string()).collect();
        assert_eq!(kinds.len(), 3, "{kinds:?}");
        assert!(a.iter().all(Instance::holds));
        assert_eq!(csv_row(&a[0]).len(), CSV_HEADER.len());
    }
}
