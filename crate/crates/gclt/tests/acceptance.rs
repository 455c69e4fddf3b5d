//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p gclt --test acceptance`.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gclt::commands;
use gclt::inequality_suite::run_suite;
use gclt::{ExperimentConfig, Threaded};
use gclt_core::assoc_gen::{ArraySpec, CorrelationModel, Family, Parameter};
use gclt_core::blocks::{variance_decomposition, BlockScheme};
use gclt_core::cov::CovMatrix;
use gclt_core::diagnostics::Expectation;
use gclt_core::distributions::{tv_distance, CountLaw, TAIL_TOL};
use gclt_core::kolmogorov::{cell_measure, limit_cf, StepMeasure};
use gclt_core::montecarlo::{default_u_grid, StudyRow};
use gclt_core::newman::{block_product_bound, newman_bound};
use gclt_core::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{e}"))
}

fn scratch(cfg: &mut ExperimentConfig, name: &str) {
    cfg.output.dir = std::env::temp_dir().join(format!("gclt-acceptance-{}", std::process::id())).join(name);
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn binomial_poisson() -> Verdict {
    let pois = CountLaw::Poisson { lambda: 2.0 }.table(TAIL_TOL).unwrap();
    let ns = [100u64, 1_000, 10_000];
    let tv: Vec<f64> = ns
        .iter()
        .map(|&n| tv_distance(&CountLaw::Binomial { n, p: 2.0 / n as f64 }.table(TAIL_TOL).unwrap(), &pois))
        .collect();
    let oracle = ns.iter().zip(&tv).all(|(&n, t)| *t <= 4.0 / n as f64);
    let pass = decreasing(&tv) && tv[2] <= 0.003 && oracle;
    verdict(pass, format!("TV = {}, bound 4/n holds = {oracle}", sci(&tv)))
}

fn negbin_poisson() -> Verdict {
    let pois = CountLaw::Poisson { lambda: 2.0 }.table(TAIL_TOL).unwrap();
    let ks = [100u64, 1_000, 10_000];
    let tv: Vec<f64> = ks
        .iter()
        .map(|&k| {
            let law = CountLaw::ShiftedNegBinomial { k, p: 1.0 - 2.0 / k as f64 };
            tv_distance(&law.table(TAIL_TOL).unwrap(), &pois)
        })
        .collect();
    verdict(decreasing(&tv) && tv[2] <= 0.01, format!("TV = {}", sci(&tv)))
}

fn inequality_suite() -> Verdict {
    let results = run_suite(0, 240).unwrap();
    let held = results.iter().filter(|i| i.holds()).count();
    verdict(held == results.len() && results.len() >= 200, format!("{held}/{} instances", results.len()))
}

/// `A Aᵀ` with non-negative entries: PSD and entrywise non-negative.
fn random_psd(rng: &mut StdRng, k: usize) -> CovMatrix {
    let cols = rng.random_range(1..=k);
    let a: Vec<f64> = (0..k * cols).map(|_| rng.random_range(0.0..1.0) / cols as f64).collect();
    let mut data = vec![0.0; k * k];
    for r in 0..k {
        for s in 0..k {
            data[r * k + s] = (0..cols).map(|c| a[r * cols + c] * a[s * cols + c]).sum();
        }
    }
    CovMatrix::dense(k, data).unwrap()
}

fn variance_ratios() -> Verdict {
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = rng.random_range(2..=80);
        let sigma = random_psd(&mut rng, k);
        let scheme = BlockScheme::with_block_len(k, rng.random_range(1..=k)).unwrap();
        let (a, b, c) = variance_decomposition(&sigma, &scheme).unwrap().ratios();
        worst = worst.max((a + b + c - 1.0).abs());
    }
    verdict(worst <= 1e-12, format!("max |sum - 1| = {worst:.2e}"))
}

fn newman_brute_force() -> Verdict {
    let mut rng = StdRng::seed_from_u64(5);
    let (mut worst, mut worst_scale) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let k = rng.random_range(2..=200);
        let sigma = random_psd(&mut rng, k);
        let scheme = BlockScheme::with_block_len(k, rng.random_range(1..=k.min(20))).unwrap();
        let u = rng.random_range(0.1..4.0);
        let (mut cross, mut within) = (0.0, 0.0f64);
        for j in 0..scheme.m {
            let mut block = 0.0;
            for r in scheme.block(j) {
                for s in 0..scheme.main_len() {
                    if s / scheme.l != j {
                        cross += sigma.get(r, s);
                    } else if s != r {
                        block += sigma.get(r, s);
                    }
                }
            }
            within = within.max(block);
        }
        let want_r2 = 0.5 * u * u * cross;
        let want_r3 = 0.5 * u * u * scheme.m as f64 * within;
        let r2 = newman_bound(&sigma, &scheme, u).unwrap();
        let r3 = block_product_bound(&sigma, &scheme, u).unwrap();
        worst = worst
            .max((r2 - want_r2).abs() / want_r2.max(1.0))
            .max((r3 - want_r3).abs() / want_r3.max(1.0));
        for (f, v) in [(newman_bound as fn(_, _, _) -> _, r2), (block_product_bound, r3)] {
            let doubled = f(&sigma, &scheme, 2.0 * u).unwrap();
            worst_scale = worst_scale.max((doubled - 4.0 * v).abs() / v.max(1.0));
        }
    }
    verdict(
        worst <= 1e-12 && worst_scale <= 1e-12,
        format!("max rel error {worst:.2e}, u^2 scaling error {worst_scale:.2e}"),
    )
}

fn kolmogorov_reconstruction() -> Verdict {
    let spec = ArraySpec::new(Family::Bernoulli, Parameter::Rate { lambda: 2.0 }, CorrelationModel::Independent);
    let mut lines = Vec::new();
    let mut pass = true;
    for k in [1_000u64, 10_000] {
        let p = 2.0 / k as f64;
        let kf = k as f64;
        // Closed form: atoms at 1 - p and -p.
        let closed = StepMeasure::from_atoms([(-p, kf * (1.0 - p) * p * p), (1.0 - p, kf * p * (1.0 - p).powi(2))]).unwrap();
        let kstar = cell_measure(&spec, k, true).unwrap();
        let same = kstar.points().len() == 2
            && kstar.atoms().zip(closed.atoms()).all(|(a, b)| (a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-12);
        let gap = default_u_grid()
            .into_iter()
            .map(|u| {
                let target = ((Complex64::new(0.0, u).exp() - 1.0) * 2.0).exp();
                (limit_cf(&kstar, kf * p, u) - target).norm()
            })
            .fold(0.0, f64::max);
        let tol = 10.0 * kf * p * p;
        pass &= same && gap <= tol;
        lines.push(format!("k={k}: gap {gap:.2e} <= {tol:.1e}, closed form {same}"));
    }
    verdict(pass, lines.join("; "))
}

fn final_row(name: &str) -> (ExperimentConfig, Vec<StudyRow>) {
    let mut cfg = config(name);
    scratch(&mut cfg, name);
    let (report, _) = commands::study(&cfg, &Threaded::available()).unwrap();
    (cfg, report.rows)
}

fn poisson_end_to_end(name: &str, tol: f64) -> Verdict {
    let (cfg, rows) = final_row(name);
    let last = rows.last().unwrap();
    let pass = last.k == 2000 && cfg.sim.replicates == 100_000 && last.distance <= tol && last.cf_bound_ok;
    verdict(
        pass,
        format!(
            "k={} R={}: TV(Poisson({:.4})) = {:.4} <= {tol}, cf gap {:.4}, bounds ok {}",
            last.k, cfg.sim.replicates, last.lambda_hat, last.distance, last.cf_gap, last.cf_bound_ok
        ),
    )
}

fn gaussian_clt() -> Verdict {
    let (cfg, rows) = final_row("gauss_stationary.cfg");
    let last = rows.last().unwrap();
    let pass = last.n == 5000 && cfg.sim.replicates == 100_000 && last.metric == "ks" && last.distance <= 0.02;
    verdict(pass, format!("n={} R={}: KS = {:.4} <= 0.02", last.n, cfg.sim.replicates, last.distance))
}

fn negative_control() -> Verdict {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/exch_constant.cfg");
    let mut cfg = config("exch_constant.cfg");
    scratch(&mut cfg, "exch_constant");
    let status = Command::new(env!("CARGO_BIN_EXE_gclt"))
        .args(["check", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&cfg.output.dir)
        .output()
        .expect("run gclt");
    let code = status.status.code();
    let (report, _) = commands::check(&cfg).unwrap();
    let failed_2d = report.condition("2d").is_some_and(|c| !c.pass && c.required);
    let (study, _) = commands::study(&cfg, &Threaded::available()).unwrap();
    let tv: Vec<f64> = study.rows.iter().map(|r| r.tv_target).collect();
    let tends = Expectation::Tends { limit: 0.0 }.judge(&tv, cfg.check.tol);
    verdict(
        code == Some(2) && failed_2d && !tends,
        format!("check exit {code:?}, (2d) failed {failed_2d}, TV to Poisson(2) = {tv:.3?} tends to 0 = {tends}"),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, u64, fn() -> Verdict);
    let criteria: [Criterion; 10] = [
        ("1 binomial -> poisson", 1, binomial_poisson),
        ("2 shifted negative binomial -> poisson", 5, negbin_poisson),
        ("3 comparison inequality suite", 60, inequality_suite),
        ("4 variance decomposition", 5, variance_ratios),
        ("5 newman bounds vs brute force", 10, newman_brute_force),
        ("6 kolmogorov reconstruction", 1, kolmogorov_reconstruction),
        ("7 associated bernoulli -> poisson", 300, || poisson_end_to_end("bern_assoc_pc1.cfg", 0.05)),
        ("8 associated geometric -> poisson", 300, || poisson_end_to_end("geom_stationary.cfg", 0.07)),
        ("9 stationary gaussian clt", 300, gaussian_clt),
        ("10 negative control", 120, negative_control),
    ];
    let mut failures = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = v.pass && in_time;
        failures += usize::from(!pass);
        println!(
            "{} criterion {name}: {} [{:.2}s of {budget}s]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    if failures == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
