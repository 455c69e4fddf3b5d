//! The four subcommands. Each writes a JSON and a CSV artifact and returns
//! whether its verdict passed.

use std::path::PathBuf;

use gclt_core::blocks::BlockScheme;
use gclt_core::diagnostics::functionals::cell_scale;
use gclt_core::diagnostics::{check_theorem_hypotheses, ConditionReport, Expectation};
use gclt_core::distributions::LimitLaw;
use gclt_core::kolmogorov::{canonical_measure, cell_measure, gaussian_target, levy_distance, limit_cf, poisson_target, StepMeasure};
use gclt_core::montecarlo::{convergence_study, default_u_grid, Executor, StudyRow};
use serde::Serialize;

use crate::config::{sha256_hex, ExperimentConfig};
use crate::error::CliError;
use crate::inequality_suite::{csv_row, run_suite, Instance, CSV_HEADER};
use crate::output::{num, Sink};

/// Result of one command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub json: PathBuf,
    pub csv: PathBuf,
    /// Human-readable lines for the terminal.
    pub summary: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.passed {
            0
        } else {
            2
        }
    }
}

fn sink(cfg: &ExperimentConfig, stem: &'static str) -> Sink {
    Sink {
        dir: cfg.output.dir.clone(),
        stem,
        config_hash: cfg.hash(),
        seed: cfg.sim.seed,
    }
}

fn mark(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn expectation_text(e: &Expectation) -> String {
    match e {
        Expectation::Tends { limit } => format!("tends:{limit}"),
        Expectation::Converges => "converges".into(),
        Expectation::Increasing => "increasing".into(),
        Expectation::Holds => "holds".into(),
    }
}

pub fn check(cfg: &ExperimentConfig) -> Result<(ConditionReport, Outcome), CliError> {
    let report = check_theorem_hypotheses(&cfg.array, cfg.check_grid(), cfg.check.theorem, &cfg.check_options())?;
    let out = sink(cfg, "check_report");
    let json = out.write_json("check", report.passed, &report)?;
    let mut rows = Vec::new();
    for c in &report.conditions {
        for (n, v) in report.grid.iter().zip(&c.values) {
            rows.push(vec![
                c.name.clone(),
                c.required.to_string(),
                expectation_text(&c.expectation),
                num(c.tol),
                c.pass.to_string(),
                n.to_string(),
                num(*v),
            ]);
        }
    }
    let csv = out.write_csv(&["condition", "required", "expectation", "tol", "pass", "n", "value"], &rows)?;
    let mut summary: Vec<String> = report
        .conditions
        .iter()
        .map(|c| {
            let tag = if c.required { "" } else { " (informational)" };
            let last = c.values.last().copied().unwrap_or(f64::NAN);
            format!("{} {:<20} last={last:.6e}  {}{tag}", mark(c.pass), c.name, c.description)
        })
        .collect();
    summary.extend(report.notes.iter().map(|n| format!("note: {n}")));
    summary.push(format!("{}: theorem {}", mark(report.passed), report.theorem));
    let passed = report.passed;
    Ok((
        report,
        Outcome {
            passed,
            json,
            csv,
            summary,
        },
    ))
}

/// Verdict of a convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub target: LimitLaw,
    pub metric: String,
    pub tol: f64,
    /// Final distance within `tol`.
    pub final_ok: bool,
    /// Every row's cf gap and surrogate gaps within their bounds.
    pub bounds_ok: bool,
    /// The distance schedule judged as tending to 0 (noise makes this
    /// informational).
    pub distance_tends_to_zero: bool,
    pub passed: bool,
    pub rows: Vec<StudyRow>,
}

const STUDY_HEADER: [&str; 22] = [
    "n",
    "k",
    "m",
    "l",
    "r",
    "replicates",
    "metric",
    "distance",
    "tv_target",
    "lambda_hat",
    "cf_gap",
    "c1_bound",
    "sd_remainder",
    "newman",
    "block_product",
    "r4",
    "se",
    "cf_bound_ok",
    "c1_gap",
    "c1_ok",
    "c2_gap",
    "c2_ok",
];

pub fn study<E: Executor>(cfg: &ExperimentConfig, exec: &E) -> Result<(StudyReport, Outcome), CliError> {
    let sim = cfg.sim_config();
    let rows = convergence_study(&cfg.array, &sim, &cfg.target, exec)?;
    let tol = cfg.check.tol;
    let dist: Vec<f64> = rows.iter().map(|r| r.distance).collect();
    let final_ok = dist.last().is_some_and(|d| *d <= tol);
    let bounds_ok = rows.iter().all(StudyRow::bounds_ok);
    let report = StudyReport {
        target: cfg.target,
        metric: rows.first().map(|r| r.metric.clone()).unwrap_or_default(),
        tol,
        final_ok,
        bounds_ok,
        distance_tends_to_zero: Expectation::Tends { limit: 0.0 }.judge(&dist, tol),
        passed: final_ok && bounds_ok,
        rows,
    };
    let out = sink(cfg, "study");
    let json = out.write_json("study", report.passed, &report)?;
    let csv_rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.k.to_string(),
                r.m.to_string(),
                r.l.to_string(),
                r.r.to_string(),
                sim.replicates.to_string(),
                r.metric.clone(),
                num(r.distance),
                num(r.tv_target),
                num(r.lambda_hat),
                num(r.cf_gap),
                num(r.c1_bound),
                num(r.sd_remainder),
                num(r.newman),
                num(r.block_product),
                num(r.r4),
                num(r.se),
                r.cf_bound_ok.to_string(),
                num(r.c1_gap),
                r.c1_ok.to_string(),
                num(r.c2_gap),
                r.c2_ok.to_string(),
            ]
        })
        .collect();
    let csv = out.write_csv(&STUDY_HEADER, &csv_rows)?;
    let mut summary: Vec<String> = report
        .rows
        .iter()
        .map(|r| {
            format!(
                "n={:<8} k={:<8} l={:<3} {}={:.5} cf_gap={:.4} bounds={}",
                r.n,
                r.k,
                r.l,
                r.metric,
                r.distance,
                r.cf_gap,
                mark(r.bounds_ok())
            )
        })
        .collect();
    summary.push(format!(
        "{}: final {} {} tol {tol}, bounds {}",
        mark(report.passed),
        report.metric,
        if final_ok { "within" } else { "exceeds" },
        mark(bounds_ok)
    ));
    let passed = report.passed;
    Ok((
        report,
        Outcome {
            passed,
            json,
            csv,
            summary,
        },
    ))
}

/// Canonical-measure diagnostics at one `n`.
#[derive(Debug, Clone, Serialize)]
pub struct KolmogorovRow {
    pub n: u64,
    pub k: usize,
    pub m: usize,
    pub l: usize,
    /// Total mass of `K*_n` (block variance sum).
    pub total_mass: f64,
    /// `K*_n` mass within 0.25 of the target's atom (1 for Poisson, 0 for
    /// Gaussian).
    pub mass_near_atom: f64,
    pub levy: f64,
    /// Lévy distance of the ungrouped cell measure to the target.
    pub levy_ungrouped: f64,
    /// `a_n`: mean of the row sum.
    pub a_n: f64,
    /// `a*_n`: mean of the block sums.
    pub a_star_n: f64,
    /// `b*_n = a_n - a*_n`: remainder mean.
    pub b_star_n: f64,
    /// `sup_u |exp(iu a*_n + ψ[K*_n](u)) - target cf(u)|`.
    pub reconstruction_gap: f64,
    /// Singleton blocks reproduce the ungrouped cell measure.
    pub singleton_matches: bool,
    pub points: Vec<f64>,
    pub masses: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KolmogorovReport {
    pub target: LimitLaw,
    pub tol: f64,
    pub levy_tends_to_zero: bool,
    pub singleton_matches: bool,
    pub passed: bool,
    pub rows: Vec<KolmogorovRow>,
}

/// Atoms shown per row in the JSON; the CSV carries summaries only.
const MAX_ATOMS: usize = 64;

fn kolmogorov_row(cfg: &ExperimentConfig, n: u64, target_k: &StepMeasure, atom: f64) -> Result<KolmogorovRow, CliError> {
    let spec = &cfg.array;
    let k = spec.k(n);
    let scheme = BlockScheme::new(k, cfg.blocks.alpha)?;
    let kstar = canonical_measure(spec, n, &scheme, true)?;
    let cells = cell_measure(spec, n, true)?;
    let singleton = canonical_measure(spec, n, &BlockScheme::with_block_len(k, 1)?, true)?;

    let c = cell_scale(spec, k);
    let laws = spec.row_laws(n)?;
    // Under normalization the cells are centered, so every drift is 0.
    let centered = c != 1.0;
    let mean = |r: std::ops::Range<usize>| if centered { 0.0 } else { laws[r].iter().map(|l| l.mean()).sum() };
    let a_n = mean(0..k);
    let a_star_n = mean(scheme.main());

    let gap = default_u_grid()
        .into_iter()
        .map(|u| (limit_cf(&kstar, a_star_n, u) - cfg.target.cf(u)).norm())
        .fold(0.0, f64::max);
    Ok(KolmogorovRow {
        n,
        k,
        m: scheme.m,
        l: scheme.l,
        total_mass: kstar.total(),
        mass_near_atom: kstar.mass_in(atom - 0.25, atom + 0.25),
        levy: levy_distance(&kstar, target_k),
        levy_ungrouped: levy_distance(&cells, target_k),
        a_n,
        a_star_n,
        b_star_n: a_n - a_star_n,
        reconstruction_gap: gap,
        singleton_matches: singleton == cells,
        points: kstar.points().iter().take(MAX_ATOMS).copied().collect(),
        masses: kstar.masses().iter().take(MAX_ATOMS).copied().collect(),
    })
}

pub fn kolmogorov(cfg: &ExperimentConfig) -> Result<(KolmogorovReport, Outcome), CliError> {
    let (target_k, atom) = match cfg.target {
        LimitLaw::Poisson { lambda } => (poisson_target(lambda)?.0, 1.0),
        LimitLaw::Gaussian { variance, .. } => (gaussian_target(variance)?, 0.0),
    };
    let rows = cfg
        .check_grid()
        .iter()
        .map(|&n| kolmogorov_row(cfg, n, &target_k, atom))
        .collect::<Result<Vec<_>, _>>()?;
    let tol = cfg.check.tol;
    let levy: Vec<f64> = rows.iter().map(|r| r.levy).collect();
    let levy_tends_to_zero = Expectation::Tends { limit: 0.0 }.judge(&levy, tol);
    let singleton_matches = rows.iter().all(|r| r.singleton_matches);
    let report = KolmogorovReport {
        target: cfg.target,
        tol,
        levy_tends_to_zero,
        singleton_matches,
        passed: levy_tends_to_zero && singleton_matches,
        rows,
    };
    let out = sink(cfg, "kolmogorov");
    let json = out.write_json("kolmogorov", report.passed, &report)?;
    let header = [
        "n",
        "k",
        "m",
        "l",
        "total_mass",
        "mass_near_atom",
        "levy",
        "levy_ungrouped",
        "a_n",
        "a_star_n",
        "b_star_n",
        "reconstruction_gap",
        "singleton_matches",
    ];
    let csv_rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.k.to_string(),
                r.m.to_string(),
                r.l.to_string(),
                num(r.total_mass),
                num(r.mass_near_atom),
                num(r.levy),
                num(r.levy_ungrouped),
                num(r.a_n),
                num(r.a_star_n),
                num(r.b_star_n),
                num(r.reconstruction_gap),
                r.singleton_matches.to_string(),
            ]
        })
        .collect();
    let csv = out.write_csv(&header, &csv_rows)?;
    let mut summary: Vec<String> = report
        .rows
        .iter()
        .map(|r| {
            format!(
                "n={:<8} l={:<3} mass={:.5} near_atom={:.5} levy={:.5} recon_gap={:.3e}",
                r.n, r.l, r.total_mass, r.mass_near_atom, r.levy, r.reconstruction_gap
            )
        })
        .collect();
    summary.push(format!(
        "{}: Levy distance to target tends to 0 = {levy_tends_to_zero}, singleton check = {singleton_matches}",
        mark(report.passed)
    ));
    let passed = report.passed;
    Ok((
        report,
        Outcome {
            passed,
            json,
            csv,
            summary,
        },
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub seed: u64,
    pub instances: usize,
    pub failures: usize,
    pub passed: bool,
    pub results: Vec<Instance>,
}

/// Runs the randomized comparison suite. Without a config the artifacts go
/// to `dir` and the hash covers only `(seed, instances)`.
pub fn inequalities(
    cfg: Option<&ExperimentConfig>,
    seed: u64,
    instances: usize,
    dir: PathBuf,
) -> Result<(InequalityReport, Outcome), CliError> {
    if instances == 0 {
        return Err(CliError::Usage("at least one instance is required".into()));
    }
    let results = run_suite(seed, instances)?;
    let failures = results.iter().filter(|i| !i.holds()).count();
    let report = InequalityReport {
        seed,
        instances,
        failures,
        passed: failures == 0,
        results,
    };
    let config_hash = match cfg {
        Some(c) => c.hash(),
        None => sha256_hex(format!("inequalities seed={seed} instances={instances}").as_bytes()),
    };
    let out = Sink {
        dir,
        stem: "inequalities",
        config_hash,
        seed,
    };
    let json = out.write_json("inequalities", report.passed, &report)?;
    let rows: Vec<Vec<String>> = report.results.iter().map(csv_row).collect();
    let csv = out.write_csv(&CSV_HEADER, &rows)?;
    let summary = vec![format!(
        "{}: {} of {instances} instances satisfy all four comparisons",
        mark(report.passed),
        instances - failures
    )];
    let passed = report.passed;
    Ok((
        report,
        Outcome {
            passed,
            json,
            csv,
            summary,
        },
    ))
}
