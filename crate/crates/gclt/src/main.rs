use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gclt::commands::{self, Outcome};
use gclt::{CliError, ExperimentConfig, Overrides, Threaded};

#[derive(Parser)]
#[command(name = "gclt", version, about = "Block-method limit theorems on associated arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `[sim] seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo; defaults to the core count.
    #[arg(long)]
    workers: Option<usize>,
    /// Multiplies `[check] tol`.
    #[arg(long, allow_negative_numbers = true)]
    tol_scale: Option<f64>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            seed: self.seed,
            tol_scale: self.tol_scale,
        }
    }

    fn executor(&self) -> Threaded {
        match self.workers {
            Some(w) => Threaded::new(w),
            None => Threaded::available(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a theorem's hypotheses along the grid.
    Check(Common),
    /// Monte Carlo convergence study against the target law.
    Study(Common),
    /// Canonical measures of the block sums and their distance to the target.
    Kolmogorov(Common),
    /// Randomized grouped-vs-ungrouped comparison suite.
    Inequalities {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of random instances.
        #[arg(long)]
        instances: Option<usize>,
        #[command(flatten)]
        flags: Flags,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    cfg.apply(&common.flags.overrides())?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    Ok(match cli.command {
        Command::Check(c) => commands::check(&load(&c)?)?.1,
        Command::Study(c) => {
            let cfg = load(&c)?;
            commands::study(&cfg, &c.flags.executor())?.1
        }
        Command::Kolmogorov(c) => commands::kolmogorov(&load(&c)?)?.1,
        Command::Inequalities { config, instances, flags } => {
            let cfg = match config {
                Some(path) => {
                    let mut cfg = ExperimentConfig::load(&path)?;
                    cfg.apply(&flags.overrides())?;
                    Some(cfg)
                }
                None => None,
            };
            let seed = flags.seed.or(cfg.as_ref().map(|c| c.sim.seed)).unwrap_or(0);
            let count = instances.or(cfg.as_ref().map(|c| c.inequalities.instances)).unwrap_or(240);
            let dir = flags
                .out
                .clone()
                .or(cfg.as_ref().map(|c| c.output.dir.clone()))
                .unwrap_or_else(|| PathBuf::from("out"));
            commands::inequalities(cfg.as_ref(), seed, count, dir)?.1
        }
    })
}

fn main() -> ExitCode {
    // clap reports usage errors with code 2, which here means a failed check.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            println!("wrote {} and {}", outcome.json.display(), outcome.csv.display());
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
