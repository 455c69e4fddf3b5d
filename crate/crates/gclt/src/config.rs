//! Experiment configs: sectioned TOML with every key checked.

use std::path::{Path, PathBuf};

use gclt_core::assoc_gen::ArraySpec;
use gclt_core::diagnostics::{CheckOptions, TheoremId};
use gclt_core::distributions::LimitLaw;
use gclt_core::montecarlo::{default_u_grid, SimConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlocksSection {
    pub alpha: f64,
}

impl Default for BlocksSection {
    fn default() -> Self {
        Self { alpha: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Array indices `n` to simulate.
    pub grid: Vec<u64>,
    #[serde(default = "default_u_grid")]
    pub u_grid: Vec<f64>,
    #[serde(default = "yes")]
    pub surrogate: bool,
    /// Raw sums kept per row in the study output.
    #[serde(default)]
    pub dump: usize,
}

fn default_replicates() -> usize {
    10_000
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    pub theorem: TheoremId,
    /// Defaults to the simulation grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<u64>>,
    #[serde(default = "defaults::eps")]
    pub eps: f64,
    #[serde(default = "defaults::delta")]
    pub delta: f64,
    #[serde(default = "defaults::u_star")]
    pub u_star: f64,
    #[serde(default = "defaults::tol")]
    pub tol: f64,
}

mod defaults {
    use super::CheckOptions;

    pub fn eps() -> f64 {
        CheckOptions::default().eps
    }
    pub fn delta() -> f64 {
        CheckOptions::default().delta
    }
    pub fn u_star() -> f64 {
        CheckOptions::default().u_star
    }
    pub fn tol() -> f64 {
        CheckOptions::default().tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalitySection {
    #[serde(default = "default_instances")]
    pub instances: usize,
}

fn default_instances() -> usize {
    240
}

impl Default for InequalitySection {
    fn default() -> Self {
        Self {
            instances: default_instances(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub array: ArraySpec,
    #[serde(default)]
    pub blocks: BlocksSection,
    pub sim: SimSection,
    pub check: CheckSection,
    pub target: LimitLaw,
    #[serde(default)]
    pub inequalities: InequalitySection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization without the output section,
    /// so moving the output directory keeps the hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSection::default();
        sha256_hex(c.to_toml().as_bytes())
    }

    pub fn apply(&mut self, ov: &Overrides) -> Result<(), CliError> {
        if let Some(seed) = ov.seed {
            self.sim.seed = seed;
        }
        if let Some(dir) = &ov.out {
            self.output.dir = dir.clone();
        }
        if let Some(s) = ov.tol_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(CliError::Usage("--tol-scale must be positive".into()));
            }
            self.check.tol *= s;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let field = |name: &str, e: gclt_core::Error| CliError::Config(format!("{name}: {e}"));
        self.array.validate().map_err(|e| field("array", e))?;
        self.target.validate().map_err(|e| field("target", e))?;
        self.sim_config().validate().map_err(|e| field("sim", e))?;
        if !(self.blocks.alpha > 0.0 && self.blocks.alpha < 0.5) {
            return Err(CliError::Config("blocks.alpha: must lie in (0, 1/2)".into()));
        }
        let o = self.check_options();
        for (name, v) in [("check.eps", o.eps), ("check.delta", o.delta), ("check.tol", o.tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name}: must be positive")));
            }
        }
        Ok(())
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            seed: self.sim.seed,
            replicates: self.sim.replicates,
            grid: self.sim.grid.clone(),
            u_grid: self.sim.u_grid.clone(),
            alpha: self.blocks.alpha,
            surrogate: self.sim.surrogate,
            dump: self.sim.dump,
        }
    }

    pub fn check_grid(&self) -> &[u64] {
        self.check.grid.as_deref().unwrap_or(&self.sim.grid)
    }

    pub fn check_options(&self) -> CheckOptions {
        CheckOptions {
            alpha: self.blocks.alpha,
            eps: self.check.eps,
            delta: self.check.delta,
            u_star: self.check.u_star,
            tol: self.check.tol,
            lambda: match self.target {
                LimitLaw::Poisson { lambda } => Some(lambda),
                LimitLaw::Gaussian { .. } => None,
            },
        }
    }
}

/// Command-line settings that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol_scale: Option<f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
