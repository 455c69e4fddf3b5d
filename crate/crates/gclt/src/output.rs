//! Versioned JSON and CSV artifacts stamped with the config hash and seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub config_hash: &'a str,
    pub seed: u64,
    pub passed: bool,
    pub result: &'a T,
}

/// Where one command writes its artifacts.
#[derive(Debug, Clone)]
pub struct Sink {
    pub dir: PathBuf,
    pub stem: &'static str,
    pub config_hash: String,
    pub seed: u64,
}

impl Sink {
    pub fn json_path(&self) -> PathBuf {
        self.dir.join(format!("{}.json", self.stem))
    }

    pub fn csv_path(&self) -> PathBuf {
        self.dir.join(format!("{}.csv", self.stem))
    }

    pub fn write_json<T: Serialize>(&self, command: &str, passed: bool, result: &T) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.dir)?;
        let env = Envelope {
            schema_version: SCHEMA_VERSION,
            command,
            config_hash: &self.config_hash,
            seed: self.seed,
            passed,
            result,
        };
        let path = self.json_path();
        fs::write(&path, serde_json::to_string_pretty(&env)? + "\n")?;
        Ok(path)
    }

    /// `header` and every row get `config_hash` and `seed` columns appended.
    pub fn write_csv(&self, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.dir)?;
        let path = self.csv_path();
        write_csv_file(&path, header, rows, &self.config_hash, self.seed)?;
        Ok(path)
    }
}

fn write_csv_file(path: &Path, header: &[&str], rows: &[Vec<String>], hash: &str, seed: u64) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let seed = seed.to_string();
    w.write_record(header.iter().copied().chain(["config_hash", "seed"]))?;
    for row in rows {
        w.write_record(row.iter().map(String::as_str).chain([hash, seed.as_str()]))?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-tripping float text; NaN becomes an empty field.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn artifacts_carry_hash_and_seed() {
        let dir = tempfile::tempdir().unwrap();
        let sink = Sink {
            dir: dir.path().join("nested"),
            stem: "demo",
            config_hash: "abc".into(),
            seed: 7,
        };
        let j = sink.write_json("demo", true, &vec![1.5, 2.0]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(j).unwrap()).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["config_hash"], "abc");
        assert_eq!(v["seed"], 7);
        assert_eq!(v["result"][0], 1.5);

        let c = sink.write_csv(&["x", "y"], &[vec![num(0.25), num(f64::NAN)]]).unwrap();
        assert_eq!(fs::read_to_string(c).unwrap(), "x,y,config_hash,seed\n0.25,,abc,7\n");
    }
}
