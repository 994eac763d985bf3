//! Experiment configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::generate::{RandomTreeParams, RequestModel};
use crate::bregman::ProjectionOptions;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Kserver,
    Paging,
    Setcover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditLevel {
    Off,
    /// Structural checks of every step; no comparator needed.
    #[default]
    Primal,
    /// Structural checks plus all comparator and certificate checks.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeSpec {
    Hst { branching: usize, depth: usize, ratio: f64, root_weight: f64 },
    Random(RandomTreeParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestSpec {
    pub model: RequestModel,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Kserver { tree: TreeSpec, k: usize, h: usize, requests: RequestSpec },
    Paging { n: usize, k: usize, h: usize, weight_range: (f64, f64), requests: RequestSpec },
    Setcover { n: usize, rows: usize, density: f64 },
}

impl GeneratorSpec {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            GeneratorSpec::Kserver { .. } => Algorithm::Kserver,
            GeneratorSpec::Paging { .. } => Algorithm::Paging,
            GeneratorSpec::Setcover { .. } => Algorithm::Setcover,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum InstanceSource {
    File { path: PathBuf },
    Generate { spec: GeneratorSpec, count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub trace: PathBuf,
    pub summary: PathBuf,
    pub plot: PathBuf,
}

impl OutputPaths {
    /// `trace.jsonl`, `summary.csv` and `plot.csv` inside `dir`.
    pub fn in_dir(dir: impl Into<PathBuf>) -> Self {
        let dir = dir.into();
        OutputPaths { trace: dir.join("trace.jsonl"), summary: dir.join("summary.csv"), plot: dir.join("plot.csv") }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub projection: ProjectionOptions,
    /// Additive slack of the aggregate bounds.
    pub bound: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { projection: ProjectionOptions::default(), bound: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub instances: InstanceSource,
    #[serde(default)]
    pub audit: AuditLevel,
    pub output: OutputPaths,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::param(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if let InstanceSource::Generate { spec, count } = &self.instances {
            if spec.algorithm() != self.algorithm {
                return Err(Error::param("generator spec does not match the configured algorithm"));
            }
            if *count == 0 {
                return Err(Error::param("instance count must be positive"));
            }
        }
        Ok(())
    }
}
