use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attack::Algorithm;
use crate::error::{Error, Result};
use crate::graphgen::{GraphModel, WeightKind};
use crate::io::Merge;

/// Where each trial's graph comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum GraphSource {
    /// A fresh graph per trial, seeded from the trial seed.
    Generator(GraphModel),
    /// One fixed graph loaded once and reused by every trial.
    File {
        path: PathBuf,
        #[serde(default)]
        merge: Option<Merge>,
    },
}

fn default_h_target() -> usize {
    50
}

fn default_h_limit() -> usize {
    60
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Selection {
    /// `s != t` uniform over the largest connected component.
    #[default]
    UniformComponent,
    /// `t` uniform on the BFS ring at `h_target` around `s`; paths are
    /// searched in the ball of radius `h_limit`.
    HopTarget {
        #[serde(default = "default_h_target")]
        h_target: usize,
        #[serde(default = "default_h_limit")]
        h_limit: usize,
    },
    /// Fixed endpoints given by node label.
    Fixed { source: String, target: String },
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::GreedyFirst, Algorithm::Pathperturb]
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    /// Replaces all weights; `None` keeps file weights (unit for generators).
    #[serde(default)]
    pub weights: Option<WeightKind>,
    /// `w -> 1/w` after `weights`, for similarity-weighted inputs.
    #[serde(default)]
    pub invert: bool,
    pub trials: usize,
    pub path_ranks: Vec<usize>,
    /// Defaults to 1, or 0.1 with `invert`.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub selection: Selection,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    /// When false, `wall_time_ms` is written as 0 so output bytes depend
    /// only on the config.
    #[serde(default = "yes")]
    pub record_wall_time: bool,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative graph and output paths resolve against
    /// the file's directory.
    pub fn from_file(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(FsPath::new(""));
        if let GraphSource::File { path: p, .. } = &mut cfg.graph {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(out) = &mut cfg.out {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(if self.invert { 0.1 } else { 1.0 })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.path_ranks.is_empty() || self.path_ranks.contains(&0) {
            return bad(format!("path_ranks must be nonempty and >= 1, got {:?}", self.path_ranks));
        }
        if !(self.delta() >= 0.0 && self.delta().is_finite()) {
            return bad(format!("delta must be >= 0, got {}", self.delta()));
        }
        if self.algorithms.is_empty() {
            return bad("algorithms must be nonempty".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be >= 1".into());
        }
        if let Selection::HopTarget { h_target, h_limit } = self.selection {
            if h_target == 0 || h_limit < h_target {
                return bad(format!("need 1 <= h_target <= h_limit, got {h_target} and {h_limit}"));
            }
        }
        if let GraphSource::Generator(model) = &self.graph {
            model.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(kind) = &self.weights {
            kind.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Algorithms to report, deduplicated in config order.
    pub fn algorithm_list(&self) -> Vec<Algorithm> {
        let mut out = Vec::new();
        for &a in &self.algorithms {
            if !out.contains(&a) {
                out.push(a);
            }
        }
        out
    }
}
