//! Experiment configuration files.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::Baseline;
use crate::cotesting::{OutputStrategy, QueryStrategy, Schedule};
use crate::error::{Error, Result};
use crate::learners::BaseLearnerSpec;
use crate::wrapper::{Boundary, WrapperSampler};

use super::stats::ComparisonPoints;

/// One JSON document describing a full experiment. Relative paths are
/// resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskConfig,
    pub algorithms: Vec<AlgorithmConfig>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    pub n_initial: usize,
    pub episodes: usize,
    /// Queries per episode.
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default)]
    pub seed: u64,
    pub output: PathBuf,
    #[serde(default)]
    pub svg: bool,
    /// Comparisons to run after the curves are written, as pairs of
    /// algorithm names.
    #[serde(default)]
    pub compare: Vec<(String, String)>,
    #[serde(default)]
    pub points: ComparisonPoints,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_folds() -> usize {
    10
}

fn default_batch() -> usize {
    1
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskConfig {
    Classification {
        data: PathBuf,
        views: PathBuf,
    },
    Wrapper {
        task: PathBuf,
        #[serde(default)]
        boundary: Boundary,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub name: String,
    #[serde(flatten)]
    pub algorithm: Algorithm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Algorithm {
    Cotesting {
        #[serde(default = "default_learners")]
        learners: Vec<BaseLearnerSpec>,
        query: QueryStrategy,
        output: OutputStrategy,
    },
    Baseline {
        #[serde(default = "BaseLearnerSpec::naive_bayes")]
        learner: BaseLearnerSpec,
        #[serde(flatten)]
        sampler: Baseline,
    },
    Wrapper {
        #[serde(flatten)]
        sampler: WrapperSampler,
    },
}

fn default_learners() -> Vec<BaseLearnerSpec> {
    vec![BaseLearnerSpec::naive_bayes()]
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a config and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(e).context(format!("reading {}", path.display())))?;
        let mut config =
            Self::from_json(&text).map_err(|e| e.context(format!("parsing {}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.task {
            TaskConfig::Classification { data, views } => {
                fix(data);
                fix(views);
            }
            TaskConfig::Wrapper { task, .. } => fix(task),
        }
        fix(&mut self.output);
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            episodes: self.episodes,
            batch: self.batch,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.episodes == 0 {
            return bad("episodes must be at least 1".into());
        }
        if self.batch == 0 {
            return bad("queries per episode must be at least 1".into());
        }
        if self.n_initial == 0 {
            return bad("n_initial must be at least 1".into());
        }
        if self.folds < 2 {
            return bad(format!("need at least 2 folds, got {}", self.folds));
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms configured".into());
        }
        let mut seen = HashSet::new();
        for a in &self.algorithms {
            if a.name.is_empty() || a.name.contains([',', '/', '\\']) {
                return bad(format!("algorithm name `{}` must be nonempty without `,` or path separators", a.name));
            }
            if !seen.insert(a.name.as_str()) {
                return bad(format!("algorithm `{}` configured twice", a.name));
            }
            let wrapper_task = matches!(self.task, TaskConfig::Wrapper { .. });
            match (&a.algorithm, wrapper_task) {
                (Algorithm::Wrapper { .. }, false) => {
                    return bad(format!("`{}` is a wrapper algorithm but the task is classification", a.name))
                }
                (Algorithm::Cotesting { .. } | Algorithm::Baseline { .. }, true) => {
                    return bad(format!("`{}` is a classification algorithm but the task is a wrapper task", a.name))
                }
                (Algorithm::Baseline { sampler: Baseline::QueryByBoosting, .. }, _) => {
                    return bad(format!("`{}`: query-by-boosting is not implemented", a.name))
                }
                (Algorithm::Cotesting { learners, .. }, _) => {
                    for l in learners {
                        l.validate()?;
                    }
                }
                (Algorithm::Baseline { learner, .. }, _) => learner.validate()?,
                _ => {}
            }
        }
        for (x, y) in &self.compare {
            for n in [x, y] {
                if !seen.contains(n.as_str()) {
                    return bad(format!("comparison names unknown algorithm `{n}`"));
                }
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        Ok(())
    }
}
