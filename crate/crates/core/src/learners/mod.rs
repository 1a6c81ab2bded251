//! Single-view base learners behind one train/predict contract.
//!
//! A trained model is wrapped in a [`Hypothesis`]. When the model does not
//! support confidences the wrapper strips them, so nothing downstream can
//! observe a confidence value from such a learner.

mod committee;
mod naive_bayes;
mod nearest;
mod tree;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::{FeatureId, FeatureVector, LabelId};
use crate::error::{Error, Result};

pub use committee::{bagged_committee, bootstrap_indices, sample_nb_committee, MAX_BOOTSTRAP_ATTEMPTS};
pub use naive_bayes::NaiveBayes;
pub use nearest::NearestNeighbor;
pub use tree::{DecisionTree, TreeParams};

/// A predicted label with an optional confidence in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: LabelId,
    confidence: Option<f64>,
}

impl Prediction {
    pub fn new(label: LabelId, confidence: Option<f64>) -> Self {
        if let Some(c) = confidence {
            assert!(c.is_finite() && (0.0..=1.0).contains(&c), "confidence {c} outside [0,1]");
        }
        Prediction { label, confidence }
    }

    pub fn label_only(label: LabelId) -> Self {
        Prediction { label, confidence: None }
    }

    pub fn confidence(&self) -> Option<f64> {
        self.confidence
    }
}

/// A trained single-view model.
pub trait Classifier: Send + Sync + fmt::Debug {
    fn predict(&self, x: &FeatureVector) -> Prediction;

    fn confidence_supported(&self) -> bool;
}

#[derive(Clone)]
pub struct Hypothesis {
    model: Arc<dyn Classifier>,
    confidence_supported: bool,
}

impl Hypothesis {
    pub fn new(model: impl Classifier + 'static) -> Self {
        let confidence_supported = model.confidence_supported();
        Hypothesis {
            model: Arc::new(model),
            confidence_supported,
        }
    }

    pub fn predict(&self, x: &FeatureVector) -> Prediction {
        let p = self.model.predict(x);
        if self.confidence_supported {
            p
        } else {
            Prediction::label_only(p.label)
        }
    }

    pub fn confidence_supported(&self) -> bool {
        self.confidence_supported
    }
}

impl fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hypothesis")
            .field("model", &self.model)
            .field("confidence_supported", &self.confidence_supported)
            .finish()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub x: &'a FeatureVector,
    pub y: LabelId,
}

/// Training input for one view.
#[derive(Debug, Clone)]
pub struct TrainingData<'a> {
    pub samples: Vec<Sample<'a>>,
    pub n_classes: usize,
    /// Feature ids of the view; sizes the NB smoothing denominator.
    pub vocabulary: &'a [FeatureId],
}

impl<'a> TrainingData<'a> {
    pub fn new(samples: Vec<Sample<'a>>, n_classes: usize, vocabulary: &'a [FeatureId]) -> Self {
        TrainingData {
            samples,
            n_classes,
            vocabulary,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub(crate) fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for s in &self.samples {
            counts[s.y.index()] += 1;
        }
        counts
    }

    fn subset(&self, idx: &[usize]) -> TrainingData<'a> {
        TrainingData {
            samples: idx.iter().map(|&i| self.samples[i]).collect(),
            n_classes: self.n_classes,
            vocabulary: self.vocabulary,
        }
    }
}

fn default_alpha() -> f64 {
    1.0
}

fn default_depth() -> usize {
    32
}

fn default_min_leaf() -> usize {
    1
}

/// Which base learner to train, with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseLearnerSpec {
    NaiveBayes {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    NearestNeighbor,
    DecisionTree {
        #[serde(default = "default_depth")]
        max_depth: usize,
        #[serde(default = "default_min_leaf")]
        min_leaf: usize,
    },
}

impl BaseLearnerSpec {
    pub fn naive_bayes() -> Self {
        BaseLearnerSpec::NaiveBayes { alpha: 1.0 }
    }

    pub fn decision_tree() -> Self {
        BaseLearnerSpec::DecisionTree {
            max_depth: default_depth(),
            min_leaf: default_min_leaf(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BaseLearnerSpec::NaiveBayes { alpha } if !(alpha > 0.0 && alpha.is_finite()) => Err(
                Error::Config(format!("naive bayes smoothing must be positive, got {alpha}")),
            ),
            BaseLearnerSpec::DecisionTree { max_depth: 0, .. } => {
                Err(Error::Config("decision tree max_depth must be at least 1".into()))
            }
            BaseLearnerSpec::DecisionTree { min_leaf: 0, .. } => {
                Err(Error::Config("decision tree min_leaf must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn supports_confidence(&self) -> bool {
        !matches!(self, BaseLearnerSpec::DecisionTree { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            BaseLearnerSpec::NaiveBayes { .. } => "naive_bayes",
            BaseLearnerSpec::NearestNeighbor => "nearest_neighbor",
            BaseLearnerSpec::DecisionTree { .. } => "decision_tree",
        }
    }

    pub fn train(&self, data: &TrainingData<'_>) -> Result<Hypothesis> {
        self.validate()?;
        Ok(match *self {
            BaseLearnerSpec::NaiveBayes { alpha } => Hypothesis::new(NaiveBayes::fit(data, alpha)?),
            BaseLearnerSpec::NearestNeighbor => Hypothesis::new(NearestNeighbor::fit(data)?),
            BaseLearnerSpec::DecisionTree { max_depth, min_leaf } => Hypothesis::new(
                DecisionTree::fit(data, TreeParams { max_depth, min_leaf })?,
            ),
        })
    }
}

pub fn train_naive_bayes(data: &TrainingData<'_>, alpha: f64) -> Result<Hypothesis> {
    BaseLearnerSpec::NaiveBayes { alpha }.train(data)
}

pub fn train_nearest_neighbor(data: &TrainingData<'_>) -> Result<Hypothesis> {
    BaseLearnerSpec::NearestNeighbor.train(data)
}

pub fn train_decision_tree(data: &TrainingData<'_>, params: TreeParams) -> Result<Hypothesis> {
    BaseLearnerSpec::DecisionTree {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
    }
    .train(data)
}

/// Index of the maximum, lowest index on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
