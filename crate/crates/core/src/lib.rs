//! Multi-view active learning with the Co-Testing family of algorithms.
//!
//! The crate is organized by subsystem:
//!
//! * [`data`], [`pool`], [`folds`]: examples described in several views,
//!   labeled sets, unlabeled pools, the simulated oracle and cross-validation.
//! * [`learners`]: single-view base learners (multinomial Naive Bayes,
//!   1-nearest-neighbor, an information-gain decision tree) and committees.
//! * [`cotesting`]: contention points, query selection, output hypotheses and
//!   the multi-view active learning loop.
//! * [`baselines`]: single-view active learners over the union of all views.
//! * [`wrapper`]: landmark-rule wrapper induction with forward, backward and
//!   content views.
//! * [`harness`]: experiment configs, learning curves, paired t-tests and
//!   synthetic task generators.

pub mod baselines;
pub mod cotesting;
pub mod data;
pub mod error;
pub mod folds;
pub mod harness;
pub mod learners;
pub mod pool;
pub mod rng;
pub mod wrapper;

pub use data::{
    load_dataset, project, Dataset, FeatureId, FeatureVector, Label, LabelId, MultiViewExample,
    Strength, View, ViewSpec,
};
pub use error::{Error, Result};
pub use folds::{kfold, split_initial, stratified_kfold, Fold};
pub use learners::{BaseLearnerSpec, Hypothesis, Prediction};
pub use pool::{Labeled, Oracle, Pool, SimulatedOracle, Unlabeled};
