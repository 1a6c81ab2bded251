//! The Co-Testing loop.
//!
//! Each episode trains one hypothesis per view on the labeled set, finds the
//! contention points (pool members on which strong views disagree), queries
//! one (or a batch) of them and moves the answers into the labeled set. Weak
//! views never take part in contention; they only inform weak-view selection
//! and the weak tie-break output.

mod output;
mod select;

use std::sync::Arc;

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::data::{FeatureVector, LabelId, ViewSpec};
use crate::error::{Error, Result};
use crate::learners::{BaseLearnerSpec, Hypothesis, Prediction, Sample, TrainingData};
use crate::pool::{Labeled, Oracle, Pool};
use crate::rng::{rng_from_seed, Rng};

pub use output::{combine, winner, OutputHypothesis, OutputStrategy};
pub use select::{
    aggressive_score, contention_from_votes, select_batch, select_query, spread, ContentionSet,
    Evidence, QueryStrategy, Vote,
};

/// A labeled multi-view example as the learners see it.
pub type LabeledExample<'a> = Labeled<&'a [FeatureVector], LabelId>;
/// An unlabeled pool of multi-view descriptions.
pub type ExamplePool<'a> = Pool<&'a [FeatureVector]>;

/// Anything that labels a multi-view description.
pub trait MultiViewClassifier: Send + Sync {
    fn classify(&self, views: &[FeatureVector]) -> Result<Prediction>;
}

impl MultiViewClassifier for OutputHypothesis {
    fn classify(&self, views: &[FeatureVector]) -> Result<Prediction> {
        self.predict(views)
    }
}

/// Number of episodes and queries per episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub episodes: usize,
    pub batch: usize,
}

impl Schedule {
    /// One query per episode.
    pub fn queries(n: usize) -> Self {
        Schedule {
            episodes: n,
            batch: 1,
        }
    }

    pub fn total_queries(&self) -> usize {
        self.episodes * self.batch
    }
}

/// One answered query.
#[derive(Debug, Clone)]
pub struct QueryRecord {
    pub id: usize,
    pub label: LabelId,
    pub episode: usize,
    /// Strong-view predictions at selection time, before retraining.
    pub predictions: Vec<Prediction>,
    pub weak_prediction: Option<Prediction>,
    /// Taken from the whole pool because there were too few contention
    /// points (or, for single-view learners, a zero-disagreement episode).
    pub fallback: bool,
}

impl QueryRecord {
    /// True when at least one logged prediction was wrong.
    pub fn exposes_mistake(&self) -> bool {
        self.predictions.iter().any(|p| p.label != self.label)
    }
}

/// Per-view mistake counts over a query log.
pub fn mistakes(log: &[QueryRecord], views: usize) -> Vec<usize> {
    let mut m = vec![0; views];
    for r in log {
        for (i, p) in r.predictions.iter().enumerate().take(views) {
            if p.label != r.label {
                m[i] += 1;
            }
        }
    }
    m
}

#[derive(Clone)]
pub struct Snapshot {
    pub episode: usize,
    pub labeled: usize,
    pub model: Arc<dyn MultiViewClassifier>,
}

impl std::fmt::Debug for Snapshot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Snapshot")
            .field("episode", &self.episode)
            .field("labeled", &self.labeled)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoTestConfig {
    /// One learner per view, or a single learner used for every view.
    pub learners: Vec<BaseLearnerSpec>,
    pub query: QueryStrategy,
    pub output: OutputStrategy,
}

impl CoTestConfig {
    pub fn learner_for(&self, view: usize) -> &BaseLearnerSpec {
        if self.learners.len() == 1 {
            &self.learners[0]
        } else {
            &self.learners[view]
        }
    }

    /// Checks strategy requirements against the views and learners.
    pub fn validate(&self, spec: &ViewSpec) -> Result<()> {
        if self.learners.is_empty() || (self.learners.len() != 1 && self.learners.len() != spec.len()) {
            return Err(Error::Config(format!(
                "expected 1 or {} learner specs, got {}",
                spec.len(),
                self.learners.len()
            )));
        }
        for l in &self.learners {
            l.validate()?;
        }
        let strong = spec.strong_positions();
        if strong.len() < 2 {
            return Err(Error::Config(format!(
                "Co-Testing needs at least 2 strong views, found {}",
                strong.len()
            )));
        }
        let no_conf = strong
            .iter()
            .any(|&v| !self.learner_for(v).supports_confidence());
        if no_conf && (self.query.needs_confidence() || self.output.needs_confidence()) {
            return Err(Error::Contract(format!(
                "{:?} selection with {:?} output needs confidences, but a strong-view learner provides none",
                self.query, self.output
            )));
        }
        let weak = spec.weak_positions();
        if weak.is_empty() && (self.query.needs_weak_view() || self.output.needs_weak_view()) {
            return Err(Error::Config(format!(
                "{:?} / {:?} need a weak view",
                self.query, self.output
            )));
        }
        Ok(())
    }
}

/// Result of a Co-Testing run.
#[derive(Debug, Clone)]
pub struct CoTestRun {
    pub hypotheses: Vec<Hypothesis>,
    pub weak: Option<Hypothesis>,
    pub log: Vec<QueryRecord>,
    pub output: OutputHypothesis,
    /// Episode 0 (initial labeled set) followed by one entry per episode.
    pub snapshots: Vec<Snapshot>,
    /// Episodes with no contention point at all.
    pub fallback_episodes: Vec<usize>,
    /// The pool ran dry before the schedule finished.
    pub exhausted: bool,
}

struct Trained {
    strong: Vec<Hypothesis>,
    weak: Option<Hypothesis>,
}

fn train_views(
    spec: &ViewSpec,
    n_classes: usize,
    config: &CoTestConfig,
    labeled: &[LabeledExample<'_>],
) -> Result<Trained> {
    let train = |v: usize| -> Result<Hypothesis> {
        let data = TrainingData::new(
            labeled
                .iter()
                .map(|e| Sample {
                    x: &e.desc[v],
                    y: e.label,
                })
                .collect(),
            n_classes,
            &spec.views()[v].features,
        );
        config
            .learner_for(v)
            .train(&data)
            .map_err(|e| e.context(format!("training view {}", spec.views()[v].id)))
    };
    let strong = spec
        .strong_positions()
        .into_iter()
        .map(train)
        .collect::<Result<Vec<_>>>()?;
    let weak = match spec.weak_positions().first() {
        Some(&w) => Some(train(w)?),
        None => None,
    };
    Ok(Trained { strong, weak })
}

fn output_of(
    spec: &ViewSpec,
    config: &CoTestConfig,
    trained: &Trained,
    log: &[QueryRecord],
) -> OutputHypothesis {
    let strong_views = spec.strong_positions();
    OutputHypothesis {
        strategy: config.output,
        mistakes: mistakes(log, strong_views.len()),
        strong_views,
        strong: trained.strong.clone(),
        weak: trained
            .weak
            .clone()
            .map(|h| (spec.weak_positions()[0], h)),
    }
}

/// Strong-view predictions for every pool member, `[pool position][view]`.
pub fn pool_predictions(
    strong_views: &[usize],
    hyps: &[Hypothesis],
    pool: &ExamplePool<'_>,
) -> Vec<Vec<Prediction>> {
    pool.items()
        .iter()
        .map(|u| {
            strong_views
                .iter()
                .zip(hyps)
                .map(|(&v, h)| h.predict(&u.desc[v]))
                .collect()
        })
        .collect()
}

/// Contention points of `pool` under the given strong-view hypotheses.
pub fn contention_points(
    strong_views: &[usize],
    hyps: &[Hypothesis],
    pool: &ExamplePool<'_>,
) -> ContentionSet {
    let labels: Vec<Vec<LabelId>> = pool_predictions(strong_views, hyps, pool)
        .into_iter()
        .map(|row| row.into_iter().map(|p| p.label).collect())
        .collect();
    contention_from_votes(&labels)
}

/// Runs Co-Testing for `schedule` and returns the final state, the query log
/// and a snapshot after every episode.
#[allow(clippy::too_many_arguments)]
pub fn run_cotesting<'a>(
    spec: &ViewSpec,
    n_classes: usize,
    config: &CoTestConfig,
    l0: Vec<LabeledExample<'a>>,
    u0: ExamplePool<'a>,
    oracle: &mut dyn Oracle<LabelId>,
    schedule: Schedule,
    seed: u64,
) -> Result<CoTestRun> {
    config.validate(spec)?;
    if schedule.batch == 0 {
        return Err(Error::Config("queries per episode must be at least 1".into()));
    }
    let strong_views = spec.strong_positions();
    let mut rng = rng_from_seed(seed);
    let mut labeled = l0;
    let mut pool = u0;
    let mut log: Vec<QueryRecord> = Vec::new();
    let mut fallback_episodes = Vec::new();
    let mut exhausted = false;

    let mut trained = train_views(spec, n_classes, config, &labeled)?;
    let mut snapshots = vec![Snapshot {
        episode: 0,
        labeled: labeled.len(),
        model: Arc::new(output_of(spec, config, &trained, &log)),
    }];

    for episode in 1..=schedule.episodes {
        if pool.is_empty() {
            exhausted = true;
            break;
        }
        let preds = pool_predictions(&strong_views, &trained.strong, &pool);
        let weak_preds: Option<Vec<Prediction>> = trained.weak.as_ref().map(|h| {
            let w = spec.weak_positions()[0];
            pool.items().iter().map(|u| h.predict(&u.desc[w])).collect()
        });
        let cs = if config.query == QueryStrategy::Naive {
            // Labels only: naive selection never sees a confidence.
            let labels: Vec<Vec<LabelId>> = preds
                .iter()
                .map(|row| row.iter().map(|p| p.label).collect())
                .collect();
            contention_from_votes(&labels)
        } else {
            contention_from_votes(&preds)
        };

        let mut chosen: Vec<(usize, bool)> = Vec::new();
        if cs.is_empty() {
            fallback_episodes.push(episode);
        } else {
            let picks = match config.query {
                QueryStrategy::Naive => select_batch(config.query, &cs, Evidence::None, schedule.batch, &mut rng)?,
                QueryStrategy::Aggressive | QueryStrategy::Conservative => {
                    let table: Vec<Vec<Option<f64>>> = cs
                        .members()
                        .iter()
                        .map(|&p| preds[p].iter().map(|q| q.confidence()).collect())
                        .collect();
                    select_batch(config.query, &cs, Evidence::Confidences(&table), schedule.batch, &mut rng)?
                }
                QueryStrategy::WeakViewAggressive => {
                    let weak_preds = weak_preds.as_ref().expect("validated weak view");
                    let table: Vec<Vec<u32>> = cs
                        .members()
                        .iter()
                        .map(|&p| {
                            preds[p]
                                .iter()
                                .map(|q| u32::from(q.label != weak_preds[p].label))
                                .collect()
                        })
                        .collect();
                    let secondary: Vec<f64> = cs
                        .members()
                        .iter()
                        .map(|&p| weak_preds[p].confidence().unwrap_or(0.0))
                        .collect();
                    select_batch(
                        config.query,
                        &cs,
                        Evidence::RankedViolations(&table, &secondary),
                        schedule.batch,
                        &mut rng,
                    )?
                }
            };
            chosen.extend(picks.into_iter().map(|p| (p, false)));
        }
        fill_batch(&mut chosen, pool.len(), schedule.batch, &mut rng);

        // Remove from the highest position down so earlier positions stay valid.
        let mut order = chosen.clone();
        order.sort_by_key(|c| std::cmp::Reverse(c.0));
        let mut answered = Vec::with_capacity(order.len());
        for (pos, fallback) in order {
            let item = pool.take(pos);
            let label = oracle.reveal(item.id)?;
            answered.push((
                pos,
                QueryRecord {
                    id: item.id,
                    label,
                    episode,
                    predictions: preds[pos].clone(),
                    weak_prediction: weak_preds.as_ref().map(|w| w[pos]),
                    fallback,
                },
                Labeled {
                    id: item.id,
                    desc: item.desc,
                    label,
                },
            ));
        }
        // Log in selection order.
        for &(pos, _) in &chosen {
            let i = answered.iter().position(|a| a.0 == pos).expect("answered");
            let (_, record, example) = answered.swap_remove(i);
            log.push(record);
            labeled.push(example);
        }

        trained = train_views(spec, n_classes, config, &labeled)?;
        snapshots.push(Snapshot {
            episode,
            labeled: labeled.len(),
            model: Arc::new(output_of(spec, config, &trained, &log)),
        });
    }

    let output = output_of(spec, config, &trained, &log);
    Ok(CoTestRun {
        hypotheses: trained.strong,
        weak: trained.weak,
        log,
        output,
        snapshots,
        fallback_episodes,
        exhausted,
    })
}

/// Tops up `chosen` with random pool positions not already chosen.
pub(crate) fn fill_batch(chosen: &mut Vec<(usize, bool)>, pool_len: usize, batch: usize, rng: &mut Rng) {
    let want = batch.min(pool_len);
    if chosen.len() >= want {
        return;
    }
    let free: Vec<usize> = (0..pool_len)
        .filter(|p| !chosen.iter().any(|c| c.0 == *p))
        .collect();
    let extra: Vec<usize> = free
        .choose_multiple(rng, want - chosen.len())
        .copied()
        .collect();
    chosen.extend(extra.into_iter().map(|p| (p, true)));
}

/// Fraction of `test` on which `correct` holds.
pub fn evaluate_by<D, Y>(
    test: &[Labeled<D, Y>],
    mut correct: impl FnMut(&Labeled<D, Y>) -> Result<bool>,
) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let mut hits = 0usize;
    for t in test {
        if correct(t)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / test.len() as f64)
}

/// Accuracy of a multi-view classifier on a labeled test set.
pub fn evaluate(model: &dyn MultiViewClassifier, test: &[LabeledExample<'_>]) -> Result<f64> {
    evaluate_by(test, |t| Ok(model.classify(t.desc)?.label == t.label))
}
