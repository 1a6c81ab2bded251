//! Single-view active learners over the union of all views.
//!
//! Every baseline projects its inputs onto the [`UnionView`] once, at entry,
//! and from then on works with flat feature vectors only. They share the
//! episode/snapshot schedule of [`run_cotesting`](crate::cotesting::run_cotesting),
//! so learning curves line up point by point.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::cotesting::{
    contention_from_votes, ExamplePool, LabeledExample, MultiViewClassifier, QueryRecord, Schedule,
    Snapshot,
};
use crate::data::{FeatureId, FeatureVector, LabelId, ViewSpec};
use crate::error::{Error, Result};
use crate::learners::{
    bagged_committee, sample_nb_committee, BaseLearnerSpec, Hypothesis, Prediction, Sample,
    TrainingData,
};
use crate::pool::{Labeled, Oracle, Pool, Unlabeled};
use crate::rng::{rng_from_seed, Rng};

/// The single view holding every feature of every view.
#[derive(Debug, Clone)]
pub struct UnionView {
    vocabulary: Vec<FeatureId>,
}

impl UnionView {
    pub fn new(spec: &ViewSpec) -> Self {
        UnionView {
            vocabulary: spec.universe(),
        }
    }

    pub fn vocabulary(&self) -> &[FeatureId] {
        &self.vocabulary
    }

    pub fn project(&self, views: &[FeatureVector]) -> FeatureVector {
        FeatureVector::concat(views)
    }
}

/// A union-view hypothesis applied to multi-view descriptions.
#[derive(Debug, Clone)]
pub struct UnionHypothesis(pub Hypothesis);

impl MultiViewClassifier for UnionHypothesis {
    fn classify(&self, views: &[FeatureVector]) -> Result<Prediction> {
        Ok(self.0.predict(&FeatureVector::concat(views)))
    }
}

/// Which single-view sampler to run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sampler", rename_all = "snake_case")]
pub enum Baseline {
    Random,
    Uncertainty,
    QueryByBagging {
        #[serde(default = "default_bagging_size")]
        committee: usize,
    },
    QueryByCommitteeNb {
        #[serde(default = "default_qbc_size")]
        committee: usize,
    },
    /// Present so configs can name it; rejected when run.
    QueryByBoosting,
}

fn default_bagging_size() -> usize {
    5
}

fn default_qbc_size() -> usize {
    2
}

#[derive(Debug, Clone)]
pub struct BaselineRun {
    pub hypothesis: Hypothesis,
    pub log: Vec<QueryRecord>,
    /// Episode 0 followed by one entry per episode.
    pub snapshots: Vec<Snapshot>,
    /// Episodes where the committee showed no disagreement at all.
    pub fallback_episodes: Vec<usize>,
    pub exhausted: bool,
}

/// Runs `baseline` with `learner` on the union view.
#[allow(clippy::too_many_arguments)]
pub fn run_baseline(
    baseline: Baseline,
    spec: &ViewSpec,
    n_classes: usize,
    learner: &BaseLearnerSpec,
    l0: Vec<LabeledExample<'_>>,
    u0: ExamplePool<'_>,
    oracle: &mut dyn Oracle<LabelId>,
    schedule: Schedule,
    seed: u64,
) -> Result<BaselineRun> {
    let union = UnionView::new(spec);
    match baseline {
        Baseline::Random => random_sampling(&union, n_classes, learner, l0, u0, oracle, schedule, seed),
        Baseline::Uncertainty => {
            uncertainty_sampling(&union, n_classes, learner, l0, u0, oracle, schedule, seed)
        }
        Baseline::QueryByBagging { committee } => query_by_bagging(
            &union, n_classes, learner, committee, l0, u0, oracle, schedule, seed,
        ),
        Baseline::QueryByCommitteeNb { committee } => {
            let alpha = match *learner {
                BaseLearnerSpec::NaiveBayes { alpha } => alpha,
                _ => {
                    return Err(Error::Config(
                        "query-by-committee samples Naive Bayes parameters and needs the naive_bayes learner".into(),
                    ))
                }
            };
            query_by_committee_nb(&union, n_classes, alpha, committee, l0, u0, oracle, schedule, seed)
        }
        Baseline::QueryByBoosting => Err(Error::Config(
            "query-by-boosting is not implemented".into(),
        )),
    }
}

type Flat = Labeled<FeatureVector, LabelId>;

fn flatten(
    union: &UnionView,
    l0: Vec<LabeledExample<'_>>,
    u0: ExamplePool<'_>,
) -> (Vec<Flat>, Pool<FeatureVector>) {
    let l = l0
        .into_iter()
        .map(|e| Labeled {
            id: e.id,
            desc: union.project(e.desc),
            label: e.label,
        })
        .collect();
    let u = Pool::new(
        u0.items()
            .iter()
            .map(|e| Unlabeled {
                id: e.id,
                desc: union.project(e.desc),
            })
            .collect(),
    );
    (l, u)
}

fn training<'a>(l: &'a [Flat], n_classes: usize, vocab: &'a [FeatureId]) -> TrainingData<'a> {
    TrainingData::new(
        l.iter().map(|e| Sample { x: &e.desc, y: e.label }).collect(),
        n_classes,
        vocab,
    )
}

/// Chooses up to `batch` pool positions; `true` marks a fallback pick.
type Selector<'s> =
    dyn FnMut(&Hypothesis, &[Flat], &Pool<FeatureVector>, usize, &mut Rng) -> Result<Vec<(usize, bool)>> + 's;

#[allow(clippy::too_many_arguments)]
fn active_loop(
    union: &UnionView,
    n_classes: usize,
    learner: &BaseLearnerSpec,
    l0: Vec<LabeledExample<'_>>,
    u0: ExamplePool<'_>,
    oracle: &mut dyn Oracle<LabelId>,
    schedule: Schedule,
    seed: u64,
    select: &mut Selector<'_>,
) -> Result<BaselineRun> {
    learner.validate()?;
    if schedule.batch == 0 {
        return Err(Error::Config("queries per episode must be at least 1".into()));
    }
    let (mut labeled, mut pool) = flatten(union, l0, u0);
    let mut rng = rng_from_seed(seed);
    let vocab = union.vocabulary();
    let mut log = Vec::new();
    let mut fallback_episodes = Vec::new();
    let mut exhausted = false;

    let mut h = learner.train(&training(&labeled, n_classes, vocab))?;
    let mut snapshots = vec![Snapshot {
        episode: 0,
        labeled: labeled.len(),
        model: Arc::new(UnionHypothesis(h.clone())),
    }];
    for episode in 1..=schedule.episodes {
        if pool.is_empty() {
            exhausted = true;
            break;
        }
        let chosen = select(&h, &labeled, &pool, schedule.batch.min(pool.len()), &mut rng)?;
        if chosen.iter().any(|c| c.1) {
            fallback_episodes.push(episode);
        }
        let mut positions: Vec<usize> = chosen.iter().map(|c| c.0).collect();
        positions.sort_unstable_by(|a, b| b.cmp(a));
        let mut taken: Vec<(usize, Unlabeled<FeatureVector>)> =
            positions.into_iter().map(|p| (p, pool.take(p))).collect();
        for &(pos, fallback) in &chosen {
            let i = taken.iter().position(|t| t.0 == pos).expect("taken");
            let (_, item) = taken.swap_remove(i);
            let label = oracle.reveal(item.id)?;
            log.push(QueryRecord {
                id: item.id,
                label,
                episode,
                predictions: vec![h.predict(&item.desc)],
                weak_prediction: None,
                fallback,
            });
            labeled.push(Labeled {
                id: item.id,
                desc: item.desc,
                label,
            });
        }
        h = learner.train(&training(&labeled, n_classes, vocab))?;
        snapshots.push(Snapshot {
            episode,
            labeled: labeled.len(),
            model: Arc::new(UnionHypothesis(h.clone())),
        });
    }
    Ok(BaselineRun {
        hypothesis: h,
        log,
        snapshots,
        fallback_episodes,
        exhausted,
    })
}

fn random_picks(pool_len: usize, b: usize, rng: &mut Rng) -> Vec<usize> {
    let all: Vec<usize> = (0..pool_len).collect();
    all.choose_multiple(rng, b).copied().collect()
}

/// Queries uniformly random pool members.
#[allow(clippy::too_many_arguments)]
pub fn random_sampling(
    union: &UnionView,
    n_classes: usize,
    learner: &BaseLearnerSpec,
    l0: Vec<LabeledExample<'_>>,
    u0: ExamplePool<'_>,
    oracle: &mut dyn Oracle<LabelId>,
    schedule: Schedule,
    seed: u64,
) -> Result<BaselineRun> {
    active_loop(union, n_classes, learner, l0, u0, oracle, schedule, seed, &mut |_, _, pool, b, rng| {
        Ok(random_picks(pool.len(), b, rng).into_iter().map(|p| (p, false)).collect())
    })
}

/// Pool positions sorted by ascending score, stable.
fn lowest_first(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    order
}

/// Queries the least confident predictions of the current hypothesis.
#[allow(clippy::too_many_arguments)]
pub fn uncertainty_sampling(
    union: &UnionView,
    n_classes: usize,
    learner: &BaseLearnerSpec,
    l0: Vec<LabeledExample<'_>>,
    u0: ExamplePool<'_>,
    oracle: &mut dyn Oracle<LabelId>,
    schedule: Schedule,
    seed: u64,
) -> Result<BaselineRun> {
    if !learner.supports_confidence() {
        return Err(Error::Contract(format!(
            "uncertainty sampling needs confidences, but {} provides none",
            learner.name()
        )));
    }
    active_loop(union, n_classes, learner, l0, u0, oracle, schedule, seed, &mut |h, _, pool, b, _| {
        let confs = pool
            .items()
            .iter()
            .map(|u| {
                h.predict(&u.desc)
                    .confidence()
                    .ok_or_else(|| Error::Contract("hypothesis returned no confidence".into()))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(uncertainty_order(&confs).into_iter().take(b).map(|p| (p, false)).collect())
    })
}

/// Pool positions by ascending confidence; ties by lowest position.
pub fn uncertainty_order(confidences: &[f64]) -> Vec<usize> {
    lowest_first(confidences)
}

/// Vote entropy of committee predictions, in nats.
pub fn vote_entropy<T: PartialEq>(votes: &[T]) -> f64 {
    let mut counts: Vec<(&T, usize)> = Vec::new();
    for v in votes {
        match counts.iter_mut().find(|c| c.0 == v) {
            Some(c) => c.1 += 1,
            None => counts.push((v, 1)),
        }
    }
    let n = votes.len() as f64;
    counts
        .iter()
        .map(|&(_, c)| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Pool positions by descending vote entropy, ties by lowest position, plus
/// whether any member showed disagreement.
pub fn bagging_order(committee_votes: &[Vec<LabelId>]) -> (Vec<usize>, bool) {
    let entropy: Vec<f64> = committee_votes.iter().map(|v| -vote_entropy(v)).collect();
    let any = entropy.iter().any(|&e| e < 0.0);
    (lowest_first(&entropy), any)
}

/// Queries the pool members a bagged committee disagrees on most.
#[allow(clippy::too_many_arguments)]
pub fn query_by_bagging(
    union: &UnionView,
    n_classes: usize,
    learner: &BaseLearnerSpec,
    m: usize,
    l0: Vec<LabeledExample<'_>>,
    u0: ExamplePool<'_>,
    oracle: &mut dyn Oracle<LabelId>,
    schedule: Schedule,
    seed: u64,
) -> Result<BaselineRun> {
    if m < 2 {
        return Err(Error::Config(format!("committee size must be at least 2, got {m}")));
    }
    let vocab = union.vocabulary();
    active_loop(union, n_classes, learner, l0, u0, oracle, schedule, seed, &mut |_, l, pool, b, rng| {
        let committee = bagged_committee(learner, &training(l, n_classes, vocab), m, rng)?;
        let votes: Vec<Vec<LabelId>> = pool
            .items()
            .iter()
            .map(|u| committee.iter().map(|h| h.predict(&u.desc).label).collect())
            .collect();
        let (order, any) = bagging_order(&votes);
        Ok(order.into_iter().take(b).map(|p| (p, !any)).collect())
    })
}

/// Queries random members of the disagreement set of a committee sampled from
/// the Naive Bayes parameter posterior.
#[allow(clippy::too_many_arguments)]
pub fn query_by_committee_nb(
    union: &UnionView,
    n_classes: usize,
    alpha: f64,
    m: usize,
    l0: Vec<LabeledExample<'_>>,
    u0: ExamplePool<'_>,
    oracle: &mut dyn Oracle<LabelId>,
    schedule: Schedule,
    seed: u64,
) -> Result<BaselineRun> {
    if m < 2 {
        return Err(Error::Config(format!("committee size must be at least 2, got {m}")));
    }
    let vocab = union.vocabulary();
    let learner = BaseLearnerSpec::NaiveBayes { alpha };
    active_loop(union, n_classes, &learner, l0, u0, oracle, schedule, seed, &mut |_, l, pool, b, rng| {
        let committee = sample_nb_committee(&training(l, n_classes, vocab), alpha, m, rng)?;
        Ok(committee_picks(&committee, pool, b, rng))
    })
}

pub(crate) fn committee_picks(
    committee: &[Hypothesis],
    pool: &Pool<FeatureVector>,
    b: usize,
    rng: &mut Rng,
) -> Vec<(usize, bool)> {
    let votes: Vec<Vec<LabelId>> = pool
        .items()
        .iter()
        .map(|u| committee.iter().map(|h| h.predict(&u.desc).label).collect())
        .collect();
    let disagreement = contention_from_votes(&votes);
    let mut picks: Vec<(usize, bool)> = disagreement
        .members()
        .choose_multiple(rng, b.min(disagreement.len()))
        .map(|&p| (p, false))
        .collect();
    crate::cotesting::fill_batch(&mut picks, pool.len(), b, rng);
    picks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Strength, View};
    use crate::learners::Classifier;
    use crate::pool::SimulatedOracle;

    fn spec() -> ViewSpec {
        ViewSpec::new(
            vec![
                View { id: 1, strength: Strength::Strong, features: vec![0, 1] },
                View { id: 2, strength: Strength::Strong, features: vec![2, 3] },
            ],
            Some(4),
        )
        .unwrap()
    }

    fn toy(n: usize) -> Vec<(Vec<FeatureVector>, LabelId)> {
        (0..n)
            .map(|i| {
                let y = (i % 2) as u32;
                let v1 = FeatureVector::from_pairs([(y, 1.0 + (i % 3) as f64)]);
                let v2 = FeatureVector::from_pairs([(2 + y, 1.0), (3 - y, (i % 2) as f64)]);
                (vec![v1, v2], LabelId(y))
            })
            .collect()
    }

    fn setup(
        data: &[(Vec<FeatureVector>, LabelId)],
        n0: usize,
    ) -> (Vec<LabeledExample<'_>>, ExamplePool<'_>, SimulatedOracle<LabelId>) {
        let all: Vec<LabeledExample> = data
            .iter()
            .enumerate()
            .map(|(i, (d, y))| Labeled { id: i, desc: d.as_slice(), label: *y })
            .collect();
        let oracle = SimulatedOracle::from_labeled(&all);
        let u0 = Pool::new(all[n0..].iter().map(|e| Unlabeled { id: e.id, desc: e.desc }).collect());
        (all[..n0].to_vec(), u0, oracle)
    }

    fn run(b: Baseline, learner: BaseLearnerSpec, n: usize, sched: Schedule, seed: u64) -> Result<BaselineRun> {
        let data = toy(n);
        let (l0, u0, mut oracle) = setup(&data, 2);
        run_baseline(b, &spec(), 2, &learner, l0, u0, &mut oracle, sched, seed)
    }

    #[test]
    fn random_sampling_exhausts_pool_in_seeded_order() {
        let a = run(Baseline::Random, BaseLearnerSpec::naive_bayes(), 20, Schedule::queries(18), 4).unwrap();
        let b = run(Baseline::Random, BaseLearnerSpec::naive_bayes(), 20, Schedule::queries(18), 4).unwrap();
        let ids = |r: &BaselineRun| r.log.iter().map(|q| q.id).collect::<Vec<_>>();
        assert_eq!(ids(&a), ids(&b));
        let mut sorted = ids(&a);
        sorted.sort_unstable();
        assert_eq!(sorted, (2..20).collect::<Vec<_>>());
        assert_eq!(a.snapshots.first().unwrap().labeled, 2);
        assert_eq!(a.snapshots.last().unwrap().labeled, 20);
        assert!(!a.exhausted);
    }

    #[test]
    fn uncertainty_picks_least_confident() {
        assert_eq!(uncertainty_order(&[0.51, 0.99])[0], 0);
        assert_eq!(uncertainty_order(&[0.99, 0.51])[0], 1);
        assert_eq!(uncertainty_order(&[0.7, 0.7, 0.7])[0], 0);
        let r = run(Baseline::Uncertainty, BaseLearnerSpec::naive_bayes(), 30, Schedule::queries(5), 0).unwrap();
        assert_eq!(r.log.len(), 5);
    }

    #[test]
    fn uncertainty_rejects_tree_learner() {
        let e = run(Baseline::Uncertainty, BaseLearnerSpec::decision_tree(), 30, Schedule::queries(5), 0);
        assert!(matches!(e, Err(Error::Contract(_))));
    }

    #[test]
    fn vote_entropy_orders_disagreement() {
        let l = LabelId;
        let split = vec![l(0), l(0), l(0), l(1), l(1)];
        let unanimous = vec![l(0); 5];
        assert!(vote_entropy(&split) > vote_entropy(&unanimous));
        assert_eq!(vote_entropy(&unanimous), 0.0);
        let (order, any) = bagging_order(&[unanimous.clone(), split]);
        assert_eq!(order[0], 1);
        assert!(any);
        let (order, any) = bagging_order(&[unanimous.clone(), unanimous]);
        assert_eq!(order[0], 0);
        assert!(!any);
    }

    #[test]
    fn bagging_runs_with_tree_learner() {
        let r = run(
            Baseline::QueryByBagging { committee: 5 },
            BaseLearnerSpec::decision_tree(),
            30,
            Schedule { episodes: 3, batch: 2 },
            1,
        )
        .unwrap();
        assert_eq!(r.log.len(), 6);
        let mut ids: Vec<usize> = r.log.iter().map(|q| q.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 6);
    }

    #[derive(Debug)]
    struct Stub(Vec<u32>);

    impl Classifier for Stub {
        fn predict(&self, x: &FeatureVector) -> Prediction {
            Prediction::label_only(LabelId(self.0[x.get(0) as usize]))
        }
        fn confidence_supported(&self) -> bool {
            false
        }
    }

    #[test]
    fn committee_disagreement_drives_qbc_picks() {
        let pool = Pool::new(
            (0..4)
                .map(|i| Unlabeled { id: i, desc: FeatureVector::from_pairs([(0, i as f64)]) })
                .collect(),
        );
        let a = Hypothesis::new(Stub(vec![0, 0, 1, 1]));
        let b = Hypothesis::new(Stub(vec![0, 0, 0, 1]));
        let picks = committee_picks(&[a.clone(), b], &pool, 1, &mut rng_from_seed(0));
        assert_eq!(picks, vec![(2, false)]);
        let picks = committee_picks(&[a.clone(), a], &pool, 1, &mut rng_from_seed(0));
        assert!(picks[0].1, "identical committee must fall back");
    }

    #[test]
    fn qbc_needs_nb_and_boosting_is_rejected() {
        let e = run(
            Baseline::QueryByCommitteeNb { committee: 2 },
            BaseLearnerSpec::decision_tree(),
            20,
            Schedule::queries(2),
            0,
        );
        assert!(matches!(e, Err(Error::Config(_))));
        let r = run(
            Baseline::QueryByCommitteeNb { committee: 2 },
            BaseLearnerSpec::naive_bayes(),
            20,
            Schedule::queries(4),
            0,
        )
        .unwrap();
        assert_eq!(r.log.len(), 4);
        let e = run(Baseline::QueryByBoosting, BaseLearnerSpec::naive_bayes(), 20, Schedule::queries(2), 0);
        assert!(e.unwrap_err().to_string().contains("boosting"));
    }
}
