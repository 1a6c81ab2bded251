//! Committee construction: bootstrap bagging and Naive Bayes parameter sampling.

use rand::Rng as _;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::rng::Rng;

use super::naive_bayes::word_counts;
use super::{BaseLearnerSpec, Hypothesis, NaiveBayes, TrainingData};

pub const MAX_BOOTSTRAP_ATTEMPTS: usize = 100;

/// Draws `classes.len()` indices with replacement, redrawing until every class
/// present in `classes` appears in the sample.
pub fn bootstrap_indices(classes: &[usize], rng: &mut Rng) -> Result<Vec<usize>> {
    let n = classes.len();
    if n == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    let mut present: Vec<usize> = classes.to_vec();
    present.sort_unstable();
    present.dedup();
    for _ in 0..MAX_BOOTSTRAP_ATTEMPTS {
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut seen: Vec<usize> = idx.iter().map(|&i| classes[i]).collect();
        seen.sort_unstable();
        seen.dedup();
        if seen == present {
            return Ok(idx);
        }
    }
    Err(Error::Bootstrap(MAX_BOOTSTRAP_ATTEMPTS))
}

/// Trains `m` hypotheses on class-complete bootstrap resamples.
pub fn bagged_committee(
    learner: &BaseLearnerSpec,
    data: &TrainingData<'_>,
    m: usize,
    rng: &mut Rng,
) -> Result<Vec<Hypothesis>> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("committee size must be at least 2, got {m}")));
    }
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let classes: Vec<usize> = data.samples.iter().map(|s| s.y.index()).collect();
    (0..m)
        .map(|_| {
            let idx = bootstrap_indices(&classes, rng)?;
            learner.train(&data.subset(&idx))
        })
        .collect()
}

/// Samples `m` Naive Bayes hypotheses: for each class, word weights are drawn
/// from `Gamma(count + alpha, 1)` over the vocabulary and normalized, which is
/// a draw from the Dirichlet posterior of the class's word distribution.
pub fn sample_nb_committee(
    data: &TrainingData<'_>,
    alpha: f64,
    m: usize,
    rng: &mut Rng,
) -> Result<Vec<Hypothesis>> {
    Ok(sample_nb_models(data, alpha, m, rng)?
        .into_iter()
        .map(Hypothesis::new)
        .collect())
}

pub(crate) fn sample_nb_models(
    data: &TrainingData<'_>,
    alpha: f64,
    m: usize,
    rng: &mut Rng,
) -> Result<Vec<NaiveBayes>> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("committee size must be at least 2, got {m}")));
    }
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!("smoothing must be positive, got {alpha}")));
    }
    // Validates the training set the same way deterministic NB does.
    let point = NaiveBayes::fit(data, alpha)?;
    let (counts, totals) = word_counts(data);
    let n = data.n_classes;
    let vocab = data.vocabulary;
    let log_prior: Vec<f64> = (0..n)
        .map(|c| point.prior(crate::data::LabelId(c as u32)).ln())
        .collect();
    let mut committee = Vec::with_capacity(m);
    for _ in 0..m {
        let mut rows = Vec::with_capacity(n);
        let mut log_unseen = Vec::with_capacity(n);
        for c in 0..n {
            let mut row: Vec<f64> = vocab
                .iter()
                .map(|f| {
                    let shape = counts[c].get(f).copied().unwrap_or(0.0) + alpha;
                    Gamma::new(shape, 1.0)
                        .expect("positive gamma shape")
                        .sample(rng)
                        .max(f64::MIN_POSITIVE)
                })
                .collect();
            let z: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= z);
            rows.push(row);
            log_unseen.push((alpha / (totals[c] + alpha * vocab.len().max(1) as f64)).ln());
        }
        committee.push(NaiveBayes::from_distributions(
            log_prior.clone(),
            vocab,
            rows,
            log_unseen,
        ));
    }
    Ok(committee)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureVector, LabelId};
    use crate::learners::Sample;
    use crate::rng::rng_from_seed;

    fn fv(pairs: &[(u32, f64)]) -> FeatureVector {
        FeatureVector::from_pairs(pairs.iter().copied())
    }

    #[test]
    fn committee_is_deterministic_per_seed() {
        let xs = [fv(&[(0, 2.0), (1, 1.0)]), fv(&[(1, 3.0), (2, 1.0)]), fv(&[(0, 1.0)])];
        let vocab = [0, 1, 2];
        let data = TrainingData::new(
            vec![
                Sample { x: &xs[0], y: LabelId(0) },
                Sample { x: &xs[1], y: LabelId(1) },
                Sample { x: &xs[2], y: LabelId(0) },
            ],
            2,
            &vocab,
        );
        let probes = [fv(&[(0, 1.0)]), fv(&[(1, 1.0), (2, 2.0)]), fv(&[(2, 1.0)])];
        let a = sample_nb_committee(&data, 1.0, 2, &mut rng_from_seed(5)).unwrap();
        let b = sample_nb_committee(&data, 1.0, 2, &mut rng_from_seed(5)).unwrap();
        assert_eq!(a.len(), 2);
        for (ha, hb) in a.iter().zip(&b) {
            for p in &probes {
                assert_eq!(ha.predict(p), hb.predict(p));
            }
        }
        assert!(sample_nb_committee(&data, 1.0, 1, &mut rng_from_seed(5)).is_err());
    }

    #[test]
    fn sampled_parameters_concentrate_at_large_counts() {
        // 10^5 counts per class: the Dirichlet draw is within a few tenths of a
        // percent of the smoothed maximum-likelihood estimate.
        let xs = [
            fv(&[(0, 50_000.0), (1, 30_000.0), (2, 20_000.0)]),
            fv(&[(0, 10_000.0), (1, 20_000.0), (2, 70_000.0)]),
        ];
        let vocab = [0, 1, 2];
        let data = TrainingData::new(
            vec![Sample { x: &xs[0], y: LabelId(0) }, Sample { x: &xs[1], y: LabelId(1) }],
            2,
            &vocab,
        );
        let ml = NaiveBayes::fit(&data, 1.0).unwrap();
        let sampled = sample_nb_models(&data, 1.0, 4, &mut rng_from_seed(1)).unwrap();
        for s in &sampled {
            for c in 0..2 {
                for &f in &vocab {
                    let (p, q) = (s.word_probability(LabelId(c), f), ml.word_probability(LabelId(c), f));
                    assert!((p - q).abs() / q < 0.05, "class {c} word {f}: {p} vs {q}");
                }
            }
        }
    }

    #[test]
    fn single_example_bootstrap_is_degenerate() {
        let x = fv(&[(0, 1.0)]);
        let vocab = [0];
        let data = TrainingData::new(vec![Sample { x: &x, y: LabelId(1) }], 2, &vocab);
        let c = bagged_committee(&BaseLearnerSpec::naive_bayes(), &data, 5, &mut rng_from_seed(0)).unwrap();
        assert_eq!(c.len(), 5);
        let probe = fv(&[(0, 3.0)]);
        for h in &c {
            assert_eq!(h.predict(&probe), c[0].predict(&probe));
        }
    }

    #[test]
    fn bootstrap_samples_keep_every_class() {
        let classes = vec![0, 0, 0, 0, 0, 0, 0, 1];
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            let idx = bootstrap_indices(&classes, &mut rng).unwrap();
            assert_eq!(idx.len(), 8);
            assert!(idx.iter().any(|&i| classes[i] == 1));
        }
    }

    #[test]
    fn hopeless_bootstrap_fails_after_max_attempts() {
        // 60 singleton classes among 120 examples: a draw covering all of
        // them is astronomically unlikely.
        let mut classes: Vec<usize> = (0..60).collect();
        classes.extend(std::iter::repeat_n(60, 60));
        assert!(matches!(
            bootstrap_indices(&classes, &mut rng_from_seed(0)),
            Err(Error::Bootstrap(MAX_BOOTSTRAP_ATTEMPTS))
        ));
    }
}
