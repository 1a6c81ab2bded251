use std::collections::HashMap;

use crate::data::{FeatureId, FeatureVector, LabelId};
use crate::error::{Error, Result};

use super::{argmax, Classifier, Prediction, TrainingData};

/// Multinomial Naive Bayes over term counts, evaluated in log space.
///
/// `P(w|c) = (n_wc + alpha) / (n_c + alpha * V)` with `V` the vocabulary size
/// and `P(c) = (m_c + alpha) / (m + alpha * N)`. Confidence is the normalized
/// posterior of the predicted class.
#[derive(Debug, Clone)]
pub struct NaiveBayes {
    log_prior: Vec<f64>,
    /// Log probability of a vocabulary word never seen with the class.
    log_unseen: Vec<f64>,
    log_prob: Vec<HashMap<FeatureId, f64>>,
}

impl NaiveBayes {
    pub fn fit(data: &TrainingData<'_>, alpha: f64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let n = data.n_classes;
        let vocab = data.vocabulary.len().max(1) as f64;
        let (counts, totals) = word_counts(data);
        let class_counts = data.class_counts();
        let m = data.len() as f64;

        let log_prior = class_counts
            .iter()
            .map(|&mc| ((mc as f64 + alpha) / (m + alpha * n as f64)).ln())
            .collect();
        let mut log_unseen = Vec::with_capacity(n);
        let mut log_prob = Vec::with_capacity(n);
        for c in 0..n {
            let denom = totals[c] + alpha * vocab;
            log_unseen.push((alpha / denom).ln());
            log_prob.push(
                counts[c]
                    .iter()
                    .map(|(&f, &cnt)| (f, ((cnt + alpha) / denom).ln()))
                    .collect(),
            );
        }
        Ok(NaiveBayes {
            log_prior,
            log_unseen,
            log_prob,
        })
    }

    /// Builds a model from explicit per-class word distributions over
    /// `vocabulary` (each row sums to 1) and explicit log priors.
    pub(crate) fn from_distributions(
        log_prior: Vec<f64>,
        vocabulary: &[FeatureId],
        rows: Vec<Vec<f64>>,
        log_unseen: Vec<f64>,
    ) -> Self {
        let log_prob = rows
            .into_iter()
            .map(|row| {
                vocabulary
                    .iter()
                    .zip(row)
                    .map(|(&f, p)| (f, p.ln()))
                    .collect()
            })
            .collect();
        NaiveBayes {
            log_prior,
            log_unseen,
            log_prob,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.log_prior.len()
    }

    /// `P(w | c)` for a vocabulary word.
    pub fn word_probability(&self, c: LabelId, f: FeatureId) -> f64 {
        self.log_word(c.index(), f).exp()
    }

    pub fn prior(&self, c: LabelId) -> f64 {
        self.log_prior[c.index()].exp()
    }

    fn log_word(&self, c: usize, f: FeatureId) -> f64 {
        self.log_prob[c].get(&f).copied().unwrap_or(self.log_unseen[c])
    }

    /// Unnormalized log joint `log P(c) + sum_w x_w log P(w|c)`.
    pub fn log_joint(&self, x: &FeatureVector) -> Vec<f64> {
        (0..self.n_classes())
            .map(|c| {
                self.log_prior[c]
                    + x.iter().map(|(f, v)| v * self.log_word(c, f)).sum::<f64>()
            })
            .collect()
    }

    /// Normalized class posteriors.
    pub fn posteriors(&self, x: &FeatureVector) -> Vec<f64> {
        let lj = self.log_joint(x);
        let max = lj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = lj.iter().map(|&l| (l - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / z).collect()
    }
}

impl Classifier for NaiveBayes {
    fn predict(&self, x: &FeatureVector) -> Prediction {
        let post = self.posteriors(x);
        let best = argmax(&post);
        Prediction::new(LabelId(best as u32), Some(post[best].clamp(0.0, 1.0)))
    }

    fn confidence_supported(&self) -> bool {
        true
    }
}

/// Per-class word counts and per-class total counts.
pub(crate) fn word_counts(data: &TrainingData<'_>) -> (Vec<HashMap<FeatureId, f64>>, Vec<f64>) {
    let mut counts: Vec<HashMap<FeatureId, f64>> = vec![HashMap::new(); data.n_classes];
    let mut totals = vec![0.0; data.n_classes];
    for s in &data.samples {
        let c = s.y.index();
        for (f, v) in s.x.iter() {
            *counts[c].entry(f).or_insert(0.0) += v;
            totals[c] += v;
        }
    }
    (counts, totals)
}
