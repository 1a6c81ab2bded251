//! Output hypotheses: how per-view predictions become one answer.

use serde::{Deserialize, Serialize};

use crate::data::{FeatureVector, LabelId};
use crate::error::{Error, Result};
use crate::learners::{Hypothesis, Prediction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputStrategy {
    /// Sum of confidences per label.
    WeightedVote,
    /// Number of views per label; ties go to the label of the lowest view.
    MajorityVote,
    /// The view with the fewest mistakes on the queries answers alone.
    WinnerTakesAll,
    /// Strong views decide when they agree; otherwise the weak view picks
    /// among their answers.
    WeakTiebreakVote,
}

impl OutputStrategy {
    pub fn needs_confidence(self) -> bool {
        self == OutputStrategy::WeightedVote
    }

    pub fn needs_weak_view(self) -> bool {
        self == OutputStrategy::WeakTiebreakVote
    }
}

/// Combines strong-view predictions into one.
///
/// `mistakes[i]` is the number of logged queries strong view `i` got wrong;
/// it is required by winner-takes-all only. `weak` is required by the weak
/// tie-break vote only.
pub fn combine(
    strategy: OutputStrategy,
    strong: &[Prediction],
    weak: Option<&Prediction>,
    mistakes: Option<&[usize]>,
) -> Result<Prediction> {
    if strong.is_empty() {
        return Err(Error::Contract("no strong-view predictions to combine".into()));
    }
    let with_conf = strong.iter().all(|p| p.confidence().is_some());
    match strategy {
        OutputStrategy::WeightedVote => {
            if !with_conf {
                return Err(Error::Contract("weighted vote needs per-view confidences".into()));
            }
            let weights: Vec<f64> = strong.iter().map(|p| p.confidence().unwrap()).collect();
            Ok(tally(strong, &weights, true))
        }
        OutputStrategy::MajorityVote => Ok(tally(strong, &vec![1.0; strong.len()], with_conf)),
        OutputStrategy::WinnerTakesAll => {
            let mistakes = mistakes.ok_or_else(|| {
                Error::Contract("winner-takes-all needs the query log".into())
            })?;
            if mistakes.len() != strong.len() {
                return Err(Error::Contract(format!(
                    "{} mistake counts for {} views",
                    mistakes.len(),
                    strong.len()
                )));
            }
            Ok(strong[winner(mistakes)])
        }
        OutputStrategy::WeakTiebreakVote => {
            let weak = weak.ok_or_else(|| {
                Error::Contract("weak tie-break vote needs a weak-view hypothesis".into())
            })?;
            if strong.iter().all(|p| p.label == strong[0].label) {
                return Ok(strong[0]);
            }
            Ok(strong
                .iter()
                .find(|p| p.label == weak.label)
                .copied()
                .unwrap_or(strong[0]))
        }
    }
}

/// Index of the fewest mistakes, lowest index on ties.
pub fn winner(mistakes: &[usize]) -> usize {
    let mut best = 0;
    for (i, &m) in mistakes.iter().enumerate() {
        if m < mistakes[best] {
            best = i;
        }
    }
    best
}

/// Weighted tally. Ties between labels go to the label first predicted in
/// view order. The returned confidence is `(best - runner_up) / total`.
fn tally(strong: &[Prediction], weights: &[f64], emit_confidence: bool) -> Prediction {
    // Labels in first-appearance (view) order.
    let mut labels: Vec<LabelId> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    for (p, &w) in strong.iter().zip(weights) {
        match labels.iter().position(|&l| l == p.label) {
            Some(i) => sums[i] += w,
            None => {
                labels.push(p.label);
                sums.push(w);
            }
        }
    }
    let mut best = 0;
    for i in 1..sums.len() {
        if sums[i] > sums[best] {
            best = i;
        }
    }
    let confidence = emit_confidence.then(|| {
        let total: f64 = sums.iter().sum();
        let runner_up = sums
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != best)
            .map(|(_, &s)| s)
            .fold(0.0, f64::max);
        if total > 0.0 {
            ((sums[best] - runner_up) / total).clamp(0.0, 1.0)
        } else {
            0.0
        }
    });
    Prediction::new(labels[best], confidence)
}

/// The final (or snapshot) classifier produced by a Co-Testing run.
#[derive(Debug, Clone)]
pub struct OutputHypothesis {
    pub strategy: OutputStrategy,
    /// View positions of `strong`, aligned.
    pub strong_views: Vec<usize>,
    pub strong: Vec<Hypothesis>,
    pub weak: Option<(usize, Hypothesis)>,
    pub mistakes: Vec<usize>,
}

impl OutputHypothesis {
    pub fn predict(&self, views: &[FeatureVector]) -> Result<Prediction> {
        let strong: Vec<Prediction> = self
            .strong_views
            .iter()
            .zip(&self.strong)
            .map(|(&v, h)| h.predict(&views[v]))
            .collect();
        let weak = self.weak.as_ref().map(|(v, h)| h.predict(&views[*v]));
        combine(self.strategy, &strong, weak.as_ref(), Some(&self.mistakes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(l: u32, c: f64) -> Prediction {
        Prediction::new(LabelId(l), Some(c))
    }

    #[test]
    fn weighted_vote_sums_confidences() {
        let out = combine(OutputStrategy::WeightedVote, &[p(0, 0.9), p(1, 0.6)], None, None).unwrap();
        assert_eq!(out.label, LabelId(0));
        assert!((out.confidence().unwrap() - 0.3 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn majority_vote_counts() {
        let preds = [
            Prediction::label_only(LabelId(0)),
            Prediction::label_only(LabelId(0)),
            Prediction::label_only(LabelId(1)),
        ];
        let out = combine(OutputStrategy::MajorityVote, &preds, None, None).unwrap();
        assert_eq!(out.label, LabelId(0));
        assert_eq!(out.confidence(), None);
        // two-view tie goes to the first view's label
        let tie = [Prediction::label_only(LabelId(1)), Prediction::label_only(LabelId(0))];
        assert_eq!(combine(OutputStrategy::MajorityVote, &tie, None, None).unwrap().label, LabelId(1));
    }

    #[test]
    fn winner_takes_all_uses_fewest_mistakes() {
        let preds = [p(0, 0.2), p(1, 0.99)];
        let out = combine(OutputStrategy::WinnerTakesAll, &preds, None, Some(&[2, 5])).unwrap();
        assert_eq!(out, preds[0]);
        let out = combine(OutputStrategy::WinnerTakesAll, &preds, None, Some(&[3, 3])).unwrap();
        assert_eq!(out, preds[0]);
        assert!(combine(OutputStrategy::WinnerTakesAll, &preds, None, None).is_err());
    }

    #[test]
    fn weak_view_breaks_ties() {
        let preds = [p(0, 0.9), p(1, 0.6)];
        let weak = p(1, 0.7);
        let out = combine(OutputStrategy::WeakTiebreakVote, &preds, Some(&weak), None).unwrap();
        assert_eq!(out.label, LabelId(1));
        let agree = [p(0, 0.9), p(0, 0.6)];
        let out = combine(OutputStrategy::WeakTiebreakVote, &agree, Some(&weak), None).unwrap();
        assert_eq!(out.label, LabelId(0));
        assert!(combine(OutputStrategy::WeakTiebreakVote, &preds, None, None).is_err());
    }

    #[test]
    fn weighted_vote_rejects_missing_confidences() {
        let preds = [Prediction::label_only(LabelId(0)), p(1, 0.5)];
        assert!(matches!(
            combine(OutputStrategy::WeightedVote, &preds, None, None),
            Err(Error::Contract(_))
        ));
    }
}
