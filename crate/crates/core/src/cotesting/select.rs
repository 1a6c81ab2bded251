//! Contention points and query selection.

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryStrategy {
    /// A random contention point.
    Naive,
    /// The contention point whose least confident view is most confident.
    Aggressive,
    /// The contention point with the smallest spread between the most and
    /// least confident views.
    Conservative,
    /// The contention point maximizing `min_i n_i`, where `n_i` counts the
    /// weak-view constraints violated by strong view `i`'s answer.
    WeakViewAggressive,
}

impl QueryStrategy {
    pub fn needs_confidence(self) -> bool {
        matches!(self, QueryStrategy::Aggressive | QueryStrategy::Conservative)
    }

    pub fn needs_weak_view(self) -> bool {
        self == QueryStrategy::WeakViewAggressive
    }
}

/// A per-view answer that can agree or disagree with another view's answer.
pub trait Vote {
    fn agrees(&self, other: &Self) -> bool;
}

impl Vote for crate::data::LabelId {
    fn agrees(&self, other: &Self) -> bool {
        self == other
    }
}

impl Vote for crate::learners::Prediction {
    fn agrees(&self, other: &Self) -> bool {
        self.label == other.label
    }
}

/// Pool positions (ascending) on which at least two strong views disagree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContentionSet {
    members: Vec<usize>,
}

impl ContentionSet {
    pub fn from_members(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        ContentionSet { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.members.binary_search(&pos).is_ok()
    }
}

/// `votes[p][i]` is strong view `i`'s answer on pool member `p`. Only strong
/// views may appear in the table.
pub fn contention_from_votes<V: Vote>(votes: &[Vec<V>]) -> ContentionSet {
    let members = votes
        .iter()
        .enumerate()
        .filter(|(_, row)| {
            row.iter()
                .enumerate()
                .any(|(i, a)| row[i + 1..].iter().any(|b| !a.agrees(b)))
        })
        .map(|(p, _)| p)
        .collect();
    ContentionSet { members }
}

/// Per-candidate information a strategy ranks contention points by. Row `j`
/// corresponds to the `j`-th member of the contention set.
#[derive(Debug, Clone, Copy)]
pub enum Evidence<'a> {
    None,
    Confidences(&'a [Vec<Option<f64>>]),
    Violations(&'a [Vec<u32>]),
    /// Violation counts plus a secondary score (larger is preferred) used to
    /// rank candidates with equal `min` violations.
    RankedViolations(&'a [Vec<u32>], &'a [f64]),
}

/// Selects one contention point; returns its pool position.
pub fn select_query(
    strategy: QueryStrategy,
    cs: &ContentionSet,
    evidence: Evidence<'_>,
    rng: &mut Rng,
) -> Result<usize> {
    Ok(select_batch(strategy, cs, evidence, 1, rng)?[0])
}

/// Selects up to `b` distinct contention points, best first.
pub fn select_batch(
    strategy: QueryStrategy,
    cs: &ContentionSet,
    evidence: Evidence<'_>,
    b: usize,
    rng: &mut Rng,
) -> Result<Vec<usize>> {
    if cs.is_empty() {
        return Err(Error::NoContention);
    }
    let ranked: Vec<usize> = match strategy {
        QueryStrategy::Naive => {
            return Ok(cs
                .members
                .choose_multiple(rng, b.min(cs.len()))
                .copied()
                .collect());
        }
        QueryStrategy::Aggressive | QueryStrategy::Conservative => {
            let Evidence::Confidences(table) = evidence else {
                return Err(Error::Contract(format!(
                    "{strategy:?} selection needs per-view confidences"
                )));
            };
            check_rows(table.len(), cs)?;
            let mut scores = Vec::with_capacity(table.len());
            for row in table {
                let confs = row
                    .iter()
                    .map(|c| c.ok_or_else(|| Error::Contract(format!(
                        "{strategy:?} selection needs per-view confidences"
                    ))))
                    .collect::<Result<Vec<f64>>>()?;
                scores.push(if strategy == QueryStrategy::Aggressive {
                    aggressive_score(&confs)
                } else {
                    -spread(&confs)
                });
            }
            rank_desc(&scores)
        }
        QueryStrategy::WeakViewAggressive => {
            let (table, secondary) = match evidence {
                Evidence::Violations(t) => (t, None),
                Evidence::RankedViolations(t, s) => (t, Some(s)),
                _ => {
                    return Err(Error::Contract(
                        "weak-view aggressive selection needs weak-view violation counts".into(),
                    ))
                }
            };
            check_rows(table.len(), cs)?;
            let primary: Vec<u32> = table
                .iter()
                .map(|row| row.iter().copied().min().unwrap_or(0))
                .collect();
            let mut order: Vec<usize> = (0..primary.len()).collect();
            order.sort_by(|&a, &b| {
                primary[b].cmp(&primary[a]).then_with(|| match secondary {
                    Some(s) => s[b].total_cmp(&s[a]),
                    None => std::cmp::Ordering::Equal,
                })
            });
            order
        }
    };
    Ok(ranked
        .into_iter()
        .take(b)
        .map(|j| cs.members[j])
        .collect())
}

fn check_rows(rows: usize, cs: &ContentionSet) -> Result<()> {
    if rows != cs.len() {
        return Err(Error::Contract(format!(
            "evidence has {rows} rows for {} contention points",
            cs.len()
        )));
    }
    Ok(())
}

/// `min_i Confidence(h_i(x))`.
pub fn aggressive_score(confs: &[f64]) -> f64 {
    confs.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `max_i Confidence(h_i(x)) - min_i Confidence(h_i(x))`.
pub fn spread(confs: &[f64]) -> f64 {
    let max = confs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max - aggressive_score(confs)
}

/// Indices sorted by descending score; the sort is stable so equal scores
/// keep ascending index order.
fn rank_desc(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}
