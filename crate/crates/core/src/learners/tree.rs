use std::collections::BTreeSet;

use crate::data::{FeatureId, FeatureVector, LabelId};
use crate::error::{Error, Result};

use super::{argmax, Classifier, Prediction, TrainingData};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 32,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(LabelId),
    Split {
        feature: FeatureId,
        /// `x[feature] <= threshold` goes left.
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

/// Unpruned binary decision tree grown by information gain.
///
/// An impure node is split on the best threshold even when the best gain is
/// zero (XOR-like targets need this), as long as both children keep at least
/// `min_leaf` examples. Ties go to the lowest feature id, then the lowest
/// threshold. Predictions carry no confidence.
#[derive(Debug, Clone)]
pub struct DecisionTree {
    root: Node,
}

impl DecisionTree {
    pub fn fit(data: &TrainingData<'_>, params: TreeParams) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let idx: Vec<usize> = (0..data.len()).collect();
        Ok(DecisionTree {
            root: grow(data, &idx, 0, params),
        })
    }

    pub fn depth(&self) -> usize {
        fn depth(n: &Node) -> usize {
            match n {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + depth(left).max(depth(right)),
            }
        }
        depth(&self.root)
    }
}

impl Classifier for DecisionTree {
    fn predict(&self, x: &FeatureVector) -> Prediction {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(l) => return Prediction::label_only(*l),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x.get(*feature) <= *threshold { left } else { right };
                }
            }
        }
    }

    fn confidence_supported(&self) -> bool {
        false
    }
}

pub(crate) fn entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn counts_of(data: &TrainingData<'_>, idx: &[usize]) -> Vec<usize> {
    let mut counts = vec![0; data.n_classes];
    for &i in idx {
        counts[data.samples[i].y.index()] += 1;
    }
    counts
}

fn majority(counts: &[usize]) -> LabelId {
    let as_f: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    LabelId(argmax(&as_f) as u32)
}

struct BestSplit {
    gain: f64,
    feature: FeatureId,
    threshold: f64,
}

fn grow(data: &TrainingData<'_>, idx: &[usize], depth: usize, params: TreeParams) -> Node {
    let counts = counts_of(data, idx);
    let leaf = Node::Leaf(majority(&counts));
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || depth >= params.max_depth || idx.len() < 2 * params.min_leaf {
        return leaf;
    }
    let Some(best) = best_split(data, idx, &counts, params.min_leaf) else {
        return leaf;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| data.samples[i].x.get(best.feature) <= best.threshold);
    Node::Split {
        feature: best.feature,
        threshold: best.threshold,
        left: Box::new(grow(data, &l, depth + 1, params)),
        right: Box::new(grow(data, &r, depth + 1, params)),
    }
}

fn best_split(
    data: &TrainingData<'_>,
    idx: &[usize],
    counts: &[usize],
    min_leaf: usize,
) -> Option<BestSplit> {
    let features: BTreeSet<FeatureId> = idx
        .iter()
        .flat_map(|&i| data.samples[i].x.iter().map(|(f, _)| f))
        .collect();
    let parent = entropy(counts);
    let n = idx.len();
    let mut best: Option<BestSplit> = None;
    let mut values: Vec<(f64, usize)> = Vec::with_capacity(n);
    for f in features {
        values.clear();
        values.extend(
            idx.iter()
                .map(|&i| (data.samples[i].x.get(f), data.samples[i].y.index())),
        );
        values.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = vec![0usize; data.n_classes];
        let mut right = counts.to_vec();
        for k in 0..n - 1 {
            let c = values[k].1;
            left[c] += 1;
            right[c] -= 1;
            if values[k].0 == values[k + 1].0 {
                continue;
            }
            let nl = k + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let child = (nl as f64 * entropy(&left) + nr as f64 * entropy(&right)) / n as f64;
            let gain = parent - child;
            if best.as_ref().is_none_or(|b| gain > b.gain + 1e-12) {
                best = Some(BestSplit {
                    gain,
                    feature: f,
                    threshold: (values[k].0 + values[k + 1].0) / 2.0,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::Sample;

    fn fv(pairs: &[(u32, f64)]) -> FeatureVector {
        FeatureVector::from_pairs(pairs.iter().copied())
    }

    fn fit(xs: &[FeatureVector], ys: &[u32], params: TreeParams) -> DecisionTree {
        let vocab: Vec<u32> = (0..8).collect();
        let data = TrainingData::new(
            xs.iter()
                .zip(ys)
                .map(|(x, &y)| Sample { x, y: LabelId(y) })
                .collect(),
            2,
            &vocab,
        );
        DecisionTree::fit(&data, params).unwrap()
    }

    #[test]
    fn pure_set_is_a_single_leaf() {
        let xs = vec![fv(&[(0, 1.0)]), fv(&[(1, 2.0)])];
        let t = fit(&xs, &[1, 1], TreeParams::default());
        assert_eq!(t.depth(), 0);
        assert_eq!(t.predict(&fv(&[(5, 9.0)])).label, LabelId(1));
    }

    #[test]
    fn xor_needs_depth_two() {
        let xs = vec![
            fv(&[]),
            fv(&[(1, 1.0)]),
            fv(&[(0, 1.0)]),
            fv(&[(0, 1.0), (1, 1.0)]),
        ];
        let ys = [0, 1, 1, 0];
        // Every single threshold split leaves one example of each class on
        // each side, so no first split has positive gain.
        for f in 0..2 {
            let left: Vec<usize> = (0..4).filter(|&i| xs[i].get(f) <= 0.5).map(|i| ys[i]).collect();
            assert_eq!(left.iter().filter(|&&y| y == 1).count(), 1);
            assert_eq!(left.len(), 2);
        }
        let t = fit(&xs, &[0, 1, 1, 0], TreeParams::default());
        assert_eq!(t.depth(), 2);
        for (x, &y) in xs.iter().zip(&ys) {
            assert_eq!(t.predict(x).label, LabelId(y as u32));
        }
    }

    #[test]
    fn identical_vectors_give_majority_leaf() {
        let xs = vec![fv(&[(0, 1.0)]); 3];
        let t = fit(&xs, &[1, 0, 1], TreeParams::default());
        assert_eq!(t.depth(), 0);
        assert_eq!(t.predict(&xs[0]).label, LabelId(1));
    }

    #[test]
    fn max_depth_caps_growth() {
        let xs: Vec<FeatureVector> = (0..8).map(|i| fv(&[(0, i as f64)])).collect();
        let ys = [0, 1, 0, 1, 0, 1, 0, 1];
        let t = fit(&xs, &ys, TreeParams { max_depth: 2, min_leaf: 1 });
        assert!(t.depth() <= 2);
        let full = fit(&xs, &ys, TreeParams::default());
        for (x, &y) in xs.iter().zip(&ys) {
            assert_eq!(full.predict(x).label, LabelId(y));
        }
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&[4, 0]), 0.0);
        assert!((entropy(&[2, 2]) - 1.0).abs() < 1e-12);
        assert_eq!(entropy(&[]), 0.0);
    }
}
