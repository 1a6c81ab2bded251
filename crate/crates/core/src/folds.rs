//! Cross-validation folds and initial labeled/unlabeled splits.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::pool::{Labeled, Pool, Unlabeled};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified k-fold split over `items`, each given as `(id, class)`.
///
/// Members of each class are shuffled, classes are concatenated in class
/// order and position `p` of the concatenation goes to fold `p mod k`. Each
/// fold therefore holds `floor` or `ceil` of `count/k` of every class, and
/// remainders of successive classes land on successive folds.
pub fn stratified_kfold<C: Ord + Copy + std::fmt::Debug>(
    items: &[(usize, C)],
    k: usize,
    seed: u64,
) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    let mut by_class: BTreeMap<C, Vec<usize>> = BTreeMap::new();
    for &(id, c) in items {
        by_class.entry(c).or_default().push(id);
    }
    for (c, members) in &by_class {
        if members.len() < k {
            return Err(Error::Stratification {
                class: format!("{c:?}"),
                count: members.len(),
                folds: k,
            });
        }
    }
    let mut rng = rng_from_seed(seed);
    let mut order = Vec::with_capacity(items.len());
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        order.extend_from_slice(members);
    }
    let mut assignment = vec![Vec::new(); k];
    for (p, id) in order.into_iter().enumerate() {
        assignment[p % k].push(id);
    }
    Ok(build_folds(assignment))
}

/// Plain k-fold over ids (a single stratum).
pub fn kfold(ids: &[usize], k: usize, seed: u64) -> Result<Vec<Fold>> {
    let items: Vec<(usize, u8)> = ids.iter().map(|&i| (i, 0)).collect();
    stratified_kfold(&items, k, seed)
}

fn build_folds(assignment: Vec<Vec<usize>>) -> Vec<Fold> {
    let k = assignment.len();
    (0..k)
        .map(|f| {
            let mut test = assignment[f].clone();
            test.sort_unstable();
            let mut train: Vec<usize> = (0..k)
                .filter(|&g| g != f)
                .flat_map(|g| assignment[g].iter().copied())
                .collect();
            train.sort_unstable();
            Fold { train, test }
        })
        .collect()
}

/// The initial labeled set and the unlabeled pool.
pub type InitialSplit<D, Y> = (Vec<Labeled<D, Y>>, Pool<D>);

/// Draws `n_initial` random members of `train` as the initial labeled set;
/// the rest become the unlabeled pool, labels stripped. Pool order follows
/// `train` order.
pub fn split_initial<D: Clone, Y: Clone>(
    train: &[Labeled<D, Y>],
    n_initial: usize,
    seed: u64,
) -> Result<InitialSplit<D, Y>> {
    if n_initial == 0 {
        return Err(Error::InvalidArgument(
            "initial labeled set must be nonempty".into(),
        ));
    }
    if n_initial > train.len() {
        return Err(Error::InvalidArgument(format!(
            "n_initial {n_initial} exceeds training set size {}",
            train.len()
        )));
    }
    let mut positions: Vec<usize> = (0..train.len()).collect();
    positions.shuffle(&mut rng_from_seed(seed));
    let mut chosen = positions[..n_initial].to_vec();
    chosen.sort_unstable();
    let labeled = chosen.iter().map(|&p| train[p].clone()).collect();
    let mut in_l = vec![false; train.len()];
    for &p in &chosen {
        in_l[p] = true;
    }
    let pool = train
        .iter()
        .zip(&in_l)
        .filter(|(_, &l)| !l)
        .map(|(e, _)| Unlabeled {
            id: e.id,
            desc: e.desc.clone(),
        })
        .collect();
    Ok((labeled, Pool::new(pool)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes(pos: usize, neg: usize) -> Vec<(usize, u8)> {
        (0..pos + neg).map(|i| (i, u8::from(i >= pos))).collect()
    }

    fn count_in(ids: &[usize], items: &[(usize, u8)], c: u8) -> usize {
        ids.iter().filter(|&&i| items[i].1 == c).count()
    }

    #[test]
    fn exact_divisibility() {
        let items = classes(5, 5);
        let folds = stratified_kfold(&items, 5, 1).unwrap();
        assert_eq!(folds.len(), 5);
        for f in &folds {
            assert_eq!(count_in(&f.test, &items, 0), 1);
            assert_eq!(count_in(&f.test, &items, 1), 1);
        }
    }

    #[test]
    fn nine_examples_three_folds() {
        // 6 positives dealt to 3 folds gives 2 each, 3 negatives gives 1 each.
        let items = classes(6, 3);
        for seed in 0..20 {
            for f in stratified_kfold(&items, 3, seed).unwrap() {
                assert_eq!(count_in(&f.test, &items, 0), 2);
                assert_eq!(count_in(&f.test, &items, 1), 1);
            }
        }
    }

    #[test]
    fn same_seed_same_folds() {
        let items = classes(13, 8);
        assert_eq!(
            stratified_kfold(&items, 4, 9).unwrap(),
            stratified_kfold(&items, 4, 9).unwrap()
        );
        assert_ne!(
            stratified_kfold(&items, 4, 9).unwrap(),
            stratified_kfold(&items, 4, 10).unwrap()
        );
    }

    #[test]
    fn too_few_members_is_a_stratification_error() {
        let items = classes(5, 2);
        assert!(matches!(
            stratified_kfold(&items, 3, 0),
            Err(Error::Stratification { count: 2, folds: 3, .. })
        ));
        assert!(stratified_kfold(&items, 1, 0).is_err());
    }

    fn train_set(n: usize) -> Vec<Labeled<usize, u8>> {
        (0..n).map(|i| Labeled { id: i, desc: i * 10, label: (i % 2) as u8 }).collect()
    }

    #[test]
    fn initial_split_sizes() {
        let train = train_set(20);
        let (l, u) = split_initial(&train, 2, 3).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(u.len(), 18);
        let (l, u) = split_initial(&train, 20, 3).unwrap();
        assert_eq!(l.len(), 20);
        assert!(u.is_empty());
        assert!(split_initial(&train, 0, 3).is_err());
        assert!(split_initial(&train, 21, 3).is_err());
    }

    #[test]
    fn initial_split_is_deterministic_and_disjoint() {
        let train = train_set(30);
        let (l1, u1) = split_initial(&train, 7, 11).unwrap();
        let (l2, u2) = split_initial(&train, 7, 11).unwrap();
        let ids = |l: &[Labeled<usize, u8>]| l.iter().map(|e| e.id).collect::<Vec<_>>();
        assert_eq!(ids(&l1), ids(&l2));
        assert_eq!(u1.ids().collect::<Vec<_>>(), u2.ids().collect::<Vec<_>>());
        let mut all: Vec<usize> = ids(&l1).into_iter().chain(u1.ids()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..30).collect::<Vec<_>>());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn folds_partition_and_stratify(
                counts in proptest::collection::vec(4usize..30, 2..5),
                k in 2usize..5,
                seed in any::<u64>(),
            ) {
                let mut items = Vec::new();
                for (c, &n) in counts.iter().enumerate() {
                    for _ in 0..n {
                        items.push((items.len(), c as u8));
                    }
                }
                let folds = stratified_kfold(&items, k, seed).unwrap();
                let mut all: Vec<usize> = folds.iter().flat_map(|f| f.test.iter().copied()).collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..items.len()).collect::<Vec<_>>());
                for f in &folds {
                    prop_assert_eq!(f.train.len() + f.test.len(), items.len());
                    for (c, &n) in counts.iter().enumerate() {
                        let got = f.test.iter().filter(|&&i| items[i].1 == c as u8).count() as f64;
                        prop_assert!((got - n as f64 / k as f64).abs() < 1.0);
                    }
                }
                prop_assert_eq!(folds, stratified_kfold(&items, k, seed).unwrap());
            }
        }
    }
}
