//! Labeled sets, unlabeled pools and the simulated oracle.
//!
//! A [`Pool`] stores descriptions only; there is no label field to read. The
//! only way to learn the label of a pool member is to ask an [`Oracle`].

use std::collections::HashMap;

use crate::error::{Error, Result};

/// An example whose label is known to the learner.
#[derive(Debug, Clone)]
pub struct Labeled<D, Y> {
    pub id: usize,
    pub desc: D,
    pub label: Y,
}

/// A pool member: id and description, no label.
#[derive(Debug, Clone)]
pub struct Unlabeled<D> {
    pub id: usize,
    pub desc: D,
}

#[derive(Debug, Clone)]
pub struct Pool<D> {
    items: Vec<Unlabeled<D>>,
}

impl<D> Pool<D> {
    pub fn new(items: Vec<Unlabeled<D>>) -> Self {
        Pool { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Unlabeled<D>] {
        &self.items
    }

    pub fn get(&self, pos: usize) -> &Unlabeled<D> {
        &self.items[pos]
    }

    /// Removes the member at `pos`, preserving the order of the rest.
    pub fn take(&mut self, pos: usize) -> Unlabeled<D> {
        self.items.remove(pos)
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.items.iter().map(|u| u.id)
    }
}

impl<D, Y> From<Labeled<D, Y>> for Unlabeled<D> {
    fn from(l: Labeled<D, Y>) -> Self {
        Unlabeled {
            id: l.id,
            desc: l.desc,
        }
    }
}

pub trait Oracle<Y> {
    fn reveal(&mut self, id: usize) -> Result<Y>;
}

/// Answers queries from held-out ground truth.
#[derive(Debug, Clone)]
pub struct SimulatedOracle<Y> {
    hidden: HashMap<usize, Y>,
    queries: usize,
}

impl<Y: Clone> SimulatedOracle<Y> {
    pub fn new(labels: impl IntoIterator<Item = (usize, Y)>) -> Self {
        SimulatedOracle {
            hidden: labels.into_iter().collect(),
            queries: 0,
        }
    }

    pub fn from_labeled<D>(examples: &[Labeled<D, Y>]) -> Self {
        Self::new(examples.iter().map(|e| (e.id, e.label.clone())))
    }

    pub fn queries(&self) -> usize {
        self.queries
    }
}

impl<Y: Clone> Oracle<Y> for SimulatedOracle<Y> {
    fn reveal(&mut self, id: usize) -> Result<Y> {
        self.queries += 1;
        self.hidden
            .get(&id)
            .cloned()
            .ok_or_else(|| Error::Contract(format!("oracle has no label for example {id}")))
    }
}
