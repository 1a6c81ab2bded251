//! The weak content view: a prototype of the extracted item itself.

use crate::error::{Error, Result};

use super::rule::TokenMatcher;
use super::token::{ClassSet, Token};

/// Longest start/end pattern kept.
pub const MAX_PATTERN: usize = 3;

/// Number of constraint families checked by [`ContentPattern::violations`].
pub const CONSTRAINTS: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentPattern {
    pub min_len: usize,
    pub max_len: usize,
    pub start: Vec<TokenMatcher>,
    pub end: Vec<TokenMatcher>,
    pub classes: ClassSet,
}

impl ContentPattern {
    /// Counts violated constraints: length range, allowed classes, start
    /// pattern and end pattern. An abstention (`None`) violates all four.
    pub fn violations(&self, s: Option<&[Token]>) -> u32 {
        let Some(s) = s else {
            return CONSTRAINTS;
        };
        let mut n = 0;
        if s.len() < self.min_len || s.len() > self.max_len {
            n += 1;
        }
        if s.iter().any(|t| !t.classes.is_subset(self.classes)) {
            n += 1;
        }
        let matches = |pat: &[TokenMatcher], toks: &mut dyn Iterator<Item = &Token>| {
            pat.iter().all(|m| toks.next().is_some_and(|t| m.matches(t)))
        };
        if !matches(&self.start, &mut s.iter()) {
            n += 1;
        }
        if !matches(&self.end, &mut s.iter().rev()) {
            n += 1;
        }
        n
    }
}

/// Learns a pattern from positive examples only.
pub fn learn_content_pattern<S: AsRef<[Token]>>(positives: &[S]) -> Result<ContentPattern> {
    if positives.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let seqs: Vec<&[Token]> = positives.iter().map(AsRef::as_ref).collect();
    let min_len = seqs.iter().map(|s| s.len()).min().unwrap_or(0);
    let max_len = seqs.iter().map(|s| s.len()).max().unwrap_or(0);
    let classes = seqs
        .iter()
        .flat_map(|s| s.iter())
        .fold(ClassSet::empty(), |acc, t| acc.union(t.classes));
    let common = |from_end: bool| {
        let mut out = Vec::new();
        for j in 0..MAX_PATTERN.min(min_len) {
            let column = seqs
                .iter()
                .map(|s| if from_end { &s[s.len() - 1 - j] } else { &s[j] });
            match TokenMatcher::generalize(column) {
                Some(m) => out.push(m),
                None => break,
            }
        }
        out
    };
    Ok(ContentPattern {
        min_len,
        max_len,
        start: common(false),
        end: common(true),
        classes,
    })
}
