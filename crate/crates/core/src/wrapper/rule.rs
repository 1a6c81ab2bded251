//! Landmark extraction rules and their induction.
//!
//! A forward rule is a chain `SkipTo(l1) SkipTo(l2) ...`: starting from the
//! document start, each landmark is located at its first occurrence after the
//! current position and the position moves just past it. A backward rule is
//! a chain `BackTo(l1) BackTo(l2) ...` run from the document end: each
//! landmark is located at its last occurrence ending before the current
//! position and the position moves to its start. The final position is the
//! extraction index.
//!
//! Induction only ever builds forward chains. A backward rule is learned as a
//! forward rule over the reversed token sequence and then mirrored.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::token::{ClassSet, Token, TokenClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TokenMatcher {
    Literal(String),
    Class(TokenClass),
}

impl TokenMatcher {
    pub fn matches(&self, t: &Token) -> bool {
        match self {
            TokenMatcher::Literal(s) => t.text == *s,
            TokenMatcher::Class(c) => t.classes.contains(*c),
        }
    }

    pub fn is_wildcard(&self) -> bool {
        matches!(self, TokenMatcher::Class(_))
    }

    /// Least general matcher covering every token, if one exists: the shared
    /// literal text, else the most specific shared class.
    pub fn generalize<'t>(tokens: impl IntoIterator<Item = &'t Token>) -> Option<TokenMatcher> {
        let mut iter = tokens.into_iter();
        let first = iter.next()?;
        let mut literal = true;
        let mut classes = first.classes;
        for t in iter {
            literal &= t.text == first.text;
            classes = classes.intersection(t.classes);
        }
        if literal {
            Some(TokenMatcher::Literal(first.text.clone()))
        } else {
            most_specific(classes).map(TokenMatcher::Class)
        }
    }
}

fn most_specific(classes: ClassSet) -> Option<TokenClass> {
    classes.most_specific()
}

impl fmt::Display for TokenMatcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenMatcher::Literal(s) => write!(f, "[{s}]"),
            TokenMatcher::Class(c) => write!(f, "[_{c}_]"),
        }
    }
}

/// A nonempty sequence of matchers that must match consecutive tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Landmark(pub Vec<TokenMatcher>);

impl Landmark {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn matches_at<T: AsRef<Token>>(&self, tokens: &[T], at: usize) -> bool {
        at + self.len() <= tokens.len()
            && self
                .0
                .iter()
                .zip(&tokens[at..])
                .all(|(m, t)| m.matches(t.as_ref()))
    }

    /// First start `>= from` where the landmark matches.
    pub fn find_forward<T: AsRef<Token>>(&self, tokens: &[T], from: usize) -> Option<usize> {
        if self.len() > tokens.len() {
            return None;
        }
        (from..=tokens.len() - self.len()).find(|&i| self.matches_at(tokens, i))
    }

    /// Last start whose match ends at or before `until`.
    pub fn find_backward<T: AsRef<Token>>(&self, tokens: &[T], until: usize) -> Option<usize> {
        let last = until.checked_sub(self.len())?;
        (0..=last).rev().find(|&i| self.matches_at(tokens, i))
    }

    fn wildcards(&self) -> usize {
        self.0.iter().filter(|m| m.is_wildcard()).count()
    }

    fn reversed(&self) -> Landmark {
        Landmark(self.0.iter().rev().cloned().collect())
    }
}

impl fmt::Display for Landmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.0 {
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandmarkRule {
    pub direction: Direction,
    pub landmarks: Vec<Landmark>,
}

impl LandmarkRule {
    pub fn new(direction: Direction, landmarks: Vec<Landmark>) -> Result<Self> {
        if landmarks.is_empty() || landmarks.iter().any(Landmark::is_empty) {
            return Err(Error::InvalidArgument(
                "a rule needs at least one landmark and no empty landmarks".into(),
            ));
        }
        Ok(LandmarkRule {
            direction,
            landmarks,
        })
    }

    /// The extraction index, or `None` when a landmark is not found.
    pub fn apply<T: AsRef<Token>>(&self, tokens: &[T]) -> Option<usize> {
        match self.direction {
            Direction::Forward => {
                let mut pos = 0;
                for l in &self.landmarks {
                    pos = l.find_forward(tokens, pos)? + l.len();
                }
                Some(pos)
            }
            Direction::Backward => {
                let mut pos = tokens.len();
                for l in &self.landmarks {
                    pos = l.find_backward(tokens, pos)?;
                }
                Some(pos)
            }
        }
    }
}

impl fmt::Display for LandmarkRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.direction {
            Direction::Forward => "SkipTo",
            Direction::Backward => "BackTo",
        };
        let parts: Vec<String> = self.landmarks.iter().map(|l| format!("{op}({l})")).collect();
        f.write_str(&parts.join(" "))
    }
}

impl AsRef<Token> for Token {
    fn as_ref(&self) -> &Token {
        self
    }
}

/// Limits of the rule hypothesis space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleSearch {
    /// Longest landmark considered.
    pub max_landmark: usize,
    /// Longest landmark chain.
    pub max_chain: usize,
}

impl Default for RuleSearch {
    fn default() -> Self {
        RuleSearch {
            max_landmark: 4,
            max_chain: 4,
        }
    }
}

/// Learns a rule that extracts `target` from every `(tokens, target)` pair.
pub fn learn_rule(docs: &[(&[Token], usize)], direction: Direction) -> Result<LandmarkRule> {
    learn_rule_with(docs, direction, RuleSearch::default())
}

pub fn learn_rule_with(
    docs: &[(&[Token], usize)],
    direction: Direction,
    search: RuleSearch,
) -> Result<LandmarkRule> {
    if docs.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    for &(toks, t) in docs {
        if t > toks.len() {
            return Err(Error::InvalidArgument(format!(
                "target {t} beyond document of {} tokens",
                toks.len()
            )));
        }
    }
    let rule = match direction {
        Direction::Forward => {
            let seqs: Vec<(Vec<&Token>, usize)> =
                docs.iter().map(|&(s, t)| (s.iter().collect(), t)).collect();
            LandmarkRule::new(Direction::Forward, learn_chain(&seqs, search)?)?
        }
        Direction::Backward => {
            let seqs: Vec<(Vec<&Token>, usize)> = docs
                .iter()
                .map(|&(s, t)| (s.iter().rev().collect(), s.len() - t))
                .collect();
            let chain = learn_chain(&seqs, search)?;
            LandmarkRule::new(
                Direction::Backward,
                chain.iter().map(Landmark::reversed).collect(),
            )?
        }
    };
    for (i, &(toks, t)) in docs.iter().enumerate() {
        if rule.apply(toks) != Some(t) {
            return Err(Error::InconsistentTrainingSet(format!(
                "learned rule {rule} misses training document {i}"
            )));
        }
    }
    Ok(rule)
}

type Seq<'a> = (Vec<&'a Token>, usize);

/// Greedy search for a forward chain.
///
/// Terminal landmarks are windows just before the targets, generalized
/// column by column. They are ordered most specific first: all-literal
/// windows from longest to shortest, then windows with class wildcards from
/// shortest to longest. A terminal that is correct on every document by
/// itself is taken as is. Only when none is does the search add prefix
/// landmarks, one at a time, each chosen to fix as many documents as
/// possible.
fn learn_chain(seqs: &[Seq<'_>], search: RuleSearch) -> Result<Vec<Landmark>> {
    let terminals = terminal_candidates(seqs, search.max_landmark);
    if terminals.is_empty() {
        return Err(Error::InconsistentTrainingSet(
            "no landmark precedes the target in every document".into(),
        ));
    }
    let zero = vec![0; seqs.len()];
    if let Some(t) = terminals
        .iter()
        .find(|t| correct_count(seqs, t, &zero) == seqs.len())
    {
        return Ok(vec![t.clone()]);
    }
    for terminal in &terminals {
        if let Some(mut prefix) =
            extend_chain(seqs, terminal, zero.clone(), search.max_chain - 1, search.max_landmark)
        {
            prefix.push(terminal.clone());
            return Ok(prefix);
        }
    }
    Err(Error::InconsistentTrainingSet(format!(
        "none of {} terminal landmarks can be isolated with {} prefix landmarks",
        terminals.len(),
        search.max_chain - 1
    )))
}

fn terminal_candidates(seqs: &[Seq<'_>], max_len: usize) -> Vec<Landmark> {
    let reach = max_len.min(seqs.iter().map(|s| s.1).min().unwrap_or(0));
    // Column j (counting back from the target) generalized over all docs.
    let mut columns = Vec::with_capacity(reach);
    for j in 1..=reach {
        match TokenMatcher::generalize(seqs.iter().map(|(s, t)| s[t - j])) {
            Some(m) => columns.push(m),
            None => break,
        }
    }
    let window = |k: usize| Landmark(columns[..k].iter().rev().cloned().collect());
    let literal = columns.iter().take_while(|m| !m.is_wildcard()).count();
    let mut out: Vec<Landmark> = (1..=literal).rev().map(window).collect();
    out.extend((literal + 1..=columns.len()).map(window));
    out
}

fn correct_count(seqs: &[Seq<'_>], terminal: &Landmark, starts: &[usize]) -> usize {
    seqs.iter()
        .zip(starts)
        .filter(|((s, t), &from)| terminal.find_forward(s, from) == Some(t - terminal.len()))
        .count()
}

fn extend_chain(
    seqs: &[Seq<'_>],
    terminal: &Landmark,
    starts: Vec<usize>,
    depth: usize,
    max_len: usize,
) -> Option<Vec<Landmark>> {
    let correct = correct_count(seqs, terminal, &starts);
    if correct == seqs.len() {
        return Some(Vec::new());
    }
    if depth == 0 {
        return None;
    }
    let k = terminal.len();
    let limits: Vec<usize> = seqs.iter().map(|(_, t)| t - k).collect();

    // Candidates come from the windows of one failing document.
    let (pivot, _) = seqs
        .iter()
        .zip(&starts)
        .enumerate()
        .map(|(i, ((s, t), &from))| (i, (s, *t, from)))
        .find(|(_, (s, t, from))| terminal.find_forward(s, *from) != Some(t - k))?;
    let (pseq, _) = &seqs[pivot];
    let (pfrom, plimit) = (starts[pivot], limits[pivot]);

    let mut seen: HashSet<Landmark> = HashSet::new();
    // (documents fixed, ranking key, landmark, positions after it)
    type Best = (usize, (usize, usize, usize), Landmark, Vec<usize>);
    let mut best: Option<Best> = None;
    for len in 1..=max_len {
        for end in (pfrom + len..=plimit).rev() {
            let window = &pseq[end - len..end];
            for cand in window_variants(window) {
                if !seen.insert(cand.clone()) {
                    continue;
                }
                let mut next = Vec::with_capacity(seqs.len());
                let mut ok = true;
                for ((s, _), (&from, &limit)) in seqs.iter().zip(starts.iter().zip(&limits)) {
                    match cand.find_forward(s, from) {
                        Some(i) if i + cand.len() <= limit => next.push(i + cand.len()),
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                let gain = correct_count(seqs, terminal, &next);
                if gain <= correct {
                    continue;
                }
                // Prefer more fixed documents, then fewer wildcards, shorter
                // landmarks and windows closer to the target.
                let key = (cand.wildcards(), len, plimit - end);
                let better = match &best {
                    None => true,
                    Some((g, bk, _, _)) => gain > *g || (gain == *g && key < *bk),
                };
                if better {
                    best = Some((gain, key, cand, next));
                }
            }
        }
    }
    let (_, _, landmark, next) = best?;
    let mut rest = extend_chain(seqs, terminal, next, depth - 1, max_len)?;
    rest.insert(0, landmark);
    Some(rest)
}

/// The literal window plus variants with some positions replaced by the
/// token's most specific class.
fn window_variants(window: &[&Token]) -> Vec<Landmark> {
    let n = window.len();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let mut ms = Vec::with_capacity(n);
        let mut valid = true;
        for (j, t) in window.iter().enumerate() {
            if mask & (1 << j) != 0 {
                match most_specific(t.classes) {
                    Some(c) => ms.push(TokenMatcher::Class(c)),
                    None => {
                        valid = false;
                        break;
                    }
                }
            } else {
                ms.push(TokenMatcher::Literal(t.text.clone()));
            }
        }
        if valid {
            out.push(Landmark(ms));
        }
    }
    out
}
