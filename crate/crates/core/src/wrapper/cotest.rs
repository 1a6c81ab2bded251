//! Co-Testing for wrapper induction, plus the wrapper baselines.
//!
//! The two strong views are the forward and the backward landmark rule. The
//! weak view is a [`ContentPattern`] over the extracted item. A document is a
//! contention point when the two rules extract different things; a rule that
//! abstains disagrees with everything, including another abstention.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::baselines::vote_entropy;
use crate::cotesting::{
    contention_from_votes, evaluate_by, fill_batch, select_batch, winner, ContentionSet, Evidence,
    QueryStrategy, Schedule, Vote,
};
use crate::error::{Error, Result};
use crate::learners::bootstrap_indices;
use crate::pool::{Labeled, Oracle, Pool};
use crate::rng::{rng_from_seed, Rng};

use super::content::{learn_content_pattern, ContentPattern};
use super::rule::{learn_rule_with, Direction, LandmarkRule, RuleSearch, TokenMatcher};
use super::task::{Boundary, Document, ItemSpan};
use super::token::Token;

/// A labeled document as the wrapper learners see it.
pub type LabeledDoc<'a> = Labeled<&'a Document, ItemSpan>;
pub type DocPool<'a> = Pool<&'a Document>;

/// What one rule extracts from one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionPrediction {
    /// Token position located by the rule; `None` when the rule abstains.
    pub index: Option<usize>,
    /// Raw text of the extracted item; present iff `index` is.
    pub extracted: Option<String>,
    /// Token range of the extracted item.
    pub item: Option<(usize, usize)>,
}

impl ExtractionPrediction {
    pub fn abstain() -> Self {
        ExtractionPrediction {
            index: None,
            extracted: None,
            item: None,
        }
    }

    pub fn is_abstention(&self) -> bool {
        self.index.is_none()
    }

    pub fn item_tokens<'d>(&self, doc: &'d Document) -> Option<&'d [Token]> {
        self.item.map(|(a, b)| &doc.tokens[a..b])
    }
}

impl Vote for ExtractionPrediction {
    fn agrees(&self, other: &Self) -> bool {
        self.index.is_some() && self.index == other.index
    }
}

/// How far an item extends from the located boundary.
///
/// The item runs from the boundary to the first token matching `stop` (the
/// least general matcher covering the token after every training item, or
/// before it for [`Boundary::End`]), searching at most twice the longest
/// training item. Without a stop matcher, or when none is found, the item
/// takes the longest training length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extent {
    pub boundary: Boundary,
    pub stop: Option<TokenMatcher>,
    pub max_len: usize,
}

impl Extent {
    pub fn learn(docs: &[(&Document, ItemSpan)], boundary: Boundary) -> Extent {
        let max_len = docs.iter().map(|(_, s)| s.len()).max().unwrap_or(1).max(1);
        let stops: Option<Vec<&Token>> = docs
            .iter()
            .map(|(d, s)| match boundary {
                Boundary::Start => d.tokens.get(s.end),
                Boundary::End => s.start.checked_sub(1).map(|i| &d.tokens[i]),
            })
            .collect();
        Extent {
            boundary,
            stop: stops.and_then(TokenMatcher::generalize),
            max_len,
        }
    }

    /// Token range of the item whose boundary is at `at`.
    pub fn item(&self, tokens: &[Token], at: usize) -> (usize, usize) {
        let n = tokens.len();
        let reach = 2 * self.max_len;
        match self.boundary {
            Boundary::Start => {
                let last = (at + reach).min(n.saturating_sub(1));
                let hit = self.stop.as_ref().and_then(|stop| {
                    (at + 1..=last).find(|&j| stop.matches(&tokens[j]))
                });
                hit.map_or((at, (at + self.max_len).min(n)), |j| (at, j))
            }
            Boundary::End => {
                if let Some(stop) = &self.stop {
                    for j in (at.saturating_sub(reach)..at.saturating_sub(1)).rev() {
                        if stop.matches(&tokens[j]) {
                            return (j + 1, at);
                        }
                    }
                }
                (at.saturating_sub(self.max_len), at)
            }
        }
    }

    pub fn predict(&self, doc: &Document, index: Option<usize>) -> ExtractionPrediction {
        let Some(i) = index else {
            return ExtractionPrediction::abstain();
        };
        let (a, b) = self.item(&doc.tokens, i);
        let extracted = if a < b {
            let from = doc.tokens[a].offset;
            let last = &doc.tokens[b - 1];
            doc.raw[from..last.offset + last.text.len()].to_string()
        } else {
            String::new()
        };
        ExtractionPrediction {
            index: Some(i),
            extracted: Some(extracted),
            item: Some((a, b)),
        }
    }
}

/// Rules and content pattern learned from one labeled set.
#[derive(Debug, Clone)]
pub struct WrapperViews {
    pub forward: LandmarkRule,
    pub backward: LandmarkRule,
    /// Trained only when the sampler uses it.
    pub pattern: Option<ContentPattern>,
    pub extent: Extent,
}

impl WrapperViews {
    pub fn train(
        labeled: &[(&Document, ItemSpan)],
        boundary: Boundary,
        search: RuleSearch,
        with_pattern: bool,
    ) -> Result<Self> {
        let docs: Vec<(&[Token], usize)> = labeled
            .iter()
            .map(|(d, s)| (d.tokens.as_slice(), s.target(boundary)))
            .collect();
        let forward = learn_rule_with(&docs, Direction::Forward, search)
            .map_err(|e| e.context("forward view"))?;
        let backward = learn_rule_with(&docs, Direction::Backward, search)
            .map_err(|e| e.context("backward view"))?;
        let pattern = if with_pattern {
            let positives: Vec<&[Token]> = labeled
                .iter()
                .map(|(d, s)| &d.tokens[s.start..s.end])
                .collect();
            Some(learn_content_pattern(&positives)?)
        } else {
            None
        };
        Ok(WrapperViews {
            forward,
            backward,
            pattern,
            extent: Extent::learn(labeled, boundary),
        })
    }

    pub fn rule(&self, direction: Direction) -> &LandmarkRule {
        match direction {
            Direction::Forward => &self.forward,
            Direction::Backward => &self.backward,
        }
    }

    pub fn extract(&self, direction: Direction, doc: &Document) -> ExtractionPrediction {
        self.extent.predict(doc, self.rule(direction).apply(&doc.tokens))
    }

    /// Weak-view violations of a prediction; abstentions violate everything.
    pub fn violations(&self, doc: &Document, pred: &ExtractionPrediction) -> Result<u32> {
        let pattern = self.pattern.as_ref().ok_or_else(|| {
            Error::Contract("violation counts need a trained content pattern".into())
        })?;
        Ok(pattern.violations(pred.item_tokens(doc)))
    }
}

/// How the final extractor combines the two rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputRule {
    /// One rule answers alone.
    Single(Direction),
    /// Agreement wins; otherwise the answer violating fewer content
    /// constraints, the forward rule on ties.
    ViolationVote,
}

#[derive(Debug, Clone)]
pub struct OutputExtractor {
    pub views: Arc<WrapperViews>,
    pub rule: OutputRule,
}

impl OutputExtractor {
    pub fn extract(&self, doc: &Document) -> Result<ExtractionPrediction> {
        match self.rule {
            OutputRule::Single(d) => Ok(self.views.extract(d, doc)),
            OutputRule::ViolationVote => {
                let f = self.views.extract(Direction::Forward, doc);
                let b = self.views.extract(Direction::Backward, doc);
                if f.agrees(&b) {
                    return Ok(f);
                }
                let (nf, nb) = (self.views.violations(doc, &f)?, self.views.violations(doc, &b)?);
                Ok(choose_by_violations(f, nf, b, nb))
            }
        }
    }
}

/// The answer with fewer violations; the first (forward) one on ties.
pub fn choose_by_violations<T>(forward: T, n_forward: u32, backward: T, n_backward: u32) -> T {
    if n_backward < n_forward {
        backward
    } else {
        forward
    }
}

/// How pool documents are chosen for labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "sampler", rename_all = "snake_case")]
pub enum WrapperSampler {
    /// A random contention point; the rule with fewer query mistakes answers.
    #[serde(rename = "naive_cotesting")]
    NaiveCoTesting,
    /// The contention point maximizing `min(n1, n2)`; violation-vote output.
    #[serde(rename = "aggressive_cotesting")]
    AggressiveCoTesting,
    /// A random pool document; the rule with fewer query mistakes answers.
    Random,
    /// The document a bagged committee of forward rules disagrees on most;
    /// the forward rule learned on all of `L` answers.
    QueryByBagging {
        #[serde(default = "default_committee")]
        committee: usize,
    },
}

fn default_committee() -> usize {
    10
}

impl WrapperSampler {
    pub fn name(&self) -> String {
        match self {
            WrapperSampler::NaiveCoTesting => "naive_cotesting".into(),
            WrapperSampler::AggressiveCoTesting => "aggressive_cotesting".into(),
            WrapperSampler::Random => "random".into(),
            WrapperSampler::QueryByBagging { committee } => format!("qbb{committee}"),
        }
    }

    fn uses_pattern(self) -> bool {
        self == WrapperSampler::AggressiveCoTesting
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WrapperConfig {
    pub sampler: WrapperSampler,
    pub boundary: Boundary,
    pub search: RuleSearch,
}

impl WrapperConfig {
    pub fn new(sampler: WrapperSampler) -> Self {
        WrapperConfig {
            sampler,
            boundary: Boundary::Start,
            search: RuleSearch::default(),
        }
    }
}

/// One answered query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrapperQuery {
    pub id: usize,
    pub span: ItemSpan,
    pub episode: usize,
    /// Rule answers just before the query.
    pub forward: Option<usize>,
    pub backward: Option<usize>,
    /// Content violations `(n1, n2)`, when the pattern was trained.
    pub violations: Option<(u32, u32)>,
    pub fallback: bool,
}

/// Per-rule mistake counts `[forward, backward]` over a query log.
pub fn rule_mistakes(log: &[WrapperQuery], boundary: Boundary) -> [usize; 2] {
    let mut m = [0; 2];
    for q in log {
        let target = Some(q.span.target(boundary));
        m[0] += usize::from(q.forward != target);
        m[1] += usize::from(q.backward != target);
    }
    m
}

#[derive(Debug, Clone)]
pub struct WrapperSnapshot {
    pub episode: usize,
    pub labeled: usize,
    pub model: OutputExtractor,
}

#[derive(Debug, Clone)]
pub struct WrapperRun {
    pub views: Arc<WrapperViews>,
    pub log: Vec<WrapperQuery>,
    pub output: OutputExtractor,
    /// Episode 0 is the state before any query.
    pub snapshots: Vec<WrapperSnapshot>,
    /// Episodes whose queries were drawn at random because no document was
    /// in contention (or the committee agreed everywhere).
    pub fallback_episodes: Vec<usize>,
    pub exhausted: bool,
}

fn output_of(sampler: WrapperSampler, views: &Arc<WrapperViews>, log: &[WrapperQuery], boundary: Boundary) -> OutputExtractor {
    let rule = match sampler {
        WrapperSampler::AggressiveCoTesting => OutputRule::ViolationVote,
        WrapperSampler::QueryByBagging { .. } => OutputRule::Single(Direction::Forward),
        WrapperSampler::NaiveCoTesting | WrapperSampler::Random => {
            let m = rule_mistakes(log, boundary);
            OutputRule::Single(if winner(&m) == 0 {
                Direction::Forward
            } else {
                Direction::Backward
            })
        }
    };
    OutputExtractor {
        views: Arc::clone(views),
        rule,
    }
}

/// Forward/backward contention over a pool.
pub fn extraction_contention(forward: &[ExtractionPrediction], backward: &[ExtractionPrediction]) -> ContentionSet {
    let votes: Vec<Vec<ExtractionPrediction>> = forward
        .iter()
        .zip(backward)
        .map(|(f, b)| vec![f.clone(), b.clone()])
        .collect();
    contention_from_votes(&votes)
}

/// Runs one wrapper active learner for `schedule`.
pub fn run_wrapper<'a>(
    config: &WrapperConfig,
    l0: Vec<LabeledDoc<'a>>,
    u0: DocPool<'a>,
    oracle: &mut dyn Oracle<ItemSpan>,
    schedule: Schedule,
    seed: u64,
) -> Result<WrapperRun> {
    if l0.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if schedule.batch == 0 {
        return Err(Error::Config("queries per episode must be at least 1".into()));
    }
    if let WrapperSampler::QueryByBagging { committee } = config.sampler {
        if committee < 2 {
            return Err(Error::Config("a bagging committee needs at least 2 members".into()));
        }
    }
    let sampler = config.sampler;
    let boundary = config.boundary;
    let mut rng = rng_from_seed(seed);
    let mut labeled = l0;
    let mut pool = u0;
    let mut log: Vec<WrapperQuery> = Vec::new();
    let mut fallback_episodes = Vec::new();
    let mut exhausted = false;

    let train = |labeled: &[LabeledDoc<'_>]| -> Result<Arc<WrapperViews>> {
        let pairs: Vec<(&Document, ItemSpan)> = labeled.iter().map(|l| (l.desc, l.label)).collect();
        Ok(Arc::new(WrapperViews::train(&pairs, boundary, config.search, sampler.uses_pattern())?))
    };
    let mut views = train(&labeled)?;
    let mut snapshots = vec![WrapperSnapshot {
        episode: 0,
        labeled: labeled.len(),
        model: output_of(sampler, &views, &log, boundary),
    }];

    for episode in 1..=schedule.episodes {
        if pool.is_empty() {
            exhausted = true;
            break;
        }
        let fwd: Vec<ExtractionPrediction> = pool
            .items()
            .iter()
            .map(|u| views.extract(Direction::Forward, u.desc))
            .collect();
        let bwd: Vec<ExtractionPrediction> = pool
            .items()
            .iter()
            .map(|u| views.extract(Direction::Backward, u.desc))
            .collect();
        let viol: Option<Vec<(u32, u32)>> = if views.pattern.is_some() {
            let mut v = Vec::with_capacity(pool.len());
            for (p, u) in pool.items().iter().enumerate() {
                v.push((views.violations(u.desc, &fwd[p])?, views.violations(u.desc, &bwd[p])?));
            }
            Some(v)
        } else {
            None
        };

        let mut chosen: Vec<(usize, bool)> = match sampler {
            WrapperSampler::NaiveCoTesting | WrapperSampler::AggressiveCoTesting => {
                let cs = extraction_contention(&fwd, &bwd);
                if cs.is_empty() {
                    Vec::new()
                } else if sampler == WrapperSampler::NaiveCoTesting {
                    select_batch(QueryStrategy::Naive, &cs, Evidence::None, schedule.batch, &mut rng)?
                        .into_iter()
                        .map(|p| (p, false))
                        .collect()
                } else {
                    let v = viol.as_ref().expect("pattern trained");
                    let table: Vec<Vec<u32>> =
                        cs.members().iter().map(|&p| vec![v[p].0, v[p].1]).collect();
                    select_batch(
                        QueryStrategy::WeakViewAggressive,
                        &cs,
                        Evidence::Violations(&table),
                        schedule.batch,
                        &mut rng,
                    )?
                    .into_iter()
                    .map(|p| (p, false))
                    .collect()
                }
            }
            WrapperSampler::Random => {
                let positions: Vec<usize> = (0..pool.len()).collect();
                positions
                    .choose_multiple(&mut rng, schedule.batch.min(pool.len()))
                    .map(|&p| (p, false))
                    .collect()
            }
            WrapperSampler::QueryByBagging { committee } => {
                bagging_picks(&labeled, &pool, config, committee, schedule.batch, &mut rng)?
                    .into_iter()
                    .map(|p| (p, false))
                    .collect()
            }
        };
        if chosen.len() < schedule.batch.min(pool.len()) {
            fallback_episodes.push(episode);
        }
        fill_batch(&mut chosen, pool.len(), schedule.batch, &mut rng);

        // Answer from the highest position down so positions stay valid, then
        // log in selection order.
        let mut order = chosen.clone();
        order.sort_by_key(|c| std::cmp::Reverse(c.0));
        let mut answered = Vec::with_capacity(order.len());
        for (pos, fallback) in order {
            let item = pool.take(pos);
            let span = oracle.reveal(item.id)?;
            answered.push((
                pos,
                WrapperQuery {
                    id: item.id,
                    span,
                    episode,
                    forward: fwd[pos].index,
                    backward: bwd[pos].index,
                    violations: viol.as_ref().map(|v| v[pos]),
                    fallback,
                },
                Labeled {
                    id: item.id,
                    desc: item.desc,
                    label: span,
                },
            ));
        }
        for &(pos, _) in &chosen {
            let i = answered.iter().position(|a| a.0 == pos).expect("answered");
            let (_, record, doc) = answered.swap_remove(i);
            log.push(record);
            labeled.push(doc);
        }

        views = train(&labeled).map_err(|e| e.context(format!("episode {episode}")))?;
        snapshots.push(WrapperSnapshot {
            episode,
            labeled: labeled.len(),
            model: output_of(sampler, &views, &log, boundary),
        });
    }

    let output = output_of(sampler, &views, &log, boundary);
    Ok(WrapperRun {
        views,
        log,
        output,
        snapshots,
        fallback_episodes,
        exhausted,
    })
}

/// Naive or aggressive Co-Testing for wrapper induction.
pub fn run_wrapper_cotesting<'a>(
    aggressive: bool,
    l0: Vec<LabeledDoc<'a>>,
    u0: DocPool<'a>,
    oracle: &mut dyn Oracle<ItemSpan>,
    schedule: Schedule,
    seed: u64,
) -> Result<WrapperRun> {
    let sampler = if aggressive {
        WrapperSampler::AggressiveCoTesting
    } else {
        WrapperSampler::NaiveCoTesting
    };
    run_wrapper(&WrapperConfig::new(sampler), l0, u0, oracle, schedule, seed)
}

/// Pool positions with the highest vote entropy among forward rules learned
/// on bootstrap resamples of `labeled`. Members whose resample admits no
/// rule are skipped. Empty when the committee agrees everywhere.
fn bagging_picks(
    labeled: &[LabeledDoc<'_>],
    pool: &DocPool<'_>,
    config: &WrapperConfig,
    committee: usize,
    batch: usize,
    rng: &mut Rng,
) -> Result<Vec<usize>> {
    let single_class = vec![0usize; labeled.len()];
    let mut rules = Vec::with_capacity(committee);
    for _ in 0..committee {
        let idx = bootstrap_indices(&single_class, rng)?;
        let docs: Vec<(&[Token], usize)> = idx
            .iter()
            .map(|&i| (labeled[i].desc.tokens.as_slice(), labeled[i].label.target(config.boundary)))
            .collect();
        if let Ok(r) = learn_rule_with(&docs, Direction::Forward, config.search) {
            rules.push(r);
        }
    }
    if rules.len() < 2 {
        return Ok(Vec::new());
    }
    let entropy: Vec<f64> = pool
        .items()
        .iter()
        .map(|u| {
            let votes: Vec<Option<usize>> = rules.iter().map(|r| r.apply(&u.desc.tokens)).collect();
            vote_entropy(&votes)
        })
        .collect();
    let mut order: Vec<usize> = (0..entropy.len()).filter(|&p| entropy[p] > 0.0).collect();
    order.sort_by(|&a, &b| entropy[b].total_cmp(&entropy[a]).then(a.cmp(&b)));
    order.truncate(batch);
    Ok(order)
}

/// Fraction of test documents on which the extractor finds the labeled
/// boundary.
pub fn evaluate_extractor(model: &OutputExtractor, test: &[LabeledDoc<'_>]) -> Result<f64> {
    let boundary = model.views.extent.boundary;
    evaluate_by(test, |t| Ok(model.extract(t.desc)?.index == Some(t.label.target(boundary))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pool::{SimulatedOracle, Unlabeled};
    use crate::wrapper::rule::Landmark;
    use crate::wrapper::task::LabeledDocument;

    fn doc(name: &str, raw: &str, item: &str) -> LabeledDocument {
        let d = Document::new(name, raw);
        let first = super::super::token::tokenize(item)[0].text.clone();
        let start = d.tokens.iter().position(|t| t.text == first).unwrap();
        let len = super::super::token::tokenize(item).len();
        LabeledDocument::new(d, ItemSpan { start, end: start + len }).unwrap()
    }

    fn corpus() -> Vec<LabeledDocument> {
        let rows = [
            ("Name: Joe <p> Phone:<i> (800) 173-8060 </i> <p> Cuisine: Mexican", "(800) 173-8060"),
            ("Name: Ann <p> Phone:<i> (310) 555-1234 </i> <p> Cuisine: Thai", "(310) 555-1234"),
            ("Name: Bo <p> Phone:<i> (213) 444-0000 </i> <p> Cuisine: Greek", "(213) 444-0000"),
            ("Name: Cy <p> Phone:<i> (415) 902-7731 </i> <p> Cuisine: French", "(415) 902-7731"),
            ("Name: Di <p> Phone:<i> (617) 253-1000 </i> <p> Cuisine: Cuban", "(617) 253-1000"),
        ];
        rows.iter()
            .enumerate()
            .map(|(i, (r, item))| doc(&format!("d{i}"), r, item))
            .collect()
    }

    fn setup(docs: &[LabeledDocument], n0: usize) -> (Vec<LabeledDoc<'_>>, DocPool<'_>, SimulatedOracle<ItemSpan>) {
        let all: Vec<LabeledDoc<'_>> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| Labeled { id: i, desc: &d.doc, label: d.span })
            .collect();
        let oracle = SimulatedOracle::from_labeled(&all);
        let pool = Pool::new(all[n0..].iter().cloned().map(Unlabeled::from).collect());
        (all[..n0].to_vec(), pool, oracle)
    }

    #[test]
    fn extent_finds_whole_phone_number() {
        let docs = corpus();
        let pairs: Vec<(&Document, ItemSpan)> = docs.iter().map(|d| (&d.doc, d.span)).collect();
        let ext = Extent::learn(&pairs[..2], Boundary::Start);
        assert_eq!(ext.stop, Some(TokenMatcher::Literal("</i>".into())));
        let p = ext.predict(&docs[4].doc, Some(docs[4].span.start));
        assert_eq!(p.extracted.as_deref(), Some("(617) 253-1000"));
        assert_eq!(ext.predict(&docs[4].doc, None), ExtractionPrediction::abstain());
    }

    #[test]
    fn end_boundary_extent_runs_backward() {
        let docs = corpus();
        let pairs: Vec<(&Document, ItemSpan)> = docs.iter().map(|d| (&d.doc, d.span)).collect();
        let ext = Extent::learn(&pairs[..2], Boundary::End);
        let p = ext.predict(&docs[3].doc, Some(docs[3].span.end));
        assert_eq!(p.extracted.as_deref(), Some("(415) 902-7731"));
    }

    #[test]
    fn abstention_disagrees_with_everything() {
        let a = ExtractionPrediction::abstain();
        let d = Document::new("x", "a b c");
        let ext = Extent { boundary: Boundary::Start, stop: None, max_len: 1 };
        let p = ext.predict(&d, Some(1));
        assert!(!a.agrees(&a));
        assert!(!a.agrees(&p) && !p.agrees(&a));
        assert!(p.agrees(&p.clone()));
    }

    #[test]
    fn no_contention_means_fallback_every_episode() {
        let docs = corpus();
        let (l0, u0, mut oracle) = setup(&docs, 2);
        let run = run_wrapper_cotesting(true, l0.clone(), u0, &mut oracle, Schedule::queries(3), 7).unwrap();
        assert_eq!(run.fallback_episodes, vec![1, 2, 3]);
        assert!(run.log.iter().all(|q| q.fallback));
        let test: Vec<LabeledDoc<'_>> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| Labeled { id: i, desc: &d.doc, label: d.span })
            .collect();
        for s in &run.snapshots {
            assert_eq!(evaluate_extractor(&s.model, &test).unwrap(), 1.0);
        }
    }

    #[test]
    fn aggressive_queries_largest_min_violation() {
        let table = vec![vec![0, 3], vec![2, 2], vec![1, 4]];
        let cs = ContentionSet::from_members(vec![4, 7, 9]);
        let mut rng = rng_from_seed(0);
        let pick = select_batch(QueryStrategy::WeakViewAggressive, &cs, Evidence::Violations(&table), 1, &mut rng).unwrap();
        assert_eq!(pick, vec![7]);
    }

    #[test]
    fn fewer_violations_wins_disagreement() {
        assert_eq!(choose_by_violations("fwd", 1, "bwd", 3), "fwd");
        assert_eq!(choose_by_violations("fwd", 3, "bwd", 1), "bwd");
        assert_eq!(choose_by_violations("fwd", 2, "bwd", 2), "fwd");
    }

    #[test]
    fn violation_vote_prefers_conforming_string() {
        let docs = corpus();
        let pairs: Vec<(&Document, ItemSpan)> = docs.iter().map(|d| (&d.doc, d.span)).collect();
        let mut views = WrapperViews::train(&pairs[..3], Boundary::Start, RuleSearch::default(), true).unwrap();
        // Break the forward rule so it lands on "Name".
        views.forward = LandmarkRule::new(Direction::Forward, vec![Landmark(vec![TokenMatcher::Literal("<p>".into())])]).unwrap();
        let out = OutputExtractor { views: Arc::new(views), rule: OutputRule::ViolationVote };
        let p = out.extract(&docs[3].doc).unwrap();
        assert_eq!(p.index, Some(docs[3].span.start));
    }

    #[test]
    fn contention_reflects_rule_correctness() {
        // Forward rule lands on the first "(", the backward rule on the
        // right one; only the fax document is in contention.
        let docs = [
            doc("a", "x Phone: (800) 1 <b> Cuisine: A", "(800) 1"),
            doc("b", "x Fax: (555) 2 Phone: (310) 5 <b> Cuisine: B", "(310) 5"),
        ];
        let pairs: Vec<(&Document, ItemSpan)> = docs.iter().map(|d| (&d.doc, d.span)).collect();
        let views = WrapperViews::train(&pairs[..1], Boundary::Start, RuleSearch::default(), false).unwrap();
        let f: Vec<_> = docs.iter().map(|d| views.extract(Direction::Forward, &d.doc)).collect();
        let b: Vec<_> = docs.iter().map(|d| views.extract(Direction::Backward, &d.doc)).collect();
        let cs = extraction_contention(&f, &b);
        for (p, d) in docs.iter().enumerate() {
            let fc = f[p].index == Some(d.span.start);
            let bc = b[p].index == Some(d.span.start);
            if fc != bc {
                assert!(cs.contains(p));
            }
            if fc && bc {
                assert!(!cs.contains(p));
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let docs = corpus();
        for sampler in [
            WrapperSampler::NaiveCoTesting,
            WrapperSampler::AggressiveCoTesting,
            WrapperSampler::Random,
            WrapperSampler::QueryByBagging { committee: 10 },
        ] {
            let go = || {
                let (l0, u0, mut o) = setup(&docs, 1);
                run_wrapper(&WrapperConfig::new(sampler), l0, u0, &mut o, Schedule::queries(4), 11).unwrap()
            };
            let (a, b) = (go(), go());
            assert_eq!(a.log, b.log, "{sampler:?}");
            assert_eq!(a.snapshots.len(), 5);
            assert_eq!(a.views.forward, b.views.forward);
        }
    }

    #[test]
    fn qbb_needs_a_committee() {
        let docs = corpus();
        let (l0, u0, mut o) = setup(&docs, 1);
        let cfg = WrapperConfig::new(WrapperSampler::QueryByBagging { committee: 1 });
        assert!(matches!(run_wrapper(&cfg, l0, u0, &mut o, Schedule::queries(1), 0), Err(Error::Config(_))));
    }
}
