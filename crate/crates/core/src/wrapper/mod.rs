//! Wrapper induction: landmark rules over token streams.
//!
//! A wrapper task labels one item per document. Two strong views locate the
//! item boundary: a forward rule reading the tokens before it and a backward
//! rule reading the tokens after it. A weak content view checks whether an
//! extracted string looks like the item at all.

mod content;
mod cotest;
mod rule;
mod task;
mod token;

pub use content::{learn_content_pattern, ContentPattern, CONSTRAINTS, MAX_PATTERN};
pub use cotest::{
    choose_by_violations, evaluate_extractor, extraction_contention, rule_mistakes, run_wrapper,
    run_wrapper_cotesting, DocPool, ExtractionPrediction, Extent, LabeledDoc, OutputExtractor,
    OutputRule, WrapperConfig, WrapperQuery, WrapperRun, WrapperSampler, WrapperSnapshot,
    WrapperViews,
};
pub use rule::{learn_rule, learn_rule_with, Direction, Landmark, LandmarkRule, RuleSearch, TokenMatcher};
pub use task::{escape, unescape, Boundary, Document, ItemSpan, LabeledDocument, WrapperTask};
pub use token::{detokenize, tokenize, ClassSet, Token, TokenClass};
