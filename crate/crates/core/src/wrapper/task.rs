//! Wrapper tasks: tokenized documents with a labeled item, and their file
//! format.
//!
//! A task file starts with a header line `item<TAB><name>`. Every further
//! non-empty line is `doc-id<TAB>raw<TAB>start[<TAB>end]`, where `raw` has
//! backslash, tab, newline and carriage return escaped as `\\`, `\t`, `\n`
//! and `\r`, and `start`/`end` are token indices. `end` defaults to
//! `start + 1`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::token::{tokenize, Token};

/// Token range `[start, end)` of the item in a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ItemSpan {
    pub start: usize,
    pub end: usize,
}

/// Which edge of the item the rules locate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Start,
    End,
}

impl ItemSpan {
    pub fn target(self, boundary: Boundary) -> usize {
        match boundary {
            Boundary::Start => self.start,
            Boundary::End => self.end,
        }
    }

    pub fn len(self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(self) -> bool {
        self.end == self.start
    }
}

/// A document as the learner sees it: no label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub name: String,
    pub raw: String,
    pub tokens: Vec<Token>,
}

impl Document {
    pub fn new(name: impl Into<String>, raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let tokens = tokenize(&raw);
        Document {
            name: name.into(),
            raw,
            tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDocument {
    pub doc: Document,
    pub span: ItemSpan,
}

impl LabeledDocument {
    pub fn new(doc: Document, span: ItemSpan) -> Result<Self> {
        if span.start > span.end || span.end > doc.tokens.len() {
            return Err(Error::InvalidArgument(format!(
                "item span {}..{} outside document {} of {} tokens",
                span.start,
                span.end,
                doc.name,
                doc.tokens.len()
            )));
        }
        Ok(LabeledDocument { doc, span })
    }

    pub fn item_tokens(&self) -> &[Token] {
        &self.doc.tokens[self.span.start..self.span.end]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrapperTask {
    pub item: String,
    pub docs: Vec<LabeledDocument>,
}

pub fn escape(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape(s: &str) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(o) => return Err(format!("unknown escape \\{o}")),
            None => return Err("dangling backslash".into()),
        }
    }
    Ok(out)
}

impl WrapperTask {
    pub fn to_text(&self) -> String {
        let mut out = format!("item\t{}\n", self.item);
        for d in &self.docs {
            let _ = write!(out, "{}\t{}\t{}", d.doc.name, escape(&d.doc.raw), d.span.start);
            if d.span.end != d.span.start + 1 {
                let _ = write!(out, "\t{}", d.span.end);
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.into(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        let item = loop {
            match lines.next() {
                None => return Err(err(1, "missing `item` header".into())),
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((i, l)) => match l.split_once('\t') {
                    Some(("item", name)) if !name.trim().is_empty() => break name.trim().to_string(),
                    _ => return Err(err(i + 1, "expected header `item<TAB>name`".into())),
                },
            }
        };
        let mut docs = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if !(3..=4).contains(&fields.len()) {
                return Err(err(i + 1, format!("expected 3 or 4 tab-separated fields, got {}", fields.len())));
            }
            let raw = unescape(fields[1]).map_err(|m| err(i + 1, m))?;
            let index = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| err(i + 1, format!("bad token index `{s}`")))
            };
            let start = index(fields[2])?;
            let end = match fields.get(3) {
                Some(f) => index(f)?,
                None => start + 1,
            };
            let doc = Document::new(fields[0], raw);
            let n = doc.tokens.len();
            let labeled = LabeledDocument::new(doc, ItemSpan { start, end })
                .map_err(|_| err(i + 1, format!("item span {start}..{end} outside {n} tokens")))?;
            docs.push(labeled);
        }
        Ok(WrapperTask { item, docs })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(e).context(format!("reading {}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())
            .map_err(|e| Error::Io(e).context(format!("writing {}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task() -> WrapperTask {
        let a = Document::new("a", "Name: Joe\tPhone: (800) 173-8060\nback\\slash");
        let b = Document::new("b", "Phone: (1) 2");
        WrapperTask {
            item: "phone".into(),
            docs: vec![
                LabeledDocument::new(a, ItemSpan { start: 4, end: 10 }).unwrap(),
                LabeledDocument::new(b, ItemSpan { start: 2, end: 3 }).unwrap(),
            ],
        }
    }

    #[test]
    fn round_trip() {
        let t = task();
        let text = t.to_text();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("item\tphone\n"));
        // span end omitted when it is start + 1
        assert!(text.ends_with("b\tPhone: (1) 2\t2\n"));
        assert_eq!(WrapperTask::parse(&text, "t").unwrap(), t);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.tsv");
        task().write(&p).unwrap();
        assert_eq!(WrapperTask::load(&p).unwrap(), task());
    }

    #[test]
    fn bad_records() {
        assert!(WrapperTask::parse("", "t").is_err());
        assert!(WrapperTask::parse("doc\tx\t0\n", "t").is_err());
        let e = WrapperTask::parse("item\tp\nd\tone two\t5\n", "t").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e:?}");
        assert!(WrapperTask::parse("item\tp\nd\tbad\\q\t0\n", "t").is_err());
        assert!(WrapperTask::parse("item\tp\nd\tx\n", "t").is_err());
    }

    #[test]
    fn span_at_document_end_is_allowed() {
        let d = Document::new("d", "a b");
        assert!(LabeledDocument::new(d.clone(), ItemSpan { start: 2, end: 2 }).is_ok());
        assert!(LabeledDocument::new(d, ItemSpan { start: 2, end: 3 }).is_err());
    }
}
