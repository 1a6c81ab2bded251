//! Multi-view examples, view partitions and the sparse text formats they are
//! loaded from.
//!
//! Example file, one example per line:
//!
//! ```text
//! # comment
//! course 0:2 17:1 2201:1
//! ? 3:1 2204:2
//! ```
//!
//! Views file, one view per line, plus optional `dim` and `labels` lines:
//!
//! ```text
//! dim 2206
//! labels course other
//! view 1 strong 0-2199
//! view 2 strong 2200-2205
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type FeatureId = u32;

/// Dense class index in `0..N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabelId(pub u32);

impl LabelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub id: LabelId,
    pub name: String,
}

/// Sparse nonnegative feature vector. Entries are kept sorted by feature id and
/// zero values are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    entries: Vec<(FeatureId, f64)>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from `(id, value)` pairs. Zero values are dropped and
    /// repeated ids are summed.
    pub fn from_pairs<I: IntoIterator<Item = (FeatureId, f64)>>(pairs: I) -> Self {
        let mut map: BTreeMap<FeatureId, f64> = BTreeMap::new();
        for (id, v) in pairs {
            *map.entry(id).or_insert(0.0) += v;
        }
        FeatureVector {
            entries: map.into_iter().filter(|&(_, v)| v != 0.0).collect(),
        }
    }

    pub fn get(&self, id: FeatureId) -> f64 {
        match self.entries.binary_search_by_key(&id, |&(f, _)| f) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (FeatureId, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).sum()
    }

    /// Squared Euclidean distance, treating absent entries as 0.
    pub fn squared_distance(&self, other: &FeatureVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    acc += a[i].1 * a[i].1;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    acc += b[j].1 * b[j].1;
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let d = a[i].1 - b[j].1;
                    acc += d * d;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc += a[i..].iter().map(|&(_, v)| v * v).sum::<f64>();
        acc += b[j..].iter().map(|&(_, v)| v * v).sum::<f64>();
        acc
    }

    /// Merges vectors over disjoint feature sets.
    pub fn concat<'a, I: IntoIterator<Item = &'a FeatureVector>>(parts: I) -> FeatureVector {
        FeatureVector::from_pairs(parts.into_iter().flat_map(|p| p.iter()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    Strong,
    Weak,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct View {
    pub id: u32,
    pub strength: Strength,
    /// Sorted, deduplicated.
    pub features: Vec<FeatureId>,
}

impl View {
    pub fn contains(&self, f: FeatureId) -> bool {
        self.features.binary_search(&f).is_ok()
    }
}

/// A partition of the feature universe into views.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewSpec {
    views: Vec<View>,
}

impl ViewSpec {
    /// Validates that the views are pairwise disjoint and, when `universe` is
    /// given, that their union is exactly `0..universe`.
    pub fn new(views: Vec<View>, universe: Option<u32>) -> Result<Self> {
        if views.is_empty() {
            return Err(Error::ViewPartition {
                reason: "no views declared".into(),
                features: vec![],
            });
        }
        let mut seen_ids = BTreeSet::new();
        for v in &views {
            if !seen_ids.insert(v.id) {
                return Err(Error::ViewPartition {
                    reason: format!("view id {} declared twice", v.id),
                    features: vec![],
                });
            }
        }
        let mut owner: HashMap<FeatureId, u32> = HashMap::new();
        let mut overlapping = BTreeSet::new();
        for v in &views {
            for &f in &v.features {
                if owner.insert(f, v.id).is_some() {
                    overlapping.insert(f);
                }
            }
        }
        if !overlapping.is_empty() {
            return Err(Error::ViewPartition {
                reason: "feature assigned to more than one view".into(),
                features: overlapping.into_iter().collect(),
            });
        }
        if let Some(dim) = universe {
            let outside: Vec<FeatureId> = owner.keys().copied().filter(|&f| f >= dim).collect();
            if !outside.is_empty() {
                let mut outside = outside;
                outside.sort_unstable();
                return Err(Error::ViewPartition {
                    reason: format!("feature outside declared dimensionality {dim}"),
                    features: outside,
                });
            }
            let missing: Vec<FeatureId> = (0..dim).filter(|f| !owner.contains_key(f)).collect();
            if !missing.is_empty() {
                return Err(Error::ViewPartition {
                    reason: "feature not assigned to any view".into(),
                    features: missing,
                });
            }
        }
        Ok(ViewSpec { views })
    }

    pub fn views(&self) -> &[View] {
        &self.views
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    /// Position of a declared view id.
    pub fn position(&self, view_id: u32) -> Result<usize> {
        self.views
            .iter()
            .position(|v| v.id == view_id)
            .ok_or(Error::UnknownView(view_id as usize))
    }

    pub fn strong_positions(&self) -> Vec<usize> {
        self.positions(Strength::Strong)
    }

    pub fn weak_positions(&self) -> Vec<usize> {
        self.positions(Strength::Weak)
    }

    fn positions(&self, s: Strength) -> Vec<usize> {
        (0..self.views.len())
            .filter(|&i| self.views[i].strength == s)
            .collect()
    }

    /// View position owning a feature.
    pub fn owner(&self, f: FeatureId) -> Option<usize> {
        self.views.iter().position(|v| v.contains(f))
    }

    pub fn feature_count(&self) -> usize {
        self.views.iter().map(|v| v.features.len()).sum()
    }

    /// All feature ids of every view, sorted.
    pub fn universe(&self) -> Vec<FeatureId> {
        let mut all: Vec<FeatureId> = self
            .views
            .iter()
            .flat_map(|v| v.features.iter().copied())
            .collect();
        all.sort_unstable();
        all
    }
}

/// An instance described in every view, with an optional label.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewExample {
    pub views: Vec<FeatureVector>,
    pub label: Option<LabelId>,
}

impl MultiViewExample {
    /// Splits a flat feature map into per-view descriptions.
    pub fn from_features(
        spec: &ViewSpec,
        features: &FeatureVector,
        label: Option<LabelId>,
    ) -> Result<Self> {
        let mut parts: Vec<Vec<(FeatureId, f64)>> = vec![Vec::new(); spec.len()];
        for (f, v) in features.iter() {
            let pos = spec.owner(f).ok_or_else(|| Error::ViewPartition {
                reason: "feature used by an example is not assigned to any view".into(),
                features: vec![f],
            })?;
            parts[pos].push((f, v));
        }
        Ok(MultiViewExample {
            views: parts.into_iter().map(FeatureVector::from_pairs).collect(),
            label,
        })
    }

    /// The union of all per-view descriptions.
    pub fn union_features(&self) -> FeatureVector {
        FeatureVector::concat(&self.views)
    }
}

/// Returns the stored description of `example` in view `view_id`.
pub fn project<'a>(
    spec: &ViewSpec,
    example: &'a MultiViewExample,
    view_id: u32,
) -> Result<&'a FeatureVector> {
    let pos = spec.position(view_id)?;
    example.views.get(pos).ok_or(Error::UnknownView(view_id as usize))
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub examples: Vec<MultiViewExample>,
    pub view_spec: ViewSpec,
    pub labels: Vec<Label>,
}

impl Dataset {
    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn label_name(&self, id: LabelId) -> &str {
        &self.labels[id.index()].name
    }

    /// Indices of labeled examples.
    pub fn labeled_indices(&self) -> Vec<usize> {
        (0..self.examples.len())
            .filter(|&i| self.examples[i].label.is_some())
            .collect()
    }

    /// Writes the dataset in the example-file and views-file formats.
    pub fn write(&self, data: &mut impl std::io::Write, views: &mut impl std::io::Write) -> Result<()> {
        writeln!(views, "dim {}", self.view_spec.feature_count())?;
        let names: Vec<&str> = self.labels.iter().map(|l| l.name.as_str()).collect();
        writeln!(views, "labels {}", names.join(" "))?;
        for v in self.view_spec.views() {
            let strength = match v.strength {
                Strength::Strong => "strong",
                Strength::Weak => "weak",
            };
            writeln!(views, "view {} {} {}", v.id, strength, format_ranges(&v.features))?;
        }
        for ex in &self.examples {
            let label = ex.label.map_or("?", |l| self.label_name(l));
            write!(data, "{label}")?;
            for (f, v) in ex.union_features().iter() {
                write!(data, " {f}:{v}")?;
            }
            writeln!(data)?;
        }
        Ok(())
    }
}

/// Loads an example file and its views file.
pub fn load_dataset(data_path: &Path, views_path: &Path) -> Result<Dataset> {
    let views_text = std::fs::read_to_string(views_path)?;
    let data_text = std::fs::read_to_string(data_path)?;
    parse_dataset(&data_text, data_path, &views_text, views_path)
}

pub fn parse_dataset(
    data_text: &str,
    data_path: &Path,
    views_text: &str,
    views_path: &Path,
) -> Result<Dataset> {
    let header = parse_views(views_text, views_path)?;
    let view_spec = ViewSpec::new(header.views, header.dim)?;

    let declared = header.labels.is_some();
    let mut labels: Vec<Label> = header
        .labels
        .unwrap_or_default()
        .into_iter()
        .enumerate()
        .map(|(i, name)| Label {
            id: LabelId(i as u32),
            name,
        })
        .collect();

    let mut examples = Vec::new();
    for (lineno, line) in data_text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: data_path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let mut fields = line.split_whitespace();
        let label_field = fields.next().expect("nonempty line");
        let label = if label_field == "?" {
            None
        } else if let Some(l) = labels.iter().find(|l| l.name == label_field) {
            Some(l.id)
        } else if declared {
            return Err(Error::UnknownLabel(label_field.to_string())
                .context(format!("{}:{}", data_path.display(), lineno + 1)));
        } else {
            let id = LabelId(labels.len() as u32);
            labels.push(Label {
                id,
                name: label_field.to_string(),
            });
            Some(id)
        };
        let mut pairs = Vec::new();
        let mut seen = BTreeSet::new();
        for tok in fields {
            let (f, v) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected feat:val, got `{tok}`")))?;
            let f: FeatureId = f
                .parse()
                .map_err(|_| err(format!("bad feature id `{f}`")))?;
            let v: f64 = v.parse().map_err(|_| err(format!("bad value `{v}`")))?;
            if !v.is_finite() || v < 0.0 {
                return Err(err(format!("feature values must be finite and nonnegative, got {v}")));
            }
            if !seen.insert(f) {
                return Err(err(format!("feature {f} repeated")));
            }
            pairs.push((f, v));
        }
        let fv = FeatureVector::from_pairs(pairs);
        let ex = MultiViewExample::from_features(&view_spec, &fv, label)
            .map_err(|e| e.context(format!("{}:{}", data_path.display(), lineno + 1)))?;
        examples.push(ex);
    }

    if labels.len() < 2 {
        return Err(Error::Parse {
            path: data_path.to_path_buf(),
            line: 0,
            message: format!("need at least 2 classes, found {}", labels.len()),
        });
    }
    Ok(Dataset {
        examples,
        view_spec,
        labels,
    })
}

struct ViewsHeader {
    views: Vec<View>,
    dim: Option<u32>,
    labels: Option<Vec<String>>,
}

fn parse_views(text: &str, path: &Path) -> Result<ViewsHeader> {
    let mut header = ViewsHeader {
        views: Vec::new(),
        dim: None,
        labels: None,
    };
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "dim" => {
                let d = fields
                    .get(1)
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| err("expected `dim <n>`".into()))?;
                header.dim = Some(d);
            }
            "labels" => {
                let names: Vec<String> = fields[1..].iter().map(|s| s.to_string()).collect();
                if names.iter().any(|n| n == "?") {
                    return Err(err("`?` is reserved for unlabeled examples".into()));
                }
                header.labels = Some(names);
            }
            "view" => {
                if fields.len() < 4 {
                    return Err(err("expected `view <id> strong|weak <features>`".into()));
                }
                let id: u32 = fields[1]
                    .parse()
                    .map_err(|_| err(format!("bad view id `{}`", fields[1])))?;
                let strength = match fields[2] {
                    "strong" => Strength::Strong,
                    "weak" => Strength::Weak,
                    other => return Err(err(format!("expected strong|weak, got `{other}`"))),
                };
                let mut features = Vec::new();
                for spec in fields[3..].iter().flat_map(|s| s.split(',')) {
                    if spec.is_empty() {
                        continue;
                    }
                    features.extend(parse_range(spec).map_err(err)?);
                }
                features.sort_unstable();
                let before = features.len();
                features.dedup();
                if features.len() != before {
                    return Err(err(format!("view {id} lists a feature twice")));
                }
                header.views.push(View {
                    id,
                    strength,
                    features,
                });
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    Ok(header)
}

fn parse_range(s: &str) -> std::result::Result<Vec<FeatureId>, String> {
    match s.split_once('-') {
        Some((a, b)) => {
            let a: FeatureId = a.parse().map_err(|_| format!("bad range `{s}`"))?;
            let b: FeatureId = b.parse().map_err(|_| format!("bad range `{s}`"))?;
            if a > b {
                return Err(format!("empty range `{s}`"));
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![s.parse().map_err(|_| format!("bad feature id `{s}`"))?]),
    }
}

/// Compacts sorted ids into `a-b,c,d-e` form.
pub fn format_ranges(ids: &[FeatureId]) -> String {
    let mut out = Vec::new();
    let mut i = 0;
    while i < ids.len() {
        let start = ids[i];
        let mut end = start;
        while i + 1 < ids.len() && ids[i + 1] == end + 1 {
            i += 1;
            end = ids[i];
        }
        if start == end {
            out.push(start.to_string());
        } else {
            out.push(format!("{start}-{end}"));
        }
        i += 1;
    }
    out.join(",")
}
