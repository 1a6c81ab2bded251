//! Synthetic stand-ins for classification datasets and wrapper tasks.

use rand::seq::IndexedRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureVector, Label, LabelId, MultiViewExample, Strength, View, ViewSpec};
use crate::error::{Error, Result};
use crate::rng::SeedStream;
use crate::wrapper::{tokenize, Document, ItemSpan, LabeledDocument, WrapperTask};

/// Multi-view classification data with a hidden conjunctive concept.
///
/// Every example has `conjunction` hidden binary attributes `z_j`, drawn
/// uniformly, and is positive iff all of them are 1. Each view has its own
/// signal vocabulary: for every attribute `j` and state `s` there is a block
/// of words that is emitted `words_per_attribute` times when `z_j = s`. A
/// view's `redundancy` is the probability that an emitted signal word comes
/// from the right block; otherwise it is drawn uniformly from the view's
/// signal vocabulary, so redundancy 0 leaves the view without signal. Each
/// view also emits `noise_words` words from its noise vocabulary. Finally
/// the label is flipped with probability `noise_rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassificationSpec {
    #[serde(default = "two")]
    pub views: usize,
    #[serde(default = "twenty")]
    pub signal_features: usize,
    #[serde(default = "eighty")]
    pub noise_features: usize,
    /// One value per view, or a single value for all views.
    #[serde(default = "full_redundancy")]
    pub redundancy: Vec<f64>,
    #[serde(default)]
    pub noise_rate: f64,
    pub size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "two")]
    pub conjunction: usize,
    #[serde(default = "three")]
    pub words_per_attribute: usize,
    #[serde(default = "ten")]
    pub noise_words: usize,
}

fn two() -> usize {
    2
}
fn three() -> usize {
    3
}
fn ten() -> usize {
    10
}
fn twenty() -> usize {
    20
}
fn eighty() -> usize {
    80
}
fn full_redundancy() -> Vec<f64> {
    vec![1.0]
}

impl ClassificationSpec {
    pub fn new(size: usize, seed: u64) -> Self {
        ClassificationSpec {
            views: 2,
            signal_features: 20,
            noise_features: 80,
            redundancy: vec![1.0],
            noise_rate: 0.0,
            size,
            seed,
            conjunction: 2,
            words_per_attribute: 3,
            noise_words: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.views < 2 {
            return bad(format!("need at least 2 views, got {}", self.views));
        }
        if !(0.0..0.5).contains(&self.noise_rate) {
            return bad(format!("noise rate must lie in [0, 0.5), got {}", self.noise_rate));
        }
        if self.conjunction == 0 {
            return bad("the concept needs at least one attribute".into());
        }
        if self.signal_features < 2 * self.conjunction {
            return bad(format!(
                "{} signal features cannot give {} attributes a word block per state",
                self.signal_features, self.conjunction
            ));
        }
        if self.redundancy.len() != 1 && self.redundancy.len() != self.views {
            return bad(format!("expected 1 or {} redundancy values", self.views));
        }
        if self.redundancy.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return bad("redundancy must lie in [0, 1]".into());
        }
        if self.size == 0 {
            return bad("size must be positive".into());
        }
        Ok(())
    }

    fn redundancy_of(&self, v: usize) -> f64 {
        if self.redundancy.len() == 1 {
            self.redundancy[0]
        } else {
            self.redundancy[v]
        }
    }
}

pub fn generate_synthetic_classification(spec: &ClassificationSpec) -> Result<Dataset> {
    spec.validate()?;
    let width = (spec.signal_features + spec.noise_features) as u32;
    let views: Vec<View> = (0..spec.views as u32)
        .map(|v| View {
            id: v,
            strength: Strength::Strong,
            features: (v * width..(v + 1) * width).collect(),
        })
        .collect();
    let view_spec = ViewSpec::new(views, None)?;
    let block = spec.signal_features / (2 * spec.conjunction);
    let mut rng = SeedStream::new(spec.seed).child("classification").rng();
    let mut examples = Vec::with_capacity(spec.size);
    for _ in 0..spec.size {
        let z: Vec<bool> = (0..spec.conjunction).map(|_| rng.random_bool(0.5)).collect();
        let mut positive = z.iter().all(|&b| b);
        let mut parts = Vec::with_capacity(spec.views);
        for v in 0..spec.views {
            let base = v as u32 * width;
            let mut counts = vec![0.0f64; width as usize];
            for (j, &zj) in z.iter().enumerate() {
                let first = (2 * j + usize::from(zj)) * block;
                for _ in 0..spec.words_per_attribute {
                    let w = if rng.random_bool(spec.redundancy_of(v)) {
                        first + rng.random_range(0..block)
                    } else {
                        rng.random_range(0..spec.signal_features)
                    };
                    counts[w] += 1.0;
                }
            }
            if spec.noise_features > 0 {
                for _ in 0..spec.noise_words {
                    counts[spec.signal_features + rng.random_range(0..spec.noise_features)] += 1.0;
                }
            }
            parts.push(FeatureVector::from_pairs(
                counts.into_iter().enumerate().map(|(i, c)| (base + i as u32, c)),
            ));
        }
        if rng.random_bool(spec.noise_rate) {
            positive = !positive;
        }
        examples.push(MultiViewExample {
            views: parts,
            label: Some(LabelId(u32::from(positive))),
        });
    }
    Ok(Dataset {
        examples,
        view_spec,
        labels: vec![
            Label { id: LabelId(0), name: "neg".into() },
            Label { id: LabelId(1), name: "pos".into() },
        ],
    })
}

/// How the text around the item varies across templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ambiguity {
    /// Every template surrounds the item with the same tokens.
    #[default]
    Off,
    /// Templates differ in the label word before the item.
    PrefixVariant,
    /// Templates differ in the text after the item.
    SuffixVariant,
    /// Both.
    Both,
}

/// Restaurant-listing pages with one labeled phone number each.
///
/// Template 0 is used with probability `1 - rare_mass`; the other
/// `templates - 1` share `rare_mass` equally. Distractors are further phone
/// numbers under lower-case labels (fax, cell, home, office), placed before
/// or after the item block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WrapperSpec {
    #[serde(default = "three")]
    pub templates: usize,
    #[serde(default = "one")]
    pub distractors: usize,
    #[serde(default)]
    pub ambiguity: Ambiguity,
    pub size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "rare")]
    pub rare_mass: f64,
    /// Number of task files to generate.
    #[serde(default = "one")]
    pub tasks: usize,
    /// Smallest allowed size is `folds * 2`.
    #[serde(default = "twenty")]
    pub folds: usize,
}

fn one() -> usize {
    1
}
fn rare() -> f64 {
    0.2
}

impl WrapperSpec {
    pub fn new(ambiguity: Ambiguity, size: usize, seed: u64) -> Self {
        WrapperSpec {
            templates: 3,
            distractors: 1,
            ambiguity,
            size,
            seed,
            rare_mass: rare(),
            tasks: 1,
            folds: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.templates == 0 || self.templates > PREFIX_LABELS.len() {
            return bad(format!("templates must lie in 1..={}", PREFIX_LABELS.len()));
        }
        if self.size < self.folds * 2 {
            return bad(format!("size {} is below folds x 2 = {}", self.size, self.folds * 2));
        }
        if !(0.0..1.0).contains(&self.rare_mass) {
            return bad("rare_mass must lie in [0, 1)".into());
        }
        if self.tasks == 0 {
            return bad("tasks must be positive".into());
        }
        Ok(())
    }
}

const PREFIX_LABELS: [&str; 6] = ["Phone", "Tel", "Telephone", "Ph", "Voice", "Contact"];
const SUFFIX_LABELS: [&str; 6] = ["Cuisine", "Food", "Style", "Menu", "Kitchen", "Fare"];
const SUFFIX_TAGS: [&str; 6] = ["<br>", "<hr>", "<br>", "<hr>", "<br>", "<hr>"];
const DISTRACTOR_LABELS: [&str; 4] = ["fax", "cell", "home", "office"];
const NAMES: [&str; 12] = [
    "Casa", "Golden", "Dragon", "Blue", "Olive", "Garden", "Saffron", "Harbor", "Maple", "Luna",
    "Copper", "Basil",
];
const KINDS: [&str; 6] = ["Grill", "Bistro", "Cafe", "Kitchen", "Diner", "House"];
const STREETS: [&str; 8] = ["Main", "Oak", "Pine", "Sunset", "Ocean", "Elm", "Lake", "Hill"];
const CITIES: [&str; 6] = ["Pasadena", "Venice", "Burbank", "Glendale", "Malibu", "Encino"];
const CUISINES: [&str; 8] = ["Mexican", "Thai", "Greek", "French", "Cuban", "Italian", "Korean", "Indian"];

#[derive(Debug, Clone, Copy)]
struct Template {
    label: &'static str,
    after_tag: &'static str,
    after_label: &'static str,
}

fn template(ambiguity: Ambiguity, t: usize) -> Template {
    let prefix = matches!(ambiguity, Ambiguity::PrefixVariant | Ambiguity::Both);
    let suffix = matches!(ambiguity, Ambiguity::SuffixVariant | Ambiguity::Both);
    let p = if prefix { t } else { 0 };
    let s = if suffix { t } else { 0 };
    Template {
        label: PREFIX_LABELS[p],
        after_tag: SUFFIX_TAGS[s],
        after_label: SUFFIX_LABELS[s],
    }
}

fn phone(rng: &mut crate::rng::Rng) -> String {
    format!(
        "({}{:02}) {:03}-{:04}",
        rng.random_range(2..10),
        rng.random_range(0..100),
        rng.random_range(100..1000),
        rng.random_range(0..10000)
    )
}

fn pick<'a>(xs: &[&'a str], rng: &mut crate::rng::Rng) -> &'a str {
    xs.choose(rng).copied().expect("nonempty list")
}

fn document(spec: &WrapperSpec, id: usize, rng: &mut crate::rng::Rng) -> Result<LabeledDocument> {
    let t = if spec.templates > 1 && rng.random_bool(spec.rare_mass) {
        rng.random_range(1..spec.templates)
    } else {
        0
    };
    let tpl = template(spec.ambiguity, t);
    let name = format!("{} {}", pick(&NAMES, rng), pick(&KINDS, rng));
    let mut blocks: Vec<String> = vec![format!(
        "<p> Address: {} {} St, {} </p>",
        rng.random_range(1..2000),
        pick(&STREETS, rng),
        pick(&CITIES, rng)
    )];
    if rng.random_bool(0.5) {
        blocks.push(format!(
            "<p> Open daily {} am to {} pm </p>",
            rng.random_range(6..12),
            rng.random_range(5..12)
        ));
    }
    let (mut before, mut after) = (Vec::new(), Vec::new());
    for _ in 0..spec.distractors {
        let block = format!("<p> <b>{}:</b> {} </p>", pick(&DISTRACTOR_LABELS, rng), phone(rng));
        if rng.random_bool(0.5) {
            before.push(block);
        } else {
            after.push(block);
        }
    }
    let mut prefix = format!("<html><head><title>{name}</title></head><body>\n<h1>{name}</h1>\n");
    for b in blocks.iter().chain(&before) {
        prefix.push_str(b);
        prefix.push('\n');
    }
    prefix.push_str(&format!("<p> <b>{}:</b> ", tpl.label));
    let item = phone(rng);
    let mut raw = prefix.clone();
    raw.push_str(&item);
    raw.push_str(&format!(
        " {} {}: {} </p>\n",
        tpl.after_tag,
        tpl.after_label,
        pick(&CUISINES, rng)
    ));
    for b in &after {
        raw.push_str(b);
        raw.push('\n');
    }
    raw.push_str("</body></html>\n");
    let start = tokenize(&prefix).len();
    let end = start + tokenize(&item).len();
    LabeledDocument::new(Document::new(format!("doc{id:04}"), raw), ItemSpan { start, end })
}

/// Generates `spec.tasks` tasks; task `i` draws from substream `i`.
pub fn generate_synthetic_wrapper(spec: &WrapperSpec) -> Result<Vec<WrapperTask>> {
    spec.validate()?;
    let root = SeedStream::new(spec.seed).child("wrapper");
    (0..spec.tasks)
        .map(|i| {
            let mut rng = root.index(i as u64).rng();
            let docs = (0..spec.size)
                .map(|d| document(spec, d, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            Ok(WrapperTask {
                item: "phone".into(),
                docs,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{BaseLearnerSpec, Sample, TrainingData};
    use crate::wrapper::{learn_rule, Direction, Token};

    #[test]
    fn classification_is_deterministic() {
        let spec = ClassificationSpec::new(50, 9);
        let a = generate_synthetic_classification(&spec).unwrap();
        let b = generate_synthetic_classification(&spec).unwrap();
        let text = |d: &Dataset| {
            let (mut x, mut v) = (Vec::new(), Vec::new());
            d.write(&mut x, &mut v).unwrap();
            (x, v)
        };
        assert_eq!(text(&a), text(&b));
        let c = generate_synthetic_classification(&ClassificationSpec::new(50, 10)).unwrap();
        assert_ne!(text(&a), text(&c));
    }

    fn single_view_accuracy(d: &Dataset, view: usize, n_train: usize) -> f64 {
        let samples: Vec<Sample<'_>> = d
            .examples
            .iter()
            .map(|e| Sample { x: &e.views[view], y: e.label.unwrap() })
            .collect();
        let vocab = d.view_spec.views()[view].features.clone();
        let data = TrainingData { samples: samples[..n_train].to_vec(), n_classes: 2, vocabulary: &vocab };
        let h = BaseLearnerSpec::naive_bayes().train(&data).unwrap();
        let test = &samples[n_train..];
        test.iter().filter(|s| h.predict(s.x).label == s.y).count() as f64 / test.len() as f64
    }

    #[test]
    fn noiseless_views_are_each_sufficient() {
        let d = generate_synthetic_classification(&ClassificationSpec::new(1000, 1)).unwrap();
        for v in 0..2 {
            assert_eq!(single_view_accuracy(&d, v, 800), 1.0, "view {v}");
        }
    }

    #[test]
    fn signal_free_view_is_no_better_than_the_prior() {
        let mut spec = ClassificationSpec::new(1000, 2);
        spec.redundancy = vec![1.0, 0.0];
        let d = generate_synthetic_classification(&spec).unwrap();
        let neg = d.examples[800..].iter().filter(|e| e.label == Some(LabelId(0))).count() as f64 / 200.0;
        let acc = single_view_accuracy(&d, 1, 800);
        assert!((acc - neg).abs() < 0.08, "acc {acc} prior {neg}");
        assert!(single_view_accuracy(&d, 0, 800) > 0.99);
    }

    #[test]
    fn invalid_specs() {
        let mut s = ClassificationSpec::new(10, 0);
        s.views = 1;
        assert!(generate_synthetic_classification(&s).is_err());
        let mut s = ClassificationSpec::new(10, 0);
        s.noise_rate = 0.5;
        assert!(s.validate().is_err());
        assert!(WrapperSpec::new(Ambiguity::Off, 39, 0).validate().is_err());
        assert!(WrapperSpec::new(Ambiguity::Off, 40, 0).validate().is_ok());
    }

    fn rule_accuracy(task: &WrapperTask, dir: Direction) -> f64 {
        let train: Vec<(&[Token], usize)> =
            task.docs[..2].iter().map(|d| (d.doc.tokens.as_slice(), d.span.start)).collect();
        let rule = learn_rule(&train, dir).unwrap();
        let hits = task.docs.iter().filter(|d| rule.apply(&d.doc.tokens) == Some(d.span.start)).count();
        hits as f64 / task.docs.len() as f64
    }

    #[test]
    fn unambiguous_tasks_are_learnable_from_two_documents() {
        let mut spec = WrapperSpec::new(Ambiguity::Off, 100, 4);
        spec.distractors = 2;
        let task = &generate_synthetic_wrapper(&spec).unwrap()[0];
        for d in &task.docs {
            assert_eq!(d.item_tokens().len(), 6);
            assert_eq!(d.item_tokens()[0].text, "(");
        }
        assert_eq!(rule_accuracy(task, Direction::Forward), 1.0);
        assert_eq!(rule_accuracy(task, Direction::Backward), 1.0);
    }

    #[test]
    fn prefix_variants_need_forward_generalization() {
        let mut spec = WrapperSpec::new(Ambiguity::PrefixVariant, 200, 5);
        spec.rare_mass = 0.5;
        let task = &generate_synthetic_wrapper(&spec).unwrap()[0];
        // Two documents with different labels: the forward rule cannot use the label word.
        let phone = task.docs.iter().find(|d| d.doc.raw.contains("Phone:")).unwrap();
        let tel = task.docs.iter().find(|d| d.doc.raw.contains("Tel:")).unwrap();
        let docs = [(phone.doc.tokens.as_slice(), phone.span.start), (tel.doc.tokens.as_slice(), tel.span.start)];
        let fwd = learn_rule(&docs, Direction::Forward).unwrap();
        assert!(!fwd.to_string().contains("Phone") && !fwd.to_string().contains("Tel"), "{fwd}");
        for (tokens, target) in docs {
            assert_eq!(fwd.apply(tokens), Some(target));
        }
        let bwd = learn_rule(&docs, Direction::Backward).unwrap();
        assert!(bwd.landmarks.iter().all(|l| l.0.iter().all(|m| !m.is_wildcard())), "{bwd}");
        assert_eq!(rule_accuracy(task, Direction::Backward), 1.0);
    }

    #[test]
    fn wrapper_generation_is_deterministic() {
        let mut spec = WrapperSpec::new(Ambiguity::Both, 60, 3);
        spec.tasks = 2;
        let a = generate_synthetic_wrapper(&spec).unwrap();
        let b = generate_synthetic_wrapper(&spec).unwrap();
        assert_eq!(a[0].to_text(), b[0].to_text());
        assert_ne!(a[0].to_text(), a[1].to_text());
    }
}
