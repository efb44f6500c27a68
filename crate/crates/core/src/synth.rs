//! Seeded synthetic screen corpora with ground-truth manifests.
//!
//! Generated screens stand in for a real corpus. Every screen carries at
//! least three mapped elements, so it survives filtering, and some elements
//! use mislabeled `input`/`image` labels that only the repair rules resolve.

use std::collections::{BTreeMap, BTreeSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classes::ElementClass;
use crate::eval::EvalPair;
use crate::query::{Sketch, SketchElement};
use crate::screen::{default_label_fixes, LabelFixRule, ScreenDoc, ScreenElement};
use crate::stroke::NormBBox;

pub const SCREEN_WIDTH: u32 = 1440;
pub const SCREEN_HEIGHT: u32 = 2560;

const MIN_ELEMENTS: usize = 3;
const MAX_ELEMENTS: usize = 12;
const PLACEMENT_ATTEMPTS: usize = 12;
/// Chance that a repairable element is emitted with a broken label.
const MISLABEL_RATE: f64 = 0.35;
/// Chance of one extra element whose label maps to nothing.
const DECORATION_RATE: f64 = 0.15;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("corpus size must be at least 1")]
    InvalidCount,
    #[error("invalid rarity profile: {0}")]
    InvalidProfile(String),
    #[error("{class} is pinned to df={df} but the corpus has only {n} screens")]
    DfExceedsCount { class: ElementClass, df: usize, n: usize },
}

/// Relative class frequencies, with optional exact document frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RarityProfile {
    #[serde(default)]
    pub name: String,
    /// Sampling weight per class; absent classes are never sampled.
    pub weights: BTreeMap<ElementClass, f64>,
    /// Classes placed on exactly this many screens (one element each) and
    /// excluded from weighted sampling.
    #[serde(default)]
    pub exact_df: BTreeMap<ElementClass, usize>,
}

impl RarityProfile {
    pub const PRESETS: &'static [&'static str] = &["uniform", "rico"];

    pub fn uniform() -> Self {
        Self {
            name: "uniform".into(),
            weights: ElementClass::ALL.iter().map(|&c| (c, 1.0)).collect(),
            exact_df: BTreeMap::new(),
        }
    }

    /// Skewed toward text, images and containers, as in real app screens.
    pub fn rico() -> Self {
        use ElementClass as E;
        let weights = [
            (E::Text, 30.0),
            (E::Image, 12.0),
            (E::Container, 8.0),
            (E::TextButton, 8.0),
            (E::DefaultIcon, 8.0),
            (E::Back, 4.0),
            (E::Avatar, 3.0),
            (E::Menu, 3.0),
            (E::Search, 3.0),
            (E::Cancel, 2.0),
            (E::Plus, 2.0),
            (E::Setting, 2.0),
            (E::Share, 2.0),
            (E::Star, 2.0),
            (E::Checkbox, 1.5),
            (E::Dropdown, 1.5),
            (E::Forward, 1.5),
            (E::Switch, 1.5),
            (E::Home, 1.2),
            (E::LeftArrow, 1.0),
            (E::Play, 1.0),
            (E::Slider, 1.0),
            (E::Envelope, 0.8),
            (E::Camera, 0.7),
        ];
        Self {
            name: "rico".into(),
            weights: weights.into_iter().collect(),
            exact_df: BTreeMap::new(),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "uniform" => Some(Self::uniform()),
            "rico" => Some(Self::rico()),
            _ => None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SynthError> {
        let p: Self = serde_json::from_str(text).map_err(|e| SynthError::InvalidProfile(e.to_string()))?;
        Ok(p)
    }

    pub fn with_exact_df(mut self, class: ElementClass, df: usize) -> Self {
        self.exact_df.insert(class, df);
        self
    }

    fn validate(&self, n: usize) -> Result<(), SynthError> {
        if let Some((c, w)) = self.weights.iter().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(SynthError::InvalidProfile(format!("weight {w} for {c}")));
        }
        if !self.sampled_classes().iter().any(|(_, w)| *w > 0.0) {
            return Err(SynthError::InvalidProfile("no class has a positive weight".into()));
        }
        for (&class, &df) in &self.exact_df {
            if df > n {
                return Err(SynthError::DfExceedsCount { class, df, n });
            }
        }
        Ok(())
    }

    fn sampled_classes(&self) -> Vec<(ElementClass, f64)> {
        self.weights
            .iter()
            .filter(|(c, w)| !self.exact_df.contains_key(c) && **w > 0.0)
            .map(|(&c, &w)| (c, w))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestElement {
    pub class: ElementClass,
    /// `[x, y, w, h]` in screen pixels, as written to the screen document.
    pub bbox: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestScreen {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub elements: Vec<ManifestElement>,
}

/// Ground truth: the class each element should index under, per screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub seed: u64,
    pub profile: RarityProfile,
    pub df: BTreeMap<ElementClass, usize>,
    pub screens: Vec<ManifestScreen>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub docs: Vec<ScreenDoc>,
    pub manifest: CorpusManifest,
}

/// Typical element size as fractions of screen width and height.
fn size_range(class: ElementClass) -> ((f64, f64), (f64, f64)) {
    use ElementClass as E;
    match class {
        E::Text => ((0.2, 0.9), (0.02, 0.06)),
        E::Image => ((0.3, 1.0), (0.1, 0.35)),
        E::Container => ((0.5, 1.0), (0.1, 0.4)),
        E::TextButton => ((0.2, 0.9), (0.04, 0.08)),
        E::Slider => ((0.4, 0.9), (0.02, 0.04)),
        E::Switch => ((0.1, 0.18), (0.025, 0.04)),
        E::Search => ((0.08, 0.9), (0.03, 0.06)),
        // square-ish icons in pixels
        _ => ((0.06, 0.15), (0.0, 0.0)),
    }
}

fn random_rect(rng: &mut ChaCha8Rng, class: ElementClass) -> [f64; 4] {
    let (sw, sh) = (f64::from(SCREEN_WIDTH), f64::from(SCREEN_HEIGHT));
    let ((w0, w1), (h0, h1)) = size_range(class);
    let w = (rng.random_range(w0..=w1) * sw).round().max(8.0);
    let h = if h1 > 0.0 {
        rng.random_range(h0..=h1) * sh
    } else {
        w * rng.random_range(0.8..=1.2)
    }
    .round()
    .max(8.0);
    let x = rng.random_range(0.0..=(sw - w)).round();
    let y = rng.random_range(0.0..=(sh - h)).round();
    [x, y, w, h]
}

fn overlaps(a: &[f64; 4], b: &[f64; 4]) -> bool {
    a[0] < b[0] + b[2] && b[0] < a[0] + a[2] && a[1] < b[1] + b[3] && b[1] < a[1] + a[3]
}

/// Tries a few placements and keeps the first that overlaps nothing, else
/// the last attempt.
fn place(rng: &mut ChaCha8Rng, class: ElementClass, placed: &[[f64; 4]]) -> [f64; 4] {
    let mut rect = random_rect(rng, class);
    for _ in 1..PLACEMENT_ATTEMPTS {
        if !placed.iter().any(|p| overlaps(p, &rect)) {
            break;
        }
        rect = random_rect(rng, class);
    }
    rect
}

fn widget_class(class: ElementClass) -> &'static str {
    use ElementClass as E;
    match class {
        E::Text => "android.widget.TextView",
        E::Image => "android.widget.ImageView",
        E::Container => "android.widget.LinearLayout",
        E::TextButton => "android.widget.Button",
        E::Search => "android.widget.EditText",
        _ => "android.widget.ImageButton",
    }
}

/// Source label and classes for an element of `class`, sometimes broken in
/// a way one of the repair rules undoes.
fn emit_element(rng: &mut ChaCha8Rng, class: ElementClass, bbox: [f64; 4], rules: &[LabelFixRule]) -> ScreenElement {
    let fix = rules.iter().find(|r| r.new_label == class);
    if let Some(rule) = fix.filter(|_| rng.random_bool(MISLABEL_RATE)) {
        let label = if rng.random_bool(0.5) { "input" } else { "image" };
        let elements: Vec<&String> = rule.element_classes.iter().collect();
        let containers: Vec<&String> = rule.container_classes.iter().collect();
        let use_container = !containers.is_empty() && rng.random_bool(0.5);
        let (android_class, container_class) = if use_container {
            let c = containers.choose(rng).expect("non-empty");
            ("android.view.View".to_string(), Some(format!("android.widget.{c}")))
        } else {
            let e = elements.choose(rng).expect("rules name element classes");
            (format!("com.example.widget.{e}"), None)
        };
        return ScreenElement {
            label: label.into(),
            android_class,
            container_class,
            bbox,
        };
    }
    ScreenElement {
        label: class.name().into(),
        android_class: widget_class(class).into(),
        container_class: None,
        bbox,
    }
}

fn screen_id(i: usize, n: usize) -> String {
    let width = n.to_string().len().max(6);
    format!("screen-{i:0width$}")
}

/// Generates `n` accepted screens. Identical inputs give identical output.
pub fn generate_synthetic_corpus(seed: u64, n: usize, profile: &RarityProfile) -> Result<SyntheticCorpus, SynthError> {
    if n == 0 {
        return Err(SynthError::InvalidCount);
    }
    profile.validate(n)?;
    let rules = default_label_fixes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut pinned: Vec<Vec<ElementClass>> = vec![Vec::new(); n];
    for (&class, &df) in &profile.exact_df {
        for s in rand::seq::index::sample(&mut rng, n, df) {
            pinned[s].push(class);
        }
    }
    let sampled = profile.sampled_classes();
    let dist =
        WeightedIndex::new(sampled.iter().map(|(_, w)| *w)).map_err(|e| SynthError::InvalidProfile(e.to_string()))?;

    let mut docs = Vec::with_capacity(n);
    let mut screens = Vec::with_capacity(n);
    let mut df: BTreeMap<ElementClass, usize> = BTreeMap::new();
    for (i, pins) in pinned.into_iter().enumerate() {
        let count = rng.random_range(MIN_ELEMENTS..=MAX_ELEMENTS).max(pins.len());
        let mut classes = pins;
        while classes.len() < count {
            classes.push(sampled[dist.sample(&mut rng)].0);
        }

        let mut rects: Vec<[f64; 4]> = Vec::with_capacity(count + 1);
        let mut elements = Vec::with_capacity(count + 1);
        let mut truth = Vec::with_capacity(count);
        for &class in &classes {
            let bbox = place(&mut rng, class, &rects);
            rects.push(bbox);
            elements.push(emit_element(&mut rng, class, bbox, &rules));
            truth.push(ManifestElement { class, bbox });
        }
        if rng.random_bool(DECORATION_RATE) {
            let bbox = place(&mut rng, ElementClass::Image, &rects);
            elements.push(ScreenElement {
                label: "map_view".into(),
                android_class: "com.google.android.gms.maps.MapView".into(),
                container_class: None,
                bbox,
            });
        }

        let present: BTreeSet<ElementClass> = classes.iter().copied().collect();
        for c in present {
            *df.entry(c).or_default() += 1;
        }
        let id = screen_id(i, n);
        docs.push(ScreenDoc {
            id: id.clone(),
            width: SCREEN_WIDTH,
            height: SCREEN_HEIGHT,
            elements,
        });
        screens.push(ManifestScreen {
            id,
            width: SCREEN_WIDTH,
            height: SCREEN_HEIGHT,
            elements: truth,
        });
    }

    Ok(SyntheticCorpus {
        docs,
        manifest: CorpusManifest {
            seed,
            profile: profile.clone(),
            df,
            screens,
        },
    })
}

/// How query sketches are derived from target screens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSpec {
    pub count: usize,
    pub max_elements: usize,
    /// Maximum displacement of each bbox edge, as a fraction of the canvas.
    pub jitter: f64,
}

impl Default for PairSpec {
    fn default() -> Self {
        Self {
            count: 100,
            max_elements: 6,
            jitter: 0.05,
        }
    }
}

/// Smallest side a jittered box may shrink to.
const MIN_SIDE: f64 = 0.01;

fn jitter_interval(rng: &mut ChaCha8Rng, lo: f64, hi: f64, j: f64) -> (f64, f64) {
    let mut a = (lo + rng.random_range(-j..=j)).clamp(0.0, 1.0);
    let mut b = (hi + rng.random_range(-j..=j)).clamp(0.0, 1.0);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    if b - a < MIN_SIDE {
        let mid = ((a + b) / 2.0).clamp(MIN_SIDE / 2.0, 1.0 - MIN_SIDE / 2.0);
        a = mid - MIN_SIDE / 2.0;
        b = mid + MIN_SIDE / 2.0;
    }
    (a, b)
}

/// Picks distinct target screens and sketches up to `max_elements` of each
/// target's elements with every bbox edge moved by up to `jitter`.
pub fn generate_eval_pairs(manifest: &CorpusManifest, seed: u64, spec: PairSpec) -> Vec<EvalPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = manifest.screens.len();
    let count = spec.count.min(n);
    let mut pairs = Vec::with_capacity(count);
    for t in rand::seq::index::sample(&mut rng, n, count) {
        let screen = &manifest.screens[t];
        let m = spec.max_elements.min(screen.elements.len());
        let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, screen.elements.len(), m).into_vec();
        picked.sort_unstable();
        let (sw, sh) = (f64::from(screen.width), f64::from(screen.height));
        let elements = picked
            .into_iter()
            .map(|k| {
                let e = &screen.elements[k];
                let [x, y, w, h] = e.bbox;
                let (x0, x1) = jitter_interval(&mut rng, x / sw, (x + w) / sw, spec.jitter);
                let (y0, y1) = jitter_interval(&mut rng, y / sh, (y + h) / sh, spec.jitter);
                let bbox = NormBBox::new(x0, y0, x1 - x0, y1 - y0).expect("jittered box stays in the canvas");
                SketchElement::new(e.class, bbox)
            })
            .collect();
        pairs.push(EvalPair {
            sketch: Sketch::from_elements(elements),
            target_id: screen.id.clone(),
        });
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{build_index, compute_idf};
    use crate::screen::{filter_screen, FilterVerdict};

    #[test]
    fn deterministic_for_a_seed() {
        let a = generate_synthetic_corpus(7, 10, &RarityProfile::rico()).unwrap();
        let b = generate_synthetic_corpus(7, 10, &RarityProfile::rico()).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_corpus(8, 10, &RarityProfile::rico()).unwrap();
        assert_ne!(a.docs, c.docs);
    }

    #[test]
    fn every_screen_is_accepted_and_df_matches() {
        let rules = default_label_fixes();
        let corpus = generate_synthetic_corpus(3, 400, &RarityProfile::uniform()).unwrap();
        for d in &corpus.docs {
            assert_eq!(filter_screen(d, &rules), FilterVerdict::Accept, "{}", d.id);
        }
        let (index, report) = build_index(&corpus.docs, &rules).unwrap();
        assert_eq!(report.accepted, 400);
        assert_eq!(index.df_table(), corpus.manifest.df);
    }

    #[test]
    fn some_labels_need_repair() {
        let corpus = generate_synthetic_corpus(11, 300, &RarityProfile::uniform()).unwrap();
        let broken = corpus
            .docs
            .iter()
            .flat_map(|d| &d.elements)
            .filter(|e| e.label == "input" || e.label == "image")
            .count();
        assert!(broken > 0);
    }

    #[test]
    fn pinned_df_and_idf_order() {
        let profile = RarityProfile::rico().with_exact_df(ElementClass::Camera, 1);
        let corpus = generate_synthetic_corpus(5, 200, &profile).unwrap();
        assert_eq!(corpus.manifest.df[&ElementClass::Camera], 1);
        let idf = compute_idf(200, &corpus.manifest.df);
        let (top, _) = idf.iter().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        assert_eq!(*top, ElementClass::Camera);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            generate_synthetic_corpus(1, 0, &RarityProfile::uniform()),
            Err(SynthError::InvalidCount)
        ));
        let p = RarityProfile::uniform().with_exact_df(ElementClass::Star, 5);
        assert!(matches!(
            generate_synthetic_corpus(1, 3, &p),
            Err(SynthError::DfExceedsCount { df: 5, n: 3, .. })
        ));
        let empty = RarityProfile {
            name: String::new(),
            weights: BTreeMap::new(),
            exact_df: BTreeMap::new(),
        };
        assert!(matches!(
            generate_synthetic_corpus(1, 3, &empty),
            Err(SynthError::InvalidProfile(_))
        ));
        assert!(RarityProfile::from_json("{").is_err());
        let p = RarityProfile::from_json(r#"{"weights": {"text": 1}, "exact_df": {"camera": 1}}"#).unwrap();
        assert_eq!(p.exact_df[&ElementClass::Camera], 1);
    }

    #[test]
    fn eval_pairs_stay_in_canvas() {
        let corpus = generate_synthetic_corpus(2, 50, &RarityProfile::rico()).unwrap();
        let pairs = generate_eval_pairs(
            &corpus.manifest,
            9,
            PairSpec {
                count: 20,
                ..PairSpec::default()
            },
        );
        assert_eq!(pairs.len(), 20);
        let ids: BTreeSet<_> = pairs.iter().map(|p| &p.target_id).collect();
        assert_eq!(ids.len(), 20);
        for p in &pairs {
            assert!((1..=6).contains(&p.sketch.len()));
            for e in p.sketch.elements() {
                assert!(e.bbox.is_valid());
            }
        }
        assert_eq!(
            pairs,
            generate_eval_pairs(
                &corpus.manifest,
                9,
                PairSpec {
                    count: 20,
                    ..PairSpec::default()
                }
            )
        );
    }
}
