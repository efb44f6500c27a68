//! Partial-doodle recognition by point-cloud template matching.
//!
//! Every template is stored as one normalized point cloud per stroke prefix
//! (strokes `1..=k`). A query with `q` strokes is compared against prefix
//! `min(q, k)` of each template, so a doodle can be recognized before it is
//! finished. The distance is the greedy cloud match of the $P recognizer over
//! resampled, centroid-translated, size-normalized clouds; each class keeps
//! its best template distance, and confidences are a softmax over the
//! standardized negative distances.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classes::DoodleClass;
use crate::stroke::{normalize_strokes, resample_path, Canvas, Point, RawStroke, Stroke5Sequence, StrokeError};

/// Points per resampled cloud.
pub const CLOUD_SIZE: usize = 64;

/// Side of the nominal template drawing space.
pub const TEMPLATE_SPACE: u32 = 256;

pub const DEFAULT_TEMPLATES: &str = include_str!("../assets/templates.json");

#[derive(Debug, Error)]
pub enum RecognizeError {
    #[error("no strokes to classify")]
    EmptyInput,
    #[error("template set has no usable template for {0}")]
    UntrainedClass(DoodleClass),
    #[error("template file is malformed: {0}")]
    Parse(String),
    #[error("template file has no templates for {0}")]
    MissingClass(DoodleClass),
    #[error("unknown doodle label {0:?}")]
    UnknownLabel(String),
    #[error(transparent)]
    Stroke(#[from] StrokeError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    #[serde(rename = "class")]
    pub klass: DoodleClass,
    pub confidence: f64,
}

/// Anything that can rank the doodle classes for a partial drawing.
pub trait Recognizer: Send + Sync {
    /// Full ranking over every class, best first.
    fn classify(&self, strokes: &Stroke5Sequence) -> Result<Vec<Prediction>, RecognizeError>;
}

/// A template: its raw strokes and one normalized cloud per stroke prefix.
#[derive(Debug, Clone)]
pub struct Template {
    pub strokes: Vec<Vec<Point>>,
    prefixes: Vec<Vec<Point>>,
}

impl Template {
    pub fn new(strokes: Vec<Vec<Point>>) -> Option<Self> {
        if strokes.is_empty() || strokes.iter().any(Vec::is_empty) {
            return None;
        }
        let prefixes = (1..=strokes.len()).map(|k| normalized_cloud(&strokes[..k])).collect();
        Some(Self { strokes, prefixes })
    }

    pub fn stroke_count(&self) -> usize {
        self.strokes.len()
    }

    fn prefix(&self, query_strokes: usize) -> &[Point] {
        &self.prefixes[query_strokes.min(self.prefixes.len()) - 1]
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TemplateFileEntry {
    strokes: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TemplateFile {
    version: u32,
    classes: BTreeMap<String, Vec<TemplateFileEntry>>,
}

/// Templates for every doodle class. Immutable once built.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    by_class: Vec<Vec<Template>>,
}

impl TemplateSet {
    pub fn from_templates(mut templates: BTreeMap<DoodleClass, Vec<Template>>) -> Result<Self, RecognizeError> {
        let mut by_class = Vec::with_capacity(DoodleClass::COUNT);
        for &class in DoodleClass::ALL {
            let list = templates.remove(&class).unwrap_or_default();
            if list.is_empty() {
                return Err(RecognizeError::UntrainedClass(class));
            }
            by_class.push(list);
        }
        Ok(Self { by_class })
    }

    pub fn parse(text: &str) -> Result<Self, RecognizeError> {
        let file: TemplateFile = serde_json::from_str(text).map_err(|e| RecognizeError::Parse(e.to_string()))?;
        if file.version != 1 {
            return Err(RecognizeError::Parse(format!("unsupported version {}", file.version)));
        }
        let mut templates = BTreeMap::new();
        for (name, entries) in file.classes {
            let class: DoodleClass = name
                .parse()
                .map_err(|_| RecognizeError::Parse(format!("unknown class {name:?}")))?;
            let mut list = Vec::with_capacity(entries.len());
            for e in entries {
                let strokes = e
                    .strokes
                    .into_iter()
                    .map(|s| s.into_iter().map(|[x, y]| Point::new(x, y)).collect())
                    .collect();
                let t = Template::new(strokes)
                    .ok_or_else(|| RecognizeError::Parse(format!("{class} has a template with an empty stroke")))?;
                list.push(t);
            }
            templates.insert(class, list);
        }
        for &class in DoodleClass::ALL {
            if templates.get(&class).is_none_or(Vec::is_empty) {
                return Err(RecognizeError::MissingClass(class));
            }
        }
        Self::from_templates(templates)
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_TEMPLATES).expect("bundled templates are valid")
    }

    pub fn templates(&self, class: DoodleClass) -> &[Template] {
        &self.by_class[class.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (DoodleClass, &Template)> {
        DoodleClass::ALL
            .iter()
            .flat_map(move |&c| self.templates(c).iter().map(move |t| (c, t)))
    }
}

pub fn load_templates(path: &Path) -> Result<TemplateSet, RecognizeError> {
    TemplateSet::parse(&std::fs::read_to_string(path)?)
}

/// Resampled, centroid-centered cloud scaled so its larger side is 1.
fn normalized_cloud(strokes: &[Vec<Point>]) -> Vec<Point> {
    let mut pts = resample_path(strokes, CLOUD_SIZE).unwrap_or_else(|| {
        // only dots: spread the distinct vertices over the cloud
        let all: Vec<Point> = strokes.iter().flatten().copied().collect();
        (0..CLOUD_SIZE).map(|i| all[i % all.len()]).collect()
    });
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let size = (x1 - x0).max(y1 - y0);
    let scale = if size > 0.0 { size } else { 1.0 };
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.y).sum::<f64>() / n;
    for p in &mut pts {
        *p = Point::new((p.x - cx) / scale, (p.y - cy) / scale);
    }
    pts
}

/// Greedy point-cloud distance, trying several start points in both
/// matching directions. Gives up early once `bound` is exceeded.
fn cloud_distance(a: &[Point], b: &[Point], bound: f64) -> f64 {
    let n = a.len();
    let step = (n as f64).sqrt().floor().max(1.0) as usize;
    let mut best = bound;
    for start in (0..n).step_by(step) {
        best = best.min(directed_distance(a, b, start, best));
        best = best.min(directed_distance(b, a, start, best));
    }
    best
}

fn directed_distance(a: &[Point], b: &[Point], start: usize, bound: f64) -> f64 {
    let n = a.len();
    let mut matched = [false; CLOUD_SIZE];
    let mut sum = 0.0;
    let mut i = start;
    for weight_step in 0..n {
        let p = a[i];
        let mut min = f64::INFINITY;
        let mut min_j = 0;
        for (j, q) in b.iter().enumerate() {
            if !matched[j] {
                let d = p.distance(*q);
                if d < min {
                    min = d;
                    min_j = j;
                }
            }
        }
        matched[min_j] = true;
        let weight = 1.0 - weight_step as f64 / n as f64;
        sum += weight * min;
        if sum >= bound {
            return sum;
        }
        i = (i + 1) % n;
    }
    sum
}

/// Per-class best distance for a query cloud with `stroke_count` strokes.
fn class_distances(query: &[Point], stroke_count: usize, templates: &TemplateSet) -> Vec<f64> {
    DoodleClass::ALL
        .iter()
        .map(|&c| {
            templates.templates(c).iter().fold(f64::INFINITY, |best, t| {
                cloud_distance(query, t.prefix(stroke_count), best)
            })
        })
        .collect()
}

/// Turns per-class distances (indexed like `DoodleClass::ALL`) into a
/// ranking: ascending distance, ties by class order. Confidences are a
/// softmax of negated z-scores.
pub fn rank_from_distances(distances: &[f64]) -> Vec<Prediction> {
    debug_assert_eq!(distances.len(), DoodleClass::COUNT);
    let n = distances.len() as f64;
    let mean = distances.iter().sum::<f64>() / n;
    let var = distances.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    let z: Vec<f64> = distances
        .iter()
        .map(|d| if sd > 0.0 { (d - mean) / sd } else { 0.0 })
        .collect();
    // softmax(-z), shifted by the largest logit for stability
    let max_logit = z.iter().map(|v| -v).fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (-v - max_logit).exp()).collect();
    let total: f64 = exps.iter().sum();

    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(a.cmp(&b)));
    order
        .into_iter()
        .map(|i| Prediction {
            klass: DoodleClass::ALL[i],
            confidence: exps[i] / total,
        })
        .collect()
}

/// Ranks all classes for the strokes drawn so far.
pub fn classify_partial(strokes: &Stroke5Sequence, templates: &TemplateSet) -> Result<Vec<Prediction>, RecognizeError> {
    let raw = strokes.reconstruct();
    if raw.is_empty() {
        return Err(RecognizeError::EmptyInput);
    }
    let cloud = normalized_cloud(&raw);
    let distances = class_distances(&cloud, raw.len(), templates);
    Ok(rank_from_distances(&distances))
}

/// The default recognizer backed by a [`TemplateSet`].
#[derive(Debug, Clone)]
pub struct TemplateRecognizer {
    templates: TemplateSet,
}

impl TemplateRecognizer {
    pub fn new(templates: TemplateSet) -> Self {
        Self { templates }
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }
}

impl Recognizer for TemplateRecognizer {
    fn classify(&self, strokes: &Stroke5Sequence) -> Result<Vec<Prediction>, RecognizeError> {
        classify_partial(strokes, &self.templates)
    }
}

/// Convenience: normalize raw strokes and classify them.
pub fn classify_raw(
    recognizer: &dyn Recognizer,
    strokes: &[RawStroke],
    canvas: Canvas,
) -> Result<Vec<Prediction>, RecognizeError> {
    if strokes.is_empty() {
        return Err(RecognizeError::EmptyInput);
    }
    let seq = normalize_strokes(strokes, canvas)?;
    recognizer.classify(&seq)
}
