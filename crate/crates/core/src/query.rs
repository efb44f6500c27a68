//! The live query: an ordered list of confirmed, positioned elements.
//!
//! A squiggle (text) drawn inside an otherwise empty square (container) is
//! merged into a single text button.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classes::{DoodleClass, ElementClass, UnknownClass};
use crate::stroke::NormBBox;

/// Per-edge slack, in canvas fractions, when testing squiggle-in-square.
pub const CONTAINMENT_TOLERANCE: f64 = 0.02;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("bbox {0:?} does not fit inside the canvas")]
    InvalidBBox([f64; 4]),
    #[error(transparent)]
    UnknownClass(#[from] UnknownClass),
    #[error("malformed sketch document: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SketchElement {
    pub klass: ElementClass,
    pub bbox: NormBBox,
    pub source_doodle: Option<DoodleClass>,
}

impl SketchElement {
    pub fn new(klass: ElementClass, bbox: NormBBox) -> Self {
        Self {
            klass,
            bbox,
            source_doodle: None,
        }
    }

    pub fn from_doodle(doodle: DoodleClass, bbox: NormBBox) -> Self {
        Self {
            klass: doodle.element_class(),
            bbox,
            source_doodle: Some(doodle),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Sketch {
    elements: Vec<SketchElement>,
}

impl Sketch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a sketch as-is, without merging compound elements.
    pub fn from_elements(elements: Vec<SketchElement>) -> Self {
        Self { elements }
    }

    pub fn elements(&self) -> &[SketchElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Appends a recognized doodle and merges compound elements.
    pub fn add_element(&self, doodle: DoodleClass, bbox: NormBBox) -> Result<Sketch, QueryError> {
        if !bbox.is_valid() {
            return Err(QueryError::InvalidBBox(bbox.into()));
        }
        let mut elements = self.elements.clone();
        elements.push(SketchElement::from_doodle(doodle, bbox));
        Ok(merge_compound_elements(&Sketch { elements }))
    }

    /// Drops the last element. A merged text button goes as one unit.
    pub fn remove_last_element(&self) -> Sketch {
        let mut elements = self.elements.clone();
        elements.pop();
        Sketch { elements }
    }
}

/// Replaces each square that holds a squiggle, and nothing else, with a text
/// button covering the square.
///
/// When one square holds several squiggles only the largest is absorbed.
/// The text button takes the later of the two positions in the sequence, so
/// removing the last element right after a merge removes the whole button.
pub fn merge_compound_elements(sketch: &Sketch) -> Sketch {
    let els = &sketch.elements;
    let mut absorbed = vec![false; els.len()];
    let mut replaced: Vec<Option<usize>> = vec![None; els.len()];

    for (si, square) in els.iter().enumerate() {
        if square.klass != ElementClass::Container {
            continue;
        }
        let inside = |j: usize| j != si && square.bbox.contains(&els[j].bbox, CONTAINMENT_TOLERANCE);
        let blocked = (0..els.len()).any(|j| inside(j) && els[j].klass != ElementClass::Text);
        if blocked {
            continue;
        }
        let squiggle = (0..els.len())
            .filter(|&j| inside(j) && !absorbed[j] && els[j].klass == ElementClass::Text)
            .max_by(|&a, &b| {
                els[a]
                    .bbox
                    .area()
                    .total_cmp(&els[b].bbox.area())
                    // equal areas: prefer the earlier squiggle
                    .then(b.cmp(&a))
            });
        if let Some(qi) = squiggle {
            absorbed[qi] = true;
            absorbed[si] = true;
            replaced[si.max(qi)] = Some(si);
        }
    }

    let mut elements = Vec::with_capacity(els.len());
    for (i, el) in els.iter().enumerate() {
        if let Some(si) = replaced[i] {
            elements.push(SketchElement {
                klass: ElementClass::TextButton,
                bbox: els[si].bbox,
                source_doodle: None,
            });
        } else if !absorbed[i] {
            elements.push(*el);
        }
    }
    Sketch { elements }
}

/// One entry of a sketch document. `class` may name an element class or a
/// raw doodle class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SketchFileElement {
    pub class: String,
    pub bbox: [f64; 4],
}

/// On-disk sketch: `{"elements": [{"class": "...", "bbox": [x, y, w, h]}, ...]}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SketchFile {
    pub elements: Vec<SketchFileElement>,
}

impl SketchFile {
    /// Resolves class names and bboxes. Element class names win over doodle
    /// names; if any raw `square`/`squiggle` entries appear the result is
    /// merged.
    pub fn into_sketch(self) -> Result<Sketch, QueryError> {
        let mut raw_compound = false;
        let mut elements = Vec::with_capacity(self.elements.len());
        for e in self.elements {
            let [x, y, w, h] = e.bbox;
            let bbox = NormBBox::new(x, y, w, h).ok_or(QueryError::InvalidBBox(e.bbox))?;
            let el = match e.class.parse::<ElementClass>() {
                Ok(klass) => SketchElement::new(klass, bbox),
                Err(_) => {
                    let doodle = e.class.parse::<DoodleClass>()?;
                    raw_compound |= matches!(doodle, DoodleClass::Square | DoodleClass::Squiggle);
                    SketchElement::from_doodle(doodle, bbox)
                }
            };
            elements.push(el);
        }
        let sketch = Sketch::from_elements(elements);
        Ok(if raw_compound {
            merge_compound_elements(&sketch)
        } else {
            sketch
        })
    }

    pub fn from_sketch(sketch: &Sketch) -> Self {
        SketchFile {
            elements: sketch
                .elements()
                .iter()
                .map(|e| SketchFileElement {
                    class: e.klass.name().to_string(),
                    bbox: e.bbox.into(),
                })
                .collect(),
        }
    }
}

pub fn parse_sketch(text: &str) -> Result<Sketch, QueryError> {
    let file: SketchFile = serde_json::from_str(text).map_err(|e| QueryError::Parse(e.to_string()))?;
    file.into_sketch()
}
