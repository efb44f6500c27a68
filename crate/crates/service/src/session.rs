//! Per-user drawing sessions and the store that owns them.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use sketchscreen_core::query::Sketch;
use sketchscreen_core::recognizer::{Prediction, Recognizer};
use sketchscreen_core::scorer::{score_screens, Hyperparams, ScoredScreen};
use sketchscreen_core::stroke::{bbox_of, normalize_strokes, Canvas, NormBBox, RawStroke};
use sketchscreen_core::{DoodleClass, ScreenIndex};
use uuid::Uuid;

use crate::error::ApiError;

/// Predictions shown to the user after each stroke.
pub const TOP_PREDICTIONS: usize = 3;

pub const SESSION_TTL: Duration = Duration::from_secs(30 * 60);

/// Smallest side given to a confirmed element, as a fraction of the canvas.
/// A single straight stroke would otherwise have zero height or width and
/// cover no tile.
pub const MIN_ELEMENT_SIDE: f64 = 0.01;

/// The shared, read-only search backend.
pub struct Engine {
    pub index: ScreenIndex,
    pub recognizer: Box<dyn Recognizer>,
    pub hp: Hyperparams,
}

impl Engine {
    pub fn results(&self, sketch: &Sketch, n: usize) -> Result<Vec<ScoredScreen>, ApiError> {
        if sketch.is_empty() {
            return Ok(Vec::new());
        }
        Ok(score_screens(sketch, &self.index, &self.hp, n)?)
    }
}

#[derive(Debug, Default)]
pub struct Session {
    pub sketch: Sketch,
    pub canvas: Option<Canvas>,
    pub pending: Vec<RawStroke>,
    pub redo: Vec<RawStroke>,
    pub predictions: Vec<Prediction>,
}

fn pad_axis(lo: f64, len: f64) -> (f64, f64) {
    if len >= MIN_ELEMENT_SIDE {
        return (lo, len);
    }
    let mid = lo + len / 2.0;
    let start = (mid - MIN_ELEMENT_SIDE / 2.0).clamp(0.0, 1.0 - MIN_ELEMENT_SIDE);
    (start, MIN_ELEMENT_SIDE)
}

impl Session {
    fn refresh_predictions(&mut self, engine: &Engine) -> Result<(), ApiError> {
        self.predictions = match (self.pending.is_empty(), self.canvas) {
            (false, Some(canvas)) => {
                let seq = normalize_strokes(&self.pending, canvas)?;
                let mut all = engine.recognizer.classify(&seq)?;
                all.truncate(TOP_PREDICTIONS);
                all
            }
            _ => Vec::new(),
        };
        Ok(())
    }

    pub fn submit_stroke(&mut self, engine: &Engine, stroke: RawStroke, canvas: Canvas) -> Result<(), ApiError> {
        if stroke.is_empty() {
            return Err(ApiError::EmptyStroke);
        }
        if canvas.width == 0 || canvas.height == 0 {
            return Err(ApiError::Validation {
                code: "invalid_canvas",
                detail: "canvas dimensions must be positive".into(),
            });
        }
        match self.canvas {
            Some(c) if !self.pending.is_empty() && c != canvas => {
                return Err(ApiError::Validation {
                    code: "canvas_mismatch",
                    detail: format!(
                        "stroke canvas {}x{} differs from the element's {}x{}",
                        canvas.width, canvas.height, c.width, c.height
                    ),
                })
            }
            _ => {}
        }
        // reject bad points before touching any state
        bbox_of(std::slice::from_ref(&stroke), canvas)?;
        self.canvas = Some(canvas);
        self.pending.push(stroke);
        self.redo.clear();
        self.refresh_predictions(engine)
    }

    pub fn undo(&mut self, engine: &Engine) -> Result<(), ApiError> {
        if let Some(s) = self.pending.pop() {
            self.redo.push(s);
            self.refresh_predictions(engine)?;
        }
        Ok(())
    }

    pub fn redo(&mut self, engine: &Engine) -> Result<(), ApiError> {
        if let Some(s) = self.redo.pop() {
            self.pending.push(s);
            self.refresh_predictions(engine)?;
        }
        Ok(())
    }

    /// Turns the pending strokes into a sketch element. Without a choice the
    /// current top prediction is used.
    pub fn confirm(&mut self, choice: Option<DoodleClass>) -> Result<(), ApiError> {
        let canvas = match self.canvas {
            Some(c) if !self.pending.is_empty() => c,
            _ => return Err(ApiError::NoPendingStrokes),
        };
        let class = match choice.or_else(|| self.predictions.first().map(|p| p.klass)) {
            Some(c) => c,
            None => return Err(ApiError::NoPendingStrokes),
        };
        let raw = bbox_of(&self.pending, canvas)?;
        let (x, w) = pad_axis(raw.x, raw.w);
        let (y, h) = pad_axis(raw.y, raw.h);
        let bbox = NormBBox::new(x, y, w, h).ok_or(ApiError::Validation {
            code: "invalid_bbox",
            detail: format!("element box {:?} leaves the canvas", [x, y, w, h]),
        })?;
        self.sketch = self.sketch.add_element(class, bbox)?;
        self.pending.clear();
        self.redo.clear();
        self.predictions.clear();
        Ok(())
    }

    pub fn remove_last(&mut self) {
        self.sketch = self.sketch.remove_last_element();
    }
}

struct Slot {
    session: Arc<Mutex<Session>>,
    last_used: Instant,
}

/// Sessions keyed by id. Each session has its own lock so distinct
/// sessions never wait on each other beyond the map lookup.
pub struct SessionStore {
    ttl: Duration,
    slots: Mutex<HashMap<Uuid, Slot>>,
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        Self {
            ttl,
            slots: Mutex::new(HashMap::new()),
        }
    }

    fn sweep(&self, slots: &mut HashMap<Uuid, Slot>, now: Instant) {
        slots.retain(|_, s| now.duration_since(s.last_used) < self.ttl);
    }

    pub fn create(&self) -> Uuid {
        let id = Uuid::new_v4();
        let now = Instant::now();
        let mut slots = self.slots.lock().expect("session map poisoned");
        self.sweep(&mut slots, now);
        slots.insert(
            id,
            Slot {
                session: Arc::default(),
                last_used: now,
            },
        );
        id
    }

    /// Looks up a live session and marks it used.
    pub fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        let unknown = || ApiError::UnknownSession(id.to_string());
        let uuid = Uuid::parse_str(id).map_err(|_| unknown())?;
        let now = Instant::now();
        let mut slots = self.slots.lock().expect("session map poisoned");
        self.sweep(&mut slots, now);
        let slot = slots.get_mut(&uuid).ok_or_else(unknown)?;
        slot.last_used = now;
        Ok(Arc::clone(&slot.session))
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for SessionStore {
    fn default() -> Self {
        Self::new(SESSION_TTL)
    }
}
