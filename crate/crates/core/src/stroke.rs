//! Raw drawing input and its conversion to stroke-5 sequences.
//!
//! A stroke-5 point is `(dx, dy, pen_down, pen_up, done)`. Deltas are
//! measured between consecutive vertices (across stroke boundaries too, the
//! first vertex of the first stroke is measured from the origin) and divided
//! by the larger canvas dimension so that aspect ratio survives and every
//! delta lies in `[-1, 1]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Points up to this many pixels outside the canvas are clamped back in.
pub const CLAMP_SLACK_PX: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrokeError {
    #[error("no strokes or an empty stroke")]
    EmptyInput,
    #[error("point ({x}, {y}) lies outside the {width}x{height} canvas")]
    OutOfBounds { x: f64, y: f64, width: u32, height: u32 },
    #[error("canvas dimensions must be positive")]
    InvalidCanvas,
    #[error("stroke has zero arc length")]
    DegenerateStroke,
    #[error("resample count must be at least 2, got {0}")]
    InvalidCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Drawing surface size in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
}

impl Canvas {
    pub const fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    fn check(self) -> Result<(), StrokeError> {
        if self.width == 0 || self.height == 0 {
            return Err(StrokeError::InvalidCanvas);
        }
        Ok(())
    }

    /// Shared divisor for stroke-5 deltas.
    pub fn scale(self) -> f64 {
        f64::from(self.width.max(self.height))
    }

    /// Clamps a point that is at most [`CLAMP_SLACK_PX`] outside the canvas;
    /// anything further out is rejected.
    pub fn clamp(self, p: Point) -> Result<Point, StrokeError> {
        let (w, h) = (f64::from(self.width), f64::from(self.height));
        let inside = |v: f64, max: f64| v >= -CLAMP_SLACK_PX && v <= max + CLAMP_SLACK_PX;
        if !(inside(p.x, w) && inside(p.y, h)) {
            return Err(StrokeError::OutOfBounds {
                x: p.x,
                y: p.y,
                width: self.width,
                height: self.height,
            });
        }
        Ok(Point::new(p.x.clamp(0.0, w), p.y.clamp(0.0, h)))
    }
}

impl From<[u32; 2]> for Canvas {
    fn from([width, height]: [u32; 2]) -> Self {
        Self { width, height }
    }
}

impl From<Canvas> for [u32; 2] {
    fn from(c: Canvas) -> Self {
        [c.width, c.height]
    }
}

/// Points drawn between one touch-down and the following touch-up.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct RawStroke {
    pub points: Vec<Point>,
}

impl RawStroke {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn from_xy(points: &[(f64, f64)]) -> Self {
        Self::new(points.iter().copied().map(Point::from).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn arc_length(&self) -> f64 {
        polyline_length(&self.points)
    }
}

impl From<Vec<[f64; 2]>> for RawStroke {
    fn from(v: Vec<[f64; 2]>) -> Self {
        Self::new(v.into_iter().map(|[x, y]| Point::new(x, y)).collect())
    }
}

impl From<RawStroke> for Vec<[f64; 2]> {
    fn from(s: RawStroke) -> Self {
        s.points.into_iter().map(|p| [p.x, p.y]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PenState {
    /// The pen stays on the canvas after this vertex.
    Down,
    /// The stroke ends at this vertex.
    Up,
    /// Last vertex of the whole drawing.
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stroke5Point {
    pub dx: f64,
    pub dy: f64,
    pub pen: PenState,
}

impl Stroke5Point {
    /// The `(dx, dy, pen_down, pen_up, done)` tuple.
    pub fn to_tuple(self) -> [f64; 5] {
        let flag = |s| if self.pen == s { 1.0 } else { 0.0 };
        [
            self.dx,
            self.dy,
            flag(PenState::Down),
            flag(PenState::Up),
            flag(PenState::Done),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stroke5Sequence {
    pub points: Vec<Stroke5Point>,
    pub canvas: Canvas,
}

impl Stroke5Sequence {
    /// Number of strokes encoded in the sequence.
    pub fn stroke_count(&self) -> usize {
        self.points.iter().filter(|p| p.pen != PenState::Down).count()
    }

    /// Integrates the deltas back into absolute strokes, in units of
    /// `canvas.scale()` (multiply by it to get pixels).
    pub fn reconstruct(&self) -> Vec<Vec<Point>> {
        let mut strokes = Vec::new();
        let mut current = Vec::new();
        let (mut x, mut y) = (0.0, 0.0);
        for p in &self.points {
            x += p.dx;
            y += p.dy;
            current.push(Point::new(x, y));
            if p.pen != PenState::Down {
                strokes.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            strokes.push(current);
        }
        strokes
    }

    /// Same as [`reconstruct`](Self::reconstruct) but in pixels.
    pub fn reconstruct_pixels(&self) -> Vec<Vec<Point>> {
        let s = self.canvas.scale();
        self.reconstruct()
            .into_iter()
            .map(|st| st.into_iter().map(|p| Point::new(p.x * s, p.y * s)).collect())
            .collect()
    }
}

/// Axis-aligned box in canvas fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct NormBBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

/// Slack for `x + w <= 1` style checks on values produced by float arithmetic.
const BBOX_EPS: f64 = 1e-9;

impl NormBBox {
    /// Returns `None` unless the box lies within the unit square.
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Option<Self> {
        let b = Self { x, y, w, h };
        b.is_valid().then_some(b)
    }

    pub fn is_valid(&self) -> bool {
        let unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        unit(self.x)
            && unit(self.y)
            && unit(self.w)
            && unit(self.h)
            && self.x + self.w <= 1.0 + BBOX_EPS
            && self.y + self.h <= 1.0 + BBOX_EPS
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// True when `inner` fits inside `self` with every edge allowed to poke
    /// out by `tol`.
    pub fn contains(&self, inner: &NormBBox, tol: f64) -> bool {
        inner.x >= self.x - tol
            && inner.y >= self.y - tol
            && inner.right() <= self.right() + tol
            && inner.bottom() <= self.bottom() + tol
    }
}

impl TryFrom<[f64; 4]> for NormBBox {
    type Error = String;

    fn try_from([x, y, w, h]: [f64; 4]) -> Result<Self, Self::Error> {
        NormBBox::new(x, y, w, h).ok_or_else(|| format!("bbox [{x}, {y}, {w}, {h}] is not inside the unit square"))
    }
}

impl From<NormBBox> for [f64; 4] {
    fn from(b: NormBBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

/// Converts raw strokes to a stroke-5 sequence.
pub fn normalize_strokes(strokes: &[RawStroke], canvas: Canvas) -> Result<Stroke5Sequence, StrokeError> {
    canvas.check()?;
    if strokes.is_empty() || strokes.iter().any(RawStroke::is_empty) {
        return Err(StrokeError::EmptyInput);
    }
    let scale = canvas.scale();
    let mut points = Vec::with_capacity(strokes.iter().map(RawStroke::len).sum());
    let mut prev = Point::new(0.0, 0.0);
    for stroke in strokes {
        let last = stroke.points.len() - 1;
        for (i, &raw) in stroke.points.iter().enumerate() {
            let p = canvas.clamp(raw)?;
            points.push(Stroke5Point {
                dx: (p.x - prev.x) / scale,
                dy: (p.y - prev.y) / scale,
                pen: if i == last { PenState::Up } else { PenState::Down },
            });
            prev = p;
        }
    }
    if let Some(p) = points.last_mut() {
        p.pen = PenState::Done;
    }
    Ok(Stroke5Sequence { points, canvas })
}

/// Tightest box around every point, as fractions of the canvas.
pub fn bbox_of(strokes: &[RawStroke], canvas: Canvas) -> Result<NormBBox, StrokeError> {
    canvas.check()?;
    let mut pts = strokes.iter().flat_map(|s| s.points.iter().copied()).peekable();
    if pts.peek().is_none() {
        return Err(StrokeError::EmptyInput);
    }
    let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
    let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for raw in pts {
        let p = canvas.clamp(raw)?;
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let (w, h) = (f64::from(canvas.width), f64::from(canvas.height));
    Ok(NormBBox {
        x: x0 / w,
        y: y0 / h,
        w: (x1 - x0) / w,
        h: (y1 - y0) / h,
    })
}

pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Resamples a polyline to `n` points equally spaced along its arc length.
pub fn resample_stroke(points: &[Point], n: usize) -> Result<Vec<Point>, StrokeError> {
    if n < 2 {
        return Err(StrokeError::InvalidCount(n));
    }
    if points.is_empty() {
        return Err(StrokeError::EmptyInput);
    }
    let out = resample_path(std::slice::from_ref(&points.to_vec()), n);
    out.ok_or(StrokeError::DegenerateStroke)
}

/// Resamples several strokes as one path whose pen-up jumps have zero
/// length. Returns `None` when the total drawn length is zero.
pub(crate) fn resample_path(strokes: &[Vec<Point>], n: usize) -> Option<Vec<Point>> {
    // Segments with positive length, and the cumulative length at each end.
    let mut segments = Vec::new();
    let mut cumulative = Vec::new();
    let mut total = 0.0;
    for stroke in strokes {
        for w in stroke.windows(2) {
            let len = w[0].distance(w[1]);
            if len > 0.0 {
                total += len;
                segments.push((w[0], w[1], len));
                cumulative.push(total);
            }
        }
    }
    if total <= 0.0 || n < 2 {
        return None;
    }
    let first = segments[0].0;
    let last = segments[segments.len() - 1].1;
    let mut out = Vec::with_capacity(n);
    out.push(first);
    let mut seg = 0;
    for k in 1..n - 1 {
        let target = total * k as f64 / (n - 1) as f64;
        while seg + 1 < segments.len() && cumulative[seg] < target {
            seg += 1;
        }
        let (a, b, len) = segments[seg];
        let start = cumulative[seg] - len;
        let t = ((target - start) / len).clamp(0.0, 1.0);
        out.push(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
    }
    out.push(last);
    Some(out)
}

/// On-disk sketch stroke document: `{"canvas": [w, h], "strokes": [[[x, y], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeFile {
    pub canvas: Canvas,
    pub strokes: Vec<RawStroke>,
}
