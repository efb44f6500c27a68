//! Sketch-based search over app screens.
//!
//! Hand-drawn doodles are recognized into UI element classes, placed on a
//! coarse tile grid, and scored against an inverted index of screen layouts.

pub mod classes;
pub mod doodle_eval;
pub mod eval;
pub mod grid;
pub mod index;
pub mod query;
pub mod recognizer;
pub mod scorer;
pub mod screen;
pub mod stroke;
pub mod synth;
pub mod tuner;

pub use classes::{DoodleClass, ElementClass, UnknownClass};
pub use doodle_eval::{eval_recognizer, LabeledDoodle, RecognizerReport};
pub use eval::{evaluate_search, EvalError, EvalPair, EvalSummary};
pub use grid::{TileCoverage, TileSet, TILE_COLS, TILE_COUNT, TILE_ROWS};
pub use index::{build_index, load_index, save_index, BuildReport, IndexError, ScreenIndex};
pub use query::{QueryError, Sketch, SketchElement};
pub use recognizer::{Prediction, RecognizeError, Recognizer, TemplateRecognizer, TemplateSet};
pub use scorer::{score_screens, Hyperparams, ScoreError, ScoredScreen};
pub use screen::{filter_screen, FilterVerdict, LabelFixRule, RejectReason, ScreenDoc, ScreenElement};
pub use stroke::{Canvas, NormBBox, Point, RawStroke, Stroke5Sequence, StrokeError};
pub use synth::{generate_synthetic_corpus, CorpusManifest, RarityProfile, SyntheticCorpus};
pub use tuner::{grid_search, GridSpec, TuneError, TuneReport};
